"""Box-constrained CMA-ES with restarts and increasing population size.

Search runs in the unit cube: candidates are sampled from N(m, sigma^2 C),
clamped into [0, 1]^n, evaluated at the clamped point, and ranked by the
objective plus a quadratic penalty on the clamp distance. The distribution
is updated from the unclamped samples. Strategy constants follow the
standard defaults of Hansen's CMA-ES tutorial.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import NonFiniteObjective


@dataclass(frozen=True, eq=False)
class BoxConstraint:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=np.float64).ravel()
        upper = np.array(self.upper, dtype=np.float64).ravel()
        if lower.shape != upper.shape or lower.size == 0:
            raise ValueError("lower and upper must be nonempty vectors of equal length")
        if not (np.isfinite(lower).all() and np.isfinite(upper).all()):
            raise ValueError("box bounds must be finite")
        if not (lower < upper).all():
            bad = np.flatnonzero(lower >= upper)
            raise ValueError(f"box needs lower < upper in every coordinate; violated at {bad.tolist()}")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self):
        return self.lower.size

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    def contains(self, x):
        x = np.asarray(x)
        return bool(((x >= self.lower) & (x <= self.upper)).all())

    def __eq__(self, other):
        return (isinstance(other, BoxConstraint)
                and np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))

    def __repr__(self):
        return f"BoxConstraint(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


def normalize(x, box):
    return (np.asarray(x, dtype=np.float64) - box.lower) / (box.upper - box.lower)


def denormalize(z, box):
    return box.lower + np.asarray(z, dtype=np.float64) * (box.upper - box.lower)


def repair_and_penalize(z, c_pen=1.0):
    """Clamp ``z`` into the unit cube; penalty is c_pen * ||z - clamp(z)||^2.

    Works row-wise on a 2-D array of candidates.
    """
    z = np.asarray(z, dtype=np.float64)
    feasible = np.clip(z, 0.0, 1.0)
    penalty = c_pen * np.sum((z - feasible) ** 2, axis=-1)
    return feasible, penalty


@dataclass(frozen=True)
class CmaConfig:
    """Settings of the restarted CMA-ES.

    ``sigma0`` and ``mean0`` are in normalized [0, 1] coordinates; ``mean0``
    of None starts the first run at the box center. The penalty coefficient
    of each run is ``penalty_scale`` times the median objective magnitude of
    its first generation.
    """

    lambda0: int = 12
    lambda_max: int = 128
    sigma0: float = 0.3
    mean0: tuple | None = None
    max_evals: int = 500_000
    tol_fun: float = 1e-10
    tol_x: float = 1e-11
    seed: int = 0
    penalty_scale: float = 1e4

    def __post_init__(self):
        if not 4 <= self.lambda0 <= self.lambda_max:
            raise ValueError(f"need 4 <= lambda0 <= lambda_max, got {self.lambda0}, {self.lambda_max}")
        if not 0 < self.sigma0 <= 1:
            raise ValueError(f"sigma0 must lie in (0, 1], got {self.sigma0}")
        if not self.max_evals > 0:
            raise ValueError("max_evals must be positive")
        if not (self.tol_fun >= 0 and self.tol_x >= 0 and self.penalty_scale > 0):
            raise ValueError("tolerances must be non-negative and penalty_scale positive")
        if self.mean0 is not None:
            mean0 = tuple(float(v) for v in self.mean0)
            if any(not 0 <= v <= 1 for v in mean0):
                raise ValueError("mean0 must lie in the unit cube")
            object.__setattr__(self, "mean0", mean0)

    def to_dict(self):
        return {
            "lambda0": self.lambda0, "lambda_max": self.lambda_max, "sigma0": self.sigma0,
            "mean0": None if self.mean0 is None else list(self.mean0),
            "max_evals": self.max_evals, "tol_fun": self.tol_fun, "tol_x": self.tol_x,
            "seed": self.seed, "penalty_scale": self.penalty_scale,
        }


class HistoryRow(NamedTuple):
    iteration: int
    evals: int
    lam: int
    best_f: float
    best_ever_f: float
    restart: int


class RunRecord(NamedTuple):
    x_best: np.ndarray
    f_best: float
    termination: str
    lam: int
    evals: int
    iterations: int


@dataclass
class OptResult:
    x_best: np.ndarray
    f_best: float
    evals_used: int
    history: list = field(default_factory=list)
    runs: list = field(default_factory=list)

    @property
    def lambdas(self):
        return [run.lam for run in self.runs]

    def write_history_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "evals", "lambda", "best_f", "best_ever_f", "restart_index"])
            for row in self.history:
                writer.writerow([row.iteration, row.evals, row.lam, repr(row.best_f),
                                 repr(row.best_ever_f), row.restart])


class _Strategy:
    """Static strategy parameters for dimension n and population lam."""

    def __init__(self, n, lam):
        self.n = n
        self.lam = lam
        self.mu = lam // 2
        w = math.log(self.mu + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mueff = 1.0 / np.sum(self.weights**2)
        self.cs = (self.mueff + 2) / (n + self.mueff + 5)
        self.ds = 1 + 2 * max(0.0, math.sqrt((self.mueff - 1) / (n + 1)) - 1) + self.cs
        self.cc = (4 + self.mueff / n) / (n + 4 + 2 * self.mueff / n)
        self.c1 = 2 / ((n + 1.3) ** 2 + self.mueff)
        self.cmu = min(1 - self.c1, 2 * (self.mueff - 2 + 1 / self.mueff) / ((n + 2) ** 2 + self.mueff))
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n**2))
        self.stall_window = 10 + math.ceil(30 * n / lam)


def _evaluate(f, x_rows):
    values = np.empty(len(x_rows))
    for i, x in enumerate(x_rows):
        values[i] = f(x)
    if not np.isfinite(values).all():
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise NonFiniteObjective(
            f"objective returned {values[bad]!r} at x={x_rows[bad].tolist()}")
    return values


def cmaes_run(f, box, config, lam, *, mean=None, rng=None, max_evals=None,
              restart_index=0, history=None, evals_offset=0, iteration_offset=0,
              best_ever=math.inf):
    """Single CMA-ES run from ``mean`` (normalized) with population ``lam``.

    Returns a RunRecord whose ``x_best`` is the best evaluated (repaired)
    point of the run, in original coordinates. Stops on ``tol_fun``
    stagnation, ``tol_x``, a degenerate covariance, or the evaluation budget.
    """
    n = box.dim
    st = _Strategy(n, lam)
    rng = np.random.default_rng(config.seed) if rng is None else rng
    budget = config.max_evals if max_evals is None else max_evals
    if mean is None:
        mean = np.full(n, 0.5) if config.mean0 is None else np.array(config.mean0)
    mean = np.array(mean, dtype=np.float64)
    if mean.shape != (n,):
        raise ValueError(f"mean must have length {n}")

    sigma = config.sigma0
    b = np.eye(n)
    d = np.ones(n)
    c = np.eye(n)
    ps = np.zeros(n)
    pc = np.zeros(n)
    c_pen = None
    evals = 0
    it = 0
    x_best, f_best = None, math.inf
    recent = []
    termination = "max_evals"

    while evals + lam <= budget:
        y = rng.standard_normal((lam, n)) @ (b * d).T
        z = mean + sigma * y
        z_feasible, dist = repair_and_penalize(z)
        x = np.clip(denormalize(z_feasible, box), box.lower, box.upper)
        fx = _evaluate(f, x)
        evals += lam
        it += 1
        if c_pen is None:
            scale = float(np.median(np.abs(fx)))
            c_pen = config.penalty_scale * (scale if scale > 0 else 1.0)
        fit = fx + c_pen * dist
        order = np.argsort(fit, kind="stable")

        i_min = int(np.argmin(fx))
        if fx[i_min] < f_best:
            f_best, x_best = float(fx[i_min]), x[i_min].copy()
        best_ever = min(best_ever, f_best)
        if history is not None:
            history.append(HistoryRow(iteration_offset + it, evals_offset + evals, lam,
                                      float(fit[order[0]]), best_ever, restart_index))

        y_sel = y[order[: st.mu]]
        y_w = st.weights @ y_sel
        mean = mean + sigma * y_w
        inv_sqrt_y = b @ ((b.T @ y_w) / d)
        ps = (1 - st.cs) * ps + math.sqrt(st.cs * (2 - st.cs) * st.mueff) * inv_sqrt_y
        ps_norm = np.linalg.norm(ps)
        hsig = ps_norm / math.sqrt(1 - (1 - st.cs) ** (2 * it)) < (1.4 + 2 / (n + 1)) * st.chi_n
        pc = (1 - st.cc) * pc + hsig * math.sqrt(st.cc * (2 - st.cc) * st.mueff) * y_w
        rank_mu = (y_sel * st.weights[:, None]).T @ y_sel
        c = ((1 - st.c1 - st.cmu + (1 - hsig) * st.c1 * st.cc * (2 - st.cc)) * c
             + st.c1 * np.outer(pc, pc) + st.cmu * rank_mu)
        sigma *= math.exp((st.cs / st.ds) * (ps_norm / st.chi_n - 1))

        c = np.triu(c) + np.triu(c, 1).T
        eigval, b = np.linalg.eigh(c)
        if not (np.isfinite(eigval).all() and eigval.min() > 0 and math.isfinite(sigma) and sigma > 0):
            termination = "degenerate_covariance"
            break
        d = np.sqrt(eigval)

        recent.append(float(fit[order[0]]))
        if len(recent) > st.stall_window:
            recent.pop(0)
        if len(recent) == st.stall_window:
            spread = max(max(recent), float(fit.max())) - min(recent)
            if spread <= config.tol_fun * abs(f_best) or spread == 0:
                termination = "tol_fun"
                break
        if (sigma * np.sqrt(np.diag(c)).max() < config.tol_x
                and (sigma * np.abs(pc)).max() < config.tol_x):
            termination = "tol_x"
            break
        if eigval.max() > 1e14 * eigval.min():
            termination = "condition"
            break

    if x_best is None:
        termination = "max_evals"
    return RunRecord(x_best, f_best, termination, lam, evals, it)


def cmaes_minimize_with_restarts(f, box, config):
    """Restarted CMA-ES with population doubling up to ``lambda_max``.

    The first run starts at ``config.mean0`` (box center by default); every
    restart draws a uniform random mean in the box and resets sigma. Runs
    continue until the evaluation budget cannot cover another generation.
    """
    rng = np.random.default_rng(config.seed)
    n = box.dim
    lam = config.lambda0
    mean = None
    history = []
    runs = []
    evals = 0
    iterations = 0
    x_best, f_best = None, math.inf

    while config.max_evals - evals >= lam:
        run = cmaes_run(f, box, config, lam, mean=mean, rng=rng,
                        max_evals=config.max_evals - evals, restart_index=len(runs),
                        history=history, evals_offset=evals, iteration_offset=iterations,
                        best_ever=f_best)
        if run.evals == 0:
            break
        runs.append(run)
        evals += run.evals
        iterations += run.iterations
        if run.f_best < f_best:
            x_best, f_best = run.x_best, run.f_best
        if run.termination == "max_evals":
            break
        lam = min(2 * lam, config.lambda_max)
        mean = rng.uniform(0.0, 1.0, n)

    if x_best is None:
        raise ValueError(f"evaluation budget {config.max_evals} is smaller than one generation")
    return OptResult(np.asarray(x_best), f_best, evals, history, runs)
