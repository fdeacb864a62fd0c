"""Fine-tuning of selected MMG coefficients against recorded trials.

The tuning problem minimizes the weighted squared pose deviation between
Euler rollouts and recorded trials over a box centred on the pre-determined
coefficient values, using restarted CMA-ES.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import dynamics, mmg
from .exceptions import DegenerateBox, SimulationAborted, UnknownParameter
from .mmg import MmgParams, ShipParticulars
from .optimizer import BoxConstraint, CmaConfig, cmaes_minimize_with_restarts
from .validation import check_a_r, check_trials, check_weights

DEFAULT_TARGETS = (
    "r0", "t_p", "w_p0", "c_w", "t_r", "a_h", "x_h", "epsilon", "kappa", "l_r", "gamma_rp", "gamma_rn",
)

# Objective value assigned to candidates whose rollout aborts.
FAILED_ROLLOUT_COST = 1e30


def default_weights(ship):
    return (ship.lpp, ship.lpp, 0.25 * math.pi)


@dataclass(frozen=True)
class ParamSelector:
    names: tuple = DEFAULT_TARGETS

    def __post_init__(self):
        names = tuple(self.names)
        if not names:
            raise ValueError("selector needs at least one parameter")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names in selector: {names}")
        unknown = [n for n in names if n not in mmg.PARAM_FIELDS]
        if unknown:
            raise UnknownParameter(f"not tunable MMG coefficient(s): {unknown}")
        object.__setattr__(self, "names", names)

    def __len__(self):
        return len(self.names)

    @property
    def indices(self):
        return np.array([mmg.PARAM_FIELDS.index(n) for n in self.names])

    def values(self, params):
        return np.array([getattr(params, n) for n in self.names], dtype=np.float64)


def exploration_box(theta_pre, a_r):
    """Per-coordinate interval theta_pre +- a_r * |theta_pre|."""
    a_r = check_a_r(a_r)
    theta_pre = np.asarray(theta_pre, dtype=np.float64).ravel()
    zero = np.flatnonzero(theta_pre == 0)
    if zero.size:
        raise DegenerateBox(f"pre-determined value is zero at position(s) {zero.tolist()}; box would be empty")
    half = a_r * np.abs(theta_pre)
    return BoxConstraint(theta_pre - half, theta_pre + half)


def apply_candidate(base, selector, x):
    """Copy of ``base`` with the selected coefficients replaced by ``x``."""
    if not isinstance(selector, ParamSelector):
        selector = ParamSelector(tuple(selector))
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != len(selector):
        raise ValueError(f"candidate has {x.size} values for {len(selector)} parameters")
    return replace(base, **{n: float(v) for n, v in zip(selector.names, x)})


@dataclass(frozen=True)
class TuningSpec:
    selector: ParamSelector = field(default_factory=ParamSelector)
    a_r: float = 0.2
    weight_q: tuple = None
    tune_set: tuple = ()
    test_set: tuple = ()
    cma: CmaConfig = field(default_factory=CmaConfig)

    def __post_init__(self):
        if not isinstance(self.selector, ParamSelector):
            object.__setattr__(self, "selector", ParamSelector(tuple(self.selector)))
        object.__setattr__(self, "a_r", check_a_r(self.a_r))
        if self.weight_q is not None:
            object.__setattr__(self, "weight_q", tuple(check_weights(self.weight_q)))
        object.__setattr__(self, "tune_set", check_trials(self.tune_set, allow_empty=True, name="tune_set"))
        object.__setattr__(self, "test_set", check_trials(self.test_set, allow_empty=True, name="test_set"))

    def weights_for(self, ship):
        return np.array(self.weight_q if self.weight_q is not None else default_weights(ship))

    def validate(self, base):
        exploration_box(self.selector.values(base), self.a_r)


class TrajectoryObjective:
    """J(x) summed over trials for candidate vectors of the selected coefficients.

    Rollouts that leave the forward regime or blow up score
    FAILED_ROLLOUT_COST so the optimizer ranks them last.
    """

    def __init__(self, trials, selector, base, ship, weight_q):
        self.trials = check_trials(trials)
        self.selector = selector if isinstance(selector, ParamSelector) else ParamSelector(tuple(selector))
        self.weights = check_weights(weight_q)
        self._base = base.to_vector()
        self._idx = self.selector.indices
        self._ship = ship.to_vector()
        self._flap = base.flap_arrays()
        self._data = [(np.ascontiguousarray(t.data[:, :6]), np.ascontiguousarray(t.data[:, 6:]), t.dt)
                      for t in self.trials]

    def per_trial(self, x):
        """List of (cost, status, row) for each trial; cost is partial on failure."""
        p = self._base.copy()
        p[self._idx] = x
        w1, w2, w3 = self.weights
        return [mmg._trial_cost(states, controls, p, self._ship, *self._flap, dt, w1, w2, w3)
                for states, controls, dt in self._data]

    def __call__(self, x):
        total = 0.0
        for cost, status, _ in self.per_trial(x):
            if status != mmg.STATUS_OK or not math.isfinite(cost):
                return FAILED_ROLLOUT_COST
            total += cost
        return total


def objective_j(x, spec, trials, base, ship):
    return TrajectoryObjective(trials, spec.selector, base, ship, spec.weights_for(ship))(x)


@dataclass
class Evaluation:
    per_trial: dict
    total: float
    trajectories: dict
    failures: dict


def replay(params, trial, ship):
    """Simulate ``trial`` from its first recorded state under its recorded controls."""
    zeta0 = trial.data[0, :6]
    return dynamics.simulate(zeta0, trial.controls, params, ship, trial.dt)


def evaluate(theta, trials, weight_q, ship):
    """Per-trial and total J of ``theta`` plus the simulated trajectories.

    A rollout that aborts is reported with J = inf and its failure message.
    """
    trials = check_trials(trials)
    w = check_weights(weight_q)
    per_trial, trajectories, failures = {}, {}, {}
    for trial in trials:
        try:
            traj = replay(theta, trial, ship)
        except SimulationAborted as exc:
            per_trial[trial.label] = math.inf
            trajectories[trial.label] = None
            failures[trial.label] = str(exc)
            continue
        dev = traj.states[1:, :3] - trial.data[1:, :3]
        per_trial[trial.label] = float(np.sum(dev * dev * w))
        trajectories[trial.label] = traj
    return Evaluation(per_trial, float(sum(per_trial.values())), trajectories, failures)


def _objective_breakdown(objective, x):
    out = {}
    for trial, (cost, status, _) in zip(objective.trials, objective.per_trial(x)):
        out[trial.label] = float(cost) if status == mmg.STATUS_OK else math.inf
    return out


@dataclass
class TuningReport:
    selector: tuple
    a_r: float
    weight_q: tuple
    cma: dict
    theta_pre: dict
    theta_star: dict
    box: dict
    j_tune_pre: float
    j_tune_star: float
    tune_pre: dict
    tune_star: dict
    j_test_pre: float | None
    j_test_star: float | None
    test_pre: dict
    test_star: dict
    evals_used: int
    runs: list
    optimizer: object = field(repr=False, default=None)
    wall_clock_s: float = 0.0

    @property
    def tune_only(self):
        return self.j_test_pre is None

    def to_dict(self, history_file=None):
        return {
            "spec": {
                "selector": list(self.selector),
                "a_r": self.a_r,
                "weight_q": list(self.weight_q),
                "cma": self.cma,
            },
            "theta_pre": self.theta_pre,
            "theta_star": self.theta_star,
            "box": self.box,
            "tune": {"J_pre": self.j_tune_pre, "J_star": self.j_tune_star,
                     "per_trial_pre": self.tune_pre, "per_trial_star": self.tune_star},
            "test": None if self.tune_only else {
                "J_pre": self.j_test_pre, "J_star": self.j_test_star,
                "per_trial_pre": self.test_pre, "per_trial_star": self.test_star},
            "tune_only": self.tune_only,
            "optimizer": {"evals_used": self.evals_used, "runs": self.runs,
                          "history_file": history_file},
            "seed": self.cma["seed"],
            "timing": {"wall_clock_s": self.wall_clock_s},
        }


def tune(spec, base, ship):
    """Minimize J over the exploration box; returns (tuned params, TuningReport).

    The pre-determined point is the box center and the first search mean;
    if no sampled candidate beats it, it is returned unchanged.
    """
    started = time.perf_counter()
    if not spec.tune_set:
        raise ValueError("tune_set must not be empty")
    selector = spec.selector
    theta_pre = selector.values(base)
    box = exploration_box(theta_pre, spec.a_r)
    weights = spec.weights_for(ship)
    objective = TrajectoryObjective(spec.tune_set, selector, base, ship, weights)

    j_pre = objective(theta_pre)
    result = cmaes_minimize_with_restarts(objective, box, spec.cma)
    x_star, j_star = result.x_best, result.f_best
    if j_pre <= j_star:
        x_star, j_star = theta_pre.copy(), j_pre
    theta_star = apply_candidate(base, selector, x_star)

    if spec.test_set:
        test_obj = TrajectoryObjective(spec.test_set, selector, base, ship, weights)
        test_pre, test_star = _objective_breakdown(test_obj, theta_pre), _objective_breakdown(test_obj, x_star)
        j_test_pre, j_test_star = sum(test_pre.values()), sum(test_star.values())
    else:
        test_pre, test_star, j_test_pre, j_test_star = {}, {}, None, None

    report = TuningReport(
        selector=selector.names,
        a_r=spec.a_r,
        weight_q=tuple(float(w) for w in weights),
        cma=spec.cma.to_dict(),
        theta_pre=dict(zip(selector.names, theta_pre.tolist())),
        theta_star=dict(zip(selector.names, x_star.tolist())),
        box={"lower": box.lower.tolist(), "upper": box.upper.tolist()},
        j_tune_pre=j_pre,
        j_tune_star=j_star,
        tune_pre=_objective_breakdown(objective, theta_pre),
        tune_star=_objective_breakdown(objective, x_star),
        j_test_pre=j_test_pre,
        j_test_star=j_test_star,
        test_pre=test_pre,
        test_star=test_star,
        evals_used=result.evals_used,
        runs=[{"lambda": r.lam, "evals": r.evals, "iterations": r.iterations,
               "f_best": r.f_best, "termination": r.termination} for r in result.runs],
        optimizer=result,
        wall_clock_s=time.perf_counter() - started,
    )
    return theta_star, report


class MMGParameterTuner(BaseEstimator):
    """Estimator wrapper: ``fit`` tunes coefficients on a list of trials.

    ``predict`` replays trials under the tuned coefficients and returns the
    simulated trajectories; ``score`` is the negated J so that larger is
    better, matching scikit-learn conventions.
    """

    def __init__(self, targets=DEFAULT_TARGETS, a_r=0.2, weights=None, base_params=None, ship=None,
                 lambda0=12, lambda_max=128, sigma0=0.3, max_evals=500_000, tol_fun=1e-10,
                 tol_x=1e-11, penalty_scale=1e4, random_state=0):
        self.targets = targets
        self.a_r = a_r
        self.weights = weights
        self.base_params = base_params
        self.ship = ship
        self.lambda0 = lambda0
        self.lambda_max = lambda_max
        self.sigma0 = sigma0
        self.max_evals = max_evals
        self.tol_fun = tol_fun
        self.tol_x = tol_x
        self.penalty_scale = penalty_scale
        self.random_state = random_state

    def _base(self):
        return self.base_params if self.base_params is not None else MmgParams()

    def _ship(self):
        return self.ship if self.ship is not None else ShipParticulars()

    def _weights(self):
        return check_weights(self.weights if self.weights is not None else default_weights(self._ship()))

    def fit(self, X, y=None):
        trials = check_trials(X)
        cma = CmaConfig(lambda0=self.lambda0, lambda_max=self.lambda_max, sigma0=self.sigma0,
                        max_evals=self.max_evals, tol_fun=self.tol_fun, tol_x=self.tol_x,
                        seed=self.random_state, penalty_scale=self.penalty_scale)
        spec = TuningSpec(ParamSelector(tuple(self.targets)), self.a_r, tuple(self._weights()),
                          trials, (), cma)
        base = self._base()
        spec.validate(base)
        self.params_, self.report_ = tune(spec, base, self._ship())
        self.theta_ = spec.selector.values(self.params_)
        self.box_ = exploration_box(spec.selector.values(base), self.a_r)
        self.opt_result_ = self.report_.optimizer
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        return [replay(self.params_, t, self._ship()) for t in check_trials(X)]

    def objective(self, X):
        """Total J of the tuned coefficients on ``X``."""
        check_is_fitted(self, "params_")
        return evaluate(self.params_, check_trials(X), self._weights(), self._ship()).total

    def score(self, X, y=None):
        return -self.objective(X)
