"""Acceptance checks, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary and when this file is run as a script.
"""

import math
import time

import numpy as np
import pytest

import oracle
from mmgtune import dynamics, mmg, trials as td, tuning
from mmgtune.mmg import MmgParams, ShipParticulars, State
from mmgtune.optimizer import BoxConstraint, CmaConfig, cmaes_minimize_with_restarts
from mmgtune.tuning import ParamSelector, TuningSpec

SHIP = ShipParticulars()
PRE = MmgParams()
SEL = ParamSelector()
N_106 = 106 / 60

RESULTS = {}
THETA_STARS = []  # (a_r, theta*) of every tuning run, for the containment check

RECOVERY_EVALS = 6000
SWEEP = (0.2, 0.3, 0.4, 0.5, 0.6)
SWEEP_SEEDS = (0, 1, 2)
SWEEP_EVALS = 4000


def record(n, ok, detail):
    RESULTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, RESULTS[n]


def _tuned(spec):
    theta_star, report = tuning.tune(spec, PRE, SHIP)
    THETA_STARS.append((spec.a_r, SEL.values(theta_star)))
    return theta_star, report


def test_c01_parameter_table_parity():
    bad = [k for k, v in oracle.ALL_PARAMS.items() if getattr(PRE, k) != float(v)]
    bad += [k for k, v in oracle.PARTICULARS.items() if getattr(SHIP, k) != float(v)]
    record(1, not bad, f"{len(oracle.ALL_PARAMS) + len(oracle.PARTICULARS)} constants compared, mismatches={bad}")


def test_c02_polynomial_oracle():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    pairs = [
        (mmg.thrust_coefficient, oracle.k_t, rng.uniform(-10, 60, 1000)),
        (mmg.propeller_sway_coefficient, oracle.c_py, rng.uniform(-10, 60, 1000)),
        (mmg.propeller_yaw_coefficient, oracle.c_pn, rng.uniform(-10, 60, 1000)),
        (lambda d: mmg.rudder_lift_slope(d, PRE), oracle.f_alpha, rng.uniform(-0.8, 0.8, 1000)),
        (lambda d: mmg.rudder_zero_lift(d, PRE), oracle.c_l0, rng.uniform(-0.8, 0.8, 1000)),
    ]
    for got, ref, xs in pairs:
        for x in xs:
            exact = float(ref(x))
            worst = max(worst, abs(got(x) - exact) / max(abs(exact), 1e-300))
    elapsed = time.perf_counter() - start
    record(2, worst <= 1e-12, f"max relative error {worst:.2e} over 5x1000 points in {elapsed:.2f} s")


def test_c03_turning_verification():
    controls = lambda sign: dynamics.constant_controls(N_106, sign * math.radians(35), 601)
    dynamics.simulate(dynamics.initial_state(3.086), controls(1)[:3], PRE, SHIP)  # compile
    start = time.perf_counter()
    right = dynamics.turning_circle(dynamics.simulate(dynamics.initial_state(3.086), controls(1), PRE, SHIP))
    left = dynamics.turning_circle(dynamics.simulate(dynamics.initial_state(3.086), controls(-1), PRE, SHIP))
    elapsed = time.perf_counter() - start
    ok = (right.completed and left.completed and right.steady_diameter > 1.02 * left.steady_diameter
          and elapsed < 1.0)
    record(3, ok, f"right D={right.steady_diameter:.1f} m, left D={left.steady_diameter:.1f} m, "
                  f"ratio={right.steady_diameter / left.steady_diameter:.3f}, {elapsed * 1e3:.1f} ms")


def test_c04_hull_parity():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst = 0.0
    for u, v, r in zip(rng.uniform(0.1, 8, 1000), rng.uniform(-3, 3, 1000), rng.uniform(-0.1, 0.1, 1000)):
        _, vp, rp = mmg.nondimensional_velocity(State(u, v, r), SHIP)
        a = mmg.hull_force_coefficients(vp, rp, PRE)
        b = mmg.hull_force_coefficients(-vp, -rp, PRE)
        worst = max(worst, abs(a.x - b.x), abs(a.y + b.y), abs(a.n + b.n))
    elapsed = time.perf_counter() - start
    record(4, worst <= 1e-12, f"max parity defect {worst:.1e} over 1000 states in {elapsed:.2f} s")


def test_c05_optimizer_benchmarks():
    start = time.perf_counter()
    unit = BoxConstraint(np.zeros(12), np.ones(12))
    sphere = cmaes_minimize_with_restarts(lambda x: float(np.sum((x - 0.3) ** 2)), unit,
                                          CmaConfig(max_evals=20_000, seed=0))
    edge = cmaes_minimize_with_restarts(lambda x: float(np.sum((x - 1.2) ** 2)), unit,
                                        CmaConfig(max_evals=20_000, seed=0))
    rastrigin = lambda x: float(10 * x.size + np.sum(x**2 - 10 * np.cos(2 * np.pi * x)))
    sched = cmaes_minimize_with_restarts(rastrigin, BoxConstraint(-5 * np.ones(3), 5 * np.ones(3)),
                                         CmaConfig(max_evals=60_000, seed=0))
    elapsed = time.perf_counter() - start
    edge_err = float(np.max(np.abs(edge.x_best - 1.0)))
    ok = (sphere.f_best < 1e-10 and sphere.evals_used <= 20_000 and edge_err <= 1e-6
          and sched.lambdas[:5] == [12, 24, 48, 96, 128] and elapsed < 30)
    record(5, ok, f"sphere f={sphere.f_best:.1e}; boundary err={edge_err:.1e}; "
                  f"lambdas={sched.lambdas[:6]}; {elapsed:.1f} s")


@pytest.fixture(scope="module")
def recovery_problem():
    rng = np.random.default_rng(0)
    pre = SEL.values(PRE)
    theta_true = tuning.apply_candidate(PRE, SEL, pre + rng.uniform(-0.15, 0.15, pre.size) * np.abs(pre))
    suite = td.generate_suite(theta_true, SHIP, None, seed=0)
    split = td.make_split(suite)
    spec = TuningSpec(SEL, 0.2, None, split.tune, split.test, CmaConfig(max_evals=RECOVERY_EVALS, seed=0))
    return theta_true, spec


@pytest.fixture(scope="module")
def recovery_run(recovery_problem):
    _, spec = recovery_problem
    return _tuned(spec)


def test_c06_closed_loop_recovery(recovery_run):
    _, report = recovery_run
    ratio = report.j_tune_star / report.j_tune_pre
    ok = ratio <= 1e-3 and report.j_test_star < report.j_test_pre
    record(6, ok, f"J_tune {report.j_tune_pre:.3e} -> {report.j_tune_star:.3e} (ratio {ratio:.1e}); "
                  f"J_test {report.j_test_pre:.3e} -> {report.j_test_star:.3e}")


@pytest.fixture(scope="module")
def noisy_split():
    rng = np.random.default_rng(3)
    pre = SEL.values(PRE)
    theta_true = tuning.apply_candidate(PRE, SEL, pre + rng.uniform(-0.5, 0.5, pre.size) * np.abs(pre))
    return td.make_split(td.generate_suite(theta_true, SHIP, td.NoiseModel(), seed=5))


def test_c07_noisy_sweep_trend(noisy_split):
    j = np.empty((len(SWEEP_SEEDS), len(SWEEP)))
    for i, seed in enumerate(SWEEP_SEEDS):
        for k, a_r in enumerate(SWEEP):
            spec = TuningSpec(SEL, a_r, None, noisy_split.tune, noisy_split.test,
                              CmaConfig(max_evals=SWEEP_EVALS, seed=seed))
            j[i, k] = _tuned(spec)[1].j_tune_star
    spread = j.max(axis=0) - j.min(axis=0)
    passes = [bool(np.all(j[i, 1:] <= j[i, :-1] + spread[:-1])) for i in range(len(SWEEP_SEEDS))]
    median = np.median(j, axis=0)
    record(7, sum(passes) * 2 > len(passes),
           f"seeds passing {sum(passes)}/{len(passes)}; median J_tune per a_r "
           + ", ".join(f"{a}:{v:.3e}" for a, v in zip(SWEEP, median)))


def test_c08_box_containment(recovery_run):
    bad = []
    for a_r, theta in THETA_STARS:
        box = tuning.exploration_box(SEL.values(PRE), a_r)
        if not box.contains(theta):
            bad.append(a_r)
    record(8, bool(THETA_STARS) and not bad, f"{len(THETA_STARS)} tuned vectors checked, outside box: {bad}")


def test_c09_determinism(recovery_problem, recovery_run):
    from mmgtune.config import reports_equal
    _, spec = recovery_problem
    theta_a, report_a = recovery_run
    theta_b, report_b = _tuned(spec)
    same_theta = np.array_equal(SEL.values(theta_a), SEL.values(theta_b)) and theta_a == theta_b
    same_report = reports_equal(report_a.to_dict(), report_b.to_dict())
    same_history = report_a.optimizer.history == report_b.optimizer.history
    record(9, same_theta and same_report and same_history,
           f"theta identical={same_theta}, report identical={same_report}, history identical={same_history}")


def test_c10_round_trip(tmp_path, recovery_problem):
    theta_true, _ = recovery_problem
    suite = td.generate_suite(theta_true, SHIP, None, seed=0)
    noisy = td.generate_suite(theta_true, SHIP, td.NoiseModel(), seed=1)
    worst_rel, worst_j = 0.0, 0.0
    for trial in suite + noisy:
        path = tmp_path / f"{trial.label}.csv"
        td.save_trial(trial, path)
        back = td.load_trial(path)
        scale = np.maximum(np.abs(trial.data), 1.0)
        worst_rel = max(worst_rel, float(np.max(np.abs(back.data - trial.data) / scale)))
    for trial in suite:
        td.save_trial(trial, tmp_path / "one.csv")
        back = td.load_trial(tmp_path / "one.csv")
        worst_j = max(worst_j, tuning.evaluate(theta_true, [back], tuning.default_weights(SHIP), SHIP).total)
    record(10, worst_rel <= 1e-14 and worst_j <= 1e-9,
           f"max round-trip deviation {worst_rel:.1e}; max J(theta_true) after reload {worst_j:.1e}")


def summary_lines():
    return [RESULTS[k] for k in sorted(RESULTS)]


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
