import math

import numpy as np
import pytest

from mmgtune.exceptions import NonFiniteObjective
from mmgtune.optimizer import (BoxConstraint, CmaConfig, cmaes_minimize_with_restarts, cmaes_run,
                               denormalize, normalize, repair_and_penalize)

UNIT12 = BoxConstraint(np.zeros(12), np.ones(12))


def sphere(center):
    return lambda x: float(np.sum((x - center) ** 2))


def rastrigin(x):
    return float(10 * x.size + np.sum(x**2 - 10 * np.cos(2 * np.pi * x)))


def test_box_validation():
    with pytest.raises(ValueError):
        BoxConstraint([0, 1], [1, 1])
    with pytest.raises(ValueError):
        BoxConstraint([0], [1, 2])
    assert BoxConstraint([0, 0], [1, 2]) == BoxConstraint([0.0, 0.0], [1.0, 2.0])


def test_normalize_examples_and_round_trip():
    box = BoxConstraint([-2.0, 0.1], [4.0, 0.3])
    assert np.array_equal(normalize(box.lower, box), [0, 0])
    assert np.allclose(normalize(box.center, box), [0.5, 0.5])
    x = np.array([1.3, 0.17])
    assert np.allclose(denormalize(normalize(x, box), box), x, rtol=1e-15)


def test_repair_examples():
    z, pen = repair_and_penalize(np.array([0.2, 0.5, 0.9]), c_pen=3.0)
    assert np.array_equal(z, [0.2, 0.5, 0.9]) and pen == 0.0
    z, pen = repair_and_penalize(np.array([1.2, 0.5]), c_pen=3.0)
    assert np.array_equal(z, [1.0, 0.5])
    assert pen == pytest.approx(3.0 * 0.04)


def test_sphere_12d_converges():
    res = cmaes_minimize_with_restarts(sphere(0.3), UNIT12, CmaConfig(max_evals=20_000, seed=1))
    assert res.f_best < 1e-10
    assert res.evals_used <= 20_000


def test_boundary_optimum_lands_on_upper_bound():
    res = cmaes_minimize_with_restarts(sphere(1.2), UNIT12, CmaConfig(max_evals=20_000, seed=2))
    assert np.all(np.abs(res.x_best - 1.0) <= 1e-6)


def test_rosenbrock_with_restarts():
    def rosen(x):
        return float(np.sum(100 * (x[1:] - x[:-1] ** 2) ** 2 + (1 - x[:-1]) ** 2))
    box = BoxConstraint(-2 * np.ones(12), 2 * np.ones(12))
    res = cmaes_minimize_with_restarts(rosen, box, CmaConfig(max_evals=200_000, seed=0))
    assert res.f_best < 1e-6


def test_population_schedule():
    # every run stalls in a local minimum and triggers a restart
    res = cmaes_minimize_with_restarts(rastrigin, BoxConstraint(-5 * np.ones(3), 5 * np.ones(3)),
                                       CmaConfig(max_evals=60_000, seed=0))
    assert res.lambdas[:7] == [12, 24, 48, 96, 128, 128, 128]


def test_best_ever_is_monotone_and_budget_respected():
    res = cmaes_minimize_with_restarts(rastrigin, BoxConstraint(-5 * np.ones(6), 5 * np.ones(6)),
                                       CmaConfig(max_evals=15_000, seed=3))
    best = [row.best_ever_f for row in res.history]
    assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
    assert best[-1] == res.f_best
    assert res.evals_used <= 15_000
    assert res.history[-1].evals == res.evals_used


def test_restarts_beat_single_run_on_rastrigin():
    box = BoxConstraint(-5 * np.ones(6), 5 * np.ones(6))
    wins = 0
    for seed in range(5):
        cfg = CmaConfig(max_evals=30_000, seed=seed)
        single = cmaes_run(rastrigin, box, cfg, 12, rng=np.random.default_rng(seed))
        multi = cmaes_minimize_with_restarts(rastrigin, box, cfg)
        wins += multi.f_best <= single.f_best
    assert wins == 5


def test_small_budget_equals_single_run():
    cfg = CmaConfig(max_evals=120, seed=4)
    res = cmaes_minimize_with_restarts(sphere(0.3), UNIT12, cfg)
    single = cmaes_run(sphere(0.3), UNIT12, cfg, 12, rng=np.random.default_rng(4))
    assert len(res.runs) == 1
    assert res.f_best == single.f_best
    assert np.array_equal(res.x_best, single.x_best)


def test_deterministic_for_fixed_seed():
    cfg = CmaConfig(max_evals=3_000, seed=11)
    a = cmaes_minimize_with_restarts(rastrigin, BoxConstraint(-5 * np.ones(4), 5 * np.ones(4)), cfg)
    b = cmaes_minimize_with_restarts(rastrigin, BoxConstraint(-5 * np.ones(4), 5 * np.ones(4)), cfg)
    assert np.array_equal(a.x_best, b.x_best) and a.history == b.history


def test_every_evaluated_point_is_inside_the_box():
    box = BoxConstraint([-1.0, 2.0, 0.0], [0.0, 3.0, 1e-3])
    seen = []

    def f(x):
        seen.append(np.array(x))
        return float(np.sum((x - np.array([5.0, -5.0, 0.5])) ** 2))

    res = cmaes_minimize_with_restarts(f, box, CmaConfig(max_evals=2_000, seed=0))
    assert all(box.contains(x) for x in seen)
    assert box.contains(res.x_best)


def test_budget_smaller_than_generation_is_rejected():
    with pytest.raises(ValueError):
        cmaes_minimize_with_restarts(sphere(0.3), UNIT12, CmaConfig(max_evals=5))


def test_non_finite_objective_raises():
    with pytest.raises(NonFiniteObjective):
        cmaes_minimize_with_restarts(lambda x: math.nan, UNIT12, CmaConfig(max_evals=100))


def test_config_validation():
    with pytest.raises(ValueError):
        CmaConfig(lambda0=2)
    with pytest.raises(ValueError):
        CmaConfig(sigma0=0.0)
    with pytest.raises(ValueError):
        CmaConfig(mean0=(1.5,))


def test_history_csv(tmp_path):
    res = cmaes_minimize_with_restarts(sphere(0.3), UNIT12, CmaConfig(max_evals=600))
    path = tmp_path / "h.csv"
    res.write_history_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,evals,lambda,best_f,best_ever_f,restart_index"
    assert len(lines) == len(res.history) + 1
