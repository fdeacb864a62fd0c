"""Input checks shared by the tuning API and the estimator."""

import math

import numpy as np

from .trials import Trial


def check_trials(trials, *, allow_empty=False, name="trials"):
    """Return ``trials`` as a tuple after checking types and a common time step."""
    if isinstance(trials, Trial):
        trials = (trials,)
    trials = tuple(trials)
    if not trials and not allow_empty:
        raise ValueError(f"{name} must not be empty")
    for t in trials:
        if not isinstance(t, Trial):
            raise TypeError(f"{name} must contain Trial objects, got {type(t).__name__}")
    steps = {t.dt for t in trials}
    if len(steps) > 1:
        raise ValueError(f"{name} mix time steps {sorted(steps)}; resample to one dt first")
    return trials


def check_weights(weights):
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.shape != (3,):
        raise ValueError(f"weights must have 3 entries (p1, p2, psi), got {w.shape[0]}")
    if not np.isfinite(w).all() or (w < 0).any() or not w.any():
        raise ValueError(f"weights must be finite, non-negative and not all zero, got {w.tolist()}")
    return w


def check_a_r(a_r):
    a_r = float(a_r)
    if not (math.isfinite(a_r) and a_r > 0):
        raise ValueError(f"a_r must be positive, got {a_r}")
    return a_r
