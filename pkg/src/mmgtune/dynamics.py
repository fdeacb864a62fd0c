"""Forward-Euler integration of the augmented MMG state."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import mmg
from .exceptions import InvalidRegime, SimulationAborted
from .mmg import AugmentedState, ControlInput


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Simulated time series sampled every ``dt`` seconds.

    ``states`` has shape (T, 6) with columns (p1, p2, psi, u, v_m, r) and
    ``controls`` shape (T, 2) with columns (n_p [rev/s], delta [rad]). Row 0
    is the initial state; row i was reached from row i-1 under control i-1.
    """

    dt: float
    states: np.ndarray
    controls: np.ndarray

    def __post_init__(self):
        states = np.array(self.states, dtype=np.float64)
        controls = np.array(self.controls, dtype=np.float64)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if states.ndim != 2 or states.shape[1] != 6:
            raise ValueError(f"states must have shape (T, 6), got {states.shape}")
        if controls.shape != (states.shape[0], 2):
            raise ValueError("controls must have shape (T, 2) matching states")
        if not (np.isfinite(states).all() and np.isfinite(controls).all()):
            raise ValueError("trajectory contains non-finite values")
        states.flags.writeable = False
        controls.flags.writeable = False
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "controls", controls)

    def __len__(self):
        return self.states.shape[0]

    @property
    def time(self):
        return np.arange(len(self)) * self.dt

    def rows(self):
        for z, c in zip(self.states, self.controls):
            yield AugmentedState.from_array(z), ControlInput(float(c[0]), float(c[1]))

    def speed(self):
        return np.hypot(self.states[:, 3], self.states[:, 4])


def _as_controls(controls):
    if isinstance(controls, np.ndarray):
        arr = np.asarray(controls, dtype=np.float64)
    else:
        arr = np.array([(c.n_p, c.delta) for c in controls], dtype=np.float64).reshape(-1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise ValueError("controls must be a nonempty sequence of (n_p, delta)")
    return np.ascontiguousarray(arr)


def euler_step(zeta, control, params, ship, dt):
    """One forward-Euler step: zeta + f_zeta(zeta, control) * dt."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return AugmentedState.from_array(zeta.to_array() + mmg.f_zeta(zeta, control, params, ship) * dt)


def simulate(zeta0, controls, params, ship, dt=1.0):
    """Roll forward Euler over a control sequence.

    Returns a Trajectory with one row per control; the last control is
    recorded but not used to advance. Raises SimulationAborted naming the
    first row that left the forward regime or became non-finite.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    ctrl = _as_controls(controls)
    z0 = zeta0.to_array() if isinstance(zeta0, AugmentedState) else np.asarray(zeta0, dtype=np.float64)
    if not np.isfinite(z0).all():
        raise SimulationAborted(0, "non-finite initial state")
    out = np.empty((ctrl.shape[0], 6))
    flap_x, flap_y = params.flap_arrays()
    status, step = mmg._rollout(z0, ctrl, params.to_vector(), ship.to_vector(),
                                flap_x, flap_y, float(dt), out)
    if status == mmg.STATUS_INVALID_REGIME:
        raise SimulationAborted(step, "left forward regime (u <= 0 or n_p <= 0)")
    if status == mmg.STATUS_NON_FINITE:
        raise SimulationAborted(step, "non-finite state")
    return Trajectory(float(dt), out, ctrl)


def constant_controls(n_p, delta, steps):
    return np.tile(np.array([n_p, delta], dtype=np.float64), (steps, 1))


def initial_state(u0, p1=0.0, p2=0.0, psi=0.0, v_m=0.0, r=0.0):
    if not u0 > 0:
        raise InvalidRegime(f"initial surge velocity must be positive, got {u0}")
    return AugmentedState(p1, p2, psi, mmg.State(u0, v_m, r))


class Circle(NamedTuple):
    x: float
    y: float
    radius: float


def fit_circle(x, y):
    """Algebraic least-squares circle fit through the points (x, y)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xm, ym = x.mean(), y.mean()
    xc, yc = x - xm, y - ym
    a = np.column_stack([2 * xc, 2 * yc, np.ones_like(xc)])
    sol, *_ = np.linalg.lstsq(a, xc**2 + yc**2, rcond=None)
    cx, cy, c = sol
    return Circle(cx + xm, cy + ym, math.sqrt(c + cx**2 + cy**2))


class TurningCircle(NamedTuple):
    completed: bool
    steady_diameter: float
    tactical_diameter: float
    advance: float
    center: tuple
    time_to_complete: float


def turning_circle(traj):
    """Turning-test metrics of a trajectory started on a straight course.

    ``steady_diameter`` comes from a circle fit to the last full revolution
    of heading; it is NaN when the heading never changed by 2 pi.
    """
    psi = traj.states[:, 2] - traj.states[0, 2]
    turn = np.abs(psi)
    psi0 = traj.states[0, 2]
    # Track expressed in the initial-heading frame.
    dx = traj.states[:, 0] - traj.states[0, 0]
    dy = traj.states[:, 1] - traj.states[0, 1]
    along = dx * math.cos(psi0) + dy * math.sin(psi0)
    across = -dx * math.sin(psi0) + dy * math.cos(psi0)

    def crossing(target, values):
        idx = np.flatnonzero(turn >= target)
        if idx.size == 0:
            return math.nan, math.nan
        i = idx[0]
        if i == 0:
            return float(values[0]), 0.0
        frac = (target - turn[i - 1]) / (turn[i] - turn[i - 1])
        return float(values[i - 1] + frac * (values[i] - values[i - 1])), (i - 1 + frac) * traj.dt

    tactical, _ = crossing(math.pi, np.abs(across))
    advance, _ = crossing(math.pi / 2, along)
    _, t_full = crossing(2 * math.pi, turn)
    completed = bool(turn[-1] >= 2 * math.pi)
    if completed:
        last = turn >= turn[-1] - 2 * math.pi
        circle = fit_circle(traj.states[last, 0], traj.states[last, 1])
        steady, center = 2 * circle.radius, (circle.x, circle.y)
    else:
        steady, center = math.nan, (math.nan, math.nan)
    return TurningCircle(completed, steady, tactical, advance, center, t_full)
