"""3-DOF MMG maneuvering model: ship data, coefficients and force models.

The hot path (force models, state derivative) is written as numba-compiled
scalar kernels operating on flat coefficient vectors, so that rollouts inside
the tuning loop and the public per-call functions share one implementation.
The public functions below unpack the dataclasses, check the regime and call
the kernels.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, fields, replace
from typing import NamedTuple

import numpy as np
from numba import njit

from .exceptions import DegenerateInflowWarning, InvalidRegime, SingularMass

_jit = njit(cache=True, error_model="numpy")


@dataclass(frozen=True)
class ShipParticulars:
    """Fixed geometry and mass constants of the vessel.

    Defaults are the 83 m container ship used throughout the package.
    ``rho`` and ``kzz_ratio`` are not part of the published particulars and
    carry conventional values.
    """

    lpp: float = 83.0
    beam: float = 13.5
    draft: float = 3.8
    cb: float = 0.737
    x_g: float = 0.93
    d_p: float = 2.80
    h_r: float = 3.49
    a_r_area: float = 6.282
    rho: float = 1025.0
    kzz_ratio: float = 0.25

    def __post_init__(self):
        for name in ("lpp", "beam", "draft", "d_p", "h_r", "a_r_area", "rho"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"ShipParticulars.{name} must be positive, got {value}")
        if not 0 < self.cb < 1:
            raise ValueError(f"ShipParticulars.cb must lie in (0, 1), got {self.cb}")
        if not 0 < self.kzz_ratio < 1:
            raise ValueError(f"ShipParticulars.kzz_ratio must lie in (0, 1), got {self.kzz_ratio}")
        if not math.isfinite(self.x_g):
            raise ValueError("ShipParticulars.x_g must be finite")

    @property
    def mass(self):
        """Displacement mass rho * Cb * Lpp * B * d [kg]."""
        return self.rho * self.cb * self.lpp * self.beam * self.draft

    @property
    def i_g(self):
        return self.mass * (self.kzz_ratio * self.lpp) ** 2

    @property
    def eta_r(self):
        return self.d_p / self.h_r

    @property
    def mass_scale(self):
        return 0.5 * self.rho * self.lpp**2 * self.draft

    @property
    def inertia_scale(self):
        return 0.5 * self.rho * self.lpp**4 * self.draft

    def to_vector(self):
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=np.float64)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**{k: float(v) for k, v in data.items()})


# Order of the float coefficients in the packed vector used by the kernels.
PARAM_FIELDS = (
    "m_x", "m_y", "j_zz",
    "r0", "x_vv", "x_vr_plus_my", "x_rr", "x_vvvr", "x_vvvv",
    "y_v", "y_r_minus_mx", "y_vvv", "y_vvr", "y_vrr", "y_rrr",
    "n_v", "n_r", "n_vvv", "n_vvr", "n_vrr", "n_rrr",
    "t_p", "w_p0", "c_w", "l_p",
    "t_r", "a_h", "x_h", "epsilon", "kappa", "u_r0", "l_r", "gamma_rp", "gamma_rn",
    "f_a0", "f_a2", "c_l01", "c_l03",
    "x_r",
)


@dataclass(frozen=True)
class MmgParams:
    """MMG coefficients. All values are nondimensional.

    Defaults are the pre-determined values of the subject ship. ``x_vr_plus_my``
    and ``y_r_minus_mx`` hold the composite table entries; the hull model
    recovers X'_vr and Y'_r from them using the current ``m_y`` / ``m_x``.

    ``x_r`` is the rudder position as a fraction of Lpp, ``flap_map`` a
    piecewise-linear table of (delta, delta_f) pairs in radians (empty means
    delta_f = delta), and ``propeller_lateral`` switches Y_P / N_P on or off.
    """

    m_x: float = 0.010
    m_y: float = 0.168
    j_zz: float = 0.010

    r0: float = 0.017
    x_vv: float = 0.009
    x_vr_plus_my: float = 0.160
    x_rr: float = -0.0164
    x_vvvr: float = -0.824
    x_vvvv: float = -0.114
    y_v: float = -0.329
    y_r_minus_mx: float = 0.090
    y_vvv: float = -0.787
    y_vvr: float = -0.022
    y_vrr: float = -0.206
    y_rrr: float = 0.001
    n_v: float = -0.106
    n_r: float = -0.057
    n_vvv: float = -0.037
    n_vvr: float = -0.105
    n_vrr: float = 0.012
    n_rrr: float = -0.008

    t_p: float = 0.080
    w_p0: float = 0.422
    c_w: float = -2.0
    l_p: float = -0.5

    t_r: float = -0.058
    a_h: float = 0.158
    x_h: float = -0.605
    epsilon: float = 1.27
    kappa: float = 0.5
    u_r0: float = 0.14
    l_r: float = -0.888
    gamma_rp: float = 0.483
    gamma_rn: float = 0.172
    f_a0: float = 2.411
    f_a2: float = -0.381
    c_l01: float = 1.164
    c_l03: float = -0.381

    x_r: float = -0.5
    flap_map: tuple = ()
    propeller_lateral: bool = True

    def __post_init__(self):
        for name in PARAM_FIELDS:
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"MmgParams.{name} must be finite")
        if not self.r0 > 0:
            raise ValueError(f"MmgParams.r0 must be positive, got {self.r0}")
        if not 0 < self.w_p0 < 1:
            raise ValueError(f"MmgParams.w_p0 must lie in (0, 1), got {self.w_p0}")
        if not (self.gamma_rp > 0 and self.gamma_rn > 0):
            raise ValueError("MmgParams.gamma_rp and gamma_rn must be positive")
        table = tuple((float(a), float(b)) for a, b in self.flap_map)
        object.__setattr__(self, "flap_map", table)
        if len(table) == 1:
            raise ValueError("flap_map needs at least two points")
        xs = [a for a, _ in table]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("flap_map rudder angles must be strictly increasing")

    @property
    def x_vr(self):
        return self.x_vr_plus_my - self.m_y

    @property
    def y_r(self):
        return self.y_r_minus_mx + self.m_x

    def to_vector(self):
        values = [getattr(self, name) for name in PARAM_FIELDS]
        values.append(1.0 if self.propeller_lateral else 0.0)
        return np.array(values, dtype=np.float64)

    def flap_arrays(self):
        if not self.flap_map:
            return np.empty(0), np.empty(0)
        table = np.array(self.flap_map, dtype=np.float64)
        return table[:, 0].copy(), table[:, 1].copy()

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        data = asdict(self)
        data["flap_map"] = [list(pair) for pair in self.flap_map]
        return data

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise KeyError(f"unknown MMG parameter(s): {sorted(unknown)}")
        if "flap_map" in data:
            data["flap_map"] = tuple(tuple(pair) for pair in data["flap_map"])
        return cls(**data)


_PI = {name: i for i, name in enumerate(PARAM_FIELDS)}
_MX, _MY, _JZZ = _PI["m_x"], _PI["m_y"], _PI["j_zz"]
_R0, _XVV, _XVRMY, _XRR, _XVVVR, _XVVVV = (
    _PI["r0"], _PI["x_vv"], _PI["x_vr_plus_my"], _PI["x_rr"], _PI["x_vvvr"], _PI["x_vvvv"])
_YV, _YRMX, _YVVV, _YVVR, _YVRR, _YRRR = (
    _PI["y_v"], _PI["y_r_minus_mx"], _PI["y_vvv"], _PI["y_vvr"], _PI["y_vrr"], _PI["y_rrr"])
_NV, _NR, _NVVV, _NVVR, _NVRR, _NRRR = (
    _PI["n_v"], _PI["n_r"], _PI["n_vvv"], _PI["n_vvr"], _PI["n_vrr"], _PI["n_rrr"])
_TP, _WP0, _CW, _LP = _PI["t_p"], _PI["w_p0"], _PI["c_w"], _PI["l_p"]
_TR, _AH, _XH, _EPS, _KAPPA, _UR0, _LR, _GRP, _GRN = (
    _PI["t_r"], _PI["a_h"], _PI["x_h"], _PI["epsilon"], _PI["kappa"], _PI["u_r0"],
    _PI["l_r"], _PI["gamma_rp"], _PI["gamma_rn"])
_FA0, _FA2, _CL01, _CL03 = _PI["f_a0"], _PI["f_a2"], _PI["c_l01"], _PI["c_l03"]
_XR = _PI["x_r"]
_PLAT = len(PARAM_FIELDS)

_SHIP = {f.name: i for i, f in enumerate(fields(ShipParticulars))}
_LPP, _B, _D, _CB, _XG = _SHIP["lpp"], _SHIP["beam"], _SHIP["draft"], _SHIP["cb"], _SHIP["x_g"]
_DP, _HR, _AR, _RHO, _KZZ = (
    _SHIP["d_p"], _SHIP["h_r"], _SHIP["a_r_area"], _SHIP["rho"], _SHIP["kzz_ratio"])

# Propeller open-water and lateral-force fits; argument is the advance angle in degrees.
KT_COEFFS = (3.31e-6, -3.72e-4, -2.60e-3, 0.167)
CPY_COEFFS = (-2.83e-5, 6.04e-4, -1.28e-2)
CPN_LOW_COEFFS = (-2.48e-4, -1.70e-3)
CPN_HIGH_COEFFS = (-1.86e-4, 4.03e-3)
CPN_BREAK_DEG = 20.0


@_jit
def _kt(phi):
    return ((3.31e-6 * phi - 3.72e-4) * phi - 2.60e-3) * phi + 0.167


@_jit
def _cpy(phi):
    return (-2.83e-5 * phi + 6.04e-4) * phi - 1.28e-2


@_jit
def _cpn(phi):
    if phi < 20.0:
        return -2.48e-4 * phi - 1.70e-3
    return -1.86e-4 * phi + 4.03e-3


@_jit
def _f_alpha(delta_f, f_a0, f_a2):
    return f_a0 + f_a2 * delta_f * delta_f


@_jit
def _c_l0(delta_f, c_l01, c_l03):
    return (c_l01 + c_l03 * delta_f * delta_f) * delta_f


@_jit
def _hull_coeffs(vp, rp, p):
    x_vr = p[_XVRMY] - p[_MY]
    y_r = p[_YRMX] + p[_MX]
    vv = vp * vp
    rr = rp * rp
    xh = (-p[_R0] + p[_XVV] * vv + x_vr * vp * rp + p[_XRR] * rr
          + p[_XVVVR] * vv * vp * rp + p[_XVVVV] * vv * vv)
    yh = (p[_YV] * vp + y_r * rp + p[_YVVV] * vv * vp + p[_YVVR] * vv * rp
          + p[_YVRR] * vp * rr + p[_YRRR] * rr * rp)
    nh = (p[_NV] * vp + p[_NR] * rp + p[_NVVV] * vv * vp + p[_NVVR] * vv * rp
          + p[_NVRR] * vp * rr + p[_NRRR] * rr * rp)
    return xh, yh, nh


@_jit
def _hull(u, v, r, p, s):
    lpp = s[_LPP]
    big_u = math.sqrt(u * u + v * v)
    xh, yh, nh = _hull_coeffs(v / big_u, r * lpp / big_u, p)
    q = 0.5 * s[_RHO] * lpp * s[_D] * big_u * big_u
    return q * xh, q * yh, q * lpp * nh


@_jit
def _propeller_inflow(u, v, r, n, p, s):
    big_u = math.sqrt(u * u + v * v)
    beta = math.atan(-v / u)
    beta_p = beta - p[_LP] * r * s[_LPP] / big_u
    w_p = p[_WP0] * math.exp(p[_CW] * beta_p * beta_p)
    u_p = (1.0 - w_p) * u
    n_tip = 0.7 * math.pi * n * s[_DP]
    phi = math.degrees(math.atan(u_p / n_tip))
    v_rel = math.sqrt(u_p * u_p + n_tip * n_tip)
    return w_p, u_p, phi, v_rel


@_jit
def _propeller(u, v, r, n, p, s):
    _, _, phi, v_rel = _propeller_inflow(u, v, r, n, p, s)
    q = 0.5 * s[_RHO] * (0.25 * math.pi * s[_DP] ** 2) * v_rel * v_rel
    xp = q * (1.0 - p[_TP]) * _kt(phi)
    lateral = p[_PLAT]
    return xp, lateral * q * _cpy(phi), lateral * q * s[_LPP] * _cpn(phi)


@_jit
def _flap_angle(delta, flap_x, flap_y):
    if flap_x.shape[0] == 0:
        return delta
    return np.interp(delta, flap_x, flap_y)


@_jit
def _rudder_inflow(u, v, r, n, delta, p, s):
    lpp = s[_LPP]
    big_u = math.sqrt(u * u + v * v)
    beta = math.atan(-v / u)
    beta_r = beta - p[_LR] * r * lpp / big_u
    gamma = p[_GRP] if beta_r >= 0.0 else p[_GRN]
    v_r = gamma * (big_u * math.sin(beta) - p[_LR] * lpp * r)

    _, u_p, phi, _ = _propeller_inflow(u, v, r, n, p, s)
    j_p = u_p / (n * s[_DP])
    eta = s[_DP] / s[_HR]
    slip = math.sqrt(1.0 + 8.0 * _kt(phi) / (math.pi * j_p * j_p)) - 1.0
    u_r_slip = u_p * p[_EPS] * (eta * p[_KAPPA] * slip + 1.0)
    u_r_floor = 0.7 * math.pi * n * s[_DP] * p[_UR0]
    u_r = max(u_r_slip, u_r_floor)
    alpha_r = delta - math.atan2(v_r, u_r)
    return u_r_slip, u_r_floor, u_r, v_r, alpha_r


@_jit
def _rudder(u, v, r, n, delta, p, s, flap_x, flap_y):
    _, _, u_r, v_r, alpha_r = _rudder_inflow(u, v, r, n, delta, p, s)
    ur2 = u_r * u_r + v_r * v_r
    if ur2 == 0.0:
        return 0.0, 0.0, 0.0
    delta_f = _flap_angle(delta, flap_x, flap_y)
    lift = _f_alpha(delta_f, p[_FA0], p[_FA2]) * math.sin(alpha_r) + _c_l0(delta_f, p[_CL01], p[_CL03])
    f_n = 0.5 * s[_RHO] * s[_AR] * ur2 * lift
    lpp = s[_LPP]
    cos_d = math.cos(delta)
    x_r = -(1.0 - p[_TR]) * f_n * math.sin(delta)
    y_r = -(1.0 + p[_AH]) * f_n * cos_d
    n_r = -(p[_XR] * lpp + p[_AH] * p[_XH] * lpp) * f_n * cos_d
    return x_r, y_r, n_r


@_jit
def _mass_terms(p, s):
    lpp = s[_LPP]
    m = s[_RHO] * s[_CB] * lpp * s[_B] * s[_D]
    mass_scale = 0.5 * s[_RHO] * lpp * lpp * s[_D]
    m_x = p[_MX] * mass_scale
    m_y = p[_MY] * mass_scale
    j_zz = p[_JZZ] * mass_scale * lpp * lpp
    i_g = m * (s[_KZZ] * lpp) ** 2
    x_g = s[_XG]
    return m, m_x, m_y, i_g + x_g * x_g * m + j_zz, x_g


@_jit
def _derivative(u, v, r, n, delta, p, s, flap_x, flap_y):
    xh, yh, nh = _hull(u, v, r, p, s)
    xp, yp, np_ = _propeller(u, v, r, n, p, s)
    xr, yr, nr = _rudder(u, v, r, n, delta, p, s, flap_x, flap_y)
    m, m_x, m_y, i_z, x_g = _mass_terms(p, s)
    b1 = xh + xp + xr + (m + m_y) * v * r + x_g * m * r * r
    b2 = yh + yp + yr - (m + m_x) * u * r
    b3 = nh + np_ + nr - x_g * m * u * r
    a22 = m + m_y
    a23 = x_g * m
    det = a22 * i_z - a23 * a23
    du = b1 / (m + m_x)
    dv = (i_z * b2 - a23 * b3) / det
    dr = (a22 * b3 - a23 * b2) / det
    return du, dv, dr


@_jit
def _zeta_derivative(z, n, delta, p, s, flap_x, flap_y, out):
    psi, u, v, r = z[2], z[3], z[4], z[5]
    c = math.cos(psi)
    sn = math.sin(psi)
    out[0] = c * u - sn * v
    out[1] = sn * u + c * v
    out[2] = r
    du, dv, dr = _derivative(u, v, r, n, delta, p, s, flap_x, flap_y)
    out[3] = du
    out[4] = dv
    out[5] = dr


# Rollout status codes shared with the dynamics module.
STATUS_OK = 0
STATUS_INVALID_REGIME = 1
STATUS_NON_FINITE = 2


@_jit
def _rollout(zeta0, controls, p, s, flap_x, flap_y, dt, out):
    """Forward-Euler rollout; out[0] = zeta0, out[i] advanced with controls[i-1].

    Returns (status, index of the offending row).
    """
    steps = controls.shape[0]
    dz = np.empty(6)
    for k in range(6):
        out[0, k] = zeta0[k]
    for i in range(1, steps):
        z = out[i - 1]
        n = controls[i - 1, 0]
        if not (z[3] > 0.0 and n > 0.0):
            return STATUS_INVALID_REGIME, i - 1
        _zeta_derivative(z, n, controls[i - 1, 1], p, s, flap_x, flap_y, dz)
        for k in range(6):
            value = z[k] + dz[k] * dt
            if not math.isfinite(value):
                return STATUS_NON_FINITE, i
            out[i, k] = value
    return STATUS_OK, steps - 1


@_jit
def _trial_cost(recorded, controls, p, s, flap_x, flap_y, dt, w1, w2, w3):
    """Weighted squared pose deviation of an Euler rollout from a recorded trial.

    The rollout starts from the first recorded row and is driven by the
    recorded controls. Returns (cost, status, row).
    """
    steps = controls.shape[0]
    z = recorded[0, :6].copy()
    dz = np.empty(6)
    cost = 0.0
    for i in range(1, steps):
        n = controls[i - 1, 0]
        if not (z[3] > 0.0 and n > 0.0):
            return cost, STATUS_INVALID_REGIME, i - 1
        _zeta_derivative(z, n, controls[i - 1, 1], p, s, flap_x, flap_y, dz)
        for k in range(6):
            z[k] = z[k] + dz[k] * dt
            if not math.isfinite(z[k]):
                return cost, STATUS_NON_FINITE, i
        e1 = z[0] - recorded[i, 0]
        e2 = z[1] - recorded[i, 1]
        e3 = z[2] - recorded[i, 2]
        cost += w1 * e1 * e1 + w2 * e2 * e2 + w3 * e3 * e3
    return cost, STATUS_OK, steps - 1


class State(NamedTuple):
    u: float
    v_m: float
    r: float


class AugmentedState(NamedTuple):
    p1: float
    p2: float
    psi: float
    state: State

    def to_array(self):
        return np.array([self.p1, self.p2, self.psi, *self.state], dtype=np.float64)

    @classmethod
    def from_array(cls, z):
        return cls(float(z[0]), float(z[1]), float(z[2]), State(float(z[3]), float(z[4]), float(z[5])))


class ControlInput(NamedTuple):
    n_p: float
    delta: float


class ForceTriple(NamedTuple):
    x: float
    y: float
    n: float


class PropellerInflow(NamedTuple):
    wake: float
    u_p: float
    phi_deg: float
    v_rel: float


class RudderInflow(NamedTuple):
    u_r_slipstream: float
    u_r_floor: float
    u_r: float
    v_r: float
    alpha_r: float


def _require_forward(state, control=None):
    if not state.u > 0:
        raise InvalidRegime(f"surge velocity must be positive, got u={state.u}")
    if control is not None and not control.n_p > 0:
        raise InvalidRegime(f"propeller revolution must be positive, got n_p={control.n_p}")


def ship_speed(state):
    return math.hypot(state.u, state.v_m)


def drift_angle(state):
    """Drift angle arctan(-v_m / u) in radians."""
    _require_forward(state)
    return math.atan(-state.v_m / state.u)


def nondimensional_velocity(state, ship):
    """Return (U, v_m', r') with v_m' = v_m / U and r' = r * Lpp / U."""
    big_u = ship_speed(state)
    if big_u == 0:
        raise InvalidRegime("ship speed is zero; nondimensional velocities are undefined")
    return big_u, state.v_m / big_u, state.r * ship.lpp / big_u


_SCALES = ("length", "mass", "inertia", "velocity")


def nondimensionalize(value, kind, ship, speed=None):
    """Divide by Lpp, 0.5 rho Lpp^2 d, 0.5 rho Lpp^4 d or U according to ``kind``."""
    return value / _scale(kind, ship, speed)


def dimensionalize(value, kind, ship, speed=None):
    return value * _scale(kind, ship, speed)


def _scale(kind, ship, speed):
    if kind == "length":
        return ship.lpp
    if kind == "mass":
        return ship.mass_scale
    if kind == "inertia":
        return ship.inertia_scale
    if kind == "velocity":
        if speed is None or speed <= 0:
            raise ValueError("velocity scaling needs a positive ship speed")
        return speed
    raise ValueError(f"unknown quantity kind {kind!r}; expected one of {_SCALES}")


def thrust_coefficient(phi_deg):
    """Propeller thrust coefficient K_T as a function of advance angle [deg]."""
    return _kt(float(phi_deg))


def propeller_sway_coefficient(phi_deg):
    return _cpy(float(phi_deg))


def propeller_yaw_coefficient(phi_deg):
    # Discontinuous at 20 deg with the published fit; kept as is.
    return _cpn(float(phi_deg))


def rudder_lift_slope(delta_f, params):
    return _f_alpha(float(delta_f), params.f_a0, params.f_a2)


def rudder_zero_lift(delta_f, params):
    return _c_l0(float(delta_f), params.c_l01, params.c_l03)


def flap_angle(delta, params):
    flap_x, flap_y = params.flap_arrays()
    return float(_flap_angle(float(delta), flap_x, flap_y))


def hull_force_coefficients(vp, rp, params):
    """Nondimensional hull forces (X'_H, Y'_H, N'_H) at (v_m', r')."""
    return ForceTriple(*_hull_coeffs(float(vp), float(rp), params.to_vector()))


def hull_force(state, params, ship):
    nondimensional_velocity(state, ship)
    return ForceTriple(*_hull(*map(float, state), params.to_vector(), ship.to_vector()))


def propeller_inflow(state, control, params, ship):
    _require_forward(state, control)
    return PropellerInflow(*_propeller_inflow(
        *map(float, state), float(control.n_p), params.to_vector(), ship.to_vector()))


def propeller_force(state, control, params, ship):
    _require_forward(state, control)
    return ForceTriple(*_propeller(
        *map(float, state), float(control.n_p), params.to_vector(), ship.to_vector()))


def rudder_inflow(state, control, params, ship):
    _require_forward(state, control)
    return RudderInflow(*_rudder_inflow(
        *map(float, state), float(control.n_p), float(control.delta),
        params.to_vector(), ship.to_vector()))


def rudder_force(state, control, params, ship):
    """Rudder forces; warns with DegenerateInflowWarning when U_R = 0."""
    inflow = rudder_inflow(state, control, params, ship)
    if inflow.u_r == 0 and inflow.v_r == 0:
        warnings.warn("rudder inflow velocity is zero; rudder force set to zero",
                      DegenerateInflowWarning, stacklevel=2)
    flap_x, flap_y = params.flap_arrays()
    return ForceTriple(*_rudder(
        *map(float, state), float(control.n_p), float(control.delta),
        params.to_vector(), ship.to_vector(), flap_x, flap_y))


def mass_matrix(params, ship):
    m, m_x, m_y, i_z, x_g = _mass_terms(params.to_vector(), ship.to_vector())
    matrix = np.array([
        [m + m_x, 0.0, 0.0],
        [0.0, m + m_y, x_g * m],
        [0.0, x_g * m, i_z],
    ])
    if not np.linalg.det(matrix[1:, 1:]) > 0:
        raise SingularMass("mass matrix is not positive definite")
    return matrix


def f_mmg(state, control, params, ship):
    """Time derivative (du/dt, dv_m/dt, dr/dt) of the velocity state."""
    _require_forward(state, control)
    mass_matrix(params, ship)
    flap_x, flap_y = params.flap_arrays()
    return np.array(_derivative(
        *map(float, state), float(control.n_p), float(control.delta),
        params.to_vector(), ship.to_vector(), flap_x, flap_y))


def f_zeta(zeta, control, params, ship):
    """Time derivative of (p1, p2, psi, u, v_m, r)."""
    _require_forward(zeta.state, control)
    flap_x, flap_y = params.flap_arrays()
    out = np.empty(6)
    _zeta_derivative(zeta.to_array(), float(control.n_p), float(control.delta),
                     params.to_vector(), ship.to_vector(), flap_x, flap_y, out)
    return out
