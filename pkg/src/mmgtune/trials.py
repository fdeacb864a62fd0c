"""Trial time series: file format, synthetic turning tests and tune/test splits.

A trial file is CSV with a ``#``-prefixed ``key: value`` header block and a
column row. Columns are fixed to (p1, p2, psi, u, v_m, r, n_p, delta). The
``units`` header selects between mariner units (deg, deg/s, rpm) and the
internal SI/radian units; the column row must agree with it.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dynamics
from .exceptions import MissingManeuver, ParseError, TrialValidationError

TRIAL_FORMAT = "mmgtune-trial/1"
MANIFEST_FORMAT = "mmgtune-manifest/1"

COLUMNS = ("p1", "p2", "psi", "u", "v_m", "r", "n_p", "delta")
UNIT_LABELS = {
    "mariner": ("m", "m", "deg", "m/s", "m/s", "deg/s", "rpm", "deg"),
    "si": ("m", "m", "rad", "m/s", "m/s", "rad/s", "rps", "rad"),
}
# Multiply a mariner-unit column by this to get internal units.
_TO_INTERNAL = np.array([1.0, 1.0, math.pi / 180, 1.0, 1.0, math.pi / 180, 1 / 60, math.pi / 180])

PAPER_TUNE_LABELS = ("turn+10", "turn-20", "turn+35", "turn-40")
PAPER_TEST_LABELS = ("turn-10", "turn+20", "turn-35", "turn+40")


def column_header(units):
    return ",".join(f"{c}[{u}]" for c, u in zip(COLUMNS, UNIT_LABELS[units]))


@dataclass(frozen=True, eq=False)
class Trial:
    """One maneuvering record in internal units.

    ``data`` has shape (T, 8): p1, p2 [m], psi [rad, unwrapped], u, v_m [m/s],
    r [rad/s], n_p [rev/s], delta [rad].
    """

    label: str
    dt: float
    data: np.ndarray
    ship_id: str = "suzaku"

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        object.__setattr__(self, "data", data)
        validate_trial(self)
        data.flags.writeable = False

    def __len__(self):
        return self.data.shape[0]

    @property
    def states(self):
        return self.data[:, :6]

    @property
    def controls(self):
        return self.data[:, 6:]

    @property
    def time(self):
        return np.arange(len(self)) * self.dt

    @classmethod
    def from_trajectory(cls, traj, label, ship_id="suzaku"):
        return cls(label, traj.dt, np.hstack([traj.states, traj.controls]), ship_id)


def validate_trial(trial):
    data = trial.data
    if not trial.dt > 0:
        raise TrialValidationError(f"{trial.label}: dt must be positive, got {trial.dt}")
    if data.ndim != 2 or data.shape[1] != 8:
        raise TrialValidationError(f"{trial.label}: data must have 8 columns, got shape {data.shape}")
    if data.shape[0] < 2:
        raise TrialValidationError(f"{trial.label}: need at least 2 rows, got {data.shape[0]}")
    bad = np.flatnonzero(~np.isfinite(data).all(axis=1))
    if bad.size:
        raise TrialValidationError(f"{trial.label}: non-finite value at row {bad[0] + 1}")
    bad = np.flatnonzero(data[:, 3] <= 0)
    if bad.size:
        raise TrialValidationError(f"{trial.label}: u <= 0 at row {bad[0] + 1}")
    bad = np.flatnonzero(data[:, 6] <= 0)
    if bad.size:
        raise TrialValidationError(f"{trial.label}: n_p <= 0 at row {bad[0] + 1}")


def save_trial(trial, path, units="mariner", precision=17):
    """Write ``trial`` as CSV. ``precision`` is the number of significant digits."""
    if units not in UNIT_LABELS:
        raise ValueError(f"units must be one of {sorted(UNIT_LABELS)}")
    table = trial.data / _TO_INTERNAL if units == "mariner" else trial.data
    lines = [
        f"# format: {TRIAL_FORMAT}",
        f"# ship: {trial.ship_id}",
        f"# maneuver: {trial.label}",
        f"# dt: {trial.dt!r}",
        f"# T: {len(trial)}",
        f"# units: {units}",
        column_header(units),
    ]
    lines.extend(",".join(f"{v:.{precision}g}" for v in row) for row in table)
    Path(path).write_text("\n".join(lines) + "\n")


def load_trial(path):
    """Read a trial CSV, convert to internal units and unwrap the heading."""
    meta = {}
    rows = []
    header_seen = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if header_seen:
                    raise ParseError("metadata line after the column header", lineno)
                key, sep, value = line[1:].partition(":")
                if not sep:
                    raise ParseError(f"metadata must be 'key: value', got {line!r}", lineno)
                meta[key.strip()] = value.strip()
                continue
            if not header_seen:
                units = meta.get("units")
                if units not in UNIT_LABELS:
                    raise ParseError(f"header must declare units as one of {sorted(UNIT_LABELS)}", lineno)
                if line.replace(" ", "") != column_header(units):
                    raise ParseError(
                        f"column row {line!r} does not match declared units {units!r}; "
                        f"expected {column_header(units)!r}", lineno)
                header_seen = True
                continue
            fields = line.split(",")
            if len(fields) != len(COLUMNS):
                raise ParseError(f"expected {len(COLUMNS)} fields, got {len(fields)}", lineno)
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
    if not header_seen:
        raise ParseError("missing column header row")
    if meta.get("format", TRIAL_FORMAT) != TRIAL_FORMAT:
        raise ParseError(f"unsupported format {meta['format']!r}")
    try:
        dt = float(meta["dt"])
    except (KeyError, ValueError):
        raise ParseError("header must declare a numeric dt") from None
    data = np.array(rows, dtype=np.float64).reshape(-1, len(COLUMNS))
    if "T" in meta and int(meta["T"]) != data.shape[0]:
        raise TrialValidationError(f"header declares T={meta['T']} but file has {data.shape[0]} rows")
    if meta["units"] == "mariner":
        data = data * _TO_INTERNAL
    data[:, 2] = np.unwrap(data[:, 2])
    label = meta.get("maneuver", Path(path).stem)
    return Trial(label, dt, data, meta.get("ship", "unknown"))


@dataclass(frozen=True)
class ManeuverSpec:
    """Turning test: rudder ramps to ``rudder_deg`` at the rate limit and holds."""

    rudder_deg: float
    kind: str = "turn"
    rudder_rate_deg_s: float = 2.34
    np_rpm: float = 106.0
    u0: float = 3.086
    duration: float = 600.0

    def __post_init__(self):
        if self.kind != "turn":
            raise ValueError(f"unsupported maneuver kind {self.kind!r}")
        if abs(self.rudder_deg) > 45:
            raise ValueError(f"|rudder_deg| must not exceed 45, got {self.rudder_deg}")
        if not (self.duration > 0 and self.rudder_rate_deg_s > 0 and self.np_rpm > 0 and self.u0 > 0):
            raise ValueError("duration, rudder rate, np_rpm and u0 must be positive")

    @property
    def label(self):
        return f"{self.kind}{self.rudder_deg:+g}"

    def controls(self, dt=1.0):
        steps = int(round(self.duration / dt)) + 1
        t = np.arange(steps) * dt
        target = math.radians(self.rudder_deg)
        delta = np.sign(target) * np.minimum(math.radians(self.rudder_rate_deg_s) * t, abs(target))
        return np.column_stack([np.full(steps, self.np_rpm / 60.0), delta])


def paper_suite(**overrides):
    """The eight turning tests at +-10, +-20, +-35, +-40 deg."""
    return [ManeuverSpec(sign * angle, **overrides) for angle in (10, 20, 35, 40) for sign in (1, -1)]


@dataclass(frozen=True)
class NoiseModel:
    """Per-channel Gaussian noise standard deviations (controls stay exact)."""

    position: float = 1.0
    psi_deg: float = 0.2
    u: float = 0.05
    v_m: float = 0.05
    r_deg_s: float = 0.02

    @classmethod
    def none(cls):
        return cls(0.0, 0.0, 0.0, 0.0, 0.0)

    def std(self):
        return np.array([self.position, self.position, math.radians(self.psi_deg),
                         self.u, self.v_m, math.radians(self.r_deg_s)])

    @property
    def is_zero(self):
        return not self.std().any()


def generate_synthetic_trial(theta_true, spec, ship, noise=None, seed=0, dt=1.0, ship_id="suzaku"):
    """Simulate ``spec`` under ``theta_true`` and add measurement noise to the states."""
    noise = NoiseModel.none() if noise is None else noise
    controls = spec.controls(dt)
    zeta0 = dynamics.initial_state(spec.u0)
    traj = dynamics.simulate(zeta0, controls, theta_true, ship, dt)
    states = np.array(traj.states)
    if not noise.is_zero:
        rng = np.random.default_rng(seed)
        states = states + rng.standard_normal(states.shape) * noise.std()
    return Trial(spec.label, dt, np.hstack([states, traj.controls]), ship_id)


def generate_suite(theta_true, ship, noise=None, seed=0, dt=1.0, specs=None, ship_id="suzaku"):
    specs = paper_suite() if specs is None else specs
    seeds = np.random.SeedSequence(seed).spawn(len(specs))
    return [
        generate_synthetic_trial(theta_true, spec, ship, noise,
                                 int(s.generate_state(1)[0]), dt, ship_id)
        for spec, s in zip(specs, seeds)
    ]


@dataclass(frozen=True)
class DatasetSplit:
    tune: tuple
    test: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "tune", tuple(self.tune))
        object.__setattr__(self, "test", tuple(self.test))
        tune_ids = {id(t) for t in self.tune} | {t.label for t in self.tune}
        for t in self.test:
            if id(t) in tune_ids or t.label in tune_ids:
                raise ValueError(f"trial {t.label!r} is in both tune and test sets")

    @property
    def tune_only(self):
        return not self.test


def make_split(trials, scheme="paper", tune=None, test=None):
    """Split labelled trials into tune and test sets.

    ``scheme="paper"`` uses the fixed alternating assignment of the eight
    turning tests; ``scheme="custom"`` takes explicit label lists.
    """
    by_label = {t.label: t for t in trials}
    if scheme == "paper":
        tune, test = PAPER_TUNE_LABELS, PAPER_TEST_LABELS
    elif scheme == "custom":
        tune, test = list(tune or ()), list(test or ())
        overlap = set(tune) & set(test)
        if overlap:
            raise ValueError(f"tune and test lists overlap: {sorted(overlap)}")
        if not tune:
            raise ValueError("custom split needs at least one tune trial")
    else:
        raise ValueError(f"unknown split scheme {scheme!r}")
    missing = [label for label in (*tune, *test) if label not in by_label]
    if missing:
        raise MissingManeuver(f"no trial labelled {missing}")
    return DatasetSplit(tuple(by_label[l] for l in tune), tuple(by_label[l] for l in test))


def save_manifest(path, files, split):
    """Write a manifest mapping labels to trial files plus the split assignment.

    ``files`` maps label -> file path; paths are stored relative to the
    manifest directory.
    """
    base = Path(path).parent
    doc = {
        "schema": MANIFEST_FORMAT,
        "trials": {label: os.path.relpath(f, base) for label, f in files.items()},
        "split": {"tune": [t.label for t in split.tune], "test": [t.label for t in split.test]},
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_manifest(path):
    """Return (trials by label, DatasetSplit) from a manifest file."""
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != MANIFEST_FORMAT:
        raise ParseError(f"{path}: expected schema {MANIFEST_FORMAT!r}, got {doc.get('schema')!r}")
    unknown = set(doc) - {"schema", "trials", "split"}
    if unknown:
        raise ParseError(f"{path}: unknown keys {sorted(unknown)}")
    base = Path(path).parent
    trials = {label: load_trial(base / f) for label, f in doc["trials"].items()}
    for label, trial in trials.items():
        if trial.label != label:
            trials[label] = Trial(label, trial.dt, trial.data, trial.ship_id)
    split = doc.get("split", {})
    split = make_split(trials.values(), "custom", split.get("tune"), split.get("test"))
    return trials, split
