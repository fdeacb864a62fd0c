"""JSON documents: ship particulars, parameter sets, run configs and reports."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import ConfigError
from .mmg import MmgParams, ShipParticulars

PARAMS_SCHEMA = "mmgtune-params/1"
SHIP_SCHEMA = "mmgtune-ship/1"
RUN_SCHEMA = "mmgtune-run/1"
REPORT_SCHEMA = "mmgtune-report/1"


def _clean(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path, doc):
    Path(path).write_text(json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def _check_keys(doc, allowed, where):
    unknown = set(doc) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _check_schema(doc, schema, where):
    if doc.get("schema") != schema:
        raise ConfigError(f"{where}: expected schema {schema!r}, got {doc.get('schema')!r}")


def save_params(path, params, **extra):
    write_json(path, {"schema": PARAMS_SCHEMA, "params": params.to_dict(), **extra})


def load_params(path):
    doc = read_json(path)
    _check_schema(doc, PARAMS_SCHEMA, path)
    try:
        return MmgParams.from_dict(doc["params"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def save_ship(path, ship):
    write_json(path, {"schema": SHIP_SCHEMA, "ship": ship.to_dict()})


def load_ship(path):
    doc = read_json(path)
    _check_schema(doc, SHIP_SCHEMA, path)
    _check_keys(doc, ("schema", "ship"), path)
    try:
        return ShipParticulars.from_dict(doc["ship"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


_TUNING_KEYS = ("targets", "a_r", "weights", "cma")
_CMA_KEYS = ("lambda0", "lambda_max", "sigma0", "max_evals", "tol_fun", "tol_x", "penalty_scale")


@dataclass
class RunConfig:
    """Settings shared by the CLI commands; every field may be overridden by flags."""

    ship: str | None = None
    base_params: str | None = None
    manifest: str | None = None
    output_dir: str | None = None
    seed: int = 0
    tuning: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path):
        doc = read_json(path)
        _check_schema(doc, RUN_SCHEMA, path)
        _check_keys(doc, ("schema", "ship", "base_params", "manifest", "output_dir", "seed", "tuning"), path)
        tuning = doc.get("tuning", {})
        _check_keys(tuning, _TUNING_KEYS, f"{path}: tuning")
        _check_keys(tuning.get("cma", {}), _CMA_KEYS, f"{path}: tuning.cma")
        base = Path(path).parent

        def resolve(key):
            value = doc.get(key)
            return None if value is None else str(base / value)

        return cls(resolve("ship"), resolve("base_params"), resolve("manifest"),
                   resolve("output_dir"), int(doc.get("seed", 0)), tuning)

    def load_ship(self):
        return load_ship(self.ship) if self.ship else ShipParticulars()

    def load_base_params(self):
        return load_params(self.base_params) if self.base_params else MmgParams()


def reports_equal(a, b):
    """Compare two report documents ignoring the timing block."""
    strip = lambda d: {k: v for k, v in d.items() if k != "timing"}
    return strip(a) == strip(b)
