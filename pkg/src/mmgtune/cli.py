"""Command line front end: simulate | gen-trials | tune | evaluate | sweep."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import traceback
from pathlib import Path

import numpy as np

from . import config as cfg
from . import dynamics, trials as trial_data, tuning
from .exceptions import ConfigError, MmgError
from .optimizer import CmaConfig

log = logging.getLogger("mmgtune")

KNOT = 1852.0 / 3600.0
DEFAULT_SWEEP = (0.2, 0.3, 0.4, 0.5, 0.6)


def _float_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _out_dir(args, run):
    out = Path(args.out or run.output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_config(args):
    return cfg.RunConfig.load(args.config) if args.config else cfg.RunConfig()


def _ship_and_base(args, run):
    ship = cfg.load_ship(args.ship) if args.ship else run.load_ship()
    base = cfg.load_params(args.params) if getattr(args, "params", None) else run.load_base_params()
    return ship, base


def _write_track(path, traj, lpp):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x_over_lpp", "y_over_lpp", "psi_deg"])
        for t, z in zip(traj.time, traj.states):
            writer.writerow([repr(float(t)), repr(z[0] / lpp), repr(z[1] / lpp), repr(math.degrees(z[2]))])


def cmd_simulate(args):
    run = _run_config(args)
    ship, base = _ship_and_base(args, run)
    if args.no_propeller_lateral:
        base = base.replace(propeller_lateral=False)
    out = _out_dir(args, run)
    u0 = args.u0 if args.u0 is not None else args.u0_knots * KNOT
    signs = {"pos": (1,), "neg": (-1,), "both": (1, -1)}[args.delta_sign]
    if args.delta == 0:
        signs = (1,)
    summary = {"dt": args.dt, "u0": u0, "np_rpm": args.np_rpm, "runs": {}}
    for sign in signs:
        delta = sign * args.delta
        rate = args.rudder_rate if args.rudder_rate else 1e9
        spec = trial_data.ManeuverSpec(delta, rudder_rate_deg_s=rate, np_rpm=args.np_rpm,
                                       u0=u0, duration=args.duration)
        trial = trial_data.generate_synthetic_trial(base, spec, ship, dt=args.dt)
        label = spec.label
        trial_data.save_trial(trial, out / f"sim_{label}.csv")
        traj = dynamics.Trajectory(trial.dt, trial.states, trial.controls)
        _write_track(out / f"track_{label}.csv", traj, ship.lpp)
        tc = dynamics.turning_circle(traj)
        summary["runs"][label] = {
            "completed_circle": tc.completed,
            "steady_diameter_m": _float_or_none(tc.steady_diameter),
            "tactical_diameter_m": _float_or_none(tc.tactical_diameter),
            "advance_m": _float_or_none(tc.advance),
            "end_state": trial.data[-1, :6].tolist(),
        }
        print(f"{label}: circle={'yes' if tc.completed else 'no'} "
              f"steady_diameter={tc.steady_diameter / ship.lpp:.3f} Lpp "
              f"tactical_diameter={tc.tactical_diameter / ship.lpp:.3f} Lpp")
    if len(signs) == 2:
        right = summary["runs"][f"turn{args.delta:+g}"]["steady_diameter_m"]
        left = summary["runs"][f"turn{-args.delta:+g}"]["steady_diameter_m"]
        if right is not None and left is not None:
            summary["right_larger_than_left"] = right > left
            print(f"right/left steady diameter ratio: {right / left:.4f}")
    cfg.write_json(out / "simulate_summary.json", summary)
    return 0


def _perturbed_params(base, targets, perturb, seed):
    selector = tuning.ParamSelector(tuple(targets))
    pre = selector.values(base)
    rng = np.random.default_rng(seed)
    x = pre + rng.uniform(-perturb, perturb, pre.size) * np.abs(pre)
    return tuning.apply_candidate(base, selector, x)


def cmd_gen_trials(args):
    run = _run_config(args)
    ship, base = _ship_and_base(args, run)
    out = _out_dir(args, run)
    seed = args.seed if args.seed is not None else run.seed
    targets = args.targets or run.tuning.get("targets", tuning.DEFAULT_TARGETS)
    theta_true = base
    if args.theta_true_perturb:
        theta_true = _perturbed_params(base, targets, args.theta_true_perturb, seed)
    cfg.save_params(out / "theta_true.json", theta_true,
                    perturb=args.theta_true_perturb, seed=seed, targets=list(targets))
    noise = trial_data.NoiseModel.none() if args.noise == 0 else trial_data.NoiseModel(
        *(args.noise * s for s in (1.0, 0.2, 0.05, 0.05, 0.02)))
    specs = trial_data.paper_suite(duration=args.duration)
    suite = trial_data.generate_suite(theta_true, ship, noise, seed, args.dt, specs)
    files = {}
    for trial in suite:
        path = out / f"{trial.label}.csv"
        trial_data.save_trial(trial, path)
        reloaded = trial_data.load_trial(path)
        if not np.allclose(reloaded.data, trial.data, rtol=1e-12, atol=1e-9):
            raise MmgError(f"round trip of {path} changed values")
        files[trial.label] = path
    trial_data.save_manifest(out / "manifest.json", files, trial_data.make_split(suite))
    print(f"wrote {len(suite)} trials and manifest.json to {out}")
    return 0


def _tuning_options(args, run):
    t = run.tuning
    cma_cfg = dict(t.get("cma", {}))
    for key in ("lambda0", "lambda_max", "sigma0", "max_evals"):
        value = getattr(args, key)
        if value is not None:
            cma_cfg[key] = value
    seed = args.seed if args.seed is not None else run.seed
    targets = tuple(args.targets or t.get("targets", tuning.DEFAULT_TARGETS))
    weights = args.weights or t.get("weights")
    a_rs = args.ar or t.get("a_r")
    if a_rs is not None and not isinstance(a_rs, (list, tuple)):
        a_rs = [a_rs]
    return targets, weights, a_rs, CmaConfig(seed=seed, **cma_cfg)


def _load_dataset(args, run):
    manifest = args.manifest or run.manifest
    if not manifest:
        raise ConfigError("a dataset manifest is required (--manifest or config 'manifest')")
    return trial_data.load_manifest(manifest)


def _tune_one(a_r, targets, weights, cma, split, base, ship, out):
    spec = tuning.TuningSpec(tuning.ParamSelector(targets), a_r, weights, split.tune, split.test, cma)
    theta_star, report = tuning.tune(spec, base, ship)
    tag = f"ar{a_r:g}"
    report.optimizer.write_history_csv(out / f"history_{tag}.csv")
    cfg.save_params(out / f"params_{tag}.json", theta_star)
    cfg.write_json(out / f"report_{tag}.json",
                   {"schema": cfg.REPORT_SCHEMA, **report.to_dict(history_file=f"history_{tag}.csv")})
    test = "" if report.tune_only else f" J_test pre={report.j_test_pre:.6g} star={report.j_test_star:.6g}"
    print(f"a_r={a_r:g}: J_tune pre={report.j_tune_pre:.6g} star={report.j_tune_star:.6g}{test} "
          f"evals={report.evals_used}")
    return report


def _validate_tuning(targets, weights, a_rs, base):
    if not a_rs:
        raise ConfigError("at least one --ar value is required")
    for a_r in a_rs:
        if not a_r > 0:
            raise ConfigError(f"a_r must be positive, got {a_r}")
        tuning.exploration_box(tuning.ParamSelector(targets).values(base), a_r)
    if weights is not None:
        tuning.check_weights(weights)


def cmd_tune(args):
    run = _run_config(args)
    ship, base = _ship_and_base(args, run)
    targets, weights, a_rs, cma = _tuning_options(args, run)
    _validate_tuning(targets, weights, a_rs, base)
    _, split = _load_dataset(args, run)
    out = _out_dir(args, run)
    for a_r in a_rs:
        _tune_one(a_r, targets, weights, cma, split, base, ship, out)
    return 0


def cmd_sweep(args):
    run = _run_config(args)
    ship, base = _ship_and_base(args, run)
    targets, weights, a_rs, cma = _tuning_options(args, run)
    a_rs = a_rs or list(DEFAULT_SWEEP)
    _validate_tuning(targets, weights, a_rs, base)
    _, split = _load_dataset(args, run)
    out = _out_dir(args, run)
    rows = [_tune_one(a_r, targets, weights, cma, split, base, ship, out) for a_r in a_rs]
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["a_r", "J_tune", "J_test", "J_tune_pre", "J_test_pre"])
        for r in rows:
            writer.writerow([r.a_r, repr(r.j_tune_star), repr(r.j_test_star), repr(r.j_tune_pre),
                             repr(r.j_test_pre)])
    print(f"wrote sweep.csv with {len(rows)} rows")
    return 0


def cmd_evaluate(args):
    run = _run_config(args)
    ship, _ = _ship_and_base(args, run)
    theta = cfg.load_params(args.params) if args.params else run.load_base_params()
    _, split = _load_dataset(args, run)
    trials = {"tune": split.tune, "test": split.test, "all": split.tune + split.test}[args.dataset]
    if not trials:
        raise ConfigError(f"dataset {args.dataset!r} is empty")
    weights = args.weights or run.tuning.get("weights") or tuning.default_weights(ship)
    result = tuning.evaluate(theta, trials, weights, ship)
    out = _out_dir(args, run)
    name = args.name or (Path(args.params).stem if args.params else "pre")
    with open(out / f"J_{name}_{args.dataset}.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "J", "status"])
        for label, j in result.per_trial.items():
            writer.writerow([label, repr(j), result.failures.get(label, "ok")])
        writer.writerow(["total", repr(result.total), "ok" if not result.failures else "failed"])
    for trial in trials:
        traj = result.trajectories[trial.label]
        with open(out / f"overlay_{name}_{trial.label}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "rec_x_over_lpp", "rec_y_over_lpp", "rec_psi_deg",
                             "sim_x_over_lpp", "sim_y_over_lpp", "sim_psi_deg"])
            for i, t in enumerate(trial.time):
                rec = trial.data[i]
                sim = traj.states[i] if traj is not None else (math.nan,) * 3
                writer.writerow([repr(float(t)), repr(rec[0] / ship.lpp), repr(rec[1] / ship.lpp),
                                 repr(math.degrees(rec[2])), repr(sim[0] / ship.lpp),
                                 repr(sim[1] / ship.lpp), repr(math.degrees(sim[2]))])
    print(f"{name} on {args.dataset}: J={result.total:.6g} "
          + " ".join(f"{k}={v:.4g}" for k, v in result.per_trial.items()))
    return 0 if not result.failures else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="mmgtune", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="run config JSON")
        p.add_argument("--ship", help="ship particulars JSON")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)

    def tuning_flags(p):
        p.add_argument("--manifest", help="dataset manifest JSON")
        p.add_argument("--params", help="base (pre-determined) parameters JSON")
        p.add_argument("--ar", type=float, action="append", help="exploration half-width; repeatable")
        p.add_argument("--targets", nargs="+")
        p.add_argument("--weights", type=float, nargs=3, metavar=("W_P1", "W_P2", "W_PSI"))
        p.add_argument("--max-evals", dest="max_evals", type=int)
        p.add_argument("--lambda0", type=int)
        p.add_argument("--lambda-max", dest="lambda_max", type=int)
        p.add_argument("--sigma0", type=float)

    p = sub.add_parser("simulate", help="simulate a turning maneuver")
    common(p)
    p.add_argument("--params", help="MMG parameters JSON")
    p.add_argument("--delta", type=float, default=35.0, help="rudder angle [deg]")
    p.add_argument("--delta-sign", choices=("pos", "neg", "both"), default="both")
    p.add_argument("--np-rpm", type=float, default=106.0)
    p.add_argument("--u0-knots", type=float, default=6.0)
    p.add_argument("--u0", type=float, help="initial surge speed [m/s]; overrides --u0-knots")
    p.add_argument("--duration", type=float, default=600.0)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--rudder-rate", type=float, help="rudder rate [deg/s]; default is a step")
    p.add_argument("--no-propeller-lateral", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen-trials", help="generate the synthetic eight-trial suite")
    common(p)
    p.add_argument("--params", help="base parameters JSON")
    p.add_argument("--noise", type=float, default=1.0, help="noise scale; 0 for noiseless")
    p.add_argument("--theta-true-perturb", type=float, default=0.0)
    p.add_argument("--targets", nargs="+")
    p.add_argument("--duration", type=float, default=600.0)
    p.add_argument("--dt", type=float, default=1.0)
    p.set_defaults(func=cmd_gen_trials)

    p = sub.add_parser("tune", help="fine-tune parameters on the tune split")
    common(p)
    tuning_flags(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("sweep", help="tune for several a_r and tabulate J")
    common(p)
    tuning_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("evaluate", help="evaluate a parameter set on a dataset")
    common(p)
    p.add_argument("--manifest")
    p.add_argument("--params", help="parameters to evaluate; default pre-determined")
    p.add_argument("--dataset", choices=("tune", "test", "all"), default="test")
    p.add_argument("--weights", type=float, nargs=3)
    p.add_argument("--name", help="tag used in output file names")
    p.set_defaults(func=cmd_evaluate)
    return parser


def _origin(exc):
    module = "cli"
    tb = exc.__traceback__
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("mmgtune."):
            module = name.split(".", 1)[1]
        tb = tb.tb_next
    return module


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (MmgError, ValueError, KeyError, OSError) as exc:
        if args.verbose:
            traceback.print_exc()
        print(f"mmgtune {args.command}: {_origin(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, (ConfigError, ValueError)) else 1


if __name__ == "__main__":
    sys.exit(main())
