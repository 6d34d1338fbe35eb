"""Command-line front end.

    lagchen ode     integrate the profile system, write the trajectory CSV
    lagchen build   sample the immersion E0 on a grid, write JSON
    lagchen verify  run the verification sweep, write the JSON report
    lagchen report  tabulate one or more reports

Exit codes: 0 pass, 1 verification failure, 2 usage/config error,
3 numerical failure (singularity/divergence).
"""
import argparse
import csv
import json
import logging
import os
import sys
import time

from . import __version__
from ._accel import backend
from .errors import DivergenceError, SingularityError
from .profile import ProfileState, integrate
from .surfaces import CATALOG, CONTROLS
from .verify import CASES, DEFAULT_TOLERANCES, ProfileIncomplete, RunConfig, run_verification, sample_immersion

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("lagchen")


class UsageError(Exception):
    pass


def _grid(text):
    parts = text.lower().split("x")
    try:
        counts = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like TxUxV, got {text!r}")
    if len(counts) != 3 or min(counts) < 2:
        raise argparse.ArgumentTypeError(f"grid needs three counts >= 2, got {text!r}")
    return counts


def _tol(text):
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"--tol expects KEY=VAL, got {text!r}")
    if key not in DEFAULT_TOLERANCES:
        raise argparse.ArgumentTypeError(f"unknown tolerance {key!r}; known: {', '.join(sorted(DEFAULT_TOLERANCES))}")
    try:
        return key, float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {key} needs a number, got {val!r}")


def _common(p):
    p.add_argument("--surface", choices=sorted(CATALOG) + sorted(CONTROLS), default="clifford")
    p.add_argument("--b1", type=float, default=0.0)
    p.add_argument("--lam2", type=float, default=0.5)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=0.6)
    p.add_argument("--ode-step", type=float, default=1e-3)
    p.add_argument("--grid", type=_grid, default=(3, 3, 3), help="sample counts TxUxV (default 3x3x3)")
    p.add_argument("--fd-step", type=float, default=1e-3, help="relative first-derivative step")
    p.add_argument("--tol", type=_tol, action="append", default=[], metavar="KEY=VAL")
    p.add_argument("--out", default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lagchen",
        description="Build Lagrangian 3-folds of CP^3 from a minimal horizontal surface and verify their invariants.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ode", help="integrate the profile system")
    _common(p)
    p.add_argument("--reverse", action="store_true", help="integrate back to t0 and report the endpoint error")

    p = sub.add_parser("build", help="sample the constructed immersion")
    _common(p)

    p = sub.add_parser("verify", help="run the verification sweep")
    _common(p)
    p.add_argument("--case", choices=CASES, default="construction")

    p = sub.add_parser("report", help="tabulate verification reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", default=None, help="CSV output path")
    return parser


def config_from_args(args):
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(dict(args.tol))
    cfg = RunConfig(
        surface=args.surface,
        b1=args.b1,
        lam2=args.lam2,
        t0=args.t0,
        t1=args.t1,
        ode_step=args.ode_step,
        grid=tuple(args.grid),
        fd_step=args.fd_step,
        tolerances=tolerances,
        case=getattr(args, "case", "construction"),
        out=args.out,
    )
    if cfg.lam2 < 0:
        log.info("lam2 < 0: using the sign-flipped profile (b1, lam2) -> (-b1, -lam2)")
    try:
        # lam2 = 0 is reported as a singularity by the integrator, not here
        if cfg.lam2 != 0:
            cfg.normalized().validate()
    except ValueError as exc:
        raise UsageError(str(exc))
    return cfg.normalized() if cfg.lam2 != 0 else cfg


def _write_json(obj, path):
    text = json.dumps(obj, indent=1, sort_keys=False, allow_nan=False)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_ode(args):
    cfg = config_from_args(args)
    traj = integrate(ProfileState(cfg.t0, cfg.b1, cfg.lam2), cfg.t1, step=cfg.ode_step)
    if cfg.out:
        traj.to_csv(cfg.out)
    drift_tol = cfg.tolerances["ode_drift"]
    print(f"status      {traj.status}")
    print(f"t reached   {traj.t[-1]:.17g}")
    print(f"knots       {len(traj.t)}")
    print(f"I(t0)       {traj.first_integral_value:.17g}")
    print(f"max drift   {traj.max_drift:.3e}  (tol {drift_tol:g})")
    code = EXIT_PASS if traj.max_drift < drift_tol else EXIT_FAIL
    if args.reverse and traj.complete:
        back = integrate(traj.last_state, cfg.t0, step=cfg.ode_step)
        err = max(abs(back.b1[-1] - cfg.b1), abs(back.lam2[-1] - cfg.lam2))
        print(f"reversal    {err:.3e}")
    if not traj.complete:
        print(f"profile stopped early ({traj.status}); last valid t = {traj.t[-1]:.17g}", file=sys.stderr)
        return EXIT_NUMERIC
    return code


def cmd_build(args):
    cfg = config_from_args(args)
    out = sample_immersion(cfg)
    _write_json(out, cfg.out)
    m = out["metadata"]
    log.info("%d records, unit-norm deviation %.3e, horizontality %.3e",
             m["count"], m["max_unit_norm_deviation"], m["max_horizontality"])
    return EXIT_PASS


def cmd_verify(args):
    cfg = config_from_args(args)
    report = run_verification(cfg)
    report["provenance"] = {"tool": "lagchen", "version": __version__, "backend": backend(),
                            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    _write_json(report, cfg.out)
    for name, crit in report["pass"].items():
        val = crit["value"]
        shown = f"{val:.3e}" if isinstance(val, float) else str(val)
        print(f"{'PASS' if crit['pass'] else 'FAIL'}  {name:24s} {shown}  (tol {crit['tol']})", file=sys.stderr)
    return EXIT_PASS if report["all_pass"] else EXIT_FAIL


class ReportParseError(Exception):
    pass


def _load_report(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportParseError(f"{path}: {exc}")
    if not isinstance(data, dict) or "samples" not in data or not isinstance(data["samples"], list):
        raise ReportParseError(f"{path}: not a verification report (missing 'samples')")
    return data


def _summarize(path, data):
    rows = []
    for i, rec in enumerate(data["samples"]):
        try:
            rows.append((float(rec.get("lam2_profile", rec["lam2"])), float(rec["H_norm_sq"]), float(rec["delta"]),
                         float(rec["improved_gap"]), float(rec["classical_slack"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ReportParseError(f"{path}: record {i}: {exc!r}")
    if not rows:
        raise ReportParseError(f"{path}: report has no complete records")
    lam, hsq, delta, gap, slack = zip(*rows)
    slack_check = max(abs(s - 3 * l * l) for l, s in zip(lam, slack))
    return {
        "file": os.path.basename(path),
        "lam2_min": min(lam), "lam2_max": max(lam),
        "H_norm_sq_min": min(hsq), "H_norm_sq_max": max(hsq),
        "delta_min": min(delta), "delta_max": max(delta),
        "improved_gap_max": max(abs(g) for g in gap),
        "classical_slack_min": min(slack), "classical_slack_max": max(slack),
        "slack_vs_3lam2sq": slack_check,
        "all_pass": bool(data.get("all_pass", False)),
    }


def cmd_report(args):
    rows = [_summarize(p, _load_report(p)) for p in sorted(args.reports)]
    cols = list(rows[0])
    header = f"{'file':24s} {'lam2':>21s} {'|H|^2':>21s} {'delta':>21s} {'gap':>9s} {'slack':>21s} {'slack-3l^2':>10s} pass"
    print(header)
    for r in rows:
        print(f"{r['file'][:24]:24s} "
              f"{r['lam2_min']:9.6f}..{r['lam2_max']:<10.6f} "
              f"{r['H_norm_sq_min']:9.6f}..{r['H_norm_sq_max']:<10.6f} "
              f"{r['delta_min']:9.6f}..{r['delta_max']:<10.6f} "
              f"{r['improved_gap_max']:9.2e} "
              f"{r['classical_slack_min']:9.6f}..{r['classical_slack_max']:<10.6f} "
              f"{r['slack_vs_3lam2sq']:10.2e} {'yes' if r['all_pass'] else 'no'}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            for r in rows:
                w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})
    return EXIT_PASS


COMMANDS = {"ode": cmd_ode, "build": cmd_build, "verify": cmd_verify, "report": cmd_report}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits with status 2 on bad flags
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ReportParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProfileIncomplete as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SingularityError, DivergenceError) as exc:
        state = getattr(exc, "state", None) or getattr(exc, "last_state", None)
        where = f" (last valid t = {state.t:.17g})" if state is not None else ""
        print(f"numerical failure: {exc}{where}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
