"""Command-line interface: ``rmxest {fit,ic,cniper,simulate}``.

Exit codes: 0 success, 2 usage, 3 data, 4 solver.

The Gamma model ships without embedded data; supply a CSV file with ``--data``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .cniper import cniper_points
from .data import EMBEDDED, ingest
from .errors import (
    InvalidData,
    InvalidStart,
    NoCrossing,
    OptimizerFailure,
    QuadratureFailure,
    RankDeficiency,
    RmxError,
    SolverFailure,
)
from .families import FAMILIES, get_family
from .ic import CONTAMINATION, TOTAL_VARIATION, solve_ic
from .onestep import roptest_pipeline
from .rmx import RadiusInterval, rmx_ic
from .simulate import ContaminationScenario, mc_compare, standard_estimators
from .start import START_METHODS, start_estimate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 2, 3, 4
NEIGHBORS = {"c": CONTAMINATION, "v": TOTAL_VARIATION}
SOLVER_ERRORS = (SolverFailure, NoCrossing, QuadratureFailure, OptimizerFailure, RankDeficiency)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# formatting helpers
# ---------------------------------------------------------------------------


def _finite(v):
    """JSON-safe value: infinities and NaN become ``None``."""
    if isinstance(v, dict):
        return {k: _finite(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_finite(x) for x in v]
    if isinstance(v, np.ndarray):
        return _finite(v.tolist())
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def dump_json(obj) -> str:
    return json.dumps(_finite(obj), indent=2, allow_nan=False) + "\n"


def _decimals(model: str) -> int:
    return 4 if model == "poisson" else 2


def _fmt(v, d) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return "inf" if v is not None and v > 0 else "n/a"
    return f"{v:.{d}f}"


def _parse_theta(text: str):
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse --theta {text!r}; expected comma-separated numbers") from None


def _check_eps(args, required=True):
    lo, up = args.eps_lower, args.eps_upper
    if lo is None or up is None:
        if required:
            raise UsageError("--eps-lower and --eps-upper are required")
        return None
    if not (0.0 <= lo < up <= 0.5):
        raise UsageError(f"need 0 <= eps-lower < eps-upper <= 0.5, got [{lo}, {up}]")
    return lo, up


def _check_start(args):
    if args.start == "median-mad" and args.model != "normal-loc-scale":
        raise UsageError("--start median-mad is only available with --model normal-loc-scale")


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------


def fit_document(args, report) -> dict:
    names = list(report.param_names)
    return {
        "model": args.model,
        "neighbor": args.neighbor,
        "eps": [report.eps[0], report.eps[1]],
        "radii": {"r_lo": report.r_lo, "r_up": report.r_up, "r0": report.r0},
        "start": {"method": report.start_method, "estimate": dict(zip(names, report.start.tolist()))},
        "estimate": dict(zip(names, report.final.tolist())),
        "multipliers": {
            "A": report.A.tolist(),
            "a": np.atleast_1d(report.a).tolist(),
            "b": report.b,
            "c": report.c,
        },
        "diagnostics": {
            "n": report.n,
            "variance": report.variance,
            "mse": report.mse,
            "tr_A": report.tr_A,
            "residuals": dict(report.residuals),
            "shift_norm": float(np.linalg.norm(report.shift)),
            "theta_shift": report.theta_shift,
            "approximate": report.approximate,
        },
    }


def cmd_fit(args, out):
    eps = _check_eps(args)
    _check_start(args)
    if not args.data:
        raise UsageError("--data is required (a CSV path or embedded:<name>)")
    family = get_family(args.model)
    data = ingest(args.data)
    report = roptest_pipeline(family, data, eps[0], eps[1], NEIGHBORS[args.neighbor], args.start)
    doc = fit_document(args, report)
    if args.output == "json":
        out.write(dump_json(doc))
    elif args.output == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["parameter", "start", "estimate"])
        for name, s, f in zip(report.param_names, report.start, report.final):
            w.writerow([name, repr(float(s)), repr(float(f))])
    else:
        d = _decimals(args.model)
        out.write(f"model      {args.model} (n = {report.n})\n")
        out.write(f"neighbor   {report.neighborhood}, eps in [{eps[0]}, {eps[1]}]\n")
        out.write(f"radii      r_lo = {report.r_lo:.4f}, r_up = {report.r_up:.4f}, r0 = {report.r0:.4f}\n")
        out.write(f"{'':10} {'start (' + report.start_method + ')':>18} {'rmx':>12}\n")
        for name, s, f in zip(report.param_names, report.start, report.final):
            out.write(f"{name:10} {_fmt(float(s), d):>18} {_fmt(float(f), d):>12}\n")
        out.write(f"clip b     {_fmt(report.b, 4)}\n")
        out.write(f"max MSE    {_fmt(report.mse, 4)}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# ic
# ---------------------------------------------------------------------------


def _ic_grid(family, theta, npts):
    if npts == 1:
        return np.atleast_1d(np.asarray(family.quantile(theta, 0.5), dtype=float))
    if family.support.is_lattice:
        lo, hi = family.lattice_range(theta, 1e-14)
        return np.arange(lo, hi + 1, dtype=float)
    return np.linspace(float(family.quantile(theta, 0.001)), float(family.quantile(theta, 0.999)), npts)


def cmd_ic(args, out):
    _check_start(args)
    if args.grid < 1:
        raise UsageError("--grid must be at least 1")
    family = get_family(args.model)
    nb = NEIGHBORS[args.neighbor]
    data = ingest(args.data) if args.data else None
    if args.theta is not None:
        theta = family.check(_parse_theta(args.theta))
    elif data is not None:
        theta = start_estimate(args.start, family, data)
    else:
        raise UsageError("ic needs --theta or --data")
    if args.radius is not None:
        if args.radius < 0:
            raise UsageError("--radius must be nonnegative")
        r0 = float(args.radius)
        ic, _ = solve_ic(family, theta, r0, nb)
    else:
        eps = _check_eps(args)
        n = args.n if args.n is not None else (data.n if data is not None else None)
        if n is None:
            raise UsageError("ic needs --radius, or an eps interval with --n or --data")
        ic, _, r0 = rmx_ic(family, theta, RadiusInterval.from_sizes(eps[0], eps[1], n), nb)
    x = _ic_grid(family, theta, args.grid)
    psi = ic.eval(x)
    w = ic.weight(x)
    header = {
        "model": args.model, "neighbor": args.neighbor, "theta": theta.tolist(), "radius": r0,
        "A": ic.A.tolist(), "a": np.atleast_1d(ic.a).tolist(), "b": ic.b, "c": ic.c,
    }
    if args.output == "json":
        doc = dict(header, x=x.tolist(), psi=psi.tolist(), w=w.tolist())
        out.write(dump_json(doc))
        return EXIT_OK
    out.write("# " + json.dumps(_finite(header)) + "\n")
    wr = csv.writer(out, lineterminator="\n")
    wr.writerow(["x"] + [f"psi_{name}" for name in family.param_names] + ["w"])
    for xi, pi, wi in zip(x, psi, w):
        wr.writerow([repr(float(xi))] + [repr(float(v)) for v in pi] + [repr(float(wi))])
    return EXIT_OK


# ---------------------------------------------------------------------------
# cniper
# ---------------------------------------------------------------------------


def cmd_cniper(args, out):
    if args.theta is None or args.size is None or args.n is None:
        raise UsageError("cniper needs --theta, --size and --n")
    if args.neighbor != "c":
        raise UsageError("cniper points are defined for --neighbor c only")
    if not 0.0 < args.size <= 1.0 or args.n < 1:
        raise UsageError("need 0 < --size <= 1 and --n >= 1")
    family = get_family(args.model)
    theta = family.check(_parse_theta(args.theta))
    r = math.sqrt(args.n) * args.size
    rep = cniper_points(family, theta, r)
    doc = {
        "model": args.model, "theta": list(rep.theta), "size": args.size, "n": args.n, "radius": rep.r,
        "status": rep.status, "lower_point": rep.lower_point, "upper_point": rep.upper_point,
        "region": [list(p) for p in rep.region], "prob_ideal": rep.prob_ideal,
        "tr_A": rep.tr_A, "tr_I_inv": rep.tr_I_inv,
    }
    if args.output == "json":
        out.write(dump_json(doc))
    elif args.output == "csv":
        wr = csv.writer(out, lineterminator="\n")
        wr.writerow(["lower_point", "upper_point", "prob_ideal"])
        wr.writerow([_csv_num(rep.lower_point), _csv_num(rep.upper_point), repr(rep.prob_ideal)])
    else:
        out.write(f"model        {args.model}, theta = {', '.join(f'{t:g}' for t in rep.theta)}\n")
        out.write(f"radius       {rep.r:.4f} (size {args.size}, n {args.n})\n")
        out.write(f"status       {rep.status}\n")
        out.write(f"lower point  {_fmt(rep.lower_point, 2)}\n")
        out.write(f"upper point  {_fmt(rep.upper_point, 2)}\n")
        out.write(f"region       {_region_text(rep.region)}\n")
        out.write(f"P(region)    {100 * rep.prob_ideal:.2f}%\n")
    return EXIT_OK


def _csv_num(v):
    return "" if v is None else repr(float(v))


def _region_text(region):
    if not region:
        return "empty"
    return " U ".join(f"({a:.2f}, {b:.2f})" for a, b in region)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(args, out):
    if args.theta is None or args.n is None:
        raise UsageError("simulate needs --theta and --n")
    size = 0.0 if args.size is None else args.size
    if size > 0 and args.dirac is None:
        raise UsageError("simulate with --size > 0 needs --dirac")
    _check_start(args)
    family = get_family(args.model)
    names = [e.strip() for e in args.estimators.split(",") if e.strip()]
    eps = _check_eps(args, required="rmx" in names) or (0.05, 0.20)
    scenario = ContaminationScenario(
        family, _parse_theta(args.theta), size, 0.0 if args.dirac is None else args.dirac, args.n, args.seed
    )
    ests = standard_estimators(family, names, eps[0], eps[1], NEIGHBORS[args.neighbor], args.start)
    table = mc_compare(scenario, ests, reps=args.reps, seed=args.seed)
    if args.output == "json":
        doc = {
            "model": args.model, "theta": list(scenario.theta), "size": size, "dirac": args.dirac,
            "n": args.n, "reps": args.reps, "seed": args.seed,
            "rows": [
                {"estimator": r.label, "n_mse": r.n_mse, "se": r.se, "used": r.used,
                 "failures": r.failures, "shift_violations": r.shift_violations}
                for r in table.rows
            ],
        }
        out.write(dump_json(doc))
    elif args.output == "csv":
        wr = csv.writer(out, lineterminator="\n")
        wr.writerow(["estimator", "n_mse", "se", "used", "failures", "shift_violations"])
        for r in table.rows:
            wr.writerow([r.label, repr(r.n_mse), repr(r.se), r.used, r.failures, r.shift_violations])
    else:
        out.write(f"{args.model} theta = {args.theta}, s = {size}, n = {args.n}, "
                  f"reps = {args.reps}, seed = {args.seed}\n")
        out.write(f"{'estimator':12} {'n*MSE':>10} {'MC se':>10} {'failures':>9}\n")
        for r in table.rows:
            flag = " *" if r.flagged else ""
            out.write(f"{r.label:12} {r.n_mse:10.4f} {r.se:10.4f} {r.failures:9d}{flag}\n")
        if any(r.flagged for r in table.rows):
            out.write("* failed replications excluded from the mean\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=sorted(FAMILIES), required=True)
    common.add_argument("--neighbor", choices=sorted(NEIGHBORS), default="c",
                        help="c = contamination, v = total variation")
    common.add_argument("--eps-lower", type=float)
    common.add_argument("--eps-upper", type=float)
    common.add_argument("--start", choices=sorted(START_METHODS), default="cvm")
    common.add_argument("--data", help=f"CSV path or embedded:<name> ({', '.join(sorted(EMBEDDED))})")
    common.add_argument("--output", choices=("human", "json", "csv"), default="human")

    parser = argparse.ArgumentParser(
        prog="rmxest",
        description="Radius-minmax one-step estimators for normal, Gamma and Poisson models.",
        epilog="The Gamma model has no embedded dataset; pass a CSV file with --data.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("fit", parents=[common], help="rmx one-step estimate for a dataset")

    p = sub.add_parser("ic", parents=[common], help="IC values on a grid as CSV")
    p.add_argument("--theta")
    p.add_argument("--radius", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--grid", type=int, default=201)

    p = sub.add_parser("cniper", parents=[common], help="cniper points and region probability")
    p.add_argument("--theta")
    p.add_argument("--size", type=float)
    p.add_argument("--n", type=int)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo n*MSE comparison")
    p.add_argument("--theta")
    p.add_argument("--size", type=float, help="contamination fraction s")
    p.add_argument("--dirac", type=float, help="contaminating point mass location")
    p.add_argument("--n", type=int)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimators", default="mle,rmx")
    return parser


COMMANDS = {"fit": cmd_fit, "ic": cmd_ic, "cniper": cmd_cniper, "simulate": cmd_simulate}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"rmxest: usage error: {exc}\n")
        return EXIT_USAGE
    except (InvalidData, InvalidStart) as exc:
        err.write(f"rmxest: data error: {exc}\n")
        return EXIT_DATA
    except SOLVER_ERRORS as exc:
        err.write(f"rmxest: solver error: {exc}\n")
        for key in ("history", "endpoint_values", "estimates", "best", "suggestion"):
            val = getattr(exc, key, None)
            if val is not None and val != []:
                err.write(f"  {key}: {val}\n")
        return EXIT_SOLVER
    except (RmxError, ValueError) as exc:
        err.write(f"rmxest: usage error: {exc}\n")
        return EXIT_USAGE


def run(argv=None) -> tuple[int, str, str]:
    """Run the CLI capturing output (for tests and notebooks)."""
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
