"""Command-line interface.

Exit codes: 0 success or member, 1 nonmember or failed check, 2 invalid
input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .curvature import TOL_EQ, RelationSpec, SearchConfig, relation_check, riemann, sec_extremes
from .diffeo import diffeo_to_dict
from .errors import JetInputError, NumericalFailure
from .jets import jet_to_dict, loads_jet
from .models import conformal_jet, random_fa_sample
from .normal_coords import NORMAL_FORM_TOL, normalize
from .retraction import retract, retract_check_fa, trace_to_csv, trace_to_json

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


def _read_jet(path):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path) as fh:
                text = fh.read()
    except OSError as exc:
        raise JetInputError(f"cannot read {path}: {exc}") from None
    return loads_jet(text)


def _emit(doc, out):
    out.write(json.dumps(doc) + "\n")


def _search_cfg(args):
    return SearchConfig(n_starts=args.planes, seed=args.seed)


def _extremes(ext):
    return {
        "sec_min": ext.min_sec,
        "sec_max": ext.max_sec,
        "certified": ext.certified,
        "bracket": [ext.bracket_low, ext.bracket_high],
    }


def cmd_curvature(args, out):
    jet = _read_jet(args.jet)
    R = riemann(jet)
    ext = sec_extremes(jet, _search_cfg(args), R)
    _emit({"riemann_maxabs": R.maxabs(), **_extremes(ext)}, out)
    return EXIT_OK


def cmd_check(args, out):
    if not args.delta >= 0:
        raise JetInputError("--delta must be nonnegative")
    jet = _read_jet(args.jet)
    v = relation_check(jet, RelationSpec(args.a, args.delta), _search_cfg(args), tol_eq=args.tol_eq)
    _emit(
        {"member": v.member, "certified": v.certified, "a": args.a, "delta": args.delta, **_extremes(v.extremes)},
        out,
    )
    return EXIT_OK if v.member else EXIT_FAIL


def cmd_normalize(args, out):
    jet = _read_jet(args.jet)
    njet, F = normalize(jet, tol=args.tol_normal)
    _emit({"jet": jet_to_dict(njet), "diffeo": diffeo_to_dict(F)}, out)
    return EXIT_OK


def cmd_model(args, out):
    _emit(jet_to_dict(conformal_jet(args.a, args.m)), out)
    return EXIT_OK


def cmd_sample(args, out):
    if args.amplitude < 0:
        raise JetInputError("--amplitude must be nonnegative")
    _emit(jet_to_dict(random_fa_sample(args.a, args.m, args.seed, args.amplitude)), out)
    return EXIT_OK


def cmd_retract(args, out):
    if args.steps < 1:
        raise JetInputError("--steps must be positive")
    psi = _read_jet(args.jet)
    tau = conformal_jet(args.a, psi.m)
    cfg = _search_cfg(args)
    ts = np.linspace(0.0, 1.0, args.steps + 1)
    trace = retract(psi, tau, ts, cfg=cfg)
    start = relation_check(psi, RelationSpec(args.a, 0.0), cfg, tol_eq=args.tol_eq)
    in_fa = start.member and start.certified
    report = retract_check_fa(trace, args.a, args.tol_fa)
    ok = max(trace.endpoint_residuals) <= args.tol_endpoint and (report.passed or not in_fa)
    summary = {
        "endpoint_residuals": list(trace.endpoint_residuals),
        "start_in_fa": in_fa,
        "fa_deviation": report.max_deviation,
        "passed": ok,
    }
    if args.format == "csv":
        out.write(trace_to_csv(trace))
        sys.stderr.write(json.dumps(summary) + "\n")
    else:
        out.write(trace_to_json(trace, {"summary": summary}) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser():
    p = argparse.ArgumentParser(prog="pinchjet", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def search_flags(sp):
        sp.add_argument("--planes", type=int, default=256, help="random starts for m >= 4 plane search")
        sp.add_argument("--seed", type=int, default=0, help="seed for the plane search")

    sp = sub.add_parser("curvature", help="Riemann tensor size and sectional curvature range")
    sp.add_argument("jet", help="jet JSON file, or - for stdin")
    search_flags(sp)
    sp.set_defaults(func=cmd_curvature)

    sp = sub.add_parser("check", help="membership in the pinching relation")
    sp.add_argument("jet")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--tol-eq", type=float, default=TOL_EQ)
    search_flags(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("normalize", help="normal-coordinate form of a jet")
    sp.add_argument("jet")
    sp.add_argument("--tol-normal", type=float, default=NORMAL_FORM_TOL)
    sp.set_defaults(func=cmd_normalize)

    sp = sub.add_parser("model", help="constant-curvature model jet")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.set_defaults(func=cmd_model)

    sp = sub.add_parser("sample", help="random jet of constant curvature a")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--amplitude", type=float, default=0.2)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("retract", help="retraction trace onto the constant-curvature jet")
    sp.add_argument("jet")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--steps", type=int, default=100)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--tol-endpoint", type=float, default=1e-9)
    sp.add_argument("--tol-fa", type=float, default=1e-6)
    sp.add_argument("--tol-eq", type=float, default=TOL_EQ)
    search_flags(sp)
    sp.set_defaults(func=cmd_retract)
    return p


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except (JetInputError, ValueError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_INPUT
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_NUMERIC


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
