"""Command-line interface.

Problem arguments are either a path to a problem JSON file or the name of a
packaged example (``sdpexact list`` shows them).  Exit codes: 0 success,
1 a verification failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import degrees, gallery, implicit, sdp
from .exactness import certify_at_point, check_exact_sdp
from .model import (
    ProblemSchemaError,
    QuadraticProgram,
    VarietyPoints,
    embed_homogeneous,
    embed_shor,
    problem_from_dict,
)
from .region import Parametrization, sample_boundary, samples_to_csv, read_samples_u


class InputError(Exception):
    """Bad command-line input; ``path`` locates the problem in JSON terms."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _clean(obj):
    """JSON-safe copy: arrays to lists, non-finite floats to None."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dump(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def load_problem(ref: str) -> tuple[QuadraticProgram, VarietyPoints | Parametrization | None, str | None]:
    """``(qp, sampling source, example name)`` for a file path or example name."""
    path = Path(ref)
    if path.is_file():
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise InputError("$", f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
        qp, pts = problem_from_dict(data)
        source = None
        if pts is not None:
            try:
                source = VarietyPoints.checked(qp, pts)
            except ValueError as exc:
                raise InputError("$.points", str(exc)) from None
        return qp, source, None
    try:
        ex = gallery.get(ref)
    except KeyError:
        raise InputError("$", f"{ref!r} is neither a file nor a packaged example") from None
    source = ex.parametrization if ex.parametrization is not None else ex.points
    return ex.qp, source, ex.name


def _options(args) -> sdp.SdpOptions:
    return sdp.SdpOptions(tol_gap=args.tol_gap, rank_tol=args.tol_rank)


def _vector_arg(values, n: int, name: str) -> np.ndarray:
    if values is None:
        raise InputError(f"--{name}", "required")
    if len(values) != n:
        raise InputError(f"--{name}", f"expected {n} values, got {len(values)}")
    return np.array(values, dtype=float)


# --- commands --------------------------------------------------------------------


def cmd_solve(args) -> int:
    qp, _, _ = load_problem(args.problem)
    homogeneous = qp.is_homogeneous() and qp.objective.kind == "general"
    P = embed_homogeneous(qp) if homogeneous else embed_shor(qp)
    sol = sdp.solve(P, _options(args))
    out = {
        "relaxation": "homogeneous" if homogeneous else "lifted",
        "status": sol.status.value,
        "primal_value": sol.primal_value + qp.objective.constant,
        "dual_value": sol.dual_value + qp.objective.constant,
        "gap": sol.gap,
        "iterations": sol.iterations,
        "rank_X": sol.rank_X,
        "rank_Y": sol.rank_Y,
        "strictly_complementary": sol.strictly_complementary,
        "X": sol.X,
        "lambda": sol.lam,
    }
    _emit(_dump(out), args.out)
    return 0


def cmd_exact(args) -> int:
    qp, _, _ = load_problem(args.problem)
    if args.x is not None:
        cert = certify_at_point(qp, _vector_arg(args.x, qp.n, "x"), rank_tol=args.tol_rank)
    else:
        cert = check_exact_sdp(qp, _options(args))
    _emit(_dump(cert.to_dict()), args.out)
    return 0


def cmd_member(args) -> int:
    qp, _, _ = load_problem(args.problem)
    u = _vector_arg(args.u, qp.n, "u")
    target = qp.ed(u) if args.kind == "Ed" else qp.lin(u)
    cert = check_exact_sdp(target, _options(args))
    if args.format == "json":
        out = {"u": u, "kind": args.kind, "verdict": cert.verdict.value, "minimizer": cert.minimizer,
               "objective_value": cert.objective_value}
        _emit(_dump(out), args.out)
    else:
        xs = "" if cert.minimizer is None else " " + " ".join(repr(float(v)) for v in cert.minimizer)
        _emit(f"{cert.verdict.value}{xs}\n", args.out)
    return 0


def cmd_region_sample(args) -> int:
    qp, source, name = load_problem(args.problem)
    if source is None:
        raise InputError("$.points", "boundary sampling needs variety points")
    lam_cap = args.lam_cap
    if lam_cap is None and name is not None:
        lam_cap = gallery.get(name).lam_cap
    samples = sample_boundary(qp, source, args.count, args.seed, kind=args.kind, lam_cap=lam_cap)
    if args.format == "json":
        rows = [{"index": s.index, "x": s.x, "lambda": s.lam, "u": s.u, "det_residual": s.det_residual} for s in samples]
        _emit(_dump(rows), args.out)
    else:
        _emit(samples_to_csv(samples), args.out)
    return 0


def cmd_degrees(args) -> int:
    if args.formula:
        name, *vals = args.formula
        if name not in degrees.FORMULAS:
            raise InputError("--formula", f"unknown formula {name!r}; choose from {', '.join(sorted(degrees.FORMULAS))}")
        try:
            value = degrees.FORMULAS[name](*(int(v) for v in vals))
        except (TypeError, ValueError) as exc:
            raise InputError("--formula", str(exc)) from None
        _emit(f"{value}\n", args.out)
        return 0
    groups = [args.table] if args.table else list(degrees.TABLE_GROUPS)
    blocks = []
    for g in groups:
        for key in degrees.TABLE_GROUPS[g]:
            t = degrees.TABLES[key]
            bad = [c for c in t.check() if not c[3]]
            blocks.append(t.render() + ("" if not bad else f"\nunexplained mismatches: {bad}"))
    _emit("\n\n".join(blocks) + "\n", args.out)
    return 0


def cmd_implicitize(args) -> int:
    try:
        U = read_samples_u(Path(args.csv).read_text())
    except OSError as exc:
        raise InputError("$", f"cannot read {args.csv}: {exc.strerror}") from None
    except ValueError as exc:
        raise InputError("$", str(exc)) from None
    try:
        if args.degree is not None:
            degree = args.degree
        else:
            degree = implicit.minimal_vanishing_degree(U, args.max_degree, args.threshold)
        res = implicit.vanishing_dimension(U, degree, args.threshold)
    except implicit.InsufficientSamples as exc:
        raise InputError("$", str(exc)) from None
    except implicit.NotFound as exc:
        _emit(_dump({"degree": None, "message": str(exc)}), args.out)
        return 1
    poly = res.candidate.normalized() if res.candidate is not None else None
    out = {
        "degree": degree,
        "nullity": res.nullity,
        "smallest_singular_values": res.smallest_singular_values,
        "samples": int(U.shape[0]),
        "polynomial": None if poly is None else json.loads(poly.to_json()),
        "text": None if poly is None else str(poly),
    }
    _emit(_dump(out), args.out)
    return 0


def cmd_verify(args) -> int:
    ex = _example(args.example)
    report = ex.verify(ex, args.seed)
    _emit(report.render() + "\n", args.out)
    return 0 if report.passed else 1


def cmd_emit_plot(args) -> int:
    ex = _example(args.example)
    data = ex.plot(ex, args.seed)
    if args.format == "json":
        _emit(_dump(data), args.out)
        return 0
    # CSV: one row per point, tagged with the cloud it belongs to
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cloud", "label", "coords"])
    for key, val in data.items():
        if not isinstance(val, list):
            continue
        for row in val:
            if isinstance(row, dict):
                coords = row.get("u", row.get("weights"))
                label = row.get("verdict", row.get("exact", ""))
            else:
                coords, label = row, ""
            w.writerow([key, label, " ".join(repr(float(c)) for c in coords)])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_list(args) -> int:
    lines = [f"{name:22s} {ex.description}" for name, ex in gallery.examples().items()]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _example(name: str) -> gallery.ExampleDescriptor:
    try:
        return gallery.get(name)
    except KeyError as exc:
        raise InputError("$", exc.args[0]) from None


# --- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-gap", type=float, default=1e-9, help="duality gap tolerance")
    common.add_argument("--tol-rank", type=float, default=1e-6, help="relative eigenvalue threshold for ranks")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write output here instead of stdout")

    p = argparse.ArgumentParser(prog="sdpexact", description="Exactness of semidefinite relaxations of quadratic programs.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve the relaxation")
    s.add_argument("problem")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("exact", parents=[common], help="exactness certificate")
    s.add_argument("problem")
    s.add_argument("--x", type=float, nargs="+", help="certify this candidate instead of solving the relaxation")
    s.set_defaults(func=cmd_exact)

    s = sub.add_parser("member", parents=[common], help="is the relaxation exact at u")
    s.add_argument("problem")
    s.add_argument("--u", type=float, nargs="+", required=True)
    s.add_argument("--kind", choices=["Ed", "Lin"], default="Ed")
    s.add_argument("--format", choices=["json", "text"], default="json")
    s.set_defaults(func=cmd_member)

    s = sub.add_parser("region-sample", parents=[common], help="sample the boundary of the exactness region")
    s.add_argument("problem")
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--kind", choices=["Ed", "Lin"], default="Ed")
    s.add_argument("--lam-cap", type=float, help="discard boundary multipliers beyond this norm")
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.set_defaults(func=cmd_region_sample)

    s = sub.add_parser("degrees", parents=[common], help="degree tables and formulas")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--table", choices=sorted(degrees.TABLE_GROUPS))
    g.add_argument("--formula", nargs="+", metavar=("NAME", "ARG"), help="e.g. --formula beta_ed 2 3")
    s.set_defaults(func=cmd_degrees)

    s = sub.add_parser("implicitize", parents=[common], help="lowest-degree polynomial vanishing on sampled u")
    s.add_argument("csv")
    s.add_argument("--max-degree", type=int, default=10)
    s.add_argument("--degree", type=int, help="use this degree instead of searching")
    s.add_argument("--threshold", type=float, default=1e-8)
    s.set_defaults(func=cmd_implicitize)

    s = sub.add_parser("verify", parents=[common], help="run the checks of a packaged example")
    s.add_argument("example")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("emit-plot", parents=[common], help="point clouds for plotting an example")
    s.add_argument("example")
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.set_defaults(func=cmd_emit_plot)

    s = sub.add_parser("list", parents=[common], help="list packaged examples")
    s.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ProblemSchemaError) as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "path": exc.path}) + "\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "path": "$"}) + "\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
