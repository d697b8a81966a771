"""Command-line front end: ``quasicop <command> ...``.

Exit status is 0 on success, 2 when an input matrix fails validation and 1
for usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import eval2d, ifs_support, multi_nd, qt_matrix, render


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.17g}"


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _numbers(text: str, flag: str, count: int | None = None) -> list:
    try:
        out = [eval2d.parse_number(tok) for tok in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"{flag}: cannot parse {text!r} ({exc})") from None
    if count is not None and len(out) != count:
        raise UsageError(f"{flag}: expected {count} comma-separated values, got {len(out)}")
    if any(isinstance(x, float) for x in out):
        _warn(f"{flag}: decimal input is evaluated in floating point; write p/q for exact results")
    return out


def _is_json(path: Path) -> bool:
    return path.read_text().lstrip().startswith("{")


def _load_any(path: str):
    """Load a planar text matrix or an n-dimensional JSON matrix."""
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(path)
    if _is_json(p):
        return multi_nd.read_nd(p)
    return qt_matrix.read_matrix(p)


def _load_2d(path: str) -> qt_matrix.QtMatrix2:
    M = _load_any(path)
    if isinstance(M, multi_nd.MultiMatrix):
        if M.n != 2:
            raise UsageError(f"{path}: this command needs a 2-dimensional matrix, got n = {M.n}")
        multi_nd.validate_nd(M)
        M = qt_matrix.build_matrix(M.entries.tolist())
    return M


# -- commands ---------------------------------------------------------------------

def cmd_validate(args) -> int:
    M = _load_any(args.matrix)
    if isinstance(M, multi_nd.MultiMatrix):
        report = multi_nd.validate_nd(M)
        print(report)
    else:
        print("valid, proper" if M.is_proper else "valid, not proper")
    return 0


def _evaluator(args, M):
    return eval2d.FixedPointEvaluator(M, tolerance=args.tol, max_depth=args.max_depth)


def cmd_eval(args) -> int:
    M = _load_2d(args.matrix)
    u, v = _numbers(args.point, "--point", 2)
    est = _evaluator(args, M).evaluate(u, v)
    print(f"value {fmt(float(est.value))}")
    if isinstance(est.value, Fraction) and est.error_bound == 0:
        print(f"exact {est.value}")
    print(f"error_bound {fmt(est.error_bound)}")
    return 0


def cmd_volume(args) -> int:
    M = _load_2d(args.matrix)
    rect = _numbers(args.rect, "--rect", 4)
    est = eval2d.volume(_evaluator(args, M), rect)
    if isinstance(est.value, Fraction) and est.error_bound == 0:
        print(f"volume {est.value}")
    else:
        print(f"volume {fmt(float(est.value))}")
    print(f"float {fmt(float(est.value))}")
    print(f"error_bound {fmt(est.error_bound)}")
    return 0


def cmd_support(args) -> int:
    M = _load_2d(args.matrix)
    if args.cover:
        S = ifs_support.enumerate_cover(M, Fraction(1, args.res), min_depth=args.depth, budget=args.budget)
    else:
        S = ifs_support.enumerate_support(M, args.depth, budget=args.budget)
    mask = render.rasterize_support(S, args.res)
    fmt_name = args.format or ("PPM" if str(args.out).lower().endswith(".ppm") else "PGM")
    render.write_image(mask, fmt_name, args.out)
    if args.json:
        Path(args.json).write_text(json.dumps(S.to_json()) + "\n")
    print(f"rectangles {len(S)}")
    print(f"occupied {int(mask.occupied.sum())}")
    print(f"area {S.area()}")
    return 0


def _report(rep: ifs_support.DimensionReport, json_path) -> None:
    print(f"s {fmt(rep.s)}")
    print(f"residual {fmt(rep.residual)}")
    print(f"bracket {fmt(rep.bracket[0])} {fmt(rep.bracket[1])}")
    print(f"iterations {rep.iterations}")
    if json_path:
        Path(json_path).write_text(json.dumps(rep.to_json()) + "\n")


def cmd_dim(args) -> int:
    if args.dim_kind == "moran":
        ratios = _numbers(args.ratios, "--ratios")
        _report(ifs_support.solve_moran(ratios, args.tol, ambient=args.n), args.json)
    elif args.dim_kind == "family":
        if (args.r is None) == (args.s is None):
            raise UsageError("dim family: give exactly one of --r or --s")
        if args.r is not None:
            r = _numbers(args.r, "--r", 1)[0]
            _report(ifs_support.s_of_r(r, args.n, args.tol), args.json)
        else:
            s = float(_numbers(args.s, "--s", 1)[0])
            r = ifs_support.r_of_s(s, args.n, args.tol)
            print(f"r {fmt(r)}")
            print(f"residual {fmt(abs(ifs_support.family_equation(s, r, args.n) - 1))}")
    else:
        mask = render.read_image(args.mask)
        scales = _numbers(args.scales, "--scales")
        bc = ifs_support.box_counting_estimate(mask.occupied, scales)
        print(f"dim {fmt(bc.dim)}")
        print(f"fit_residual {fmt(bc.fit_residual)}")
        print("counts " + " ".join(str(c) for c in bc.counts))
    return 0


def _make(name: str):
    kind, _, arg = name.partition(":")
    kind = kind.lower()
    try:
        if kind == "t0" and not arg:
            return qt_matrix.t0_matrix()
        if kind == "tr":
            return qt_matrix.tr_matrix(Fraction(arg))
        if kind == "step":
            n, r = arg.split(",")
            return multi_nd.make_step_matrix(int(n), Fraction(r))
        if kind == "cube":
            return multi_nd.make_cube_matrix(int(arg))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"make: bad parameters in {name!r} ({exc})") from None
    raise UsageError(f"make: unknown matrix {name!r} (use t0, tr:<r>, step:<n>,<r>, cube:<n>)")


def cmd_make(args) -> int:
    M = _make(args.kind)
    if isinstance(M, multi_nd.MultiMatrix):
        multi_nd.write_nd(M, args.out)
    else:
        qt_matrix.write_matrix(M, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_lattice(args) -> int:
    M = _load_any(args.matrix)
    if isinstance(M, qt_matrix.QtMatrix2):
        M = multi_nd.from_qt(M)
    else:
        multi_nd.validate_nd(M)
    L = multi_nd.lattice_eval(M, args.depth, budget=args.budget)
    Path(args.out).write_text(json.dumps(L.to_json()) + "\n")
    print(f"points {L.values.size}")
    return 0


def cmd_axioms(args) -> int:
    M = _load_2d(args.matrix)
    rep = eval2d.axiom_report(_evaluator(args, M), args.samples, args.seed)
    print(f"boundary_worst {fmt(rep.boundary_worst)}")
    print(f"monotone_worst {fmt(rep.monotone_worst)}")
    print(f"lipschitz_worst {fmt(rep.lipschitz_worst)}")
    print(f"slack {fmt(rep.slack)}")
    print("ok" if rep.ok else "violations found")
    return 0 if rep.ok else 2


def cmd_grid(args) -> int:
    M = _load_2d(args.matrix)
    Path(args.out).write_text(eval2d.grid_csv(_evaluator(args, M), args.n))
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quasicop", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def evalopts(sp):
        sp.add_argument("--tol", type=float, default=1e-12)
        sp.add_argument("--max-depth", type=int, default=64)

    sp = sub.add_parser("validate", help="check a matrix file")
    sp.add_argument("matrix")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("eval", help="evaluate the fixed point at a point")
    sp.add_argument("matrix")
    sp.add_argument("--point", required=True)
    evalopts(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("volume", help="signed mass of a rectangle u1,u2,v1,v2")
    sp.add_argument("matrix")
    sp.add_argument("--rect", required=True)
    evalopts(sp)
    sp.set_defaults(func=cmd_volume)

    sp = sub.add_parser("support", help="rasterise the depth-l support")
    sp.add_argument("matrix")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--res", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=["PGM", "PPM", "pgm", "ppm"], type=str)
    sp.add_argument("--json", help="also write the rectangles as JSON")
    sp.add_argument("--cover", action="store_true",
                    help="refine each path until its cell fits in one pixel (at least --depth levels)")
    sp.add_argument("--budget", type=int, default=ifs_support.DEFAULT_BUDGET)
    sp.set_defaults(func=cmd_support)

    sp = sub.add_parser("dim", help="dimension equations and box counting")
    dsub = sp.add_subparsers(dest="dim_kind", required=True, parser_class=_Parser)
    d = dsub.add_parser("moran")
    d.add_argument("--ratios", required=True)
    d.add_argument("--tol", type=float, default=1e-12)
    d.add_argument("--n", type=int, default=2)
    d.add_argument("--json")
    d.set_defaults(func=cmd_dim)
    d = dsub.add_parser("family")
    d.add_argument("--r")
    d.add_argument("--s")
    d.add_argument("--n", type=int, default=2)
    d.add_argument("--tol", type=float, default=1e-14)
    d.add_argument("--json")
    d.set_defaults(func=cmd_dim)
    d = dsub.add_parser("box")
    d.add_argument("--mask", required=True)
    d.add_argument("--scales", required=True)
    d.set_defaults(func=cmd_dim)

    sp = sub.add_parser("make", help="write a canonical matrix: t0, tr:<r>, step:<n>,<r>, cube:<n>")
    sp.add_argument("kind")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_make)

    sp = sub.add_parser("lattice", help="exact fixed-point values at depth-k cell corners")
    sp.add_argument("matrix")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--budget", type=int, default=multi_nd.DEFAULT_BUDGET)
    sp.set_defaults(func=cmd_lattice)

    sp = sub.add_parser("axioms", help="sampled check of boundary, monotonicity and Lipschitz conditions")
    sp.add_argument("matrix")
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    evalopts(sp)
    sp.set_defaults(func=cmd_axioms)

    sp = sub.add_parser("grid", help="CSV of the fixed point on an n x n grid")
    sp.add_argument("matrix")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--out", required=True)
    evalopts(sp)
    sp.set_defaults(func=cmd_grid)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except qt_matrix.ValidationFailure as exc:
        print(f"invalid: {exc}")
        return 2
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
