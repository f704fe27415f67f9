"""Command-line interface.

Exit codes: 0 success, 1 self-test failure, 2 parse error (structure or
data), 3 point outside the open unit cube, 4 unsupported structure.
"""

from __future__ import annotations

import argparse
import io
import sys
import warnings

import numpy as np

from .density import logpdf
from .errors import BoundaryError, DataError, DslError, NacError, UnsupportedStructureError
from .mle import check_data, fit2, grid_scan, parse_grid
from .sampling import sample_nested
from .tree import parse

EXIT_PARSE = 2
EXIT_BOUNDARY = 3
EXIT_UNSUPPORTED = 4


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _read_points(path: str, d: int) -> np.ndarray:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise _Fail(EXIT_PARSE, f"cannot read {path}: {exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines and not any(_is_number(x) for x in lines[0].split(",")):
        lines = lines[1:]  # header row
    try:
        data = np.loadtxt(io.StringIO("\n".join(lines)), delimiter=",", ndmin=2)
    except ValueError as exc:
        raise _Fail(EXIT_PARSE, f"malformed data: {exc}") from None
    if data.size == 0:
        return np.empty((0, d))
    if data.shape[1] != d:
        raise _Fail(EXIT_PARSE, f"data has {data.shape[1]} columns, structure has {d} leaves")
    try:
        return check_data(data, d)
    except DataError as exc:
        raise _Fail(EXIT_BOUNDARY, f"row {exc.row + 1}: values must lie in (0, 1)") from None


def _structure(text: str):
    try:
        return parse(text)
    except DslError as exc:
        raise _Fail(EXIT_PARSE, f"structure: {exc}") from None


def cmd_logpdf(args, out):
    tree = _structure(args.structure)
    data = _read_points(args.data, tree.d)
    if data.shape[0] == 0:
        return
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        vals = np.atleast_1d(logpdf(tree, data))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if not args.no_header:
        out.write("logpdf\n")
    for v in vals:
        out.write(f"{float(v)!r}\n")


def cmd_sample(args, out):
    tree = _structure(args.structure)
    if args.n is None or args.n < 0:
        raise _Fail(EXIT_PARSE, "--n must be a non-negative integer")
    x = sample_nested(tree, args.n, args.seed)
    if not args.no_header:
        out.write(",".join(f"u{j}" for j in range(1, tree.d + 1)) + "\n")
    for row in x:
        out.write(",".join(repr(float(v)) for v in row) + "\n")


def _init(text):
    if text is None:
        return None
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise _Fail(EXIT_PARSE, f"--init must look like theta0,theta1, got {text!r}") from None
    return a, b


def cmd_fit(args, out):
    tree = _structure(args.structure)
    data = _read_points(args.data, tree.d)
    res = fit2(tree, data, _init(args.init))
    out.write(f"theta0={res.theta_hat[0]!r}\n")
    out.write(f"theta1={res.theta_hat[1]!r}\n")
    out.write(f"nll={res.nll_min!r}\n")
    out.write(f"iterations={res.iterations}\n")
    out.write(f"converged={str(res.converged).lower()}\n")
    out.write(f"constraint_active={str(res.constraint_active).lower()}\n")


def cmd_grid(args, out):
    tree = _structure(args.structure)
    data = _read_points(args.data, tree.d)
    try:
        g0 = parse_grid(args.theta0_grid)
        g1 = parse_grid(args.theta1_grid)
    except ValueError as exc:
        raise _Fail(EXIT_PARSE, str(exc)) from None
    res = grid_scan(tree, g0, g1, data, threads=args.threads)
    out.write(res.to_csv(header=not args.no_header))


def cmd_selftest(args, out):
    from .oracle import selftest

    results = selftest()
    for r in results:
        out.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}\n")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nacdens", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True):
        sp.add_argument("--structure", required=True, help="e.g. 'G(1.3333; 1, G(2; 2, 3))'")
        if data:
            sp.add_argument("--data", required=True, help="CSV file of points ('-' for stdin)")
        sp.add_argument("--no-header", action="store_true", help="omit the CSV header row")

    sp = sub.add_parser("logpdf", help="log-density of each data row")
    common(sp)
    sp.set_defaults(func=cmd_logpdf)

    sp = sub.add_parser("sample", help="draw a sample (Gumbel or Clayton trees)")
    common(sp, data=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("fit", help="two-parameter maximum likelihood fit")
    common(sp)
    sp.add_argument("--init", help="theta0,theta1 starting point")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("grid", help="negative log-likelihood on a parameter grid")
    common(sp)
    sp.add_argument("--theta0-grid", required=True, help="a:b:steps")
    sp.add_argument("--theta1-grid", required=True, help="a:b:steps")
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=cmd_grid)

    sp = sub.add_parser("selftest", help="run the oracle checks")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out) or 0
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except BoundaryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUNDARY
    except UnsupportedStructureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except NacError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
