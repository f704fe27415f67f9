"""Brute-force verifiers kept independent of the fast numerical paths.

Everything here runs in mpmath or exact rationals.  The one thing shared
with the main path is the meaning of the generator parameters; formulas are
re-derived from scratch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable

import mpmath
import numpy as np

from .generators import Family, Generator

MAX_FD_DIM = 5


# --------------------------------------------------------------------------
# generators in arbitrary precision


def _mpf(x):
    return x if isinstance(x, mpmath.mpf) else mpmath.mpf(x)


def _base_psi(name, z):
    return mpmath.exp(-z) if name == "E" else 1 / (1 + z)


def _base_psi_inv(name, u):
    return -mpmath.log(u) if name == "E" else 1 / u - 1


def mp_psi(g: Generator, t):
    t = _mpf(t)
    th = _mpf(g.theta)
    fam = g.family
    if fam is Family.CLAYTON:
        return (1 + t) ** (-1 / th)
    if fam is Family.GUMBEL:
        return mpmath.exp(-t ** (1 / th))
    if fam is Family.FRANK:
        p = -mpmath.expm1(-th)
        return -mpmath.log(1 - p * mpmath.exp(-t)) / th
    if fam is Family.JOE:
        return 1 - (1 - mpmath.exp(-t)) ** (1 / th)
    if fam is Family.AMH:
        return (1 - th) / (mpmath.exp(t) - th)
    c = _mpf(g.c)
    return _base_psi(g.base.name, (c ** th + t) ** (1 / th) - c)


def mp_psi_inv(g: Generator, u):
    u = _mpf(u)
    th = _mpf(g.theta)
    fam = g.family
    if fam is Family.CLAYTON:
        return u ** (-th) - 1
    if fam is Family.GUMBEL:
        return (-mpmath.log(u)) ** th
    if fam is Family.FRANK:
        return -mpmath.log(mpmath.expm1(-th * u) / mpmath.expm1(-th))
    if fam is Family.JOE:
        return -mpmath.log(1 - (1 - u) ** th)
    if fam is Family.AMH:
        return mpmath.log((1 - th * (1 - u)) / u)
    c = _mpf(g.c)
    return (c + _base_psi_inv(g.base.name, u)) ** th - c ** th


def mp_neg_psi_inv_prime(g: Generator, u):
    """``-(psi^-1)'(u)`` by numerical differentiation in high precision."""
    return -mpmath.diff(lambda x: mp_psi_inv(g, x), _mpf(u))


def mp_psi_deriv(g: Generator, k: int, t):
    """``psi^(k)(t)`` by mpmath numerical differentiation."""
    return mpmath.diff(lambda x: mp_psi(g, x), _mpf(t), k)


def mp_cdf(tree, u):
    """Nested copula CDF evaluated recursively in mpmath."""
    from .tree import NacTree

    def rec(node):
        g = node.generator
        s = mpmath.mpf(0)
        for ch in node.children:
            val = rec(ch) if isinstance(ch, NacTree) else _mpf(u[ch - 1])
            s += mp_psi_inv(g, val)
        return mp_psi(g, s)

    return rec(tree)


# --------------------------------------------------------------------------
# mixed finite differences


def _central(f: Callable, u, h):
    d = len(u)
    total = mpmath.mpf(0)
    for eps in product((1, -1), repeat=d):
        pt = [ui + e * h for ui, e in zip(u, eps)]
        total += math.prod(eps) * f(pt)
    return total / (2 * h) ** d


def fd_mixed_partial(tree, u, step: float | None = None, dps: int = 50,
                     richardson: bool = True) -> float:
    """Central-difference ``d^d C / du_1 ... du_d`` with one Richardson level.

    The stencil is evaluated in ``dps``-digit arithmetic, so round-off is
    negligible and the error is the ``O(h^4)`` truncation term.
    """
    u = [float(x) for x in np.asarray(u, dtype=float).ravel()]
    d = len(u)
    if d > MAX_FD_DIM:
        raise ValueError(f"mixed finite differences are limited to d <= {MAX_FD_DIM}")
    if not all(0 < x < 1 for x in u):
        raise ValueError("u must lie in the open unit cube")
    room = min(min(u), 1 - max(u))
    h = min(step if step is not None else 1e-3, room / 2)
    with mpmath.workdps(dps):
        mu = [mpmath.mpf(x) for x in u]
        f = lambda pt: mp_cdf(tree, pt)  # noqa: E731
        d1 = _central(f, mu, mpmath.mpf(h))
        if not richardson:
            return float(d1)
        d2 = _central(f, mu, mpmath.mpf(h) / 2)
        return float((4 * d2 - d1) / 3)


def fd_convergence_order(tree, u, step: float = 2e-2, dps: int = 50) -> float:
    """Observed order of the plain central stencil under step halving."""
    ref = fd_mixed_partial(tree, u, step=step / 16, dps=dps)
    e1 = abs(fd_mixed_partial(tree, u, step=step, dps=dps, richardson=False) - ref)
    e2 = abs(fd_mixed_partial(tree, u, step=step / 2, dps=dps, richardson=False) - ref)
    return math.log2(e1 / e2)


# --------------------------------------------------------------------------
# exact combinatorics via explicit formulas


@lru_cache(maxsize=None)
def _stirling2_explicit(n: int, k: int) -> int:
    total = sum((-1) ** j * math.comb(k, j) * (k - j) ** n for j in range(k + 1))
    return total // math.factorial(k)


@lru_cache(maxsize=None)
def _falling_coeffs(n: int) -> tuple[int, ...]:
    """Coefficients of ``x(x-1)...(x-n+1)``: these are ``s(n, l)``."""
    coeffs = [1]
    for m in range(n):
        nxt = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] += c
            nxt[i] -= m * c
        coeffs = nxt
    return tuple(coeffs)


def s_poly_rational(n: int, k: int, x) -> Fraction:
    """Exact ``s_nk(x) = sum_l s(n,l) S(l,k) x^l`` for rational ``x``."""
    x = Fraction(x)
    s1 = _falling_coeffs(n)
    return sum((Fraction(s1[l] * _stirling2_explicit(l, k)) * x ** l
                for l in range(k, n + 1)), Fraction(0))


def falling_rational(x, n: int) -> Fraction:
    x = Fraction(x)
    return math.prod((x - i for i in range(n)), start=Fraction(1))


def polylog_series(n: int, z: float, dps: int = 30) -> float:
    """``log Li_{-n}(z)`` from the defining power series ``sum k^n z^k``."""
    if not 0 < z < 1:
        raise ValueError("z must lie in (0, 1)")
    with mpmath.workdps(dps):
        z = mpmath.mpf(z)
        return float(mpmath.log(mpmath.nsum(lambda k: k ** n * z ** k, [1, mpmath.inf])))


# --------------------------------------------------------------------------
# self-test


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def selftest() -> list[CheckResult]:
    """Quick battery pitting the fast paths against the oracles."""
    from . import combinatorics as cb
    from . import generators as gn
    from .density import logpdf
    from .tree import parse

    out: list[CheckResult] = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # report, never crash the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))

    def stirling():
        bad = [(n, k) for n in range(16) for k in range(n + 1)
               if cb.stirling1(n, k) != _falling_coeffs(n)[k]
               or cb.stirling2(n, k) != _stirling2_explicit(n, k)]
        return not bad, f"{len(bad)} mismatches"

    def s_poly():
        x = Fraction(2, 5)
        worst = max(_rel(float(cb.s_poly(n, k, 0.4).to_real()), float(s_poly_rational(n, k, x)))
                    for n in range(1, 21) for k in range(1, n + 1))
        return worst < 1e-12, f"max rel err {worst:.2e}"

    def polylog():
        worst = max(abs(float(gn.polylog_neg(n, z)) - polylog_series(n, z))
                    for n in range(0, 8) for z in (0.1, 0.5, 0.9))
        return worst < 1e-12, f"max abs log err {worst:.2e}"

    def bell():
        rng = np.random.default_rng(0)
        worst = 0.0
        for n in range(1, 9):
            for k in range(1, n + 1):
                xs = list(rng.uniform(0.5, 2.0, n - k + 1))
                a = cb.bell_partial(n, k, xs).to_real()
                b = cb.bell_partial_enumerated(n, k, xs).to_real()
                worst = max(worst, _rel(a, b))
        return worst < 1e-12, f"max rel err {worst:.2e}"

    def density(text, u):
        def run():
            tree = parse(text)
            ref = fd_mixed_partial(tree, u)
            got = math.exp(float(logpdf(tree, u)))
            err = _rel(got, ref)
            return err < 1e-3, f"rel err {err:.2e}"
        return run

    check("stirling numbers", stirling)
    check("s_nk polynomials", s_poly)
    check("negative-order polylog", polylog)
    check("partial Bell polynomials", bell)
    check("nested Gumbel density", density("G(1.3333333333333333; 1, G(2.0; 2, 3))", (0.3, 0.5, 0.7)))
    check("nested Clayton density", density("C(1.0; 1, C(2.0; 2, 3))", (0.3, 0.4, 0.5)))
    check("nested Joe density", density("J(1.5; 1, J(3.0; 2, 3))", (0.2, 0.6, 0.7)))
    check("three-level Gumbel density",
          density("G(1.3333333333333333; G(2.0; G(3.0; 1, 2), G(3.0; 3, 4)))", (0.3, 0.45, 0.6, 0.7)))
    return out
