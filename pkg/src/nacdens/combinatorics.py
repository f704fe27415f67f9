"""Exact combinatorial kernels.

Stirling numbers of both kinds, falling factorials, the polynomials
``s_nk(x) = sum_l s(n,l) S(l,k) x^l``, partial Bell polynomials, bounded
compositions and Eulerian numbers.  Integer tables are exact (Python ints);
anything evaluated at a real argument comes back in signed log-space.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import PrecisionWarning
from .signedlog import (
    EPS,
    LOSS_TOL,
    SignedLog,
    SLArray,
    sl_from_scalar,
    sl_mul,
    sl_sum,
    sl_zeros,
    to_scalar,
)

DEFAULT_NMAX = 64


class StirlingTables:
    """Triangular tables of ``s(n, k)`` (signed, first kind) and ``S(n, k)``.

    Built once from the recurrences and never mutated afterwards.
    """

    def __init__(self, nmax: int = DEFAULT_NMAX):
        if nmax < 0:
            raise ValueError("nmax must be non-negative")
        self.nmax = nmax
        s1 = [[1]]
        s2 = [[1]]
        for n in range(nmax):
            r1 = [0] * (n + 2)
            r2 = [0] * (n + 2)
            for k in range(1, n + 2):
                a1 = s1[n][k - 1]
                a2 = s2[n][k - 1]
                b1 = s1[n][k] if k <= n else 0
                b2 = s2[n][k] if k <= n else 0
                r1[k] = a1 - n * b1
                r2[k] = a2 + k * b2
            s1.append(r1)
            s2.append(r2)
        self.s1 = tuple(tuple(r) for r in s1)
        self.s2 = tuple(tuple(r) for r in s2)

    def _check(self, n, k):
        if not (0 <= n <= self.nmax) or k < 0:
            raise ValueError(f"(n, k) = ({n}, {k}) outside the table (nmax={self.nmax})")

    def stirling1(self, n: int, k: int) -> int:
        self._check(n, k)
        return self.s1[n][k] if k <= n else 0

    def stirling2(self, n: int, k: int) -> int:
        self._check(n, k)
        return self.s2[n][k] if k <= n else 0


@lru_cache(maxsize=None)
def get_tables(nmax: int = DEFAULT_NMAX) -> StirlingTables:
    return StirlingTables(nmax)


def stirling1(n: int, k: int, nmax: int = DEFAULT_NMAX) -> int:
    """Signed Stirling number of the first kind ``s(n, k)``."""
    return get_tables(nmax).stirling1(n, k)


def stirling2(n: int, k: int, nmax: int = DEFAULT_NMAX) -> int:
    """Stirling number of the second kind ``S(n, k)``."""
    return get_tables(nmax).stirling2(n, k)


def falling_factorial(x, n: int):
    """``x (x-1) ... (x-n+1)``; the empty product for ``n = 0``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = 1 if isinstance(x, (int, Fraction)) else 1.0
    for i in range(n):
        out = out * (x - i)
    return out


# --------------------------------------------------------------------------
# s_nk(x)


@lru_cache(maxsize=None)
def _s_poly_coeffs(n: int):
    """Log-magnitudes and signs of ``s(n,l) S(l,k)`` as (n, n) arrays [k-1, l-1]."""
    tab = get_tables(max(DEFAULT_NMAX, n))
    logc = np.full((n, n), -np.inf)
    sgn = np.zeros((n, n))
    for k in range(1, n + 1):
        for l in range(k, n + 1):
            c = tab.stirling1(n, l) * tab.stirling2(l, k)
            if c:
                logc[k - 1, l - 1] = math.log(abs(c))
                sgn[k - 1, l - 1] = 1.0 if c > 0 else -1.0
    logc.flags.writeable = False
    sgn.flags.writeable = False
    return logc, sgn


def s_poly_exact(n: int, k: int, x) -> Fraction:
    """``s_nk(x)`` in exact rational arithmetic (``x`` converted exactly)."""
    tab = get_tables(max(DEFAULT_NMAX, n))
    xq = Fraction(x)
    return sum((tab.stirling1(n, l) * tab.stirling2(l, k) * xq ** l
                for l in range(k, n + 1)), Fraction(0))


def fraction_to_slog(q: Fraction) -> SignedLog:
    if q == 0:
        return SignedLog.zero()
    return SignedLog(1 if q > 0 else -1,
                     math.log(abs(q.numerator)) - math.log(q.denominator))


def s_poly_table(n: int, x) -> tuple[SLArray, np.ndarray]:
    """All ``s_nk(x)``, ``k = 1..n``, for an array of arguments.

    Returns an :class:`SLArray` of shape ``x.shape + (n,)`` and a boolean
    array flagging entries whose float evaluation lost more than ``1e-8``
    relative accuracy.  Flagged entries are recomputed exactly.
    """
    x = np.asarray(x, dtype=float)
    logc, sgn = _s_poly_coeffs(n)
    l = np.arange(1, n + 1)
    ax = np.abs(x)[..., None]
    with np.errstate(divide="ignore"):
        lx = np.log(ax)
    # term (k, l): s(n,l)S(l,k) x^l
    term_log = logc + (lx * l)[..., None, :]
    xs = np.sign(x)[..., None]
    term_sign = sgn * np.where(l % 2 == 0, 1.0, xs)[..., None, :]
    term_log = np.where(term_sign != 0, term_log, -np.inf)
    total, cond = sl_sum(SLArray(term_sign, term_log), axis=-1)
    flag = EPS * cond > LOSS_TOL
    if np.any(flag):
        sign = np.array(total.sign, copy=True)
        log = np.array(total.log, copy=True)
        for idx in zip(*np.nonzero(flag)):
            v = fraction_to_slog(s_poly_exact(n, int(idx[-1]) + 1, float(x[idx[:-1]])))
            sign[idx] = v.sign
            log[idx] = v.logmag
        total = SLArray(sign, log)
    return total, flag


def s_poly(n: int, k: int, x: float) -> SignedLog:
    """``s_nk(x) = sum_{l=k}^n s(n,l) S(l,k) x^l`` in signed log-space.

    Exact integer coefficients are summed in two sign-separated log-space
    accumulators.  When their magnitudes indicate a relative loss beyond
    ``1e-8`` the value is recomputed in rational arithmetic, a
    :class:`PrecisionWarning` is issued and ``cancelled`` is set on the
    result.
    """
    if n < 1 or not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    tab, flag = s_poly_table(n, float(x))
    if flag[k - 1]:
        warnings.warn(f"cancellation in s_poly({n}, {k}, {x}); recomputed exactly",
                      PrecisionWarning, stacklevel=2)
    return to_scalar(tab[k - 1], cancelled=bool(flag[k - 1]))


# --------------------------------------------------------------------------
# Bell polynomials


def _as_slarray(xs) -> SLArray:
    if isinstance(xs, SLArray):
        return xs
    vals = [SignedLog.from_real(v) for v in xs]
    return SLArray(np.array([v.sign for v in vals], dtype=float),
                   np.array([v.logmag for v in vals], dtype=float))


@lru_cache(maxsize=None)
def _log_binom_row(n: int) -> np.ndarray:
    return np.array([math.log(math.comb(n, i)) for i in range(n + 1)])


def bell_triangle(xs: SLArray, n: int) -> SLArray:
    """Table of ``B_{m,j}(x_1, ...)`` for ``0 <= j <= m <= n``.

    ``xs`` has trailing axis of length ``n`` (``x_1..x_n``); leading axes are
    broadcast.  The result has shape ``lead + (n+1, n+1)`` indexed ``[m, j]``.
    Uses ``B_{m,j} = sum_i binom(m-1, i-1) x_i B_{m-i, j-1}``.
    """
    lead = xs.log.shape[:-1]
    if xs.log.shape[-1] < n:
        pad = n - xs.log.shape[-1]
        xs = SLArray(np.concatenate([xs.sign, np.zeros(lead + (pad,))], axis=-1),
                     np.concatenate([xs.log, np.full(lead + (pad,), -np.inf)], axis=-1))
    sign = np.zeros(lead + (n + 1, n + 1))
    log = np.full(lead + (n + 1, n + 1), -np.inf)
    sign[..., 0, 0] = 1.0
    log[..., 0, 0] = 0.0
    for m in range(1, n + 1):
        lb = _log_binom_row(m - 1)
        for j in range(1, m + 1):
            imax = m - j + 1
            i = np.arange(1, imax + 1)
            ts = xs.sign[..., :imax] * sign[..., m - i, j - 1]
            tl = lb[i - 1] + xs.log[..., :imax] + log[..., m - i, j - 1]
            tl = np.where(ts != 0, tl, -np.inf)
            tot, _ = sl_sum(SLArray(ts, tl), axis=-1)
            sign[..., m, j] = tot.sign
            log[..., m, j] = tot.log
    return SLArray(sign, log)


def bell_partial(n: int, k: int, xs) -> SignedLog:
    """Partial Bell polynomial ``B_{n,k}(x_1, ..., x_{n-k+1})`` via recurrence."""
    if n < 1 or not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    if len(xs) != n - k + 1:
        raise ValueError(f"B_{{{n},{k}}} takes {n - k + 1} arguments, got {len(xs)}")
    tri = bell_triangle(_as_slarray(xs), n)
    return to_scalar(tri[n, k])


def bell_partitions(n: int, k: int):
    """Yield multiplicity vectors ``j`` with ``sum i j_i = n`` and ``sum j_i = k``."""
    m = n - k + 1

    def rec(i, rem_n, rem_k, acc):
        if i > m:
            if rem_n == 0 and rem_k == 0:
                yield tuple(acc)
            return
        for ji in range(min(rem_k, rem_n // i), -1, -1):
            acc.append(ji)
            yield from rec(i + 1, rem_n - i * ji, rem_k - ji, acc)
            acc.pop()

    yield from rec(1, n, k, [])


def bell_partial_enumerated(n: int, k: int, xs) -> SignedLog:
    """``B_{n,k}`` by explicit enumeration of multiplicity vectors.

    Test oracle only; refuses ``n > 20``.
    """
    if n > 20:
        raise ValueError("enumeration refused for n > 20")
    if n < 1 or not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    if len(xs) != n - k + 1:
        raise ValueError(f"B_{{{n},{k}}} takes {n - k + 1} arguments, got {len(xs)}")
    xs = [SignedLog.from_real(v) for v in xs]
    terms = []
    for j in bell_partitions(n, k):
        coef = math.factorial(n)
        for i, ji in enumerate(j, start=1):
            coef //= math.factorial(ji) * math.factorial(i) ** ji
        term = SignedLog.from_real(coef)
        for i, ji in enumerate(j, start=1):
            if ji:
                term = term * xs[i - 1] ** ji
        terms.append(term)
    return sum(terms[1:], terms[0]) if terms else SignedLog.zero()


# --------------------------------------------------------------------------
# compositions


@dataclass(frozen=True)
class CompositionSet:
    """All ``j`` with ``1 <= j_s <= d_s`` and ``sum j = k``, lexicographic."""

    d_vec: tuple[int, ...]
    k: int
    elements: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def iter_bounded_compositions(d_vec, k: int):
    d_vec = tuple(int(d) for d in d_vec)
    m = len(d_vec)
    if m == 0 or any(d < 1 for d in d_vec):
        raise ValueError("d_vec must be a non-empty vector of positive integers")
    if not m <= k <= sum(d_vec):
        return
    # suffix capacities prune dead branches
    cap = list(itertools.accumulate(reversed(d_vec)))[::-1] + [0]

    def rec(s, rem, acc):
        if s == m:
            if rem == 0:
                yield tuple(acc)
            return
        rest_min = m - s - 1
        lo = max(1, rem - cap[s + 1])
        hi = min(d_vec[s], rem - rest_min)
        for j in range(lo, hi + 1):
            acc.append(j)
            yield from rec(s + 1, rem - j, acc)
            acc.pop()

    yield from rec(0, k, [])


def bounded_compositions(d_vec, k: int) -> CompositionSet:
    d_vec = tuple(int(d) for d in d_vec)
    return CompositionSet(d_vec, k, tuple(iter_bounded_compositions(d_vec, k)))


# --------------------------------------------------------------------------
# Eulerian numbers


@lru_cache(maxsize=None)
def _eulerian_row(n: int) -> tuple[int, ...]:
    if n == 0:
        return (1,)
    prev = _eulerian_row(n - 1)
    row = []
    for k in range(n + 1):
        a = (k + 1) * prev[k] if k < len(prev) else 0
        b = (n - k) * prev[k - 1] if 1 <= k <= len(prev) else 0
        row.append(a + b)
    return tuple(row)


def eulerian(n: int, k: int) -> int:
    """Eulerian number ``A(n, k)``; zero outside ``0 <= k <= n``."""
    if n < 0 or k < 0:
        raise ValueError("n and k must be non-negative")
    row = _eulerian_row(n)
    return row[k] if k < len(row) else 0


@lru_cache(maxsize=None)
def eulerian_logs(n: int) -> np.ndarray:
    """``log A(n, k)`` for ``k = 0..n-1`` (``n >= 1``)."""
    return np.array([math.log(eulerian(n, k)) for k in range(n)])


# --------------------------------------------------------------------------
# polynomial products in signed log-space


def sl_poly_mul(p: SLArray, q: SLArray) -> SLArray:
    """Cauchy product of coefficient arrays (trailing axis = degree 0..)."""
    np_, nq = p.log.shape[-1], q.log.shape[-1]
    lead = np.broadcast_shapes(p.log.shape[:-1], q.log.shape[:-1])
    deg = np_ + nq - 1
    # terms[..., K, i] = p[K - i] * q[i]
    i = np.arange(nq)
    kk = np.arange(deg)[:, None] - i[None, :]
    valid = (kk >= 0) & (kk < np_)
    kk = np.clip(kk, 0, np_ - 1)
    ps = np.broadcast_to(p.sign, lead + (np_,))[..., kk]
    pl = np.broadcast_to(p.log, lead + (np_,))[..., kk]
    qs = np.broadcast_to(q.sign, lead + (nq,))[..., None, :]
    ql = np.broadcast_to(q.log, lead + (nq,))[..., None, :]
    terms = sl_mul(SLArray(np.where(valid, ps, 0.0), np.where(valid, pl, -np.inf)),
                   SLArray(qs, ql))
    out, _ = sl_sum(terms, axis=-1)
    return out


def sl_poly_prod(polys, lead=()) -> SLArray:
    """Product of several polynomials; the empty product is ``1``."""
    acc = sl_from_scalar(SignedLog.one(), lead + (1,))
    for p in polys:
        acc = sl_poly_mul(acc, p)
    return acc


def sl_poly_shift(p: SLArray, m: int) -> SLArray:
    """Multiply by ``v^m``."""
    if m == 0:
        return p
    z = sl_zeros(p.log.shape[:-1] + (m,))
    return SLArray(np.concatenate([z.sign, p.sign], axis=-1),
                   np.concatenate([z.log, p.log], axis=-1))
