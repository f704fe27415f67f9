"""Derivative coefficients of inner generators.

For a parent generator ``psi_0`` and a child ``psi_s`` the node is
``psi_0^-1 o psi_s`` and the inner generator ``exp(-v * node(t))`` has
``n``-th derivative ``exp(-v * node(t)) * sum_k a_nk(t) (-v)^k``.  This module
evaluates the ``a_nk`` for the closed-form family pairs and combines the
per-child polynomials into the ``b`` coefficients of the density.

Supported pairs: same-family Clayton, Gumbel, tilted outer power (same base
and tilt), AMH, Joe, Frank, and an AMH parent over Clayton children.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .combinatorics import (
    CompositionSet,
    bell_triangle,
    bounded_compositions,
    get_tables,
    s_poly_exact,
    s_poly_table,
    sl_poly_prod,
    sl_poly_shift,
)
from .errors import ConfigurationError, UnsupportedStructureError
from .generators import CLAYTON_BASE, EXP_BASE, Family, Generator, log1mexp, polylog_neg
from .signedlog import EPS, LOSS_TOL, SignedLog, SLArray, sl_sum, to_scalar


class PairKind(enum.Enum):
    TOP = "top"
    AMH = "amh"
    JOE = "joe"
    FRANK = "frank"
    AMH_CLAYTON = "amh_clayton"


def _top_params(g: Generator):
    """(theta, tilt, base) of a generator viewed as a tilted outer power."""
    if g.family is Family.CLAYTON:
        return g.theta, 1.0, CLAYTON_BASE
    if g.family is Family.GUMBEL:
        return g.theta, 0.0, EXP_BASE
    return g.theta, g.c, g.base


_TOP_LIKE = (Family.CLAYTON, Family.GUMBEL, Family.TOP)


@dataclass(frozen=True)
class NodePair:
    """Parent/child generators meeting the sufficient nesting condition."""

    parent: Generator
    child: Generator

    def __post_init__(self):
        p, c = self.parent, self.child
        if p.family is Family.AMH and c.family is Family.CLAYTON:
            if c.theta < 1.0:
                raise ConfigurationError(
                    f"AMH over Clayton needs the Clayton parameter >= 1, got {c.theta}")
            return
        if p.family is not c.family:
            raise UnsupportedStructureError(
                f"no closed form for a {p.family.name} parent over a {c.family.name} child")
        if p.family is Family.TOP and (p.c != c.c or p.base != c.base):
            raise UnsupportedStructureError(
                "tilted outer power parent and child must share base and tilt")
        if p.theta > c.theta:
            raise ConfigurationError(
                f"nesting condition violated: parent {p.theta} > child {c.theta}")

    @property
    def kind(self) -> PairKind:
        fam = self.parent.family
        if fam is Family.AMH:
            return PairKind.AMH_CLAYTON if self.child.family is Family.CLAYTON else PairKind.AMH
        if fam in _TOP_LIKE:
            return PairKind.TOP
        return PairKind.JOE if fam is Family.JOE else PairKind.FRANK

    @property
    def alpha(self):
        """``theta_parent / theta_child``; ``None`` for pairs without one."""
        if self.kind in (PairKind.AMH, PairKind.AMH_CLAYTON):
            return None
        return self.parent.theta / self.child.theta


@dataclass(frozen=True)
class CoeffTable:
    """Signed coefficients indexed ``k = kmin .. kmin + len(entries) - 1``."""

    kmin: int
    entries: tuple[SignedLog, ...]
    cancelled: bool = False

    @property
    def kmax(self) -> int:
        return self.kmin + len(self.entries) - 1

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, k: int) -> SignedLog:
        if not self.kmin <= k <= self.kmax:
            raise IndexError(k)
        return self.entries[k - self.kmin]

    def values(self) -> np.ndarray:
        return np.array([e.to_real() for e in self.entries])


# --------------------------------------------------------------------------
# node values and derivatives


def node_value(pair: NodePair, t):
    """``psi_parent^-1(psi_child(t))`` evaluated stably."""
    t = np.asarray(t, dtype=float)
    p, c = pair.parent, pair.child
    kind = pair.kind
    with np.errstate(divide="ignore"):
        if kind is PairKind.TOP:
            th0, tilt, _ = _top_params(p)
            th1 = c.theta
            a = th0 / th1
            if tilt == 0.0:
                out = t ** a
            else:
                out = tilt ** th0 * np.expm1(a * np.log1p(t / tilt ** th1))
        elif kind is PairKind.AMH:
            th01 = _amh_theta01(pair)
            out = t + np.log1p(-th01 * np.exp(-t)) - math.log1p(-th01)
        elif kind is PairKind.AMH_CLAYTON:
            th0 = p.theta
            out = np.log1p((1.0 - th0) * np.expm1(np.log1p(t) / c.theta))
        elif kind is PairKind.JOE:
            a = pair.alpha
            out = -np.log(-np.expm1(a * log1mexp(t)))
        else:
            a = pair.alpha
            ps = -math.expm1(-c.theta)
            p0 = -math.expm1(-p.theta)
            out = -np.log(-np.expm1(a * np.log1p(-ps * np.exp(-t)))) + math.log(p0)
    return out[()] if out.ndim == 0 else out


def _amh_theta01(pair: NodePair) -> float:
    th0, th1 = pair.parent.theta, pair.child.theta
    return (th1 - th0) / (1.0 - th0)


def _node_derivs(pair: NodePair, n: int, t) -> SLArray:
    """Node derivatives of orders ``1..n``; shape ``t.shape + (n,)``."""
    t = np.asarray(t, dtype=float)
    kind = pair.kind
    k = np.arange(1, n + 1)
    if kind is PairKind.TOP:
        th0, tilt, _ = _top_params(pair.parent)
        a = pair.alpha
        y = tilt ** pair.child.theta + t
        ff = np.array([math.prod(a - i for i in range(kk)) for kk in k])
        with np.errstate(divide="ignore"):
            log = np.log(np.abs(ff)) + (a - k) * np.log(y)[..., None]
        sign = np.broadcast_to(np.sign(ff), log.shape).astype(float)
        log = np.where(sign != 0, log, -np.inf)
        return SLArray(sign, log)
    if kind is PairKind.AMH:
        w = _amh_theta01(pair) * np.exp(-t)
        sign = np.zeros(t.shape + (n,))
        log = np.full(t.shape + (n,), -np.inf)
        sign[..., 0] = 1.0
        log[..., 0] = -np.log1p(-w)
        if n > 1 and np.any(w > 0):
            pos = w > 0
            for kk in range(2, n + 1):
                lk = np.full(t.shape, -np.inf)
                lk[pos] = polylog_neg(kk - 1, w[pos])
                sign[..., kk - 1] = np.where(pos, (-1.0) ** (kk - 1), 0.0)
                log[..., kk - 1] = lk
        return SLArray(sign, log)
    tri, _ = _a_triangle(pair, n, t)
    return SLArray(tri.sign[..., :, 0], tri.log[..., :, 0])


def node_deriv(pair: NodePair, k: int, t: float) -> SignedLog:
    """``k``-th derivative of the node at ``t > 0`` (sign ``(-1)^(k-1)``)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not t > 0:
        raise ValueError("t must be > 0")
    d = _node_derivs(pair, k, float(t))
    return to_scalar(d[k - 1])


# --------------------------------------------------------------------------
# a-coefficients


def _a_triangle(pair: NodePair, n: int, t) -> tuple[SLArray, np.ndarray]:
    """All ``a_{l,k}(t)`` for ``1 <= k <= l <= n``.

    Returns an :class:`SLArray` of shape ``t.shape + (n, n)`` indexed
    ``[l-1, k-1]`` (zero above the diagonal) and a per-point flag marking
    cancellation that survived the float evaluation.
    """
    t = np.asarray(t, dtype=float)
    kind = pair.kind
    if kind is PairKind.TOP:
        return _a_top(pair, n, t)
    if kind is PairKind.AMH:
        return _a_amh(pair, n, t)
    if kind is PairKind.AMH_CLAYTON:
        return _a_amh_clayton(pair, n, t)
    if kind is PairKind.JOE:
        return _a_joe(pair.alpha, n, np.exp(-t), t, shift=0.0)
    ps = -math.expm1(-pair.child.theta)
    return _a_joe(pair.alpha, n, ps * np.exp(-t), t, shift=-math.log(ps))


def _empty_tri(shape, n):
    return np.zeros(shape + (n, n)), np.full(shape + (n, n), -np.inf)


def _a_top(pair, n, t):
    _, tilt, _ = _top_params(pair.parent)
    a = pair.alpha
    y = tilt ** pair.child.theta + t
    with np.errstate(divide="ignore"):
        ly = np.log(y)
    sign, log = _empty_tri(t.shape, n)
    flag = np.zeros(t.shape, dtype=bool)
    for l in range(1, n + 1):
        row, f = s_poly_table(l, a)
        k = np.arange(1, l + 1)
        sign[..., l - 1, :l] = row.sign
        log[..., l - 1, :l] = np.where(row.sign != 0, row.log + (a * k - l) * ly[..., None], -np.inf)
    return SLArray(sign, log), flag


def _a_amh(pair, n, t):
    # Faa di Bruno over the node derivatives: every Bell term carries the
    # sign (-1)^(n-k), so the sum never cancels
    bt = bell_triangle(_node_derivs(pair, n, t), n)
    return SLArray(bt.sign[..., 1:, 1:], bt.log[..., 1:, 1:]), np.zeros(t.shape, dtype=bool)


def _a_amh_clayton(pair, n, t):
    th0 = pair.parent.theta
    th1 = pair.child.theta
    b = 1.0 / th1
    l1t = np.log1p(t)
    lw = math.log1p(-th0) - np.log(th0 + (1.0 - th0) * np.exp(b * l1t))
    tab = get_tables(max(64, n))
    sign, log = _empty_tri(t.shape, n)
    for l in range(1, n + 1):
        srow, _ = s_poly_table(l, b)  # s_{l j}(1/theta_1), j = 1..l
        for k in range(1, l + 1):
            ts, tl = [], []
            for j in range(k, l + 1):
                sjk = tab.stirling1(j, k)
                sg = srow.sign[j - 1] * (1.0 if sjk > 0 else -1.0)
                if sjk == 0 or srow.sign[j - 1] == 0:
                    continue
                ts.append(np.full(t.shape, sg))
                tl.append(math.log(abs(sjk)) + srow.log[j - 1] + j * lw + (j * b - l) * l1t)
            if not ts:
                continue
            tot, _ = sl_sum(SLArray(np.stack(ts, -1), np.stack(tl, -1)), axis=-1)
            sign[..., l - 1, k - 1] = tot.sign
            log[..., l - 1, k - 1] = tot.log
    return SLArray(sign, log), np.zeros(t.shape, dtype=bool)


def _a_joe(a, n, q, t, shift):
    """Joe coefficients with ``q = exp(-(t + shift))`` precomputed.

    ``a_nk = (-1)^(n-k) sum_m S(n,m) (-y)^m sum_l s(l,k) s_ml(a) r^l`` with
    ``y = q/(1-q)`` and ``r = -(1-q)^a / (1 - (1-q)^a)``.
    """
    tab = get_tables(max(64, n))
    l1q = np.log1p(-q)
    ly = np.log(q) - l1q
    pa = a * l1q  # log (1-q)^a
    lr = pa - np.log(-np.expm1(pa))  # log|r|, r < 0
    shape = q.shape
    # inner[m][k] = sum_{l=k}^m s(l,k) s_ml(a) r^l
    inner_s = np.zeros(shape + (n, n))
    inner_l = np.full(shape + (n, n), -np.inf)
    cond_max = np.ones(shape)
    srows = [None] + [s_poly_table(m, a)[0] for m in range(1, n + 1)]
    for m in range(1, n + 1):
        for k in range(1, m + 1):
            ts, tl = [], []
            for l in range(k, m + 1):
                slk = tab.stirling1(l, k)
                sml = srows[m].sign[l - 1]
                if slk == 0 or sml == 0:
                    continue
                ts.append(np.full(shape, (1.0 if slk > 0 else -1.0) * sml * (-1.0) ** l))
                tl.append(math.log(abs(slk)) + srows[m].log[l - 1] + l * lr)
            if not ts:
                continue
            tot, cond = sl_sum(SLArray(np.stack(ts, -1), np.stack(tl, -1)), axis=-1)
            inner_s[..., m - 1, k - 1] = tot.sign
            inner_l[..., m - 1, k - 1] = tot.log
            cond_max = np.maximum(cond_max, cond)
    sign, log = _empty_tri(shape, n)
    for nn in range(1, n + 1):
        for k in range(1, nn + 1):
            ms = np.arange(k, nn + 1)
            lS = np.array([math.log(tab.stirling2(nn, m)) for m in ms])
            ts = inner_s[..., ms - 1, k - 1] * (-1.0) ** ms
            tl = lS + ms * ly[..., None] + inner_l[..., ms - 1, k - 1]
            tl = np.where(ts != 0, tl, -np.inf)
            tot, cond = sl_sum(SLArray(ts, tl), axis=-1)
            sign[..., nn - 1, k - 1] = tot.sign * (-1.0) ** (nn - k)
            log[..., nn - 1, k - 1] = tot.log
            cond_max = np.maximum(cond_max, cond)
    flag = EPS * cond_max > LOSS_TOL
    t = np.broadcast_to(t, shape)
    for idx in np.ndindex(shape):
        if flag[idx]:
            tri = _a_joe_mp(a, n, float(t[idx]) + shift)
            for l in range(n):
                for k in range(l + 1):
                    v = tri[l][k]
                    sign[idx + (l, k)] = float(mpmath.sign(v))
                    log[idx + (l, k)] = float(mpmath.log(abs(v))) if v != 0 else -np.inf
    return SLArray(sign, log), np.zeros(shape, dtype=bool)


def _a_joe_mp(a, n, t, dps=60):
    """High-precision Joe coefficients, used when the float sums cancel."""
    tab = get_tables(max(64, n))
    with mpmath.workdps(dps):
        t = mpmath.mpf(t)
        q = mpmath.exp(-t)
        y = q / (1 - q)
        pa = (1 - q) ** mpmath.mpf(a)
        r = -pa / (1 - pa)
        snk = {}
        for m in range(1, n + 1):
            for l in range(1, m + 1):
                q_ = s_poly_exact(m, l, a)
                snk[m, l] = mpmath.mpf(q_.numerator) / q_.denominator
        inner = {(m, k): sum(tab.stirling1(l, k) * snk[m, l] * r ** l for l in range(k, m + 1))
                 for m in range(1, n + 1) for k in range(1, m + 1)}
        out = []
        for nn in range(1, n + 1):
            row = []
            for k in range(1, nn + 1):
                s = sum(tab.stirling2(nn, m) * (-y) ** m * inner[m, k] for m in range(k, nn + 1))
                row.append((-1) ** (nn - k) * s)
            out.append(row)
        return out


def a_coeff_table(pair: NodePair, n: int, t: float) -> CoeffTable:
    """``a_{n,k}(t)``, ``k = 1..n``, as a :class:`CoeffTable`."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not t > 0:
        raise ValueError("t must be > 0")
    tri, flag = _a_triangle(pair, n, float(t))
    entries = tuple(to_scalar(tri[n - 1, k]) for k in range(n))
    if pair.parent == pair.child and n == 1:
        entries = (SignedLog.one(),)
    return CoeffTable(1, entries, bool(flag))


def coeff_polynomial(tri: SLArray, n: int) -> SLArray:
    """Row ``n`` of an a-triangle as polynomial coefficients of degree 0..n."""
    lead = tri.log.shape[:-2]
    return SLArray(np.concatenate([np.zeros(lead + (1,)), tri.sign[..., n - 1, :n]], -1),
                   np.concatenate([np.full(lead + (1,), -np.inf), tri.log[..., n - 1, :n]], -1))


# --------------------------------------------------------------------------
# b-coefficients


def _table_poly(tab: CoeffTable) -> SLArray:
    n = tab.kmax
    sign = np.zeros(n + 1)
    log = np.full(n + 1, -np.inf)
    for k in range(tab.kmin, n + 1):
        e = tab[k]
        sign[k] = e.sign
        log[k] = e.logmag
    return SLArray(sign, log)


def _check_tables(tables, d_vec, degenerate_mask):
    d_vec = tuple(int(d) for d in d_vec)
    if degenerate_mask is None:
        degenerate_mask = tuple(d == 1 and tab is None for d, tab in zip(d_vec, tables))
    if not len(tables) == len(d_vec) == len(degenerate_mask):
        raise ValueError("tables, d_vec and degenerate_mask must have equal length")
    for tab, d, deg in zip(tables, d_vec, degenerate_mask):
        if deg:
            if d != 1:
                raise ValueError("degenerate children have dimension 1")
            continue
        if tab.kmin != 1 or tab.kmax != d:
            raise ValueError(f"a-table for a child of dimension {d} must cover k = 1..{d}")
    return d_vec, tuple(bool(x) for x in degenerate_mask)


def b_coeff_table(tables, d_vec, degenerate_mask=None) -> CoeffTable:
    """Cauchy-product coefficients ``b_k`` of the per-child polynomials.

    Degenerate children (``d_s = 1``, a bare argument of the root) are left
    out; the density then uses ``psi_0^(k + d_S)``.  The result covers
    ``k = d0' .. d - d_S`` and is empty when every child is degenerate.
    """
    d_vec, mask = _check_tables(tables, d_vec, degenerate_mask)
    polys = [_table_poly(t) for t, deg in zip(tables, mask) if not deg]
    if not polys:
        return CoeffTable(0, ())
    prod = sl_poly_prod(polys)
    kmin = len(polys)
    kmax = sum(d for d, deg in zip(d_vec, mask) if not deg)
    entries = tuple(to_scalar(prod[k]) for k in range(kmin, kmax + 1))
    return CoeffTable(kmin, entries, any(t.cancelled for t, deg in zip(tables, mask) if not deg))


def b_coeff_table_enumerated(tables, d_vec, degenerate_mask=None) -> CoeffTable:
    """Same as :func:`b_coeff_table` by summing over the composition set.

    Exponential cost; kept as a test oracle.
    """
    d_vec, mask = _check_tables(tables, d_vec, degenerate_mask)
    keep = [(t, d) for t, d, deg in zip(tables, d_vec, mask) if not deg]
    if not keep:
        return CoeffTable(0, ())
    dv = tuple(d for _, d in keep)
    entries = []
    for k in range(len(dv), sum(dv) + 1):
        comps: CompositionSet = bounded_compositions(dv, k)
        terms = []
        for j in comps:
            term = SignedLog.one()
            for (tab, _), js in zip(keep, j):
                term = term * tab[js]
            terms.append(term)
        total = terms[0]
        for term in terms[1:]:
            total = total + term
        entries.append(SignedLog(total.sign, total.logmag))
    return CoeffTable(len(dv), tuple(entries))


def poly_product_with_shift(polys, shift: int, lead=()) -> SLArray:
    """Product of polynomials times ``v^shift`` (degenerate children)."""
    return sl_poly_shift(sl_poly_prod(polys, lead), shift)

