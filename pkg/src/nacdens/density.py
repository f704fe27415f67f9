"""CDF, density and log-density of nested Archimedean copulas.

The log-density is assembled bottom-up.  Every node ``S`` produces a
polynomial in ``-w`` (``w`` the frailty of its parent) whose coefficients
carry the mixed derivatives of ``exp(-w * node(t_S))`` with respect to the
leaves below ``S``.  At the root these coefficients are contracted against
``psi_0^(k)(t)``; since ``sign(b_k) = (-1)^(d-k)`` every term of that final
sum is positive and it is evaluated with a max-shifted log-sum-exp.
"""

from __future__ import annotations

import warnings
from functools import lru_cache
from dataclasses import dataclass

import mpmath
import numpy as np

from .combinatorics import (
    bounded_compositions,
    get_tables,
    s_poly_exact,
    sl_poly_prod,
    sl_poly_shift,
)
from .errors import BoundaryError, PrecisionWarning, UnsupportedStructureError
from .generators import (
    Family,
    log_abs_psi_deriv,
    log_neg_psi_inv_prime,
    psi,
    psi_inv,
)
from .inner_coeffs import NodePair, PairKind, _a_triangle, node_value
from .signedlog import EPS, LOSS_TOL, SLArray, sl_mul, sl_sum
from .tree import NacTree

# ---------------------------------------------------------------------------
# input handling


def _as_points(tree: NacTree, u) -> tuple[np.ndarray, bool]:
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    U = u[None, :] if single else u
    if U.ndim != 2 or U.shape[1] != tree.d:
        raise ValueError(f"expected points with {tree.d} coordinates, got shape {u.shape}")
    bad = ~np.all((U > 0) & (U < 1), axis=1)
    if np.any(bad):
        row = int(np.argmax(bad))
        raise BoundaryError(f"row {row}: coordinates must lie in the open interval (0, 1)")
    return U, single


def _out(x, single):
    return float(x[0]) if single else x


# ---------------------------------------------------------------------------
# CDF


@dataclass(frozen=True)
class CdfDetails:
    """CDF value with the root argument ``t`` and the children's ``t_s``."""

    value: np.ndarray | float
    t: np.ndarray | float
    child_t: tuple


def _cdf_rec(node: NacTree, U):
    g = node.generator
    t = np.zeros(U.shape[0])
    child_t = []
    for ch in node.children:
        if isinstance(ch, NacTree):
            val, sub_t, _ = _cdf_rec(ch, U)
            child_t.append(sub_t)
        else:
            val = U[:, ch - 1]
            child_t.append(None)
        t = t + psi_inv(g, val)
    return psi(g, t), t, child_t


def cdf_details(tree: NacTree, u) -> CdfDetails:
    tree.validate()
    U, single = _as_points(tree, u)
    val, t, child_t = _cdf_rec(tree, U)
    if single:
        return CdfDetails(float(val[0]), float(t[0]),
                          tuple(None if c is None else float(c[0]) for c in child_t))
    return CdfDetails(val, t, tuple(child_t))


def cdf(tree: NacTree, u):
    """``C(u)`` for a point (1-D) or a batch of rows (2-D)."""
    return cdf_details(tree, u).value


# ---------------------------------------------------------------------------
# log-density engine


@dataclass
class _Branch:
    t: np.ndarray        # argument of the node's own generator
    poly: SLArray        # coefficients in (-w), degrees 0..d_S
    jac: np.ndarray      # sum of log(-(psi^-1)'(u_j)) over the leaves below
    cond: np.ndarray     # worst condition number met on the way


def composite_coefficients(pair: NodePair, beta: SLArray, t) -> tuple[SLArray, np.ndarray]:
    """Push a child polynomial ``beta`` through the node ``pair`` at ``t``.

    Returns ``sum_l a_{l,k}(t) beta_l`` for ``k = 0..D`` (``k = 0`` is zero)
    and the condition number of each sum.  With ``beta`` a monomial of
    degree ``n`` this is just row ``n`` of the a-table.
    """
    t = np.asarray(t, dtype=float)
    D = beta.log.shape[-1] - 1
    if pair.parent == pair.child and pair.kind in (PairKind.JOE, PairKind.FRANK):
        # identity node; the Joe-type closed form would cancel to 0/1 entries
        return beta, np.ones(t.shape)
    tri, _ = _a_triangle(pair, D, t)  # [..., l-1, k-1]
    b = beta[..., 1:]
    terms = sl_mul(SLArray(b.sign[..., :, None], b.log[..., :, None]), tri)
    out, cond = sl_sum(terms, axis=-2)
    zero_s = np.zeros(t.shape + (1,))
    zero_l = np.full(t.shape + (1,), -np.inf)
    poly = SLArray(np.concatenate([zero_s, out.sign], -1), np.concatenate([zero_l, out.log], -1))
    return poly, np.max(cond, axis=-1)


def _branch(node: NacTree, U) -> _Branch:
    g = node.generator
    n = U.shape[0]
    t = np.zeros(n)
    jac = np.zeros(n)
    cond = np.ones(n)
    polys = []
    leaves = 0
    for ch in node.children:
        if isinstance(ch, NacTree):
            sub = _branch(ch, U)
            pair = NodePair(g, ch.generator)
            poly, c = composite_coefficients(pair, sub.poly, sub.t)
            polys.append(poly)
            t = t + node_value(pair, sub.t)
            jac = jac + sub.jac
            cond = np.maximum(cond, np.maximum(c, sub.cond))
        else:
            u = U[:, ch - 1]
            t = t + psi_inv(g, u)
            jac = jac + log_neg_psi_inv_prime(g, u)
            leaves += 1
    poly = sl_poly_shift(sl_poly_prod(polys, lead=(n,)), leaves)
    return _Branch(t, poly, jac, cond)


@dataclass(frozen=True)
class DensityResult:
    """Log-density with diagnostics.

    ``cond`` bounds the relative amplification of rounding errors in the
    signed sums; ``cancelled`` marks rows where ``EPS * cond`` exceeded the
    loss tolerance.
    """

    logpdf: np.ndarray | float
    cancelled: np.ndarray | bool
    cond: np.ndarray | float
    t: np.ndarray | float


def _contract(g, b: SLArray, t) -> tuple[np.ndarray, np.ndarray]:
    """``log sum_k (-1)^d b_k psi^(k)(t)`` and the condition of the sum."""
    d = b.log.shape[-1] - 1
    present = np.any(b.sign != 0, axis=0)
    ks = [k for k in range(1, d + 1) if present[k]]
    lpsi = np.stack([log_abs_psi_deriv(g, k, t) for k in ks], -1)
    kk = np.array(ks)
    sign = b.sign[:, kk] * (-1.0) ** (d - kk)
    log = np.where(sign != 0, b.log[:, kk] + lpsi, -np.inf)
    total, cond = sl_sum(SLArray(sign, log), axis=-1)
    return np.where(total.sign > 0, total.log, np.nan), np.where(total.sign > 0, cond, np.inf)


def _evaluate(tree: NacTree, u, max_levels: int) -> DensityResult:
    tree.validate()
    if tree.levels > max_levels:
        raise UnsupportedStructureError(
            f"tree has {tree.levels} levels; this evaluator handles at most {max_levels}")
    U, single = _as_points(tree, u)
    br = _branch(tree, U)
    logc, cond = _contract(tree.generator, br.poly, br.t)
    cond = np.maximum(cond, br.cond)
    cancelled = EPS * cond > LOSS_TOL
    logc = logc + br.jac
    if np.any(cancelled):
        rows = np.flatnonzero(cancelled)
        warnings.warn(f"cancellation in {rows.size} row(s), first row {rows[0]}; "
                      f"worst condition number {np.max(cond):.3g}", PrecisionWarning, stacklevel=3)
    if single:
        return DensityResult(float(logc[0]), bool(cancelled[0]), float(cond[0]), float(br.t[0]))
    return DensityResult(logc, cancelled, cond, br.t)


def logpdf2_details(tree: NacTree, u) -> DensityResult:
    return _evaluate(tree, u, max_levels=2)


def logpdf2(tree: NacTree, u):
    """Log-density of a two-level tree at a point or a batch of rows."""
    return _evaluate(tree, u, max_levels=2).logpdf


def pdf2(tree: NacTree, u):
    """``exp(logpdf2)``; over/underflows for large ``d`` where the log does not."""
    return np.exp(logpdf2(tree, u))


def logpdf_details(tree: NacTree, u) -> DensityResult:
    return _evaluate(tree, u, max_levels=3)


def logpdf(tree: NacTree, u):
    """Log-density of any supported tree (up to three levels)."""
    return _evaluate(tree, u, max_levels=3).logpdf


def pdf(tree: NacTree, u):
    return np.exp(logpdf(tree, u))


def archimedean_logpdf(g, u):
    """Plain ``d``-dimensional Archimedean log-density."""
    u = np.asarray(u, dtype=float)
    t = np.sum(psi_inv(g, u), axis=-1)
    d = u.shape[-1]
    return log_abs_psi_deriv(g, d, t) + np.sum(log_neg_psi_inv_prime(g, u), axis=-1)


# ---------------------------------------------------------------------------
# family-specific closed forms, evaluated in high precision
#
# These use the per-family derivative and coefficient formulas directly and
# the composition-set form of the b-coefficients, so they share nothing
# numerical with the engine above.

_DPS = 40


@lru_cache(maxsize=None)
def _amh_pair_polys(n: int) -> dict:
    """Integer coefficients ``c[k, l]`` with ``a_nk = sum_l c[k, l] x^l``.

    Here ``x = node'(t)`` for an AMH pair, which satisfies
    ``dx/dt = x - x^2``; the ``n``-th derivative of ``exp(-v node)`` then
    follows from ``P_{n+1} = (x - x^2) dP_n/dx + (-v) x P_n``.
    """
    poly = {(0, 0): 1}
    for _ in range(n):
        nxt: dict = {}
        for (k, l), c in poly.items():
            if l:
                nxt[k, l] = nxt.get((k, l), 0) + c * l
                nxt[k, l + 1] = nxt.get((k, l + 1), 0) - c * l
            nxt[k + 1, l + 1] = nxt.get((k + 1, l + 1), 0) + c
        poly = {key: c for key, c in nxt.items() if c}
    return poly


def _a_amh_mp(x):
    def a(n, k):
        return mpmath.fsum(c * x ** l for (kk, l), c in _amh_pair_polys(n).items() if kk == k)
    return a


def _mp_snk_rational(n, k, x: float):
    q = s_poly_exact(n, k, x)
    return mpmath.mpf(q.numerator) / q.denominator


def _a_power(alpha, y):
    return lambda n, k: y ** (alpha * k - n) * _mp_snk_rational(n, k, alpha)


def _a_joe_family(alpha, q):
    tab = get_tables(64)
    y = q / (1 - q)
    pa = (1 - q) ** mpmath.mpf(alpha)
    r = -pa / (1 - pa)

    def a(n, k):
        s = mpmath.mpf(0)
        for m in range(k, n + 1):
            inner = mpmath.fsum(tab.stirling1(l, k) * _mp_snk_rational(m, l, alpha) * r ** l
                                for l in range(k, m + 1))
            s += tab.stirling2(n, m) * (-y) ** m * inner
        return (-1) ** (n - k) * s

    return a


def _deriv_clayton(g, k, t):
    a = 1 / mpmath.mpf(g.theta)
    return (-1) ** k * mpmath.rf(a, k) * (1 + t) ** (-(k + a))


def _deriv_gumbel(g, k, t):
    a = 1 / mpmath.mpf(g.theta)
    s = mpmath.fsum(_mp_snk_rational(k, j, float(a)) * (-1) ** j * t ** (a * j)
                    for j in range(1, k + 1))
    return mpmath.exp(-t ** a) * t ** (-k) * s


def _deriv_amh(g, k, t):
    th = mpmath.mpf(g.theta)
    return (-1) ** k * (1 - th) / th * mpmath.polylog(-k, th * mpmath.exp(-t))


def _deriv_frank(g, k, t):
    th = mpmath.mpf(g.theta)
    p = -mpmath.expm1(-th)
    return (-1) ** k / th * mpmath.polylog(-(k - 1), p * mpmath.exp(-t))


def _deriv_joe(g, k, t):
    th = mpmath.mpf(g.theta)
    a = 1 / th
    e = 1 - mpmath.exp(-t)
    x = mpmath.exp(-t) / e
    tab = get_tables(64)
    pk = mpmath.fsum(tab.stirling2(k, l) * mpmath.fprod(m - a for m in range(1, l)) * x ** l
                     for l in range(1, k + 1))
    return (-1) ** k * e ** a / th * pk


def _deriv_top(g, n, t):
    th = mpmath.mpf(g.theta)
    c = mpmath.mpf(g.c)
    a = 1 / th
    y = c ** th + t
    z = y ** a - c
    if g.base.name == "E":
        base = lambda k: (-1) ** k * mpmath.exp(-z)  # noqa: E731
    else:
        base = lambda k: (-1) ** k * mpmath.factorial(k) / (1 + z) ** (k + 1)  # noqa: E731
    return mpmath.fsum(base(k) * y ** (a * k - n) * _mp_snk_rational(n, k, g.theta ** -1)
                       for k in range(1, n + 1))


def _coeffs_for(parent, child, ts):
    """``a(n, k)`` for the pair at the child argument ``ts`` (mp)."""
    th0 = mpmath.mpf(parent.theta)
    th1 = mpmath.mpf(child.theta)
    fam0, fam1 = parent.family, child.family
    if fam0 is Family.AMH and fam1 is Family.CLAYTON:
        tab = get_tables(64)
        b = 1 / th1
        w = (1 - th0) / (th0 + (1 - th0) * (1 + ts) ** b)

        def a(n, k):
            return mpmath.fsum(tab.stirling1(j, k) * _mp_snk_rational(n, j, child.theta ** -1)
                               * w ** j * (1 + ts) ** (j * b - n) for j in range(k, n + 1))
        return a
    alpha = parent.theta / child.theta
    if fam0 is Family.CLAYTON:
        return _a_power(alpha, 1 + ts)
    if fam0 is Family.GUMBEL:
        return _a_power(alpha, ts)
    if fam0 is Family.TOP:
        return _a_power(alpha, mpmath.mpf(child.c) ** th1 + ts)
    if fam0 is Family.AMH:
        th01 = (th1 - th0) / (1 - th0)
        x = 1 / (1 - th01 * mpmath.exp(-ts))
        return _a_amh_mp(x)
    if fam0 is Family.JOE:
        return _a_joe_family(alpha, mpmath.exp(-ts))
    ps = -mpmath.expm1(-th1)
    return _a_joe_family(alpha, ps * mpmath.exp(-ts))


_DERIVS = {
    Family.CLAYTON: _deriv_clayton,
    Family.GUMBEL: _deriv_gumbel,
    Family.AMH: _deriv_amh,
    Family.FRANK: _deriv_frank,
    Family.JOE: _deriv_joe,
    Family.TOP: _deriv_top,
}


def _special_pdf_point(tree: NacTree, u) -> float:
    from .oracle import mp_neg_psi_inv_prime, mp_psi, mp_psi_inv

    g0 = tree.generator
    with mpmath.workdps(_DPS):
        mu = [mpmath.mpf(float(x)) for x in u]
        t = mpmath.mpf(0)
        jac = mpmath.mpf(1)
        tables, dims = [], []
        shift = 0
        for ch in tree.children:
            if isinstance(ch, NacTree):
                gs = ch.generator
                ts = mpmath.fsum(mp_psi_inv(gs, mu[j - 1]) for j in ch.children)
                t += mp_psi_inv(g0, mp_psi(gs, ts))
                for j in ch.children:
                    jac *= mp_neg_psi_inv_prime(gs, mu[j - 1])
                a = _coeffs_for(g0, gs, ts)
                ds = len(ch.children)
                tables.append([a(ds, k) for k in range(1, ds + 1)])
                dims.append(ds)
            else:
                t += mp_psi_inv(g0, mu[ch - 1])
                jac *= mp_neg_psi_inv_prime(g0, mu[ch - 1])
                shift += 1
        d = sum(dims) + shift
        deriv = _DERIVS[g0.family]
        if not dims:
            total = (-1) ** d * deriv(g0, d, t)
        else:
            total = mpmath.mpf(0)
            for k in range(len(dims), sum(dims) + 1):
                bk = mpmath.fsum(mpmath.fprod(tab[j - 1] for tab, j in zip(tables, js))
                                 for js in bounded_compositions(dims, k))
                total += (-1) ** d * bk * deriv(g0, k + shift, t)
        return float(total * jac)


def _special(tree: NacTree, u, root: Family, child: Family):
    tree.validate()
    if tree.levels > 2:
        raise UnsupportedStructureError("closed-form densities cover two-level trees only")
    fams = {sub.generator.family for sub in tree.subtrees}
    if tree.generator.family is not root or not fams <= {child}:
        raise ValueError(f"expected a {root.name} root with {child.name} children")
    U, single = _as_points(tree, u)
    out = np.array([_special_pdf_point(tree, row) for row in U])
    return _out(out, single)


def pdf_clayton2(tree, u):
    return _special(tree, u, Family.CLAYTON, Family.CLAYTON)


def pdf_gumbel2(tree, u):
    return _special(tree, u, Family.GUMBEL, Family.GUMBEL)


def pdf_amh2(tree, u):
    return _special(tree, u, Family.AMH, Family.AMH)


def pdf_joe2(tree, u):
    return _special(tree, u, Family.JOE, Family.JOE)


def pdf_frank2(tree, u):
    return _special(tree, u, Family.FRANK, Family.FRANK)


def pdf_amh_clayton2(tree, u):
    return _special(tree, u, Family.AMH, Family.CLAYTON)


def pdf_top2(tree, u):
    return _special(tree, u, Family.TOP, Family.TOP)


SPECIALIZED = {
    "clayton": pdf_clayton2,
    "gumbel": pdf_gumbel2,
    "amh": pdf_amh2,
    "joe": pdf_joe2,
    "frank": pdf_frank2,
    "amh_clayton": pdf_amh_clayton2,
    "top": pdf_top2,
}
