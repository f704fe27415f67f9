"""Frailty sampling of nested Gumbel and Clayton copulas.

A node with frailty ``V`` passes to a child node the frailty ``V_s`` whose
Laplace transform is ``exp(-V * node(x))``; leaves are ``psi(E / V)`` with a
unit exponential ``E``.

* Gumbel: ``node(x) = x^a`` so ``V_s = V^(1/a) * S_a`` with ``S_a`` positive
  ``a``-stable (Laplace transform ``exp(-x^a)``).
* Clayton: ``node(x) = (1+x)^a - 1`` so ``V_s`` is the stable variable above
  tilted by ``exp(-x)``.  It is drawn by plain rejection after splitting
  ``V`` into ``m = ceil(V)`` independent pieces, which keeps the acceptance
  probability of each piece above ``exp(-1)``.

Each row of the output has its own Philox stream derived from
``(seed, row)``, so results do not depend on evaluation order.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .errors import UnsupportedStructureError
from .generators import Family, psi
from .tree import NacTree

_TINY = np.finfo(float).tiny
_ALMOST_ONE = np.nextafter(1.0, 0.0)


def row_rng(seed: int, row: int) -> np.random.Generator:
    """Independent counter-based stream for observation ``row``."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2 ** 64 - 1), spawn_key=(int(row),))
    return np.random.Generator(np.random.Philox(ss))


def sample_stable(alpha: float, rng: np.random.Generator, size=None):
    """Positive ``alpha``-stable variates with Laplace transform ``exp(-t^alpha)``.

    Kanter's representation (the Chambers-Mallows-Stuck form for the totally
    skewed positive case).
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if alpha == 1:
        return np.ones(size) if size is not None else 1.0
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    s = (np.sin(alpha * u) / np.sin(u) ** (1 / alpha)
         * (np.sin((1 - alpha) * u) / e) ** ((1 - alpha) / alpha))
    return s


def _tilted_stable(alpha: float, v: float, rng: np.random.Generator) -> float:
    """Variate with Laplace transform ``exp(-v ((1+x)^alpha - 1))``."""
    if alpha == 1:
        return v
    m = max(1, math.ceil(v))
    piece = v / m
    scale = piece ** (1 / alpha)
    total = 0.0
    for _ in range(m):
        while True:
            x = scale * sample_stable(alpha, rng)
            if rng.uniform() <= math.exp(-x):
                total += x
                break
    return total


def _check_tree(tree: NacTree) -> Family:
    fams = set()

    def walk(node):
        fams.add(node.generator.family)
        for ch in node.subtrees:
            walk(ch)

    walk(tree)
    if len(fams) != 1 or not fams <= {Family.GUMBEL, Family.CLAYTON}:
        raise UnsupportedStructureError("sampling covers all-Gumbel or all-Clayton trees only")
    return fams.pop()


def _root_frailty(fam: Family, theta: float, rng) -> float:
    if fam is Family.GUMBEL:
        return float(sample_stable(1.0 / theta, rng))
    return float(rng.gamma(1.0 / theta))


def _child_frailty(fam: Family, alpha: float, v: float, rng) -> float:
    if fam is Family.GUMBEL:
        return v ** (1.0 / alpha) * float(sample_stable(alpha, rng))
    return _tilted_stable(alpha, v, rng)


def _fill(node: NacTree, v: float, fam: Family, rng, out: np.ndarray) -> None:
    g = node.generator
    for ch in node.children:
        if isinstance(ch, NacTree):
            alpha = g.theta / ch.generator.theta
            _fill(ch, _child_frailty(fam, alpha, v, rng), fam, rng, out)
        else:
            out[ch - 1] = psi(g, rng.standard_exponential() / v)


def sample_nested(tree: NacTree, n: int, seed: int = 0) -> np.ndarray:
    """``n`` observations from ``tree``; column ``j`` holds leaf ``j + 1``.

    Values are clipped into the open unit interval so that every row is a
    valid density argument.
    """
    tree.validate()
    fam = _check_tree(tree)
    if n < 0:
        raise ValueError("n must be non-negative")
    out = np.empty((n, tree.d))
    for i in range(n):
        rng = row_rng(seed, i)
        v0 = _root_frailty(fam, tree.generator.theta, rng)
        _fill(tree, v0, fam, rng, out[i])
    return np.clip(out, _TINY, _ALMOST_ONE)


def kendall_tau(x, y) -> tuple[float, float]:
    """Kendall's tau with its asymptotic standard error.

    The error comes from the Hoeffding decomposition of the U-statistic:
    ``var(tau) ~ 4 var(h_i) / n`` with ``h_i`` the average concordance sign
    of observation ``i`` against the rest.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    h = np.empty(n)
    for lo in range(0, n, 1024):
        sl = slice(lo, lo + 1024)
        s = np.sign(x[sl, None] - x[None, :]) * np.sign(y[sl, None] - y[None, :])
        h[sl] = s.sum(axis=1) / (n - 1)
    tau = float(h.mean())
    return tau, float(2.0 * h.std(ddof=1) / math.sqrt(n))


def ks_uniform(column) -> float:
    """p-value of the Kolmogorov-Smirnov test against Uniform(0, 1)."""
    return float(stats.kstest(column, "uniform").pvalue)
