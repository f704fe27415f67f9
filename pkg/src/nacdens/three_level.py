"""Three-level nested Archimedean densities.

A middle node ``M`` (child of the root, parent of two-level branches) is
handled by first forming the product ``beta`` of its children's polynomials
and then pushing it through the root/middle pair:

    composite_k = sum_{l=k}^{d_M} a^{root,M}_{l,k}(t*_M) beta_l,

with ``t*_M`` the argument of ``psi_M``.  Signs give
``sign(composite_k) = (-1)^(d_M - k)``, so the sum does not cancel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import DensityResult, _branch, _evaluate, composite_coefficients
from .errors import UnsupportedStructureError
from .generators import Generator
from .inner_coeffs import CoeffTable, NodePair
from .signedlog import to_scalar
from .tree import NacTree


@dataclass(frozen=True)
class ThreeLevelCoeffs:
    """Composite tables of the middle nodes and the root b-table at one point.

    ``middle`` maps the position of each middle node among the root's
    children to its composite a-table (``k = 1..d_M``).
    """

    middle: dict
    root_b: CoeffTable


def _full_point(node: NacTree, u) -> np.ndarray:
    u = np.asarray(u, dtype=float).ravel()
    need = max(node.leaves)
    if u.size < need:
        raise ValueError(f"point has {u.size} coordinates but leaf {need} is referenced")
    return u[None, :]


def middle_a_table(parent: Generator, node: NacTree, u) -> CoeffTable:
    """Composite a-table of a middle node below ``parent`` at point ``u``.

    ``u`` is indexed by the global (1-based) leaf numbers of ``node``.
    """
    if node.levels > 2:
        raise UnsupportedStructureError("a middle node may only have two-level branches below it")
    U = _full_point(node, u)
    if np.any(~((U > 0) & (U < 1))):
        raise ValueError("coordinates must lie in (0, 1)")
    sub = _branch(node, U)
    poly, cond = composite_coefficients(NodePair(parent, node.generator), sub.poly, sub.t)
    d = len(node.leaves)
    entries = tuple(to_scalar(poly[0, k]) for k in range(1, d + 1))
    return CoeffTable(1, entries, bool(np.max(cond) * np.finfo(float).eps > 1e-8))


def three_level_coeffs(tree: NacTree, u) -> ThreeLevelCoeffs:
    tree.validate()
    U = _full_point(tree, u)
    middle = {i: middle_a_table(tree.generator, ch, U[0])
              for i, ch in enumerate(tree.children)
              if isinstance(ch, NacTree) and ch.levels == 2}
    br = _branch(tree, U)
    nz = [k for k in range(br.poly.log.shape[-1]) if br.poly.sign[0, k] != 0]
    kmin = nz[0] if nz else 0
    entries = tuple(to_scalar(br.poly[0, k]) for k in range(kmin, tree.d + 1)) if nz else ()
    return ThreeLevelCoeffs(middle, CoeffTable(kmin, entries))


def logpdf3_details(tree: NacTree, u) -> DensityResult:
    return _evaluate(tree, u, max_levels=3)


def logpdf3(tree: NacTree, u):
    """Log-density of a tree with up to three levels.

    Two-level branches may sit next to three-level ones; trees with fewer
    levels give the same value as :func:`~nacdens.density.logpdf2`.
    """
    return _evaluate(tree, u, max_levels=3).logpdf


def pdf3(tree: NacTree, u):
    return np.exp(logpdf3(tree, u))
