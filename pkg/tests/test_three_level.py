import math

import mpmath
import numpy as np
import pytest

from nacdens import UnsupportedStructureError, parse
from nacdens.density import archimedean_logpdf, logpdf2
from nacdens.generators import gumbel
from nacdens.inner_coeffs import NodePair, a_coeff_table, node_deriv, node_value
from nacdens.oracle import fd_mixed_partial, mp_psi, mp_psi_inv
from nacdens.three_level import logpdf3, middle_a_table, pdf3, three_level_coeffs

STRUCTURES = {
    "gumbel_a": "G(1.3333333333333333; G(2; G(3; 1, 2), G(3.5; 3, 4)))",
    "gumbel_b": "G(1.25; 1, G(1.8; 2, G(2.7; 3, 4)))",
    "clayton_a": "C(0.6; C(1.2; C(2.5; 1, 2), C(3.2; 3, 4)))",
    "clayton_b": "C(0.5; 1, C(1.1; 2, C(2.9; 3, 4)))",
    "gumbel_d5": "G(1.2; 1, G(1.7; G(2.4; 2, 3), 4), G(3; 5))",
    "clayton_d5": "C(0.7; C(1.4; 1, C(2.2; 2, 3)), C(1.9; 4, 5))",
}
POINTS = {4: [0.35, 0.55, 0.45, 0.7], 5: [0.3, 0.5, 0.65, 0.4, 0.75]}


@pytest.mark.parametrize("name", list(STRUCTURES))
def test_matches_cdf_finite_differences(name, rng):
    t = parse(STRUCTURES[name])
    for u in [POINTS[t.d], rng.uniform(0.15, 0.85, t.d)]:
        assert pdf3(t, u) == pytest.approx(fd_mixed_partial(t, u), rel=1e-3)


def test_independence():
    t = parse("G(1; 1, G(1; 2, G(1; 3, 4)))")
    assert logpdf3(t, [0.1, 0.4, 0.6, 0.9]) == pytest.approx(0.0, abs=1e-13)


@pytest.mark.parametrize("prefix", ["G(2.1", "C(1.4"])
def test_collapse_all_equal(prefix, rng):
    t = parse(f"{prefix}; {prefix}; {prefix}; 1, 2), {prefix}; 3, 4)))")
    U = rng.uniform(0.05, 0.95, (10, 4))
    got = np.exp(logpdf3(t, U))
    assert got == pytest.approx(np.exp(archimedean_logpdf(t.generator, U)), rel=1e-9)


@pytest.mark.parametrize("fam, th", [("G", (1.4, 2.2, 3.0)), ("C", (0.8, 1.6, 2.7))])
def test_splice(fam, th, rng):
    a, b, c = th
    three = parse(f"{fam}({a}; 1, {fam}({a}; {fam}({b}; 2, 3), {fam}({c}; 4, 5)))")
    two = parse(f"{fam}({a}; 1, {fam}({b}; 2, 3), {fam}({c}; 4, 5))")
    U = rng.uniform(0.05, 0.95, (10, 5))
    assert np.exp(logpdf3(three, U)) == pytest.approx(np.exp(logpdf2(two, U)), rel=1e-9)


def test_two_level_input_matches_logpdf2(rng):
    t = parse("G(1.5; 1, G(2; 2, 3), G(2.5; 4, 5))")
    U = rng.uniform(0.05, 0.95, (5, 5))
    assert logpdf3(t, U) == pytest.approx(logpdf2(t, U), rel=1e-15)


def test_single_grandchild_of_size_one_reduces():
    root = gumbel(1.3)
    middle = parse("G(1.9; 1, G(2.6; 2))")
    u = np.array([0.4, 0.7])
    comp = middle_a_table(root, middle, u)
    mg = middle.generator
    t_star = float(mpmath.fsum(mp_psi_inv(mg, x) for x in u))
    ref = a_coeff_table(NodePair(root, mg), 2, t_star).values()
    # the singleton grandchild contributes its first node derivative, which
    # the change of Jacobian (psi_g^-1)' -> (psi_M^-1)' absorbs
    gg = middle.subtrees[0].generator
    tg = float(mp_psi_inv(gg, u[1]))
    factor = node_deriv(NodePair(mg, gg), 1, tg).to_real()
    assert comp.values() == pytest.approx(ref * factor, rel=1e-12)


def test_singleton_grandchild_equals_leaf(rng):
    with_node = parse("G(1.3; 1, G(1.9; 2, G(2.6; 3), 4))")
    with_leaf = parse("G(1.3; 1, G(1.9; 2, 3, 4))")
    U = rng.uniform(0.05, 0.95, (10, 4))
    assert logpdf3(with_node, U) == pytest.approx(logpdf2(with_leaf, U), rel=1e-11)


def test_integrand_derivative():
    # d^4/du1..du4 of exp(-v psi_1^-1(psi_11(t*_11(u)))) against the composite table
    t = parse("G(1.3333333333333333; G(2; G(3; 1, 2), G(3; 3, 4)))")
    root = t.generator
    middle = t.subtrees[0]
    v = 1.7
    u = [0.35, 0.55, 0.45, 0.7]

    def t_star(x):
        gm = middle.generator
        s = 0
        for leaf in middle.subtrees:
            gl = leaf.generator
            s += mp_psi_inv(gm, mp_psi(gl, sum(mp_psi_inv(gl, x[j - 1]) for j in leaf.children)))
        return s

    def f(*x):
        return mpmath.exp(-v * mp_psi_inv(root, mp_psi(middle.generator, t_star(x))))

    with mpmath.workdps(40):
        ref = float(mpmath.diff(f, u, (1, 1, 1, 1)))
        ts = float(t_star([mpmath.mpf(x) for x in u]))
        jac = 1.0
        for leaf in middle.subtrees:
            gl = leaf.generator
            for j in leaf.children:
                jac *= float(-mpmath.diff(lambda y: mp_psi_inv(gl, y), u[j - 1]))
    comp = middle_a_table(root, middle, u)
    base = math.exp(-v * node_value(NodePair(root, middle.generator), ts))
    got = base * jac * sum(comp[k].to_real() * (-v) ** k for k in range(1, 5))
    assert got == pytest.approx(ref, rel=1e-3)


def test_composite_signs(rng):
    t = parse("G(1.2; G(1.6; G(2.5; 1, 2, 3), G(3.1; 4, 5)), G(1.9; 6, 7))")
    for u in rng.uniform(0.02, 0.98, (10, 7)):
        co = three_level_coeffs(t, u)
        tab = co.middle[0]
        for k in range(1, 6):
            assert tab[k].sign == (-1) ** (5 - k)
        b = co.root_b
        for k in range(b.kmin, b.kmax + 1):
            assert b[k].sign == (-1) ** (7 - k)


def test_depth_limits():
    with pytest.raises(UnsupportedStructureError):
        parse("G(1.1; 1, G(1.2; 2, G(1.3; 3, G(1.4; 4, 5))))")
    with pytest.raises(UnsupportedStructureError):
        middle_a_table(gumbel(1.0), parse("G(1.2; 1, G(1.5; 2, G(2; 3, 4)))"), [0.5] * 4)
