import math
import warnings

import numpy as np
import pytest
from families import FAMILIES, flat_tree, tree

from nacdens import BoundaryError, UnsupportedStructureError, cdf, cdf_details, parse
from nacdens.density import (
    SPECIALIZED,
    archimedean_logpdf,
    logpdf,
    logpdf2,
    logpdf2_details,
    pdf2,
    pdf_amh2,
    pdf_gumbel2,
)
from nacdens.generators import clayton, gumbel, psi_inv
from nacdens.oracle import fd_mixed_partial, mp_cdf

SPECIAL_KEY = {f: ("top" if f.startswith("top") else f) for f in FAMILIES}


def interior(rng, n, d, lo=0.05, hi=0.95):
    return rng.uniform(lo, hi, (n, d))


def test_cdf_independence():
    t = parse("G(1; 1, G(1; 2, 3))")
    assert cdf(t, [0.5, 0.5, 0.5]) == pytest.approx(0.125, rel=1e-14)


def test_cdf_uniform_margin():
    t = parse("G(1.3333333333333333; 1, G(2; 2, 3))")
    reduced = parse("G(1.3333333333333333; 1, G(2; 2))")
    assert cdf(t, [0.3, 0.6, 1 - 1e-12]) == pytest.approx(cdf(reduced, [0.3, 0.6]), rel=1e-9)


def test_cdf_nested_clayton_against_mpmath():
    t = parse("C(1; 1, C(2; 2, 3))")
    u = [0.3, 0.4, 0.5]
    # closed form: psi_0(psi_0^-1(u1) + psi_0^-1(C_1(u2, u3)))
    c1 = (0.4 ** -2 + 0.5 ** -2 - 1) ** -0.5
    direct = 1 / (1 / 0.3 - 1 + 1 / c1 - 1 + 1)
    assert cdf(t, u) == pytest.approx(direct, rel=1e-14)
    assert cdf(t, u) == pytest.approx(float(mp_cdf(t, u)), rel=1e-14)


def test_cdf_batch_and_details(rng):
    t = tree("gumbel", 4)
    U = interior(rng, 6, 4)
    det = cdf_details(t, U)
    assert det.value.shape == (6,)
    assert det.value == pytest.approx([cdf(t, row) for row in U], rel=1e-15)
    assert det.t == pytest.approx(psi_inv(t.generator, det.value), rel=1e-12)


@pytest.mark.parametrize("family", list(FAMILIES))
def test_engine_t_matches_inverse_of_cdf(family, rng):
    t = tree(family, 5)
    U = interior(rng, 10, 5)
    engine_t = logpdf2_details(t, U).t
    assert engine_t == pytest.approx(psi_inv(t.generator, cdf(t, U)), rel=1e-9)


def test_boundary_rejected():
    t = parse("G(1.5; 1, G(2; 2, 3))")
    for u in ([0.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, math.nan, 0.5]):
        with pytest.raises(BoundaryError):
            logpdf2(t, u)
    with pytest.raises(BoundaryError, match="row 1"):
        logpdf2(t, [[0.2, 0.3, 0.4], [0.2, 1.2, 0.4]])
    with pytest.raises(ValueError):
        logpdf2(t, [0.2, 0.3])


def test_independence_density(rng):
    t = parse("G(1; 1, G(1; 2, 3), G(1; 4, 5))")
    assert logpdf2(t, interior(rng, 20, 5)) == pytest.approx(np.zeros(20), abs=1e-13)
    assert pdf2(t, [0.2, 0.4, 0.6, 0.8, 0.5]) == pytest.approx(1.0, abs=1e-13)


@pytest.mark.parametrize("prefix", ["C(1.7", "G(2.2", "F(4.0", "J(2.3", "A(0.6"])
def test_collapse(prefix, rng):
    t = flat_tree(prefix, 5)
    U = interior(rng, 10, 5)
    got = np.exp(logpdf2(t, U))
    ref = np.exp(archimedean_logpdf(t.generator, U))
    assert got == pytest.approx(ref, rel=1e-10)


def test_nested_gumbel_finite_difference():
    t = parse("G(1.3333333333333333; 1, G(2; 2, 3))")
    u = [0.3, 0.5, 0.7]
    assert pdf2(t, u) == pytest.approx(fd_mixed_partial(t, u, step=1e-4), rel=1e-3)


def test_pdf_is_exp_logpdf(rng):
    t = tree("clayton", 4)
    U = interior(rng, 5, 4)
    assert np.array_equal(pdf2(t, U), np.exp(logpdf2(t, U)))


@pytest.mark.parametrize("family", list(FAMILIES))
def test_generic_matches_finite_differences(family, rng):
    t = tree(family, 3)
    for u in interior(rng, 2, 3, 0.1, 0.9):
        assert pdf2(t, u) == pytest.approx(fd_mixed_partial(t, u), rel=1e-3)


@pytest.mark.parametrize("family", list(FAMILIES))
@pytest.mark.parametrize("d", [3, 4, 5])
def test_specialized_matches_generic(family, d, rng):
    t = tree(family, d)
    U = interior(rng, 4, d)
    special = SPECIALIZED[SPECIAL_KEY[family]](t, U)
    assert pdf2(t, U) == pytest.approx(special, rel=1e-9)


def test_specialized_family_mismatch():
    with pytest.raises(ValueError):
        pdf_amh2(tree("gumbel", 3), [0.2, 0.3, 0.4])


def test_specialized_gumbel_independence():
    t = parse("G(1; 1, G(1; 2, 3))")
    assert pdf_gumbel2(t, [0.2, 0.5, 0.9]) == pytest.approx(1.0, rel=1e-14)


def test_amh_specialized_finite_difference():
    t = tree("amh", 3)
    u = [0.25, 0.6, 0.8]
    assert pdf_amh2(t, u) == pytest.approx(fd_mixed_partial(t, u), rel=1e-3)


def test_log_space_stability_high_dimension():
    eps = 1e-8
    leaves = ", ".join(str(j) for j in range(2, 21))
    t = parse(f"G(2; 1, G(4; {leaves}))")
    rng = np.random.default_rng(3)
    corners = rng.choice([eps, 1 - eps], size=(50, 20))
    mixed = rng.uniform(eps, 1 - eps, (50, 20))
    for U in (corners, mixed, np.full((1, 20), eps), np.full((1, 20), 1 - eps)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert np.all(np.isfinite(logpdf2(t, U)))


def test_exchangeability_within_child(rng):
    t = parse("G(1.5; 1, G(2.5; 2, 3, 4), G(3; 5, 6))")
    U = interior(rng, 10, 6)
    perm = U[:, [0, 3, 1, 2, 5, 4]]
    assert logpdf2(t, perm) == pytest.approx(logpdf2(t, U), abs=1e-12)


def test_exchangeability_across_equal_children(rng):
    t = parse("C(0.8; 1, C(2; 2, 3), C(2; 4, 5))")
    U = interior(rng, 10, 5)
    swapped = U[:, [0, 3, 4, 1, 2]]
    assert logpdf2(t, swapped) == pytest.approx(logpdf2(t, U), abs=1e-12)


def test_batch_equals_rows(rng):
    t = tree("joe", 5)
    U = interior(rng, 7, 5)
    batch = logpdf2(t, U)
    assert batch == pytest.approx([logpdf2(t, row) for row in U], rel=1e-15)


def test_degenerate_only_children_is_archimedean(rng):
    t = parse("C(1.3; 1, 2, 3, 4)")
    U = interior(rng, 5, 4)
    assert logpdf2(t, U) == pytest.approx(archimedean_logpdf(clayton(1.3), U), rel=1e-12)


def test_two_level_evaluator_rejects_three_levels():
    t = parse("G(1.2; 1, G(1.5; 2, G(2; 3, 4)))")
    with pytest.raises(UnsupportedStructureError):
        logpdf2(t, [0.2, 0.3, 0.4, 0.5])
    assert math.isfinite(logpdf(t, [0.2, 0.3, 0.4, 0.5]))


def test_identity_pair_nodes_match_flat():
    # parent and child share the generator: same as the flat copula
    for prefix, g in (("G(2", gumbel(2.0)), ("C(1.5", clayton(1.5))):
        t = parse(f"{prefix}; 1, {prefix}; 2, 3), {prefix}; 4))")
        u = np.array([0.3, 0.4, 0.6, 0.7])
        assert logpdf2(t, u) == pytest.approx(archimedean_logpdf(g, u), rel=1e-11)
