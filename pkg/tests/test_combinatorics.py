import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nacdens import combinatorics as cb
from nacdens.errors import PrecisionWarning
from nacdens.oracle import s_poly_rational


# ---- Stirling numbers -------------------------------------------------------

def test_stirling_examples():
    assert cb.stirling1(0, 0) == 1 and cb.stirling2(0, 0) == 1
    assert cb.stirling1(5, 0) == 0 and cb.stirling2(5, 0) == 0
    assert cb.stirling1(3, 1) == 2
    assert cb.stirling2(6, 6) == 1
    assert cb.stirling2(4, 2) == 7


def test_stirling_recurrences():
    for n in range(0, 40):
        for k in range(1, n + 2):
            assert cb.stirling1(n + 1, k) == cb.stirling1(n, k - 1) - n * cb.stirling1(n, k)
            assert cb.stirling2(n + 1, k) == cb.stirling2(n, k - 1) + k * cb.stirling2(n, k)


def test_stirling_big_values_exact():
    # |s(n,1)| = (n-1)!
    assert cb.stirling1(30, 1) == -math.factorial(29)
    assert abs(cb.stirling1(64, 1)) == math.factorial(63)


def test_stirling_out_of_range():
    with pytest.raises(ValueError):
        cb.stirling1(65, 3)
    with pytest.raises(ValueError):
        cb.stirling2(-1, 0)


def test_falling_factorial():
    assert cb.falling_factorial(2.7, 0) == 1
    assert cb.falling_factorial(3, 3) == 6
    assert cb.falling_factorial(0.5, 2) == -0.25


# ---- s_nk -------------------------------------------------------------------

def test_s_poly_examples():
    assert math.isclose(cb.s_poly(1, 1, 0.7).to_real(), 0.7)
    exact = float(s_poly_rational(4, 2, Fraction(1, 2)))
    assert math.isclose(cb.s_poly(4, 2, 0.5).to_real(), exact, rel_tol=1e-14)


@pytest.mark.parametrize("x", [0.1, 0.5, 0.9])
def test_s_poly_sign(x):
    for n in range(1, 21):
        v = cb.s_poly_table(n, x)[0]
        for k in range(1, n + 1):
            assert v.sign[k - 1] == (-1) ** (n - k)


def test_s_poly_at_one_is_kronecker_delta():
    # s_nk(1) = sum_l s(n,l) S(l,k) = delta_nk, so the sign rule holds only weakly
    for n in range(1, 21):
        v = cb.s_poly_table(n, 1.0)[0]
        for k in range(1, n + 1):
            assert v.sign[k - 1] == (1 if k == n else 0)


def test_s_poly_falling_factorial_identity():
    # sum_k (-1)_k s_nk(x) = (-x)_n
    for n in range(1, 21):
        for x in (0.05, 0.4, 0.77, 1.0):
            row, _ = cb.s_poly_table(n, x)
            lhs = sum(cb.falling_factorial(-1, k) * row.sign[k - 1] * math.exp(row.log[k - 1])
                      for k in range(1, n + 1))
            rhs = cb.falling_factorial(-x, n)
            assert math.isclose(lhs, rhs, rel_tol=1e-10)


def test_s_poly_exact_fallback_warns():
    with pytest.warns(PrecisionWarning):
        v = cb.s_poly(6, 3, 1.0)  # s_nk(1) = delta_nk: total cancellation
    assert v.sign == 0 and v.cancelled


@given(st.integers(1, 20), st.data())
def test_s_poly_matches_rational_oracle(n, data):
    k = data.draw(st.integers(1, n))
    got = cb.s_poly_table(n, 0.4)[0]
    want = float(s_poly_rational(n, k, Fraction(0.4)))
    assert math.isclose(got.sign[k - 1] * math.exp(got.log[k - 1]), want, rel_tol=1e-12)


def test_s_poly_diagonal():
    for n in range(1, 15):
        assert math.isclose(cb.s_poly(n, n, 0.3).to_real(), 0.3 ** n, rel_tol=1e-13)


# ---- Bell polynomials -------------------------------------------------------

def test_bell_examples():
    assert math.isclose(cb.bell_partial(1, 1, [2.5]).to_real(), 2.5)
    assert cb.bell_partial(6, 3, [1.0] * 4).to_real() == pytest.approx(90)
    assert math.isclose(cb.bell_partial_enumerated(2, 1, [1.7, 3.1]).to_real(), 3.1)
    assert math.isclose(cb.bell_partial_enumerated(3, 2, [1.7, 3.1]).to_real(), 3 * 1.7 * 3.1)


def test_bell_length_mismatch():
    with pytest.raises(ValueError):
        cb.bell_partial(4, 2, [1.0, 2.0])


def test_bell_enumeration_refuses_large_n():
    with pytest.raises(ValueError):
        cb.bell_partial_enumerated(21, 3, [1.0] * 19)


def test_bell_recurrence_vs_enumeration(rng):
    for n in range(1, 13):
        for k in range(1, n + 1):
            xs = list(rng.uniform(0.2, 3.0, n - k + 1))
            a = cb.bell_partial(n, k, xs)
            b = cb.bell_partial_enumerated(n, k, xs)
            assert a.isclose(b, rel_tol=1e-12)


def test_bell_constant_and_alternating_arguments():
    for n in range(1, 16):
        for k in range(1, n + 1):
            x = 1.5
            assert math.isclose(cb.bell_partial(n, k, [x] * (n - k + 1)).to_real(),
                                cb.stirling2(n, k) * x ** k, rel_tol=1e-12)
            alt = [(-1) ** i * x for i in range(1, n - k + 2)]
            assert math.isclose(cb.bell_partial(n, k, alt).to_real(),
                                (-1) ** n * cb.stirling2(n, k) * x ** k, rel_tol=1e-12)


def test_bell_partition_weighted_sum():
    x = Fraction(3, 7)
    for n in range(1, 13):
        for k in range(1, n + 1):
            for j in cb.bell_partitions(n, k):
                assert sum((x - l) * jl for l, jl in enumerate(j, start=1)) == x * k - n


def test_bell_scaling():
    # B_{n,k}(a b x_1, a b^2 x_2, ...) = a^k b^n B_{n,k}(x)
    rng = np.random.default_rng(5)
    a, b = 0.7, 1.3
    for n in range(1, 13):
        for k in range(1, n + 1):
            xs = rng.uniform(0.5, 2.0, n - k + 1)
            scaled = [a * b ** i * x for i, x in enumerate(xs, start=1)]
            assert math.isclose(cb.bell_partial(n, k, scaled).to_real(),
                                a ** k * b ** n * cb.bell_partial(n, k, list(xs)).to_real(),
                                rel_tol=1e-11)


def test_bell_of_power_derivatives(rng):
    for n in range(1, 13):
        x = rng.uniform(0.05, 1.0)
        y = rng.uniform(0.5, 2.0)
        for k in range(1, n + 1):
            xs = [cb.falling_factorial(x, l) * y ** (x - l) for l in range(1, n - k + 2)]
            lhs = cb.bell_partial(n, k, xs).to_real()
            rhs = y ** (x * k - n) * float(s_poly_rational(n, k, Fraction(x)))
            assert math.isclose(lhs, rhs, rel_tol=1e-10)


# ---- compositions -----------------------------------------------------------

def test_composition_examples():
    assert list(cb.bounded_compositions((2, 2), 2)) == [(1, 1)]
    assert list(cb.bounded_compositions((2, 2), 3)) == [(1, 2), (2, 1)]
    assert list(cb.bounded_compositions((2, 2), 4)) == [(2, 2)]
    assert len(cb.bounded_compositions((2, 2), 5)) == 0
    assert len(cb.bounded_compositions((2, 2), 1)) == 0


def _gf_count(d_vec, k):
    poly = np.array([1], dtype=object)
    for d in d_vec:
        poly = np.convolve(poly, np.array([0] + [1] * d, dtype=object))
    return int(poly[k]) if k < len(poly) else 0


def test_composition_cardinality_generating_function(rng):
    for _ in range(50):
        m = int(rng.integers(1, 5))
        d_vec = tuple(int(x) for x in rng.integers(1, 5, m))
        k = int(rng.integers(m, sum(d_vec) + 1))
        comps = cb.bounded_compositions(d_vec, k)
        assert len(comps) == _gf_count(d_vec, k)
        assert list(comps) == sorted(comps)
        for j in comps:
            assert sum(j) == k and all(1 <= js <= ds for js, ds in zip(j, d_vec))


# ---- Eulerian numbers -------------------------------------------------------

def test_eulerian_examples():
    assert cb.eulerian(0, 0) == 1
    assert cb.eulerian(3, 1) == 4
    assert sum(cb.eulerian(5, k) for k in range(5)) == 120


# ---- polynomial products ----------------------------------------------------

def test_poly_product_matches_numpy(rng):
    p = rng.normal(size=4)
    q = rng.normal(size=3)
    from nacdens.signedlog import sl_from_real, sl_to_real
    got = sl_to_real(cb.sl_poly_mul(sl_from_real(p), sl_from_real(q)))
    np.testing.assert_allclose(got, np.convolve(p, q), rtol=1e-12, atol=1e-14)
