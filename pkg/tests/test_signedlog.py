import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nacdens.signedlog import SignedLog, SLArray, logsumexp, sl_sum, slog_sum

magnitudes = st.floats(min_value=1e-300, max_value=1e300)


@given(magnitudes, st.sampled_from([-1, 1]))
def test_round_trip(m, s):
    x = s * m
    assert math.isclose(SignedLog.from_real(x).to_real(), x, rel_tol=1e-15)


def test_zero_has_neg_inf_log():
    z = SignedLog.from_real(0.0)
    assert z.sign == 0 and z.logmag == -math.inf
    assert SignedLog(0, 3.0).logmag == -math.inf


def test_invalid_sign():
    with pytest.raises(ValueError):
        SignedLog(2, 0.0)


def test_huge_integer_is_exact_in_log():
    n = math.factorial(300)
    v = SignedLog.from_real(-n)
    assert v.sign == -1
    assert math.isclose(v.logmag, math.lgamma(301), rel_tol=1e-14)


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_arithmetic_matches_floats(a, b):
    A, B = SignedLog.from_real(a), SignedLog.from_real(b)
    assert math.isclose((A * B).to_real(), a * b, rel_tol=1e-12, abs_tol=1e-300)
    s = (A + B).to_real()
    assert math.isclose(s, a + b, rel_tol=1e-9, abs_tol=1e-9 * (abs(a) + abs(b)))


def test_cancellation_flag():
    total = slog_sum([1.0, -1.0 + 1e-12])
    assert total.cancelled
    assert not slog_sum([1.0, 2.0]).cancelled


def test_far_out_of_range_products():
    big = SignedLog(1, 2000.0)
    assert (big * big).logmag == 4000.0
    assert (big / big).isclose(SignedLog.one())


def test_sl_sum_condition_number():
    a = SLArray(np.array([1.0, -1.0]), np.log(np.array([3.0, 1.0])))
    total, cond = sl_sum(a, axis=0)
    assert total.sign == 1 and math.isclose(math.exp(total.log), 2.0)
    assert math.isclose(float(cond), 2.0)


def test_logsumexp_all_neg_inf():
    assert logsumexp(np.array([-np.inf, -np.inf])) == -np.inf
