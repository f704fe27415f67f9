"""Signed log-space arithmetic.

A real number ``x`` is carried as ``(sign(x), log|x|)``.  Products add logs,
sums are split into a positive and a negative log-sum-exp accumulator and
combined at the end, which also yields a cheap estimate of the cancellation
that took place.

Two flavours live here: the scalar :class:`SignedLog` used in the public API,
and :class:`SLArray`, a pair of numpy arrays used by the vectorised kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

EPS = np.finfo(float).eps
# relative loss above which a two-accumulator sum is flagged
LOSS_TOL = 1e-8


# ln 2 split so that e * _LN2_HI is exact for |e| < 2^11
_LN2_HI = 6.93147180369123816490e-01
_LN2_LO = 1.90821492927058770002e-10


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@dataclass(frozen=True)
class SignedLog:
    """Real number stored as ``(sign, log|x|)``.

    ``cancelled`` marks values whose floating-point evaluation suffered
    catastrophic cancellation; it does not take part in comparisons.  ``lo``
    is a hidden low-order correction of ``logmag`` (double-double style) that
    makes ``from_real``/``to_real`` round trips accurate to about one ulp.
    """

    sign: int
    logmag: float
    cancelled: bool = field(default=False, compare=False)
    lo: float = field(default=0.0, compare=False, repr=False)

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if self.sign == 0 and self.logmag != -math.inf:
            object.__setattr__(self, "logmag", -math.inf)
        if self.sign != 0 and not self.logmag > -math.inf:
            raise ValueError("non-zero sign with log-magnitude -inf")
        if not math.isfinite(self.logmag):
            object.__setattr__(self, "lo", 0.0)

    @classmethod
    def from_real(cls, x) -> SignedLog:
        if isinstance(x, SignedLog):
            return x
        if isinstance(x, int) and not isinstance(x, bool) and abs(x) >= 2 ** 53:
            # exact for huge integers
            return cls(1 if x > 0 else -1, math.log(abs(x)))
        x = float(x)
        if x == 0.0:
            return cls(0, -math.inf)
        if math.isnan(x):
            raise ValueError("cannot represent NaN")
        if math.isinf(x):
            return cls(1 if x > 0 else -1, math.inf)
        m, e = math.frexp(abs(x))
        hi, err = _two_sum(e * _LN2_HI, math.log(m))
        hi, err2 = _two_sum(hi, err + e * _LN2_LO)
        return cls(1 if x > 0 else -1, hi, lo=err2)

    @classmethod
    def zero(cls) -> SignedLog:
        return cls(0, -math.inf)

    @classmethod
    def one(cls) -> SignedLog:
        return cls(1, 0.0)

    def to_real(self) -> float:
        if self.sign == 0:
            return 0.0
        lm = self.logmag
        if not math.isfinite(lm) or abs(lm) > 1400:
            return self.sign * math.exp(lm)
        e = round(lm / _LN2_HI)
        r = (lm - e * _LN2_HI) - e * _LN2_LO + self.lo
        try:
            return self.sign * math.ldexp(math.exp(r), e)
        except OverflowError:
            return self.sign * math.inf

    __float__ = to_real

    def __neg__(self) -> SignedLog:
        return SignedLog(-self.sign, self.logmag, self.cancelled, self.lo)

    def __mul__(self, other) -> SignedLog:
        other = SignedLog.from_real(other)
        sign = self.sign * other.sign
        if sign == 0:
            return SignedLog.zero()
        hi, err = _two_sum(self.logmag, other.logmag)
        return SignedLog(sign, hi, self.cancelled or other.cancelled, err + self.lo + other.lo)

    __rmul__ = __mul__

    def __truediv__(self, other) -> SignedLog:
        other = SignedLog.from_real(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero SignedLog")
        if self.sign == 0:
            return SignedLog.zero()
        hi, err = _two_sum(self.logmag, -other.logmag)
        return SignedLog(self.sign * other.sign, hi, self.cancelled or other.cancelled,
                         err + self.lo - other.lo)

    def __add__(self, other) -> SignedLog:
        return slog_sum([self, SignedLog.from_real(other)])

    __radd__ = __add__

    def __sub__(self, other) -> SignedLog:
        return self + (-SignedLog.from_real(other))

    def __pow__(self, p: int) -> SignedLog:
        if not isinstance(p, int) or p < 0:
            raise ValueError("only non-negative integer powers are supported")
        if p == 0:
            return SignedLog.one()
        if self.sign == 0:
            return SignedLog.zero()
        return SignedLog(self.sign ** p, p * self.logmag, self.cancelled)

    def isclose(self, other, rel_tol=1e-12) -> bool:
        other = SignedLog.from_real(other)
        if self.sign != other.sign:
            return False
        if self.sign == 0:
            return True
        return abs(self.logmag - other.logmag) <= rel_tol


def slog_sum(values) -> SignedLog:
    """Sum a sequence of :class:`SignedLog` without leaving log-space."""
    values = [SignedLog.from_real(v) for v in values]
    if not values:
        return SignedLog.zero()
    arr = SLArray(np.array([v.sign for v in values], dtype=float),
                  np.array([v.logmag for v in values], dtype=float))
    total, cond = sl_sum(arr, axis=0)
    flagged = bool(EPS * cond > LOSS_TOL) or any(v.cancelled for v in values)
    return to_scalar(total, cancelled=flagged)


class SLArray(NamedTuple):
    """Array of signed log-space numbers; ``sign`` holds -1.0, 0.0 or 1.0."""

    sign: np.ndarray
    log: np.ndarray

    @property
    def shape(self):
        return self.log.shape

    def __getitem__(self, idx) -> SLArray:  # type: ignore[override]
        return SLArray(self.sign[idx], self.log[idx])


def sl_from_real(x) -> SLArray:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return SLArray(np.sign(x), np.log(np.abs(x)))


def sl_to_real(a: SLArray) -> np.ndarray:
    return a.sign * np.exp(a.log)


def sl_zeros(shape) -> SLArray:
    return SLArray(np.zeros(shape), np.full(shape, -np.inf))


def sl_ones(shape) -> SLArray:
    return SLArray(np.ones(shape), np.zeros(shape))


def sl_mul(a: SLArray, b: SLArray) -> SLArray:
    sign = a.sign * b.sign
    log = np.where(sign != 0, a.log + b.log, -np.inf)
    return SLArray(sign, log)


def sl_from_scalar(v: SignedLog, shape=()) -> SLArray:
    return SLArray(np.full(shape, float(v.sign)), np.full(shape, v.logmag))


def to_scalar(a: SLArray, cancelled=False) -> SignedLog:
    sign = int(np.asarray(a.sign).item())
    return SignedLog(sign, float(np.asarray(a.log).item()) if sign else -math.inf,
                     bool(cancelled))


def logsumexp(x, axis=-1):
    """``log(sum(exp(x)))`` along ``axis``; all ``-inf`` gives ``-inf``."""
    x = np.asarray(x, dtype=float)
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    return np.squeeze(out, axis=axis)


def sl_sum(a: SLArray, axis=-1) -> tuple[SLArray, np.ndarray]:
    """Signed sum along ``axis``.

    Returns the sum and the condition number ``(P + N) / |P - N|`` where ``P``
    and ``N`` are the positive and negative partial sums.  ``EPS * cond``
    estimates the relative rounding error of the result; a total
    cancellation gives ``cond = inf`` and a zero result.
    """
    pos = np.where(a.sign > 0, a.log, -np.inf)
    neg = np.where(a.sign < 0, a.log, -np.inf)
    lp = logsumexp(pos, axis=axis)
    ln = logsumexp(neg, axis=axis)
    hi = np.maximum(lp, ln)
    lo = np.minimum(lp, ln)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(np.isfinite(lo), np.exp(lo - np.where(np.isfinite(hi), hi, 0.0)), 0.0)
        log = np.where(r < 1.0, hi + np.log1p(-r), -np.inf)
        cond = np.where(r < 1.0, (1.0 + r) / (1.0 - r), np.inf)
    sign = np.where(lp > ln, 1.0, np.where(ln > lp, -1.0, 0.0))
    log = np.where(sign != 0, log, -np.inf)
    cond = np.where(np.isfinite(hi) | (sign != 0), cond, 1.0)
    return SLArray(sign, log), cond
