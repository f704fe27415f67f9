"""Archimedean generator families.

Each family provides ``psi``, ``psi_inv``, the sign-adjusted derivative logs
``log((-1)^k psi^(k)(t))`` and ``log(-(psi^-1)'(u))``.  All functions accept
scalars or numpy arrays.

The tilted outer power family is ``psi((c^theta + t)^(1/theta) - c)`` for a
base generator ``psi``; with base ``exp(-t)`` and ``c = 0`` it is Gumbel, with
base ``1/(1+t)`` and ``c = 1`` it is Clayton.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .combinatorics import DEFAULT_NMAX, eulerian_logs, get_tables, s_poly_table
from .errors import BoundaryError, ConfigurationError
from .signedlog import logsumexp


class Family(str, enum.Enum):
    CLAYTON = "C"
    GUMBEL = "G"
    FRANK = "F"
    JOE = "J"
    AMH = "A"
    TOP = "T"


@dataclass(frozen=True)
class BaseGenerator:
    """Base generator of a tilted outer power family.

    ``log_abs_deriv(k, t)`` must return ``log((-1)^k psi^(k)(t))`` and
    ``log_neg_inv_prime(u)`` ``log(-(psi^-1)'(u))``.
    """

    name: str
    psi: Callable = field(compare=False, repr=False)
    psi_inv: Callable = field(compare=False, repr=False)
    log_abs_deriv: Callable = field(compare=False, repr=False)
    log_neg_inv_prime: Callable = field(compare=False, repr=False)


def _exp_log_abs_deriv(k, t):
    return -np.asarray(t, dtype=float)


def _clayton1_log_abs_deriv(k, t):
    return math.lgamma(k + 1) - (k + 1) * np.log1p(t)


EXP_BASE = BaseGenerator(
    "E",
    psi=lambda t: np.exp(-np.asarray(t, dtype=float)),
    psi_inv=lambda u: -np.log(u),
    log_abs_deriv=_exp_log_abs_deriv,
    log_neg_inv_prime=lambda u: -np.log(u),
)

CLAYTON_BASE = BaseGenerator(
    "C",
    psi=lambda t: 1.0 / (1.0 + np.asarray(t, dtype=float)),
    psi_inv=lambda u: 1.0 / np.asarray(u, dtype=float) - 1.0,
    log_abs_deriv=_clayton1_log_abs_deriv,
    log_neg_inv_prime=lambda u: -2.0 * np.log(u),
)

BASES = {"E": EXP_BASE, "C": CLAYTON_BASE}


@dataclass(frozen=True)
class Generator:
    """A generator family together with its parameters.

    ``c`` and ``base`` are only meaningful for :attr:`Family.TOP`.
    """

    family: Family
    theta: float
    c: float = 0.0
    base: BaseGenerator = EXP_BASE

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "c", float(self.c))
        if isinstance(self.base, str):
            object.__setattr__(self, "base", BASES[self.base])
        validate(self)

    def with_theta(self, theta: float) -> Generator:
        return Generator(self.family, theta, self.c, self.base)


def clayton(theta):
    return Generator(Family.CLAYTON, theta)


def gumbel(theta):
    return Generator(Family.GUMBEL, theta)


def frank(theta):
    return Generator(Family.FRANK, theta)


def joe(theta):
    return Generator(Family.JOE, theta)


def amh(theta):
    return Generator(Family.AMH, theta)


def tilted_outer_power(theta, c=0.0, base="E"):
    return Generator(Family.TOP, theta, c, BASES[base] if isinstance(base, str) else base)


# lower bound, whether it is attained, upper bound (exclusive)
PARAM_RANGE = {
    Family.CLAYTON: (0.0, False, math.inf),
    Family.GUMBEL: (1.0, True, math.inf),
    Family.FRANK: (0.0, False, math.inf),
    Family.JOE: (1.0, True, math.inf),
    Family.AMH: (0.0, False, 1.0),
    Family.TOP: (1.0, True, math.inf),
}


def validate(g: Generator) -> None:
    lo, closed, hi = PARAM_RANGE[g.family]
    th = g.theta
    ok = math.isfinite(th) and (th >= lo if closed else th > lo) and th < hi
    if not ok:
        interval = f"{'[' if closed else '('}{lo}, {hi})"
        raise ConfigurationError(f"{g.family.name} parameter {th} outside {interval}")
    if g.family is Family.TOP and not (math.isfinite(g.c) and g.c >= 0):
        raise ConfigurationError(f"tilt c={g.c} must be >= 0")


def log1mexp(t):
    """``log(1 - exp(-t))`` for ``t > 0``, accurate at both ends."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(t > math.log(2), np.log1p(-np.exp(-t)), np.log(-np.expm1(-t)))


def _arr(x):
    return np.asarray(x, dtype=float)


def _check_t(t):
    t = _arr(t)
    if np.any(~(t > 0)) or np.any(~np.isfinite(t)):
        raise BoundaryError("derivatives require t in (0, inf)")
    return t


def _check_u_open(u):
    u = _arr(u)
    if np.any(~((u > 0) & (u < 1))):
        raise BoundaryError("argument must lie in the open interval (0, 1)")
    return u


# --------------------------------------------------------------------------
# psi and its inverse


def psi(g: Generator, t):
    """Generator value ``psi(t)`` for ``t in [0, inf]``."""
    t = _arr(t)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise BoundaryError("psi requires t >= 0")
    th = g.theta
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if g.family is Family.CLAYTON:
            out = np.exp(-np.log1p(t) / th)
        elif g.family is Family.GUMBEL:
            out = np.exp(-t ** (1.0 / th))
        elif g.family is Family.FRANK:
            out = -np.log1p(np.expm1(-th) * np.exp(-t)) / th
        elif g.family is Family.JOE:
            out = -np.expm1(log1mexp(t) / th)
        elif g.family is Family.AMH:
            out = (1.0 - th) / (np.exp(t) - th)
        else:
            c = g.c
            z = (c ** th + t) ** (1.0 / th) - c
            out = g.base.psi(z)
    out = np.where(np.isinf(t), 0.0, out)
    return out[()] if out.ndim == 0 else out


def psi_inv(g: Generator, u):
    """Inverse generator on ``[0, 1]``; ``psi_inv(0) = inf``."""
    u = _arr(u)
    if np.any(~((u >= 0) & (u <= 1))):
        raise BoundaryError("psi_inv requires u in [0, 1]")
    th = g.theta
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if g.family is Family.CLAYTON:
            out = np.expm1(-th * np.log(u))
        elif g.family is Family.GUMBEL:
            out = (-np.log(u)) ** th
        elif g.family is Family.FRANK:
            out = -np.log(np.expm1(-th * u) / np.expm1(-th))
        elif g.family is Family.JOE:
            out = -log1mexp(-th * np.log1p(-u))
        elif g.family is Family.AMH:
            out = np.log1p(-th * (1.0 - u)) - np.log(u)
        else:
            c = g.c
            out = (c + g.base.psi_inv(u)) ** th - c ** th
    out = np.where(u == 0, np.inf, np.where(u == 1, 0.0, out))
    return out[()] if out.ndim == 0 else out


def log_neg_psi_inv_prime(g: Generator, u):
    """``log(-(psi^-1)'(u))`` for ``u in (0, 1)``."""
    u = _check_u_open(u)
    th = g.theta
    if g.family is Family.CLAYTON:
        out = math.log(th) - (1.0 + th) * np.log(u)
    elif g.family is Family.GUMBEL:
        lu = np.log(u)
        out = math.log(th) + (th - 1.0) * np.log(-lu) - lu
    elif g.family is Family.FRANK:
        out = math.log(th) - np.log(np.expm1(th * u))
    elif g.family is Family.JOE:
        l1u = np.log1p(-u)
        out = math.log(th) + (th - 1.0) * l1u - np.log(-np.expm1(th * l1u))
    elif g.family is Family.AMH:
        out = math.log1p(-th) - np.log(u) - np.log1p(-th * (1.0 - u))
    else:
        c = g.c
        out = (math.log(th) + g.base.log_neg_inv_prime(u)
               + (th - 1.0) * np.log(c + g.base.psi_inv(u)))
    out = _arr(out)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# polylogarithm of negative order


def polylog_neg(n: int, z):
    """``log Li_{-n}(z)`` for integer ``n >= 0`` and ``z in (0, 1)``.

    Uses ``Li_{-n}(z) = z * sum_k A(n,k) z^k / (1-z)^(n+1)`` (Eulerian
    numbers), whose terms are all positive on ``(0, 1)``.
    """
    if n < 0:
        raise ValueError("order must be a non-negative integer")
    z = _arr(z)
    if np.any(~((z > 0) & (z < 1))):
        raise ValueError("polylog_neg requires z in (0, 1)")
    lz = np.log(z)
    l1z = np.log1p(-z)
    if n == 0:
        out = lz - l1z
    else:
        k = np.arange(n)
        out = lz + logsumexp(eulerian_logs(n) + lz[..., None] * k, axis=-1) - (n + 1) * l1z
    return out[()] if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# derivatives of psi


def _log_abs_snk_row(n: int, x: float) -> np.ndarray:
    """``log|s_nk(x)|`` for k = 1..n (``-inf`` where zero)."""
    tab, _ = s_poly_table(n, x)
    return tab.log


def log_abs_psi_deriv(g: Generator, k: int, t):
    """``log((-1)^k psi^(k)(t))`` for ``t in (0, inf)``."""
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    if k > DEFAULT_NMAX:
        raise ValueError(f"derivative order {k} exceeds nmax={DEFAULT_NMAX}")
    t = _check_t(t)
    if k == 0:
        out = np.log(psi(g, t))
        return out[()] if np.ndim(out) == 0 else out
    th = g.theta
    fam = g.family
    if fam is Family.CLAYTON:
        a = 1.0 / th
        out = gammaln(a + k) - gammaln(a) - (k + a) * np.log1p(t)
    elif fam is Family.GUMBEL:
        a = 1.0 / th
        lt = np.log(t)
        j = np.arange(1, k + 1)
        terms = _log_abs_snk_row(k, a) + (a * j) * lt[..., None]
        out = -t ** a - k * lt + logsumexp(terms, axis=-1)
    elif fam is Family.FRANK:
        out = -math.log(th) + polylog_neg(k - 1, -np.expm1(-th) * np.exp(-t))
    elif fam is Family.AMH:
        out = math.log((1.0 - th) / th) + polylog_neg(k, th * np.exp(-t))
    elif fam is Family.JOE:
        a = 1.0 / th
        l1e = log1mexp(t)
        lx = -t - l1e
        out = a * l1e - math.log(th) + _log_joe_poly(k, a, lx)
    else:
        out = _log_abs_top_deriv(g, k, t)
    out = _arr(out)
    return out[()] if out.ndim == 0 else out


def _log_joe_poly(k: int, a: float, lx):
    """``log P_k(x) = log sum_l S(k,l) (l-1-a)_{l-1} x^l`` with ``lx = log x``."""
    tab = get_tables(max(DEFAULT_NMAX, k))
    coefs = []
    for l in range(1, k + 1):
        # (l-1-a)_{l-1} = prod_{m=1}^{l-1} (m - a)
        if l > 1 and a >= 1.0:
            coefs.append(-np.inf)
            continue
        lc = math.log(tab.stirling2(k, l))
        lc += sum(math.log(m - a) for m in range(1, l))
        coefs.append(lc)
    coefs = np.array(coefs)
    l = np.arange(1, k + 1)
    return logsumexp(coefs + lx[..., None] * l, axis=-1)


def _log_abs_top_deriv(g: Generator, n: int, t):
    th, c = g.theta, g.c
    a = 1.0 / th
    y = c ** th + t
    ly = np.log(y)
    z = y ** a - c
    lsnk = _log_abs_snk_row(n, a)
    terms = []
    for k in range(1, n + 1):
        terms.append(g.base.log_abs_deriv(k, z) + (k * a - n) * ly + lsnk[k - 1])
    return logsumexp(np.stack(np.broadcast_arrays(*terms), axis=-1), axis=-1)


# --------------------------------------------------------------------------
# Kendall's tau


def tau_to_theta(family, tau: float) -> float:
    fam = Family(family)
    if not 0 <= tau < 1:
        raise ValueError("tau must lie in [0, 1)")
    if fam is Family.GUMBEL:
        return 1.0 / (1.0 - tau)
    if fam is Family.CLAYTON:
        return 2.0 * tau / (1.0 - tau)
    raise ConfigurationError(f"tau conversion not available for {fam.name}")


def theta_to_tau(family, theta: float) -> float:
    fam = Family(family)
    if fam is Family.GUMBEL:
        return 1.0 - 1.0 / theta
    if fam is Family.CLAYTON:
        return theta / (theta + 2.0)
    raise ConfigurationError(f"tau conversion not available for {fam.name}")
