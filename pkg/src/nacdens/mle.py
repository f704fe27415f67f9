"""Two-parameter maximum likelihood for nested copulas.

A template tree fixes the structure; the root receives ``theta0`` and every
other node ``theta1``, subject to ``L <= theta0 <= theta1`` with ``L`` the
family's lower parameter bound.
"""

from __future__ import annotations

import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .density import logpdf
from .errors import ConfigurationError, DataError, PrecisionWarning
from .generators import PARAM_RANGE, Family, tau_to_theta
from .sampling import kendall_tau
from .tree import NacTree, parse, with_params


@dataclass(frozen=True)
class FitConfig:
    """Nelder-Mead settings; ``xatol`` is the simplex-diameter tolerance."""

    xatol: float = 1e-6
    maxiter: int = 500
    initial_step: float = 0.5
    # relative gap below which theta1 = theta0 is reported as active
    boundary_tol: float = 1e-4


@dataclass(frozen=True)
class FitResult:
    theta_hat: tuple[float, float]
    nll_min: float
    iterations: int
    converged: bool
    constraint_active: bool


@dataclass(frozen=True)
class GridResult:
    theta0: np.ndarray
    theta1: np.ndarray
    nll: np.ndarray = field(repr=False)  # shape (len(theta0), len(theta1))

    def argmin(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmin(self.nll), self.nll.shape)
        return float(self.theta0[i]), float(self.theta1[j])

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO(newline="")
        if header:
            buf.write("theta0,theta1,nll\n")
        for i, a in enumerate(self.theta0):
            for j, b in enumerate(self.theta1):
                v = self.nll[i, j]
                buf.write(f"{float(a)!r},{float(b)!r},{'inf' if math.isinf(v) else repr(float(v))}\n")
        return buf.getvalue()


def lower_bound(template: NacTree) -> float:
    return PARAM_RANGE[template.generator.family][0]


def check_data(data, d: int) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != d:
        raise DataError(f"data must have shape (n, {d}), got {data.shape}")
    bad = ~np.all((data > 0) & (data < 1), axis=1)
    if np.any(bad):
        row = int(np.argmax(bad))
        raise DataError(f"row {row} has values outside the open unit cube", row=row)
    return data


def _feasible(template: NacTree, theta) -> bool:
    lo, closed, hi = PARAM_RANGE[template.generator.family]
    t0, t1 = float(theta[0]), float(theta[1])
    return (t0 >= lo if closed else t0 > lo) and t0 <= t1 < hi and math.isfinite(t1)


def _nll(template: NacTree, theta, data: np.ndarray) -> float:
    if not _feasible(template, theta):
        return math.inf
    try:
        tree = with_params(template, float(theta[0]), float(theta[1]))
    except ConfigurationError:
        return math.inf
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        ll = logpdf(tree, data)
    total = -float(np.sum(ll))
    return total if math.isfinite(total) else math.inf


def nll(template: NacTree, theta, data) -> float:
    """Negative log-likelihood; ``inf`` outside the feasible region."""
    return _nll(template, theta, check_data(data, template.d))


def grid_scan(template: NacTree, theta0_grid, theta1_grid, data, threads: int = 1) -> GridResult:
    """``nll`` on the Cartesian grid (row-major in ``theta0``)."""
    data = check_data(data, template.d)
    g0 = np.asarray(theta0_grid, dtype=float)
    g1 = np.asarray(theta1_grid, dtype=float)
    cells = [(i, j) for i in range(g0.size) for j in range(g1.size)]
    work = lambda ij: _nll(template, (g0[ij[0]], g1[ij[1]]), data)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = list(ex.map(work, cells))
    else:
        vals = [work(c) for c in cells]
    return GridResult(g0, g1, np.array(vals).reshape(g0.size, g1.size))


def parse_grid(text: str) -> np.ndarray:
    """``"a:b:steps"`` -> ``steps`` equally spaced points from ``a`` to ``b``."""
    try:
        a, b, steps = text.split(":")
        pts = np.linspace(float(a), float(b), int(steps))
    except ValueError:
        raise ValueError(f"grid must look like a:b:steps, got {text!r}") from None
    if pts.size < 1:
        raise ValueError("grid needs at least one step")
    return pts


def initial_guess(template: NacTree, data) -> tuple[float, float]:
    """Kendall's tau moment estimate for Gumbel/Clayton, else a fixed offset."""
    fam = template.generator.family
    lo = lower_bound(template)
    if fam not in (Family.GUMBEL, Family.CLAYTON) or not template.subtrees:
        return (lo + 0.5, lo + 1.0) if fam is not Family.AMH else (0.2, 0.5)
    data = np.asarray(data, dtype=float)
    child = template.subtrees[0]
    inner = [j - 1 for j in child.leaves]
    outer = [j - 1 for j in template.leaves if j not in child.leaves]
    t1 = kendall_tau(data[:, inner[0]], data[:, inner[1]])[0] if len(inner) > 1 else 0.5
    t0 = kendall_tau(data[:, outer[0]], data[:, inner[0]])[0] if outer else t1 / 2
    t0 = min(max(t0, 0.02), 0.95)
    t1 = min(max(t1, t0 + 0.02), 0.97)
    return tau_to_theta(fam, t0), tau_to_theta(fam, t1)


def fit2(template: NacTree, data, init=None, config: FitConfig = FitConfig()) -> FitResult:
    """Nelder-Mead on ``x = (log(theta0 - L), log(theta1 - theta0))``."""
    data = check_data(data, template.d)
    lo = lower_bound(template)
    if init is None:
        init = initial_guess(template, data)
    t0, t1 = float(init[0]), float(init[1])
    # keep the start strictly inside the transformed domain
    t0 = max(t0, lo + 1e-3)
    t1 = max(t1, t0 + 1e-3)

    def to_theta(x):
        a = lo + math.exp(x[0])
        return a, a + math.exp(x[1])

    def obj(x):
        if np.any(np.abs(x) > 700):
            return math.inf
        return _nll(template, to_theta(x), data)

    x0 = np.array([math.log(t0 - lo), math.log(t1 - t0)])
    simplex = np.array([x0, x0 + [config.initial_step, 0.0], x0 + [0.0, config.initial_step]])
    res = minimize(obj, x0, method="Nelder-Mead",
                   options=dict(xatol=config.xatol, fatol=math.inf, maxiter=config.maxiter,
                                initial_simplex=simplex))
    th = to_theta(res.x)
    best = float(res.fun)
    start = _nll(template, (t0, t1), data)
    if start < best:  # never report something worse than the start
        th, best = (t0, t1), start
    active = (th[1] - th[0]) <= config.boundary_tol * (1.0 + abs(th[0]))
    return FitResult((float(th[0]), float(th[1])), best, int(res.nit), bool(res.success), bool(active))


@dataclass(frozen=True)
class SurfaceConfig:
    """Likelihood-surface experiment: ``C0(u1, C1(u2, ..., ud))``.

    The grid is rectangular; cells with ``theta0 > theta1`` come out as
    ``inf``.
    """

    d: int = 10
    n: int = 100
    family: str = "G"
    theta0: float = 4 / 3
    theta1: float = 2.0
    theta0_range: tuple[float, float] = (1.05, 2.5)
    theta1_range: tuple[float, float] = (1.05, 3.5)
    steps: int = 25
    threads: int = 1

    def template(self) -> NacTree:
        inner = ", ".join(str(j) for j in range(2, self.d + 1))
        return parse(f"{self.family}({self.theta0!r}; 1, {self.family}({self.theta1!r}; {inner}))")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.linspace(*self.theta0_range, self.steps),
                np.linspace(*self.theta1_range, self.steps))

    def grid_steps(self) -> tuple[float, float]:
        g0, g1 = self.axes()
        return float(g0[1] - g0[0]), float(g1[1] - g1[0])
