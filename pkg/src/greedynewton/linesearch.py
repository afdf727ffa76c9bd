"""Step-size selection along a ray.

``exact_search`` brackets a stationary point of phi by doubling from the
initial step and then bisects on the sign of phi'. ``armijo_search`` is the
usual backtracking rule. ``plane_search`` alternates exact searches over two
directions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .oracles import DirectionalRestriction, ProblemOracle, Vector


class NotDescentError(ValueError):
    """phi'(0) >= 0, so the direction cannot decrease the objective."""


class Termination(str, enum.Enum):
    INTERVAL_CONVERGED = "interval-converged"
    DERIVATIVE_ZERO = "derivative-zero"
    DOUBLING_CAP = "doubling-cap"
    BISECTION_CAP = "bisection-cap"
    ARMIJO_ACCEPTED = "armijo-accepted"
    BACKTRACK_CAP = "backtrack-cap"


@dataclass(frozen=True)
class ExactSearchConfig:
    init_step: float = 1.0
    tol: float = 1e-8
    max_doublings: int = 64
    max_bisections: int = 200

    def __post_init__(self):
        if not self.init_step > 0:
            raise ValueError("init_step must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_doublings < 1 or self.max_bisections < 1:
            raise ValueError("iteration caps must be at least 1")


@dataclass(frozen=True)
class ArmijoConfig:
    sigma: float = 1e-4
    beta: float = 0.5
    init_step: float = 1.0
    max_backtracks: int = 100

    def __post_init__(self):
        if not 0 < self.sigma <= 0.5:
            raise ValueError("sigma must lie in (0, 1/2]")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not self.init_step > 0:
            raise ValueError("init_step must be positive")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be at least 1")


@dataclass(frozen=True)
class LineSearchResult:
    step: float
    probes: int
    termination: Termination
    bracket_width: float = 0.0
    backtracks: int = 0


def exact_search(
    phi: DirectionalRestriction, cfg: ExactSearchConfig = ExactSearchConfig()
) -> LineSearchResult:
    """Minimize a (convex along the ray) restriction to interval tolerance.

    Starting from ``cfg.init_step`` the step is doubled while phi' stays
    negative; this yields the bracket (0, alpha). The bracket is then halved
    on the sign of phi' at the midpoint until narrower than ``cfg.tol``. The
    returned step is the zero of the linear interpolant of phi' over the final
    bracket, unless phi at the initial step is strictly lower.
    """
    start = phi.probes
    d0 = phi.dphi(0.0)
    if not d0 < 0:
        raise NotDescentError(f"phi'(0) = {d0!r} is not negative")

    alpha = cfg.init_step
    da = phi.dphi(alpha)
    doublings = 0
    while da < 0:
        if doublings == cfg.max_doublings:
            return LineSearchResult(alpha, phi.probes - start, Termination.DOUBLING_CAP, math.inf)
        alpha *= 2.0
        doublings += 1
        da = phi.dphi(alpha)
    if da == 0:
        return LineSearchResult(alpha, phi.probes - start, Termination.DERIVATIVE_ZERO, 0.0)

    lo, dlo, hi, dhi = 0.0, d0, alpha, da
    termination = Termination.BISECTION_CAP
    for _ in range(cfg.max_bisections):
        if hi - lo < cfg.tol:
            termination = Termination.INTERVAL_CONVERGED
            break
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # bracket at floating point resolution
            termination = Termination.INTERVAL_CONVERGED
            break
        dm = phi.dphi(mid)
        if dm == 0:
            return LineSearchResult(mid, phi.probes - start, Termination.DERIVATIVE_ZERO, hi - lo)
        if dm < 0:
            lo, dlo = mid, dm
        else:
            hi, dhi = mid, dm
    else:
        if hi - lo < cfg.tol:
            termination = Termination.INTERVAL_CONVERGED

    step = lo + (hi - lo) * (dlo / (dlo - dhi))
    if not lo < step <= hi:
        step = 0.5 * (lo + hi) if lo < 0.5 * (lo + hi) else hi
    if lo <= cfg.init_step <= hi and step != cfg.init_step:
        if phi.phi(cfg.init_step) < phi.phi(step):
            step = cfg.init_step
    return LineSearchResult(step, phi.probes - start, termination, hi - lo)


def armijo_search(
    phi: DirectionalRestriction, cfg: ArmijoConfig = ArmijoConfig()
) -> LineSearchResult:
    """Backtrack from ``cfg.init_step`` by ``cfg.beta`` until sufficient decrease."""
    start = phi.probes
    slope = phi.dphi(0.0)
    if not slope < 0:
        raise NotDescentError(f"phi'(0) = {slope!r} is not negative")
    f0 = phi.phi(0.0)
    alpha = cfg.init_step
    for k in range(cfg.max_backtracks + 1):
        if phi.phi(alpha) <= f0 + cfg.sigma * alpha * slope:
            return LineSearchResult(alpha, phi.probes - start, Termination.ARMIJO_ACCEPTED, backtracks=k)
        if k < cfg.max_backtracks:
            alpha *= cfg.beta
    return LineSearchResult(
        alpha, phi.probes - start, Termination.BACKTRACK_CAP, backtracks=cfg.max_backtracks
    )


def _line_update(problem, point, direction, cfg):
    """Best signed step along +/- direction from point; 0 when neither descends."""
    try:
        r = problem.restrict(point, direction)
    except ValueError:
        return 0.0, 0
    slope = r.dphi(0.0)
    if slope == 0:
        return 0.0, r.probes
    sign = 1.0 if slope < 0 else -1.0
    r = problem.restrict(point, sign * direction)
    try:
        res = exact_search(r, cfg)
    except NotDescentError:
        return 0.0, r.probes + 1
    return sign * res.step, res.probes + 1


def plane_search(
    problem: ProblemOracle,
    x: Vector,
    d1: Vector,
    d2: Vector,
    sweeps: int = 5,
    cfg: ExactSearchConfig = ExactSearchConfig(),
    start: tuple[float, float] | None = None,
) -> tuple[float, float, int]:
    """Two step sizes ``(a, b)`` approximately minimizing f(x + a d1 + b d2).

    Without ``start`` the first search runs along ``d2`` with ``a = 0`` (so the
    result is never worse than an exact search along ``d2`` alone); afterwards
    the two coefficients are refined alternately for ``sweeps`` sweeps. A
    coordinate update is kept only when it does not increase f. ``start``
    seeds the coefficients, e.g. with an already computed search along ``d2``.
    Returns ``(a, b, probes)``.
    """
    x = np.asarray(x, dtype=float)
    g = problem.gradient(x)
    if not (g @ d1 < 0 or g @ d2 < 0):
        raise NotDescentError("neither direction is a descent direction")

    def point(a, b):
        return x + a * d1 + b * d2

    a = b = 0.0
    best = problem.value(x)
    if start is not None:
        val = problem.value(point(*start))
        if val <= best:
            (a, b), best = start, val
    probes = 0
    for sweep in range(sweeps):
        for which in ((2, 1) if sweep == 0 and start is None else (1, 2)):
            if which == 2:
                t, p = _line_update(problem, point(a, b), d2, cfg)
                cand = (a, b + t)
            else:
                t, p = _line_update(problem, point(a, b), d1, cfg)
                cand = (a + t, b)
            probes += p
            if t == 0.0:
                continue
            val = problem.value(point(*cand))
            if val <= best:
                a, b = cand
                best = val
    return a, b, probes
