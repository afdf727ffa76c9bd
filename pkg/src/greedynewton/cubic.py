"""Step-size searches for cubic-regularized and Levenberg-Marquardt Newton steps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from .linesearch import ExactSearchConfig, NotDescentError, exact_search
from .oracles import DegenerateSearchError, ProblemOracle, Vector
from .solvers import StepInfo, UnrecoverableHessianError, newton_direction

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class ModelSolveError(RuntimeError):
    """The scalar equation for the cubic model radius could not be solved."""


@dataclass(frozen=True)
class CubicConfig:
    M: float | None = None
    lam_min: float = 0.0
    lam_max: float = 1e6
    tol: float = 1e-8

    def __post_init__(self):
        if self.M is not None and not self.M > 0:
            raise ValueError("M must be positive")
        if not 0 <= self.lam_min < self.lam_max:
            raise ValueError("need 0 <= lam_min < lam_max")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


def cubic_subproblem(
    problem: ProblemOracle, x: Vector, M: float, tol: float = 1e-8, g=None
) -> tuple[Vector, float]:
    """Minimizer y of the cubic model around x and its radius r = ||y - x||.

    Uses the shifted system (H + (M/2) r I) s = -g with ||s|| = r, solved as a
    scalar equation in r after one symmetric eigendecomposition of H.
    """
    if not M > 0:
        raise ValueError("M must be positive")
    g = problem.gradient(x) if g is None else g
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0:
        return np.array(x, dtype=float), 0.0
    w, V = np.linalg.eigh(problem.hessian(x))
    gt = V.T @ g

    def step_norm(r):
        return float(np.linalg.norm(gt / (w + 0.5 * M * r)))

    lo = max(0.0, -2.0 * w[0] / M)
    hi = lo + math.sqrt(2.0 * gnorm / M)
    psi_lo = step_norm(lo) - lo if w[0] + 0.5 * M * lo > 0 else math.inf
    nudge = 1e-12 * hi
    while not math.isfinite(psi_lo):
        lo_try = lo + nudge
        if lo_try >= hi:
            raise ModelSolveError("no positive radius bracket")
        with np.errstate(divide="ignore"):
            psi_lo = step_norm(lo_try) - lo_try
        if math.isfinite(psi_lo):
            lo = lo_try
        nudge *= 10.0
    if psi_lo <= 0:
        r = lo
    else:
        try:
            r = brentq(lambda r: step_norm(r) - r, lo, hi, xtol=1e-4 * tol, rtol=1e-14, maxiter=500)
        except (RuntimeError, ValueError) as exc:
            raise ModelSolveError(str(exc)) from exc
    s = -V @ (gt / (w + 0.5 * M * r))
    return np.asarray(x, dtype=float) + s, r


def model_gradient(problem: ProblemOracle, x: Vector, y: Vector, M: float) -> Vector:
    """Gradient of the cubic model at y (zero at an exact minimizer)."""
    s = y - x
    return problem.gradient(x) + problem.hessian(x) @ s + 0.5 * M * np.linalg.norm(s) * s


def step_cubic_linesearch(
    problem: ProblemOracle,
    x: Vector,
    M: float,
    exact: ExactSearchConfig = ExactSearchConfig(),
    g=None,
    tol: float = 1e-8,
) -> tuple[Vector, StepInfo]:
    """Exact line search along the direction to the cubic-model minimizer.

    ``extras['f_cubic']`` holds f at the plain cubic step; the returned point
    is never worse.
    """
    g = problem.gradient(x) if g is None else g
    y, _ = cubic_subproblem(problem, x, M, tol, g)
    s = y - x
    if not g @ s < 0:
        raise NotDescentError("cubic step is not a descent direction")
    res = exact_search(problem.restrict(x, s), exact)
    x_a = x + res.step * s
    f_a = problem.value(x_a)
    x_1 = x + s
    f_1 = problem.value(x_1)
    if f_1 < f_a:
        x_a, f_a, alpha = x_1, f_1, 1.0
    else:
        alpha = res.step
    return x_a, StepInfo(f_a, alpha, res.probes, extras={"f_cubic": f_1})


def _golden_min(fun, a, b, tol):
    """Golden-section minimization on [a, b]; returns (argmin, min)."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


def step_greedy_lm(
    problem: ProblemOracle,
    x: Vector,
    cfg: CubicConfig = CubicConfig(),
    g=None,
    jitter: float = 1e-12,
) -> tuple[Vector, StepInfo]:
    """x - (H + lam I)^{-1} g with lam picked to minimize f over [lam_min, lam_max].

    A decade grid in log(lam) is refined by golden section around its best
    point; the undamped Newton step (lam = 0, Cholesky path) competes too when
    ``lam_min == 0`` and wins any difference at rounding level, since f cannot
    rank candidates below that. The chosen damping is ``extras['lam']``.
    """
    g = problem.gradient(x) if g is None else g
    if not np.any(g):
        raise DegenerateSearchError("gradient is zero")
    w, V = np.linalg.eigh(problem.hessian(x))
    gt = V.T @ g
    evals = 0

    def f_of(lam):
        nonlocal evals
        shifted = w + lam
        if shifted[0] <= 0:
            return math.inf
        evals += 1
        val = problem.value(x - V @ (gt / shifted))
        return val if math.isfinite(val) else math.inf

    log_lo = math.log(max(cfg.lam_min, cfg.lam_max * 1e-16))
    log_hi = math.log(cfg.lam_max)
    grid = np.linspace(log_lo, log_hi, max(3, int(round((log_hi - log_lo) / math.log(10.0))) + 1))
    vals = [f_of(math.exp(t)) for t in grid]
    i = int(np.argmin(vals))
    best_lam, best_f = math.exp(grid[i]), vals[i]
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    t, ft = _golden_min(lambda t: f_of(math.exp(t)), a, b, cfg.tol)
    if ft < best_f:
        best_lam, best_f = math.exp(t), ft
    x_new = x - V @ (gt / (w + best_lam))

    extras = {}
    noise = 8.0 * np.finfo(float).eps * max(1.0, abs(problem.value(x)))
    if cfg.lam_min == 0:
        try:
            d, eps = newton_direction(problem, x, jitter, g)
        except UnrecoverableHessianError:
            if not math.isfinite(best_f):
                raise
        else:
            x_n = x + d
            f_n = problem.value(x_n)
            extras["f_newton"] = f_n
            if f_n <= best_f + noise:
                x_new, best_f, best_lam = x_n, f_n, eps
    if not math.isfinite(best_f):
        raise UnrecoverableHessianError("no damping in range gives a finite step")
    extras["lam"] = best_lam
    return x_new, StepInfo(best_f, 1.0, evals, extras=extras)


def lm_step(problem: ProblemOracle, x: Vector, lam: float) -> Vector:
    """x - (H + lam I)^{-1} g by Cholesky; reference path for a fixed damping."""
    H = problem.hessian(x)
    H[np.diag_indices_from(H)] += lam
    return x - sla.cho_solve(sla.cho_factor(H), problem.gradient(x))
