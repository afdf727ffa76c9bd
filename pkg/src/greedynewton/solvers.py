"""Newton-type iteration drivers.

Each ``step_*`` function takes one iteration from ``x`` and returns the new
point together with a :class:`StepInfo`. :func:`solve` runs the loop and
collects an :class:`IterateTrace`.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
import scipy.linalg as sla

from .linesearch import (
    ArmijoConfig,
    ExactSearchConfig,
    NotDescentError,
    armijo_search,
    exact_search,
    plane_search,
)
from .oracles import DegenerateSearchError, ProblemOracle, Vector


class Method(str, enum.Enum):
    PURE_NEWTON = "pure-newton"
    GREEDY_NEWTON = "greedy-newton"
    ARMIJO_NEWTON = "armijo-newton"
    GREEDY_GRADIENT = "greedy-gradient"
    HYBRID = "hybrid"
    PLANE_NEWTON = "plane-newton"
    CUBIC_LINESEARCH = "cubic-linesearch"
    CUBIC_GREEDY_LM = "cubic-greedy-lm"


class Branch(str, enum.Enum):
    NONE = "-"
    GRADIENT = "gradient"
    NEWTON = "newton"


class UnrecoverableHessianError(RuntimeError):
    """The Hessian could not be factorized even after jitter escalation."""


class NumericalFailure(RuntimeError):
    """A non-finite value or gradient appeared; ``trace`` holds the iterations so far."""

    def __init__(self, message: str, trace: "IterateTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass
class SolverConfig:
    method: Method = Method.GREEDY_NEWTON
    max_iter: int = 100
    grad_tol: float = 1e-10
    f_stop: float | None = None
    armijo: ArmijoConfig = field(default_factory=ArmijoConfig)
    exact: ExactSearchConfig = field(default_factory=ExactSearchConfig)
    jitter: float = 1e-12
    x0: Vector | None = None
    plane_sweeps: int = 5
    # cubic.CubicConfig, only read by the cubic methods
    cubic: Any = None
    keep_iterates: bool = True

    def __post_init__(self):
        self.method = Method(self.method)
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.grad_tol < 0:
            raise ValueError("grad_tol must be nonnegative")
        if not self.jitter > 0:
            raise ValueError("jitter base must be positive")


@dataclass
class StepInfo:
    f: float
    step: float
    probes: int = 0
    jitter: float = 0.0
    branch: Branch = Branch.NONE
    # values of competing candidates from the same x (dominance bookkeeping)
    extras: dict = field(default_factory=dict)


@dataclass
class TraceRecord:
    k: int
    f: float
    grad_norm: float
    step: float
    probes: int
    jitter: float
    time: float
    branch: Branch = Branch.NONE
    extras: dict = field(default_factory=dict)


@dataclass
class IterateTrace:
    """Record 0 is the starting point; record k >= 1 is the result of
    iteration k and carries the step that produced x_k from x_{k-1}."""

    method: Method
    records: list[TraceRecord] = field(default_factory=list)
    iterates: list[Vector] = field(default_factory=list)
    status: str = "running"

    def __len__(self):
        return len(self.records)

    @property
    def f_values(self) -> np.ndarray:
        return np.array([r.f for r in self.records])

    @property
    def steps(self) -> np.ndarray:
        return np.array([r.step for r in self.records[1:]])

    @property
    def grad_norms(self) -> np.ndarray:
        return np.array([r.grad_norm for r in self.records])

    @property
    def x(self) -> Vector | None:
        return self.iterates[-1] if self.iterates else None


def newton_direction(
    problem: ProblemOracle,
    x: Vector,
    jitter: float = 1e-12,
    g: Vector | None = None,
    max_doublings: int = 10**6,
) -> tuple[Vector, float]:
    """Solve (H + eps I) d = -g by Cholesky.

    The first attempt uses eps = 0; on failure (or a non-descent / non-finite
    result) eps starts at ``jitter`` and doubles. Returns ``(d, eps)``.
    """
    if g is None:
        g = problem.gradient(x)
    if not np.any(g):
        raise DegenerateSearchError("gradient is zero; no Newton direction")
    H = problem.hessian(x)
    if not np.all(np.isfinite(H)):
        raise UnrecoverableHessianError("Hessian has non-finite entries")
    diag = np.diag_indices_from(H)
    eps = 0.0
    for _ in range(max_doublings + 1):
        K = H.copy()
        K[diag] += eps
        try:
            factor = sla.cho_factor(K, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            pass
        else:
            d = -sla.cho_solve(factor, g, check_finite=False)
            if np.all(np.isfinite(d)) and g @ d < 0:
                return d, eps
        eps = jitter if eps == 0.0 else 2.0 * eps
        if not np.isfinite(eps):
            break
    raise UnrecoverableHessianError(f"factorization failed up to jitter {eps:g}")


def _grad(problem, x, g):
    return problem.gradient(x) if g is None else g


def _greedy_along(problem, x, d, cfg):
    """Exact search along d; the unit step is kept if it is strictly better."""
    res = exact_search(problem.restrict(x, d), cfg.exact)
    x_a = x + res.step * d
    f_a = problem.value(x_a)
    x_1 = x + d
    f_1 = problem.value(x_1)
    if f_1 < f_a:
        return x_1, f_1, 1.0, res.probes, f_1
    return x_a, f_a, res.step, res.probes, f_1


def step_pure_newton(problem, x, cfg: SolverConfig, g=None):
    d, eps = newton_direction(problem, x, cfg.jitter, _grad(problem, x, g))
    x_new = x + d
    f_new = problem.value(x_new)
    return x_new, StepInfo(f_new, 1.0, 0, eps, extras={"f_newton": f_new})


def step_greedy_newton(problem, x, cfg: SolverConfig, g=None):
    d, eps = newton_direction(problem, x, cfg.jitter, _grad(problem, x, g))
    x_new, f_new, alpha, probes, f_1 = _greedy_along(problem, x, d, cfg)
    return x_new, StepInfo(f_new, alpha, probes, eps, extras={"f_newton": f_1})


def step_armijo_newton(problem, x, cfg: SolverConfig, g=None):
    d, eps = newton_direction(problem, x, cfg.jitter, _grad(problem, x, g))
    res = armijo_search(problem.restrict(x, d), cfg.armijo)
    x_new = x + res.step * d
    return x_new, StepInfo(
        problem.value(x_new), res.step, res.probes, eps, extras={"backtracks": res.backtracks}
    )


def step_greedy_gradient(problem, x, cfg: SolverConfig, g=None):
    d = -_grad(problem, x, g)
    res = exact_search(problem.restrict(x, d), cfg.exact)
    x_new = x + res.step * d
    return x_new, StepInfo(problem.value(x_new), res.step, res.probes)


def step_hybrid(problem, x, cfg: SolverConfig, g=None):
    """Greedy gradient candidate vs pure Newton candidate; Newton wins ties."""
    g = _grad(problem, x, g)
    res = exact_search(problem.restrict(x, -g), cfg.exact)
    x_g = x - res.step * g
    f_g = problem.value(x_g)
    d, eps = newton_direction(problem, x, cfg.jitter, g)
    x_n = x + d
    f_n = problem.value(x_n)
    extras = {"f_gradient": f_g, "f_newton": f_n}
    if f_g < f_n:
        return x_g, StepInfo(f_g, res.step, res.probes, eps, Branch.GRADIENT, extras)
    return x_n, StepInfo(f_n, 1.0, res.probes, eps, Branch.NEWTON, extras)


def step_plane_newton(problem, x, cfg: SolverConfig, g=None):
    """Joint step sizes on -g and the Newton direction, seeded by greedy Newton.

    ``StepInfo.step`` is the Newton coefficient; the gradient coefficient is
    kept in ``extras['step_gradient']``.
    """
    g = _grad(problem, x, g)
    d, eps = newton_direction(problem, x, cfg.jitter, g)
    _, f_gn, alpha, probes, f_1 = _greedy_along(problem, x, d, cfg)
    a, b, more = plane_search(problem, x, -g, d, cfg.plane_sweeps, cfg.exact, start=(0.0, alpha))
    x_new = x + a * -g + b * d
    extras = {"f_greedy": f_gn, "f_newton": f_1, "step_gradient": a}
    return x_new, StepInfo(problem.value(x_new), b, probes + more, eps, extras=extras)


def _cubic_linesearch(problem, x, cfg, g=None):
    from .cubic import step_cubic_linesearch

    if cfg.cubic is None or cfg.cubic.M is None:
        raise ValueError("cubic-linesearch needs cfg.cubic with a Hessian-Lipschitz constant M")
    return step_cubic_linesearch(problem, x, cfg.cubic.M, cfg.exact, g, cfg.cubic.tol)


def _cubic_greedy_lm(problem, x, cfg, g=None):
    from .cubic import CubicConfig, step_greedy_lm

    return step_greedy_lm(problem, x, cfg.cubic or CubicConfig(), g, cfg.jitter)


STEPS: dict[Method, Callable] = {
    Method.PURE_NEWTON: step_pure_newton,
    Method.GREEDY_NEWTON: step_greedy_newton,
    Method.ARMIJO_NEWTON: step_armijo_newton,
    Method.GREEDY_GRADIENT: step_greedy_gradient,
    Method.HYBRID: step_hybrid,
    Method.PLANE_NEWTON: step_plane_newton,
    Method.CUBIC_LINESEARCH: _cubic_linesearch,
    Method.CUBIC_GREEDY_LM: _cubic_greedy_lm,
}


def solve(problem: ProblemOracle, cfg: SolverConfig | None = None) -> IterateTrace:
    """Iterate from ``cfg.x0`` (zero vector by default) until a stop fires.

    Stops: gradient norm <= ``grad_tol``, f <= ``f_stop``, ``max_iter``
    iterations, or a step that cannot proceed (zero gradient direction, or a
    step that would increase f for a method that guarantees descent).
    """
    cfg = cfg or SolverConfig()
    step_fn = STEPS[cfg.method]
    x = np.zeros(problem.n) if cfg.x0 is None else np.array(cfg.x0, dtype=float)
    trace = IterateTrace(cfg.method)

    f = problem.value(x)
    g = problem.gradient(x)
    gn = float(np.linalg.norm(g))
    if not (np.isfinite(f) and np.isfinite(gn)):
        raise NumericalFailure("non-finite value at the starting point", trace)
    trace.records.append(TraceRecord(0, f, gn, 0.0, 0, 0.0, 0.0))
    if cfg.keep_iterates:
        trace.iterates.append(x.copy())

    elapsed = 0.0
    trace.status = "max-iter"
    for k in range(1, cfg.max_iter + 1):
        if gn <= cfg.grad_tol:
            trace.status = "converged"
            break
        if cfg.f_stop is not None and f <= cfg.f_stop:
            trace.status = "f-stop"
            break
        t0 = time.perf_counter()
        try:
            x_new, info = step_fn(problem, x, cfg, g)
        except (NotDescentError, DegenerateSearchError):
            trace.status = "step-failure"
            break
        g_new = problem.gradient(x_new)
        elapsed += time.perf_counter() - t0
        gn_new = float(np.linalg.norm(g_new))
        if not (np.isfinite(info.f) and np.isfinite(gn_new)):
            trace.status = "numerical-failure"
            raise NumericalFailure(f"non-finite value at iteration {k}", trace)
        if info.f > f and cfg.method is not Method.PURE_NEWTON:
            trace.status = "stalled"
            break
        x, f, g, gn = x_new, info.f, g_new, gn_new
        trace.records.append(
            TraceRecord(k, f, gn, info.step, info.probes, info.jitter, elapsed, info.branch, info.extras)
        )
        if cfg.keep_iterates:
            trace.iterates.append(x.copy())
    else:
        if gn <= cfg.grad_tol:
            trace.status = "converged"
        elif cfg.f_stop is not None and f <= cfg.f_stop:
            trace.status = "f-stop"
    return trace
