"""Numerical checks of the per-iteration convergence inequalities.

Given a solver trace, curvature constants (mu, L, M) and a certified reference
optimum, each ``check_*`` function evaluates one inequality at every
iteration and returns a :class:`CheckReport`. Verdicts obtained with analytic
constants are hard ("proven"); sampled constants are lower bounds on the true
suprema, so a pass with them is only "consistent".
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .oracles import LogisticProblem, ProblemOracle, QuadraticProblem, Vector, sigmoid
from .solvers import Branch, IterateTrace, Method, SolverConfig, solve, step_pure_newton

OPTIMUM_MAGIC = "# greedynewton-optimum v1"
# max |d/dt [s(t)(1 - s(t))]| for the logistic sigmoid s
LOGISTIC_THIRD_DERIVATIVE_MAX = 1.0 / (6.0 * math.sqrt(3.0))


class Provenance(str, enum.Enum):
    ANALYTIC = "analytic"
    ESTIMATED = "estimated"


class CannotCheckError(ValueError):
    pass


class CertificationError(ValueError):
    pass


class EstimationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConvergenceBounds:
    mu: float
    L: float
    M: float
    provenance: Provenance = Provenance.ANALYTIC

    def __post_init__(self):
        if not 0 < self.mu <= self.L:
            raise ValueError(f"need 0 < mu <= L, got mu={self.mu}, L={self.L}")
        if not self.M >= 0:
            raise ValueError("M must be nonnegative")
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @property
    def fast_radius(self) -> float:
        """Radius of guaranteed quadratic convergence for as-fast-as-Newton methods."""
        if self.M == 0:
            return math.inf
        return math.sqrt(self.mu / self.L) * 2.0 * self.mu / self.M


@dataclass(frozen=True)
class ReferenceOptimum:
    x: Vector
    f: float
    grad_norm: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        if not self.grad_norm < 1e-12 * (1.0 + abs(self.f)):
            raise CertificationError(
                f"gradient norm {self.grad_norm:.3e} too large to certify f* = {self.f!r}"
            )

    def recertify(self, problem: ProblemOracle) -> "ReferenceOptimum":
        gn = float(np.linalg.norm(problem.gradient(self.x)))
        return ReferenceOptimum(self.x, problem.value(self.x), gn)


# ---------------------------------------------------------------- eigenvalues


def power_iteration(
    matvec: Callable[[Vector], Vector],
    n: int,
    tol: float = 1e-10,
    max_iter: int = 20000,
    seed: int = 0,
) -> tuple[float, Vector]:
    """Dominant eigenvalue of a symmetric positive semidefinite operator.

    Stops when the Rayleigh quotient changes by less than ``tol`` relative.
    """
    v = np.ones(n) + 0.1 * np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    rho = 0.0
    for _ in range(max_iter):
        w = matvec(v)
        rho_new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0, v
        v = w / nw
        if abs(rho_new - rho) <= tol * abs(rho_new):
            return rho_new, v
        rho = rho_new
    raise EstimationError(f"power iteration did not converge in {max_iter} iterations")


def largest_eigenvalue(H, tol: float = 1e-10) -> float:
    H = np.asarray(H, dtype=float)
    return power_iteration(lambda v: H @ v, H.shape[0], tol)[0]


def smallest_eigenvalue(H, upper: float | None = None, tol: float = 1e-10) -> float:
    """Smallest eigenvalue: inverse iteration through a Cholesky factor when H
    is positive definite, power iteration on ``upper * I - H`` otherwise."""
    H = np.asarray(H, dtype=float)
    try:
        factor = sla.cho_factor(H, lower=True)
    except np.linalg.LinAlgError:
        pass
    else:
        rho, _ = power_iteration(lambda v: sla.cho_solve(factor, v), H.shape[0], tol)
        return 1.0 / rho
    if upper is None:
        upper = largest_eigenvalue(H, tol)
    shift = upper * (1.0 + 1e-12) + 1e-300
    rho, _ = power_iteration(lambda v: shift * v - H @ v, H.shape[0], tol)
    return shift - rho


def spectral_norm(D, tol: float = 1e-10) -> float:
    """||D||_2 for symmetric D via power iteration on D^2."""
    D = np.asarray(D, dtype=float)
    if not np.any(D):
        return 0.0
    rho, _ = power_iteration(lambda v: D @ (D @ v), D.shape[0], tol)
    return math.sqrt(max(rho, 0.0))


def gram_spectral_norm(A, tol: float = 1e-10) -> float:
    """Largest eigenvalue of A^T A, iterating on the smaller Gram matrix."""
    m, n = A.shape
    if m == 0:
        return 0.0
    G = A @ A.T if m <= n else A.T @ A
    if sp.issparse(G):
        G = G.toarray()
    return power_iteration(lambda v: G @ v, G.shape[0], tol)[0]


# --------------------------------------------------------------------- bounds


def logistic_bounds(problem: LogisticProblem) -> ConvergenceBounds:
    """Analytic constants for L2-regularized logistic regression.

    mu = reg, L = ||A||^2 / 4 + reg and M = c * max_i ||a_i|| * ||A||^2 where
    c bounds the derivative of s(1 - s) for the sigmoid s.
    """
    if not problem.reg > 0:
        raise CannotCheckError("logistic problem without regularization is not strongly convex")
    s = gram_spectral_norm(problem.A)
    A = problem.A
    row_norm = (
        np.sqrt(np.asarray(A.multiply(A).sum(axis=1)).ravel())
        if sp.issparse(A)
        else np.linalg.norm(A, axis=1)
    )
    amax = float(row_norm.max()) if row_norm.size else 0.0
    return ConvergenceBounds(
        problem.reg, 0.25 * s + problem.reg, LOGISTIC_THIRD_DERIVATIVE_MAX * amax * s
    )


def quadratic_bounds(problem: QuadraticProblem) -> ConvergenceBounds:
    w = np.linalg.eigvalsh(problem.Q)
    return ConvergenceBounds(float(w[0]), float(w[-1]), 0.0)


def analytic_bounds(problem: ProblemOracle) -> ConvergenceBounds:
    if isinstance(problem, LogisticProblem):
        return logistic_bounds(problem)
    if isinstance(problem, QuadraticProblem):
        return quadratic_bounds(problem)
    raise CannotCheckError(f"no analytic bounds for {type(problem).__name__}")


def _curvature_weights(problem: LogisticProblem, x: Vector) -> Vector:
    t = problem.b * problem.margins(np.asarray(x, dtype=float))
    return sigmoid(t) * sigmoid(-t)


def _hessian_matvec(problem: ProblemOracle, x: Vector):
    """v -> H(x) v; matrix-free for logistic problems."""
    if isinstance(problem, LogisticProblem):
        A, w, reg = problem.A, _curvature_weights(problem, x), problem.reg
        return lambda v: A.T @ (w * (A @ v)) + reg * v
    H = problem.hessian(np.asarray(x, dtype=float))
    return lambda v: H @ v


def _hessian_gap(problem: ProblemOracle, x: Vector, y: Vector, tol: float = 1e-10) -> float:
    """||H(x) - H(y)||_2."""
    if isinstance(problem, LogisticProblem):
        A = problem.A
        dw = _curvature_weights(problem, x) - _curvature_weights(problem, y)
        if not np.any(dw):
            return 0.0
        op = lambda v: A.T @ (dw * (A @ v))
        rho, _ = power_iteration(lambda v: op(op(v)), problem.n, tol)
        return math.sqrt(max(rho, 0.0))
    return spectral_norm(problem.hessian(np.asarray(x, dtype=float)) - problem.hessian(np.asarray(y, dtype=float)), tol)


def estimate_bounds(
    problem: ProblemOracle,
    samples: Sequence[Vector],
    pairs: Iterable[tuple[Vector, Vector]] | None = None,
) -> ConvergenceBounds:
    """Sampled (mu, L, M); mu is taken from the regularizer when it is positive.

    M is the largest ratio ||H(x) - H(y)|| / ||x - y|| over ``pairs`` (all
    pairs of ``samples`` by default) and therefore a lower bound on the
    Hessian Lipschitz constant.
    """
    if len(samples) == 0:
        raise ValueError("need at least one sample point")
    samples = [np.asarray(x, dtype=float) for x in samples]
    L = max(power_iteration(_hessian_matvec(problem, x), problem.n, 1e-10)[0] for x in samples)
    if problem.reg > 0:
        mu = float(problem.reg)
    else:
        mu = min(smallest_eigenvalue(problem.hessian(x), L) for x in samples)
        if not mu > 0:
            raise EstimationError(f"sampled Hessian is not positive definite (mu={mu:g})")
    if pairs is None:
        pairs = [(samples[i], samples[j]) for i in range(len(samples)) for j in range(i + 1, len(samples))]
    M = 0.0
    for x, y in pairs:
        dist = float(np.linalg.norm(np.asarray(x) - np.asarray(y)))
        if dist > 0:
            M = max(M, _hessian_gap(problem, x, y) / dist)
    return ConvergenceBounds(mu, max(L, mu), M, Provenance.ESTIMATED)


def trajectory_pairs(trace: IterateTrace, ref: ReferenceOptimum, splits: int = 4):
    """Pairs along each segment x_k -> x*, the region the local analysis uses."""
    out = []
    for xk in trace.iterates:
        pts = [xk + (t / splits) * (ref.x - xk) for t in range(splits + 1)]
        out.extend(zip(pts[:-1], pts[1:]))
        out.append((xk, ref.x))
    return out


def reference_optimum(
    problem: ProblemOracle, x0: Vector | None = None, grad_tol: float = 1e-13, max_iter: int = 200
) -> ReferenceOptimum:
    """Greedy Newton to ``grad_tol``, then pure Newton polishing; best point kept."""
    trace = solve(
        problem,
        SolverConfig(Method.GREEDY_NEWTON, max_iter=max_iter, grad_tol=grad_tol, x0=x0),
    )
    x = trace.iterates[-1]
    g = problem.gradient(x)
    best = (float(np.linalg.norm(g)), x)
    cfg = SolverConfig(Method.PURE_NEWTON)
    for _ in range(5):
        if best[0] < grad_tol:
            break
        try:
            x, _ = step_pure_newton(problem, x, cfg, g)
        except Exception:
            break
        g = problem.gradient(x)
        gn = float(np.linalg.norm(g))
        if gn < best[0]:
            best = (gn, x)
    gn, x = best
    return ReferenceOptimum(x, problem.value(x), gn)


def write_optimum(path, ref: ReferenceOptimum) -> None:
    lines = [OPTIMUM_MAGIC, f"# f_star: {ref.f:.17g}", f"# grad_norm: {ref.grad_norm:.17g}"]
    lines += [f"{v:.17g}" for v in ref.x]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_optimum(path, problem: ProblemOracle | None = None) -> ReferenceOptimum:
    """Load a reference optimum; with ``problem`` the certificate is recomputed."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != OPTIMUM_MAGIC:
        raise ValueError(f"{path}: not an optimum file (expected '{OPTIMUM_MAGIC}')")
    header = {}
    for line in lines[1:]:
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
    try:
        x = np.array([float(l) for l in lines[1:] if l.strip() and not l.startswith("#")])
        ref = ReferenceOptimum(x, float(header["f_star"]), float(header["grad_norm"]))
    except (KeyError, ValueError) as exc:
        if isinstance(exc, CertificationError):
            raise
        raise ValueError(f"{path}: malformed optimum file ({exc})") from exc
    return ref.recertify(problem) if problem is not None else ref


# --------------------------------------------------------------------- checks


@dataclass
class CheckRow:
    k: int
    lhs: float
    rhs: float
    ok: bool | None  # None: below the numerical floor, not assessed
    in_fast_region: bool | None = None

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else (0.0 if self.lhs <= 0 else math.inf)


@dataclass
class CheckReport:
    name: str
    rows: list[CheckRow]
    provenance: Provenance
    notes: list[str] = field(default_factory=list)

    @property
    def checked(self) -> list[CheckRow]:
        return [r for r in self.rows if r.ok is not None]

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.checked)

    @property
    def worst_ratio(self) -> float:
        rows = self.checked
        return max((r.ratio for r in rows), default=0.0)

    @property
    def verdict(self) -> str:
        if not self.passed:
            return "violated"
        return "proven" if self.provenance is Provenance.ANALYTIC else "consistent"

    def format(self) -> str:
        out = [f"check: {self.name}", f"bounds: {self.provenance.value}"]
        out += [f"note: {n}" for n in self.notes]
        out.append("k\tlhs\trhs\tratio\tstatus\tfast_region")
        for r in self.rows:
            status = "skip" if r.ok is None else ("ok" if r.ok else "FAIL")
            region = "-" if r.in_fast_region is None else str(r.in_fast_region).lower()
            out.append(f"{r.k}\t{r.lhs:.6e}\t{r.rhs:.6e}\t{r.ratio:.6e}\t{status}\t{region}")
        out.append(f"worst_ratio: {self.worst_ratio:.6e}")
        out.append(f"verdict: {self.verdict}")
        return "\n".join(out)


def _errors(trace: IterateTrace, ref: ReferenceOptimum) -> np.ndarray:
    if len(trace.iterates) != len(trace.records):
        raise CannotCheckError("trace does not record iterates")
    return np.array([np.linalg.norm(x - ref.x) for x in trace.iterates])


def _x_floor(ref: ReferenceOptimum) -> float:
    return 1e-10 * (1.0 + float(np.linalg.norm(ref.x)))


def check_global_rate(
    trace: IterateTrace,
    bounds: ConvergenceBounds,
    ref: ReferenceOptimum | None,
    slack: float = 1e-8,
    rate: float | None = None,
    floor: float = 1e-12,
) -> CheckReport:
    """f_{k+1} - f* <= (rate + slack) (f_k - f*), rate = 1 - mu^2 / L^2 by default.

    Pairs whose starting gap is below ``floor`` are skipped.
    """
    if ref is None:
        raise CannotCheckError("no reference optimum value f*")
    if rate is None:
        rate = 1.0 - (bounds.mu / bounds.L) ** 2
    f = trace.f_values - ref.f
    rows = []
    for k in range(len(f) - 1):
        if f[k] < floor:
            rows.append(CheckRow(k, f[k + 1], (rate + slack) * f[k], None))
            continue
        rhs = (rate + slack) * f[k]
        rows.append(CheckRow(k, f[k + 1], rhs, bool(f[k + 1] <= rhs)))
    report = CheckReport("global-rate", rows, bounds.provenance)
    report.notes.append(f"rate bound {rate:.12g} (+{slack:g})")
    return report


AS_FAST_AS_NEWTON = {
    Method.PURE_NEWTON,
    Method.GREEDY_NEWTON,
    Method.HYBRID,
    Method.PLANE_NEWTON,
    Method.CUBIC_GREEDY_LM,
}


def check_as_fast_as_newton(
    trace: IterateTrace, bounds: ConvergenceBounds, ref: ReferenceOptimum | None, slack: float = 1e-6
) -> CheckReport:
    """||x_{k+1} - x*|| <= sqrt(L/mu) M / (2 mu) ||x_k - x*||^2, flagging the fast region."""
    if ref is None:
        raise CannotCheckError("no reference optimum")
    if Method(trace.method) not in AS_FAST_AS_NEWTON:
        raise CannotCheckError(f"{Method(trace.method).value} does not dominate the pure Newton step")
    e = _errors(trace, ref)
    c = math.sqrt(bounds.L / bounds.mu) * bounds.M / (2.0 * bounds.mu)
    radius = bounds.fast_radius
    floor = _x_floor(ref)
    rows = []
    for k in range(len(e) - 1):
        rhs = c * e[k] ** 2 * (1.0 + slack)
        ok = None if e[k + 1] < floor else bool(e[k + 1] <= rhs)
        rows.append(CheckRow(k, e[k + 1], rhs, ok, bool(e[k] < radius)))
    report = CheckReport("as-fast-as-newton", rows, bounds.provenance)
    report.notes.append(f"constant {c:.6e}, fast radius {radius:.6e}")
    return report


def check_arbitrary_step(
    trace: IterateTrace, bounds: ConvergenceBounds, ref: ReferenceOptimum | None, slack: float = 1e-6
) -> CheckReport:
    """||x_{k+1} - x*|| <= |a| M/(2 mu) e_k^2 + |a - 1| (L / mu) e_k for Newton steps of size a.

    Iterations where the hybrid method took its gradient step are skipped.
    """
    if ref is None:
        raise CannotCheckError("no reference optimum")
    if Method(trace.method) not in (Method.PURE_NEWTON, Method.GREEDY_NEWTON, Method.ARMIJO_NEWTON, Method.HYBRID):
        raise CannotCheckError(f"{Method(trace.method).value} does not take scaled Newton steps")
    e = _errors(trace, ref)
    floor = _x_floor(ref)
    rows = []
    for k in range(len(e) - 1):
        rec = trace.records[k + 1]
        a = rec.step
        rhs = (abs(a) * bounds.M / (2 * bounds.mu) * e[k] ** 2 + abs(a - 1) * bounds.L / bounds.mu * e[k]) * (1 + slack)
        if rec.branch is Branch.GRADIENT or e[k + 1] < floor:
            rows.append(CheckRow(k, e[k + 1], rhs, None))
        else:
            rows.append(CheckRow(k, e[k + 1], rhs, bool(e[k + 1] <= rhs)))
    return CheckReport("arbitrary-step", rows, bounds.provenance)


def superlinear_ratios(trace: IterateTrace, ref: ReferenceOptimum) -> np.ndarray:
    """e_{k+1} / e_k^2 over consecutive iterates above the numerical floor."""
    e = _errors(trace, ref)
    floor = _x_floor(ref)
    return np.array([e[k + 1] / e[k] ** 2 for k in range(len(e) - 1) if e[k + 1] >= floor])
