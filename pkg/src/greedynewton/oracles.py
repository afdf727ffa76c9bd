"""Differentiable problem oracles.

Every oracle exposes ``value``, ``gradient`` and ``hessian`` at a point and a
``restrict`` method returning a one-dimensional view ``phi(alpha) = f(x + alpha d)``
that the line searches probe. Logistic regression exploits its linear
composition structure so that each probe of the restriction costs O(m).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray

Vector = NDArray[np.float64]
Matrix = NDArray[np.float64]


class DegenerateSearchError(ValueError):
    """Raised when a restriction is requested along the zero direction."""


def softplus(t):
    """Stable ``log(1 + exp(t))``, finite for any finite ``t``."""
    t = np.asarray(t, dtype=float)
    return np.where(t > 0, t + np.log1p(np.exp(-np.abs(t))), np.log1p(np.exp(-np.abs(t))))


def sigmoid(t):
    """Logistic function ``1 / (1 + exp(-t))`` without overflow."""
    t = np.asarray(t, dtype=float)
    e = np.exp(-np.abs(t))
    return np.where(t >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _check_dim(x, n: int) -> Vector:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"expected a vector of shape ({n},), got {x.shape}")
    return x


class DirectionalRestriction(ABC):
    """phi(alpha) = f(x + alpha * d) together with its derivative.

    ``probes`` counts calls to :meth:`phi` and :meth:`dphi`.
    """

    x: Vector
    d: Vector

    def __init__(self) -> None:
        self.probes = 0

    def phi(self, alpha: float) -> float:
        self.probes += 1
        return self._phi(float(alpha))

    def dphi(self, alpha: float) -> float:
        self.probes += 1
        return self._dphi(float(alpha))

    @abstractmethod
    def _phi(self, alpha: float) -> float: ...

    @abstractmethod
    def _dphi(self, alpha: float) -> float: ...


class ScalarRestriction(DirectionalRestriction):
    """Restriction given directly by scalar callables; used for 1-D experiments."""

    def __init__(self, phi: Callable[[float], float], dphi: Callable[[float], float]):
        super().__init__()
        self._f = phi
        self._df = dphi
        self.x = np.zeros(1)
        self.d = np.ones(1)

    def _phi(self, alpha):
        return float(self._f(alpha))

    def _dphi(self, alpha):
        return float(self._df(alpha))


class DirectRestriction(DirectionalRestriction):
    """Generic restriction that evaluates the full oracle at each probe."""

    def __init__(self, problem: "ProblemOracle", x: Vector, d: Vector):
        super().__init__()
        self.problem, self.x, self.d = problem, x, d

    def _phi(self, alpha):
        return self.problem.value(self.x + alpha * self.d)

    def _dphi(self, alpha):
        return float(self.problem.gradient(self.x + alpha * self.d) @ self.d)


class ProblemOracle(ABC):
    """Twice-differentiable objective on R^n."""

    n: int
    #: regularization strength carried by the problem; gives an analytic
    #: lower bound on the Hessian spectrum when positive
    reg: float = 0.0

    @abstractmethod
    def value(self, x: Vector) -> float: ...

    @abstractmethod
    def gradient(self, x: Vector) -> Vector: ...

    @abstractmethod
    def hessian(self, x: Vector) -> Matrix: ...

    def restrict(self, x: Vector, d: Vector) -> DirectionalRestriction:
        x = _check_dim(x, self.n)
        d = _check_dim(d, self.n)
        if not np.any(d):
            raise DegenerateSearchError("search direction is the zero vector")
        return DirectRestriction(self, x, d)


@dataclass(frozen=True, eq=False)
class SmoothProblem(ProblemOracle):
    """Wraps user supplied callables for value, gradient and Hessian."""

    fun: Callable[[Vector], float]
    grad: Callable[[Vector], Vector]
    hess: Callable[[Vector], Matrix]
    n: int
    reg: float = 0.0

    def value(self, x):
        return float(self.fun(_check_dim(x, self.n)))

    def gradient(self, x):
        return np.asarray(self.grad(_check_dim(x, self.n)), dtype=float).reshape(self.n)

    def hessian(self, x):
        H = np.asarray(self.hess(_check_dim(x, self.n)), dtype=float).reshape(self.n, self.n)
        return 0.5 * (H + H.T)


class QuadraticRestriction(DirectionalRestriction):
    def __init__(self, problem: "QuadraticProblem", x: Vector, d: Vector):
        super().__init__()
        self.x, self.d = x, d
        self.f0 = problem.value(x)
        self.slope = float(problem.gradient(x) @ d)
        self.curv = float(d @ (problem.Q @ d))

    def _phi(self, alpha):
        return self.f0 + alpha * self.slope + 0.5 * alpha * alpha * self.curv

    def _dphi(self, alpha):
        return self.slope + alpha * self.curv


@dataclass(frozen=True, eq=False)
class QuadraticProblem(ProblemOracle):
    """f(x) = 1/2 x^T Q x + q^T x + c."""

    Q: Matrix
    q: Vector
    c: float = 0.0

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        object.__setattr__(self, "Q", 0.5 * (Q + Q.T))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float).reshape(-1))
        if self.Q.shape != (self.q.size, self.q.size):
            raise ValueError("Q and q have inconsistent shapes")

    @classmethod
    def centered(cls, Q, center) -> "QuadraticProblem":
        """1/2 (x - center)^T Q (x - center)."""
        Q = np.asarray(Q, dtype=float)
        center = np.asarray(center, dtype=float)
        return cls(Q, -Q @ center, 0.5 * float(center @ Q @ center))

    @property
    def n(self) -> int:
        return self.q.size

    def minimizer(self) -> Vector:
        return np.linalg.solve(self.Q, -self.q)

    def value(self, x):
        x = _check_dim(x, self.n)
        return float(0.5 * x @ (self.Q @ x) + self.q @ x + self.c)

    def gradient(self, x):
        x = _check_dim(x, self.n)
        return self.Q @ x + self.q

    def hessian(self, x):
        _check_dim(x, self.n)
        return self.Q.copy()

    def restrict(self, x, d):
        x = _check_dim(x, self.n)
        d = _check_dim(d, self.n)
        if not np.any(d):
            raise DegenerateSearchError("search direction is the zero vector")
        return QuadraticRestriction(self, x, d)


class LogisticRestriction(DirectionalRestriction):
    """Cached margins along a ray; each probe is O(m) with no matrix product."""

    def __init__(self, problem: "LogisticProblem", x: Vector, d: Vector):
        super().__init__()
        self.x, self.d = x, d
        b = problem.b
        # signed margins: t(alpha) = b * A (x + alpha d) = z + alpha * dz
        self.z = b * problem.margins(x)
        self.dz = b * problem.margins(d)
        self.reg = problem.reg
        self.xx = float(x @ x)
        self.xd = float(x @ d)
        self.dd = float(d @ d)

    def _phi(self, alpha):
        t = self.z + alpha * self.dz
        val = float(np.sum(softplus(-t)))
        if self.reg > 0:
            val += 0.5 * self.reg * (self.xx + 2.0 * alpha * self.xd + alpha * alpha * self.dd)
        return val

    def _dphi(self, alpha):
        t = self.z + alpha * self.dz
        val = -float(self.dz @ sigmoid(-t))
        if self.reg > 0:
            val += self.reg * (self.xd + alpha * self.dd)
        return val


@dataclass(frozen=True, eq=False)
class LogisticProblem(ProblemOracle):
    """Sum of logistic losses plus an optional (reg/2)||x||^2 term.

    ``A`` may be a dense array or a scipy sparse matrix (rows are examples).
    """

    A: Matrix | sp.spmatrix
    b: Vector
    reg: float = 0.0
    name: str = field(default="logistic", compare=False)

    def __post_init__(self):
        A = self.A
        if sp.issparse(A):
            A = sp.csr_matrix(A, dtype=float)
        else:
            A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.size:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.size} labels")
        if not np.all((b == 1.0) | (b == -1.0)):
            raise ValueError("labels must be exactly -1 or +1")
        if not self.reg >= 0:
            raise ValueError("regularization strength must be nonnegative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "reg", float(self.reg))

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def margins(self, x: Vector) -> Vector:
        return np.asarray(self.A @ x, dtype=float).reshape(-1)

    def value(self, x):
        x = _check_dim(x, self.n)
        t = self.b * self.margins(x)
        val = float(np.sum(softplus(-t)))
        if self.reg > 0:
            val += 0.5 * self.reg * float(x @ x)
        return val

    def gradient(self, x):
        x = _check_dim(x, self.n)
        t = self.b * self.margins(x)
        r = -self.b * sigmoid(-t)
        g = np.asarray(self.A.T @ r, dtype=float).reshape(-1)
        if self.reg > 0:
            g = g + self.reg * x
        return g

    def hessian(self, x):
        x = _check_dim(x, self.n)
        t = self.b * self.margins(x)
        # sigma(t) * sigma(-t) avoids 1 - sigma cancellation for large |t|
        w = sigmoid(t) * sigmoid(-t)
        if sp.issparse(self.A):
            H = (self.A.T @ sp.diags(w) @ self.A).toarray()
        else:
            H = self.A.T @ (self.A * w[:, None])
        H = 0.5 * (H + H.T)
        if self.reg > 0:
            H[np.diag_indices_from(H)] += self.reg
        return H

    def restrict(self, x, d):
        x = _check_dim(x, self.n)
        d = _check_dim(d, self.n)
        if not np.any(d):
            raise DegenerateSearchError("search direction is the zero vector")
        return LogisticRestriction(self, x, d)

    def with_reg(self, reg: float) -> "LogisticProblem":
        return LogisticProblem(self.A, self.b, reg, name=self.name)

    def dense_features(self) -> Matrix:
        return self.A.toarray() if sp.issparse(self.A) else self.A
