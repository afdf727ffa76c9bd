"""Newton's method with exact ("greedy") line searches, plus baselines and checks."""

from .cubic import CubicConfig, cubic_subproblem, step_cubic_linesearch, step_greedy_lm
from .data import Regime, SyntheticSpec, TraceFile, generate, load_libsvm, read_trace, write_trace
from .linesearch import ArmijoConfig, ExactSearchConfig, armijo_search, exact_search, plane_search
from .oracles import LogisticProblem, QuadraticProblem, ScalarRestriction, SmoothProblem
from .solvers import IterateTrace, Method, SolverConfig, newton_direction, solve
from .verify import (
    ConvergenceBounds,
    ReferenceOptimum,
    analytic_bounds,
    check_arbitrary_step,
    check_as_fast_as_newton,
    check_global_rate,
    estimate_bounds,
    reference_optimum,
)

__all__ = [
    "ArmijoConfig",
    "ConvergenceBounds",
    "CubicConfig",
    "ExactSearchConfig",
    "IterateTrace",
    "LogisticProblem",
    "Method",
    "QuadraticProblem",
    "ReferenceOptimum",
    "Regime",
    "ScalarRestriction",
    "SmoothProblem",
    "SolverConfig",
    "SyntheticSpec",
    "TraceFile",
    "analytic_bounds",
    "armijo_search",
    "check_arbitrary_step",
    "check_as_fast_as_newton",
    "check_global_rate",
    "cubic_subproblem",
    "estimate_bounds",
    "exact_search",
    "generate",
    "load_libsvm",
    "newton_direction",
    "plane_search",
    "read_trace",
    "reference_optimum",
    "solve",
    "step_cubic_linesearch",
    "step_greedy_lm",
    "write_trace",
]
