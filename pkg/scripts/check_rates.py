"""Run the three convergence checkers on greedy Newton traces for every regularized regime.

Analytic mu and L; M is both the analytic logistic bound and a sampled estimate
along the trajectory. Exits 3 if any check is violated.
"""

import argparse
import sys

from greedynewton import (
    ConvergenceBounds,
    Method,
    Regime,
    SolverConfig,
    SyntheticSpec,
    analytic_bounds,
    check_arbitrary_step,
    check_as_fast_as_newton,
    check_global_rate,
    estimate_bounds,
    generate,
    reference_optimum,
    solve,
)
from greedynewton.verify import CannotCheckError, Provenance, trajectory_pairs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reg", type=float, default=1.0)
    ap.add_argument("--regimes", default=",".join(r.value for r in Regime))
    ap.add_argument("--verbose", action="store_true", help="print every table row")
    args = ap.parse_args()

    violated = False
    for name in args.regimes.split(","):
        p = generate(SyntheticSpec(Regime(name)), reg=args.reg)
        trace = solve(p, SolverConfig(Method.GREEDY_NEWTON, keep_iterates=True))
        ref = reference_optimum(p)
        analytic = analytic_bounds(p)
        sampled = estimate_bounds(p, [ref.x], trajectory_pairs(trace, ref))
        mixed = ConvergenceBounds(analytic.mu, analytic.L, sampled.M, Provenance.ESTIMATED)
        print(f"== {name}: mu={analytic.mu:g} L={analytic.L:.4g} M analytic={analytic.M:.4g} sampled={sampled.M:.4g}")
        for check, bounds in (
            (check_global_rate, analytic),
            (check_as_fast_as_newton, mixed),
            (check_arbitrary_step, mixed),
        ):
            try:
                report = check(trace, bounds, ref)
            except CannotCheckError as exc:
                print(f"{check.__name__}: skipped ({exc})")
                continue
            violated |= not report.passed
            if args.verbose:
                print(report.format())
            else:
                print(f"{check.__name__}: {report.verdict}, worst ratio {report.worst_ratio:.3g}")
    return 3 if violated else 0


if __name__ == "__main__":
    sys.exit(main())
