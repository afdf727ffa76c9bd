"""Method comparison over the four synthetic regimes with f, step-size and runtime plots.

    python scripts/compare_methods.py --out results/compare
    python scripts/compare_methods.py --small --methods greedy-newton,plane-newton
"""

import argparse

from greedynewton import bench
from greedynewton.solvers import Method


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/compare")
    ap.add_argument("--methods", default=",".join(m.value for m in bench.DEFAULT_METHODS))
    ap.add_argument("--max-iter", type=int, default=25)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--small", action="store_true", help="use n=200 for the convex-separable regime")
    args = ap.parse_args()

    cfg = bench.ExperimentConfig(
        methods=[Method(m) for m in args.methods.split(",")],
        max_iter=args.max_iter,
        out_dir=args.out,
        seed=args.seed,
    )
    if args.small:
        cfg.convex_separable_n = 200
    cells = bench.run_comparison(cfg)
    files = [c.trace_file for c in cells if c.trace_file is not None]
    for kind in bench.PLOT_KINDS:
        for path in bench.emit_plots(files, kind, cfg.out_dir):
            print(f"plot: {path}")


if __name__ == "__main__":
    main()
