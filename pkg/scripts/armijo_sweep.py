"""Armijo Newton with initial steps 1, 2, 8 (configurable) against greedy Newton."""

import argparse

from greedynewton import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/armijo")
    ap.add_argument("--inits", default="1,2,8")
    ap.add_argument("--regs", default="0,1")
    ap.add_argument("--max-iter", type=int, default=25)
    args = ap.parse_args()

    cfg = bench.ExperimentConfig(
        armijo_inits=[float(v) for v in args.inits.split(",")],
        regs=[float(v) for v in args.regs.split(",")],
        max_iter=args.max_iter,
        out_dir=args.out,
    )
    cells = bench.run_armijo_sweep(cfg)
    files = [c.trace_file for c in cells if c.trace_file is not None]
    for path in bench.emit_plots(files, "f", cfg.out_dir):
        print(f"plot: {path}")


if __name__ == "__main__":
    main()
