"""Command-line interface: ``python -m greedynewton <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench
from .cubic import CubicConfig
from .data import (
    DEFAULT_SEED,
    Regime,
    SyntheticSpec,
    TraceFile,
    TraceFormatError,
    generate,
    load_libsvm,
    problem_from_id,
    read_iterates,
    read_trace,
    write_iterates,
    write_libsvm,
    write_trace,
)
from .linesearch import ArmijoConfig
from .solvers import Method, NumericalFailure, SolverConfig, UnrecoverableHessianError, solve
from .verify import (
    CannotCheckError,
    CertificationError,
    EstimationError,
    analytic_bounds,
    check_arbitrary_step,
    check_as_fast_as_newton,
    check_global_rate,
    estimate_bounds,
    read_optimum,
    reference_optimum,
    trajectory_pairs,
    write_optimum,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_CHECK = 0, 1, 2, 3
CHECKS = {
    "global": check_global_rate,
    "fast": check_as_fast_as_newton,
    "arbitrary": check_arbitrary_step,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _strings(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def load_problem(data: str, reg: float):
    """A LIBSVM path, a full synthetic id, or ``synthetic:<regime>[:seed=S]``."""
    if data.startswith("synthetic:"):
        regime, *fields = data[len("synthetic:"):].split(":")
        kw = dict(f.split("=", 1) for f in fields)
        spec = SyntheticSpec(
            Regime(regime),
            m=int(kw.get("m", 500)),
            n=int(kw["n"]) if "n" in kw else None,
            seed=int(kw.get("seed", DEFAULT_SEED)),
        )
        return generate(spec, reg)
    if data.startswith("libsvm:"):
        data = data[len("libsvm:"):]
    if not Path(data).exists():
        raise UsageError(f"data file not found: {data}")
    return load_libsvm(data, reg)


def parse_keyvalue(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` comments, blank lines and ``[section]`` headers ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        out[key.strip()] = value.strip().strip("\"'")
    return out


def experiment_config(values: dict[str, str], **overrides) -> bench.ExperimentConfig:
    kw = {}
    conv = {
        "regimes": lambda v: [Regime(s.strip("\"' ")) for s in _strings(v.strip("[]"))],
        "datasets": lambda v: [s.strip("\"' ") for s in _strings(v.strip("[]"))],
        "regs": lambda v: _floats(v.strip("[]")),
        "methods": lambda v: [Method(s.strip("\"' ")) for s in _strings(v.strip("[]"))],
        "armijo_inits": lambda v: _floats(v.strip("[]")),
        "max_iter": int,
        "grad_tol": float,
        "out_dir": Path,
        "seed": int,
        "m": int,
        "convex_separable_n": int,
    }
    for key, value in values.items():
        if key == "plots":
            continue
        if key not in conv:
            raise UsageError(f"unknown config key {key!r}; known: {', '.join(sorted(conv))}, plots")
        try:
            kw[key] = conv[key](value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"bad value for {key}: {exc}") from None
    kw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return bench.ExperimentConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ------------------------------------------------------------------ commands


def cmd_generate(args) -> int:
    spec = SyntheticSpec(Regime(args.regime), m=args.m, n=args.n, seed=args.seed)
    problem = generate(spec)
    write_libsvm(args.out, problem.A, problem.b)
    print(f"wrote {spec.dataset_id} ({problem.m}x{problem.n}) to {args.out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    problem = load_problem(args.data, args.reg)
    cubic = CubicConfig(M=args.cubic_m) if args.cubic_m is not None else None
    cfg = SolverConfig(
        Method(args.method), max_iter=args.max_iter, grad_tol=args.grad_tol,
        armijo=ArmijoConfig(init_step=args.armijo_init), cubic=cubic,
    )
    echo = {"reg": f"{args.reg:g}", "max_iter": str(args.max_iter), "grad_tol": f"{args.grad_tol:g}",
            "armijo.init_step": f"{args.armijo_init:g}"}
    dataset = problem.name or args.data
    code = EXIT_OK
    try:
        trace = solve(problem, cfg)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        trace, code = exc.trace, EXIT_NUMERICAL
    except UnrecoverableHessianError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    echo["status"] = trace.status
    write_trace(args.trace_out, TraceFile.from_trace(trace, dataset, None, echo))
    iterates_out = args.iterates_out or f"{args.trace_out}.iterates.csv"
    if trace.iterates:
        write_iterates(iterates_out, trace.iterates)
    if trace.records:
        last = trace.records[-1]
        print(f"{cfg.method.value}: {len(trace.records) - 1} iterations, status {trace.status}, "
              f"f = {last.f:.17g}, |grad| = {last.grad_norm:.3e}")
    return code


def cmd_compare(args) -> int:
    values = parse_keyvalue(args.config) if args.config else {}
    cfg = experiment_config(values, out_dir=args.out)
    cells = bench.run_comparison(cfg)
    plots = values.get("plots", "true").lower() in ("1", "true", "yes")
    if plots:
        _plot_cells(cells, cfg.out_dir)
    return EXIT_NUMERICAL if any(c.error for c in cells) else EXIT_OK


def cmd_sweep(args) -> int:
    values = parse_keyvalue(args.config) if args.config else {}
    if args.regimes:
        values["regimes"] = args.regimes
    if args.regs:
        values["regs"] = args.regs
    cfg = experiment_config(values, out_dir=args.out, armijo_inits=args.inits, max_iter=args.max_iter)
    cells = bench.run_armijo_sweep(cfg)
    _plot_cells(cells, cfg.out_dir)
    return EXIT_NUMERICAL if any(c.error for c in cells) else EXIT_OK


def _plot_cells(cells, out_dir):
    files = [c.trace_file for c in cells if c.trace_file is not None]
    for kind in bench.PLOT_KINDS:
        for path in bench.emit_plots(files, kind, out_dir):
            print(f"plot: {path}")


def cmd_check(args) -> int:
    tf = read_trace(args.trace)
    reg = args.reg if args.reg is not None else float(tf.config.get("reg", 0.0))
    problem = load_problem(args.data, reg) if args.data else problem_from_id(tf.dataset, reg)
    trace = tf.to_trace()
    iterates = args.iterates or f"{args.trace}.iterates.csv"
    if Path(iterates).exists():
        trace.iterates = read_iterates(iterates)
    if args.optimum:
        ref = read_optimum(args.optimum, problem)
    else:
        ref = reference_optimum(problem)
        if args.optimum_out:
            write_optimum(args.optimum_out, ref)
    if args.bounds == "analytic":
        bounds = analytic_bounds(problem)
    else:
        samples = list(trace.iterates) + [ref.x] if trace.iterates else [ref.x]
        pairs = trajectory_pairs(trace, ref) if trace.iterates else None
        bounds = estimate_bounds(problem, samples, pairs)
    print(f"bounds: mu={bounds.mu:.12g} L={bounds.L:.12g} M={bounds.M:.12g} ({bounds.provenance.value})")
    print(f"reference: f*={ref.f:.17g} |grad|={ref.grad_norm:.3e}")
    ran, failed = 0, False
    for name in args.checks:
        try:
            report = CHECKS[name](trace, bounds, ref)
        except CannotCheckError as exc:
            print(f"check: {name}\nskipped: {exc}\n")
            continue
        ran += 1
        failed |= not report.passed
        print(report.format() + "\n")
    if ran == 0:
        print("no check could be performed", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_CHECK if failed else EXIT_OK


def cmd_plot(args) -> int:
    files = [read_trace(p) for p in args.traces]
    for path in bench.emit_plots(files, args.kind, args.out):
        print(f"plot: {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="greedynewton", description="Greedy Newton solvers, benchmarks and convergence checks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic dataset in LIBSVM format")
    g.add_argument("--regime", required=True, choices=[r.value for r in Regime])
    g.add_argument("--seed", type=int, default=DEFAULT_SEED)
    g.add_argument("--m", type=int, default=500)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run one method and write a trace")
    s.add_argument("--method", required=True, choices=[m.value for m in Method])
    s.add_argument("--data", required=True, help="LIBSVM path or synthetic:<regime>[:seed=S]")
    s.add_argument("--reg", type=float, default=0.0)
    s.add_argument("--max-iter", type=int, default=25)
    s.add_argument("--grad-tol", type=float, default=1e-10)
    s.add_argument("--armijo-init", type=float, default=1.0)
    s.add_argument("--cubic-m", type=float, default=None, help="Hessian-Lipschitz constant for cubic-linesearch")
    s.add_argument("--trace-out", required=True)
    s.add_argument("--iterates-out", default=None, help="default: <trace-out>.iterates.csv")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("compare", help="method comparison over datasets and regularizations")
    c.add_argument("--config", default=None, help="key = value file (regimes, regs, methods, max_iter, ...)")
    c.add_argument("--out", default=None, help="output directory (overrides out_dir)")
    c.set_defaults(func=cmd_compare)

    w = sub.add_parser("sweep-armijo", help="Armijo initial-step sweep with a greedy Newton baseline")
    w.add_argument("--inits", type=_floats, default=[1.0, 2.0, 8.0])
    w.add_argument("--regimes", default=None, help="comma-separated regimes")
    w.add_argument("--regs", default=None, help="comma-separated regularization values")
    w.add_argument("--max-iter", type=int, default=None)
    w.add_argument("--config", default=None)
    w.add_argument("--out", default=None)
    w.set_defaults(func=cmd_sweep)

    k = sub.add_parser("check", help="verify convergence inequalities on a trace")
    k.add_argument("--trace", required=True)
    k.add_argument("--bounds", required=True, choices=["analytic", "estimate"])
    k.add_argument("--optimum", default=None, help="reference optimum file; computed when omitted")
    k.add_argument("--optimum-out", default=None)
    k.add_argument("--iterates", default=None, help="default: <trace>.iterates.csv")
    k.add_argument("--data", default=None, help="override the dataset recorded in the trace")
    k.add_argument("--reg", type=float, default=None, help="override the recorded regularization")
    k.add_argument("--checks", type=_strings, default=list(CHECKS))
    k.set_defaults(func=cmd_check)

    q = sub.add_parser("plot", help="SVG plots from trace files")
    q.add_argument("--kind", required=True, choices=bench.PLOT_KINDS)
    q.add_argument("--out", required=True)
    q.add_argument("traces", nargs="+")
    q.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "checks", None):
        unknown = set(args.checks) - set(CHECKS)
        if unknown:
            parser.error(f"unknown checks {sorted(unknown)}")
    try:
        return args.func(args)
    except (UsageError, TraceFormatError, FileNotFoundError, CannotCheckError, CertificationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, UnrecoverableHessianError, EstimationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
