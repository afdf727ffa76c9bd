"""Experiment harness: method comparisons, Armijo initialization sweeps, plots."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from itertools import groupby
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .data import (
    DEFAULT_SEED,
    REGIME_DIMENSION,
    Regime,
    SyntheticSpec,
    TraceFile,
    generate,
    load_libsvm,
    write_trace,
)
from .linesearch import ArmijoConfig
from .oracles import LogisticProblem
from .plots import Series, line_chart
from .solvers import Branch, IterateTrace, Method, NumericalFailure, SolverConfig, UnrecoverableHessianError, solve

log = logging.getLogger(__name__)

DEFAULT_METHODS = (Method.ARMIJO_NEWTON, Method.HYBRID, Method.GREEDY_NEWTON)
PLOT_KINDS = ("f", "step", "time")


@dataclass
class ExperimentConfig:
    regimes: list[Regime] = field(default_factory=lambda: list(Regime))
    datasets: list[str] = field(default_factory=list)
    regs: list[float] = field(default_factory=lambda: [0.0, 1.0])
    methods: list[Method] = field(default_factory=lambda: list(DEFAULT_METHODS))
    max_iter: int = 25
    grad_tol: float = 1e-10
    armijo_inits: list[float] = field(default_factory=lambda: [1.0, 2.0, 8.0])
    out_dir: Path = Path("results")
    seed: int = DEFAULT_SEED
    m: int = 500
    # desk-scale override for the n = 2000 regime
    convex_separable_n: int = REGIME_DIMENSION[Regime.CONVEX_SEPARABLE]

    def __post_init__(self):
        self.regimes = [Regime(r) for r in self.regimes]
        self.methods = [Method(m) for m in self.methods]
        self.out_dir = Path(self.out_dir)
        if not self.methods:
            raise ValueError("at least one method is required")
        if self.max_iter < 1:
            raise ValueError("iteration budget must be at least 1")


@dataclass
class Cell:
    dataset: str
    reg: float
    label: str
    trace_file: TraceFile | None
    path: Path | None
    trace: IterateTrace | None = None
    error: str | None = None


def iter_problems(cfg: ExperimentConfig) -> Iterator[tuple[str, float, LogisticProblem]]:
    for regime in cfg.regimes:
        n = cfg.convex_separable_n if regime is Regime.CONVEX_SEPARABLE else None
        spec = SyntheticSpec(regime, m=cfg.m, n=n, seed=cfg.seed)
        base = generate(spec)
        for reg in cfg.regs:
            yield spec.dataset_id, reg, base.with_reg(reg)
    for path in cfg.datasets:
        base = load_libsvm(path)
        for reg in cfg.regs:
            yield base.name, reg, base.with_reg(reg)


def slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.=-]+", "_", text).strip("_")


def _run_cell(problem, dataset, reg, label, scfg: SolverConfig, cfg: ExperimentConfig, echo: dict) -> Cell:
    path = cfg.out_dir / f"{slug(dataset)}_reg={reg:g}_{slug(label)}.trace.csv"
    config = {"reg": f"{reg:g}", "label": label, "max_iter": str(scfg.max_iter),
              "grad_tol": f"{scfg.grad_tol:g}", **echo}
    try:
        trace = solve(problem, scfg)
    except NumericalFailure as exc:
        trace = exc.trace
        error = str(exc)
    except UnrecoverableHessianError as exc:
        log.warning("%s reg=%g %s: %s", dataset, reg, label, exc)
        return Cell(dataset, reg, label, None, None, None, str(exc))
    else:
        error = None
    config["status"] = trace.status
    tf = TraceFile.from_trace(trace, dataset, cfg.seed, config)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    write_trace(path, tf)
    return Cell(dataset, reg, label, tf, path, trace, error)


def run_comparison(cfg: ExperimentConfig, echo: Callable[[str], None] = print) -> list[Cell]:
    """One trace per (dataset, reg, method); a summary table is printed."""
    cells = []
    for dataset, reg, problem in iter_problems(cfg):
        for method in cfg.methods:
            scfg = SolverConfig(method, max_iter=cfg.max_iter, grad_tol=cfg.grad_tol, keep_iterates=True)
            cells.append(_run_cell(problem, dataset, reg, method.value, scfg, cfg, {}))
    echo(summary_table(cells))
    return cells


def run_armijo_sweep(cfg: ExperimentConfig, echo: Callable[[str], None] = print) -> list[Cell]:
    """Armijo Newton for every initial step in the sweep plus a greedy Newton baseline."""
    cells = []
    for dataset, reg, problem in iter_problems(cfg):
        for init in cfg.armijo_inits:
            scfg = SolverConfig(
                Method.ARMIJO_NEWTON, max_iter=cfg.max_iter, grad_tol=cfg.grad_tol,
                armijo=ArmijoConfig(init_step=init),
            )
            label = f"armijo-newton@init={init:g}"
            cells.append(_run_cell(problem, dataset, reg, label, scfg, cfg, {"armijo.init_step": f"{init:g}"}))
        scfg = SolverConfig(Method.GREEDY_NEWTON, max_iter=cfg.max_iter, grad_tol=cfg.grad_tol)
        cells.append(_run_cell(problem, dataset, reg, Method.GREEDY_NEWTON.value, scfg, cfg, {}))
    echo(summary_table(cells))
    return cells


def iterations_to(f: np.ndarray, f_star: float, gap: float = 1e-8) -> int | None:
    hits = np.nonzero(f - f_star < gap)[0]
    return int(hits[0]) if hits.size else None


def summary_table(cells: list[Cell]) -> str:
    lines = [f"{'dataset':<52} {'reg':>5} {'method':<28} {'iters':>5} {'final f':>24} {'k(gap<1e-8)':>11}"]
    key = lambda c: (c.dataset, c.reg)
    for (dataset, reg), group in groupby(sorted(cells, key=key), key=key):
        group = list(group)
        finals = [c.trace_file.records[-1].f for c in group if c.trace_file and c.trace_file.records]
        f_star = min(finals) if finals else np.nan
        for c in group:
            if c.trace_file is None:
                lines.append(f"{dataset:<52} {reg:>5g} {c.label:<28} {'-':>5} {'FAILED: ' + str(c.error):>24}")
                continue
            f = np.array([r.f for r in c.trace_file.records])
            k = iterations_to(f, f_star)
            lines.append(
                f"{dataset:<52} {reg:>5g} {c.label:<28} {len(f) - 1:>5} {f[-1]:>24.16g} {'-' if k is None else k:>11}"
            )
    return "\n".join(lines)


def emit_plots(traces: list[TraceFile], kind: str, out_dir) -> list[Path]:
    """One SVG per (dataset, reg) group.

    ``f``: f - f* against iteration (log scale), with f* the best final value
    over the group; ``step``: step size against iteration, hybrid gradient
    steps circled; ``time``: f - f* against cumulative seconds.
    """
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {PLOT_KINDS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    usable = []
    for tf in traces:
        if not tf.records:
            log.warning("skipping empty trace for %s (%s)", tf.dataset, tf.method)
            continue
        usable.append(tf)
    key = lambda tf: (tf.dataset, tf.config.get("reg", ""))
    written = []
    for (dataset, reg), group in groupby(sorted(usable, key=key), key=key):
        group = list(group)
        f_star = min(min(r.f for r in tf.records) for tf in group) - 1e-16
        series = []
        for tf in group:
            label = tf.config.get("label", tf.method)
            recs = tf.records
            if kind == "step":
                x = [float(r.k) for r in recs[1:]]
                y = [r.step for r in recs[1:]]
                marked = [i for i, r in enumerate(recs[1:]) if r.branch is Branch.GRADIENT]
            else:
                x = [float(r.k) if kind == "f" else r.time for r in recs]
                y = [r.f - f_star for r in recs]
                marked = []
            series.append(Series(label, x, y, marked))
        title = f"{dataset} (reg={reg})"
        xlabel = "cumulative time (s)" if kind == "time" else "iteration"
        ylabel = "step size" if kind == "step" else "f - f*"
        svg = line_chart(series, title, xlabel, ylabel, logy=True)
        path = out_dir / f"{slug(dataset)}_reg={reg}_{kind}.svg"
        path.write_text(svg, encoding="utf-8")
        written.append(path)
    return written
