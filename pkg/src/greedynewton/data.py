"""Synthetic logistic-regression data, LIBSVM files and trace persistence."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .oracles import LogisticProblem
from .solvers import Branch, IterateTrace, Method, TraceRecord

TRACE_MAGIC = "# greedynewton-trace"
TRACE_VERSION = 1
TRACE_COLUMNS = ("k", "f", "grad_norm", "step_size", "probes", "jitter", "branch", "cum_time_s")


class Regime(str, enum.Enum):
    STRONGLY_CONVEX = "strongly-convex"
    REPEATED_FEATURES = "repeated-features"
    STRICTLY_CONVEX_SEPARABLE = "strictly-convex-separable"
    CONVEX_SEPARABLE = "convex-separable"


REGIME_DIMENSION = {
    Regime.STRONGLY_CONVEX: 20,
    Regime.REPEATED_FEATURES: 20,
    Regime.STRICTLY_CONVEX_SEPARABLE: 200,
    Regime.CONVEX_SEPARABLE: 2000,
}
REPEATED = 10
# seed whose separable regimes were certified linearly separable (LP feasibility)
DEFAULT_SEED = 0


class NormalStream:
    """Standard normal variates from PCG64 via the Box-Muller transform.

    Each pair of raw 64-bit words (w1, w2) gives u1 = ((w1 >> 11) + 1) / 2^53
    in (0, 1] and u2 = (w2 >> 11) / 2^53 in [0, 1), then the two variates
    sqrt(-2 ln u1) cos(2 pi u2) and sqrt(-2 ln u1) sin(2 pi u2), in that
    order. An odd request discards the final sine variate.
    """

    def __init__(self, seed: int):
        self.bitgen = np.random.PCG64(seed)

    def normal(self, size: int) -> np.ndarray:
        pairs = (size + 1) // 2
        raw = self.bitgen.random_raw(2 * pairs)
        u1 = ((raw[0::2] >> np.uint64(11)) + np.uint64(1)).astype(float) * 2.0**-53
        u2 = (raw[1::2] >> np.uint64(11)).astype(float) * 2.0**-53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * math.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:size]


@dataclass(frozen=True)
class SyntheticSpec:
    regime: Regime = Regime.STRONGLY_CONVEX
    m: int = 500
    n: int | None = None
    seed: int = DEFAULT_SEED
    noise: bool = True

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        if self.n is None:
            object.__setattr__(self, "n", REGIME_DIMENSION[self.regime])
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if self.regime is Regime.REPEATED_FEATURES and self.n < 2 * REPEATED:
            raise ValueError(f"repeated-features needs n >= {2 * REPEATED}")

    @property
    def dataset_id(self) -> str:
        return f"synthetic:{self.regime.value}:seed={self.seed}:m={self.m}:n={self.n}"


def generate(spec: SyntheticSpec, reg: float = 0.0) -> LogisticProblem:
    """Gaussian features, Gaussian true weights, labels sign(a_i^T w + noise).

    Draw order from one stream: A (row-major), the true weights, the noise.
    """
    rng = NormalStream(spec.seed)
    A = rng.normal(spec.m * spec.n).reshape(spec.m, spec.n)
    if spec.regime is Regime.REPEATED_FEATURES:
        A[:, -REPEATED:] = A[:, :REPEATED]
    w = rng.normal(spec.n)
    delta = rng.normal(spec.m)
    margin = A @ w + (delta if spec.noise else 0.0)
    b = np.where(margin >= 0, 1.0, -1.0)
    return LogisticProblem(A, b, reg, name=spec.dataset_id)


# ------------------------------------------------------------------- LIBSVM


class LibsvmParseError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno


class UnsupportedLabelError(ValueError):
    pass


def _map_labels(raw: np.ndarray) -> np.ndarray:
    seen = set(np.unique(raw).tolist())
    if seen <= {-1.0, 1.0}:
        return raw.astype(float)
    if seen <= {0.0, 1.0}:
        return np.where(raw == 1.0, 1.0, -1.0)
    if seen <= {1.0, 2.0}:
        return np.where(raw == 2.0, 1.0, -1.0)
    raise UnsupportedLabelError(f"labels {sorted(seen)} are not binary")


def load_libsvm(path, reg: float = 0.0, dense: bool = False) -> LogisticProblem:
    """Parse ``label idx:val ...`` lines (1-based ascending indices).

    Labels {0,1} and {1,2} are mapped onto {-1,+1}. The feature count is the
    largest index seen. Returns sparse CSR features unless ``dense``.
    """
    labels, rows, cols, vals = [], [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                labels.append(float(parts[0]))
            except ValueError:
                raise LibsvmParseError(path, lineno, f"bad label {parts[0]!r}") from None
            prev = 0
            row = len(labels) - 1
            for item in parts[1:]:
                idx, sep, val = item.partition(":")
                try:
                    j, v = int(idx), float(val)
                except ValueError:
                    raise LibsvmParseError(path, lineno, f"bad feature {item!r}") from None
                if not sep or j <= prev:
                    raise LibsvmParseError(path, lineno, f"bad or non-ascending index in {item!r}")
                prev = j
                rows.append(row)
                cols.append(j - 1)
                vals.append(v)
    n = max(cols) + 1 if cols else 0
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(labels), n), dtype=float)
    b = _map_labels(np.array(labels))
    name = f"libsvm:{path}"
    return LogisticProblem(A.toarray() if dense else A, b, reg, name=name)


def write_libsvm(path, A, b) -> None:
    A = sp.csr_matrix(A)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(A.shape[0]):
            start, end = A.indptr[i], A.indptr[i + 1]
            order = np.argsort(A.indices[start:end])
            feats = " ".join(
                f"{A.indices[start + t] + 1}:{A.data[start + t]:.17g}"
                for t in order
                if A.data[start + t] != 0
            )
            label = "+1" if b[i] > 0 else "-1"
            fh.write(f"{label} {feats}".rstrip() + "\n")


# ------------------------------------------------------------------- traces


class TraceFormatError(ValueError):
    pass


class IncompatibleTraceError(TraceFormatError):
    pass


@dataclass
class TraceFile:
    method: str
    dataset: str
    seed: int | None = None
    config: dict[str, str] = field(default_factory=dict)
    records: list[TraceRecord] = field(default_factory=list)

    @classmethod
    def from_trace(cls, trace: IterateTrace, dataset: str, seed=None, config=None) -> "TraceFile":
        return cls(Method(trace.method).value, dataset, seed, dict(config or {}), list(trace.records))

    def to_trace(self) -> IterateTrace:
        return IterateTrace(Method(self.method), list(self.records), status="loaded")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trace(path, tf: TraceFile) -> None:
    lines = [
        f"{TRACE_MAGIC} v{TRACE_VERSION}",
        f"# method: {tf.method}",
        f"# dataset: {tf.dataset}",
        f"# seed: {'' if tf.seed is None else tf.seed}",
    ]
    lines += [f"# config.{k}: {v}" for k, v in tf.config.items()]
    lines.append(f"# rows: {len(tf.records)}")
    lines.append(",".join(TRACE_COLUMNS))
    for r in tf.records:
        branch = Branch(r.branch).value
        lines.append(
            ",".join(
                [str(r.k), _fmt(r.f), _fmt(r.grad_norm), _fmt(r.step), str(r.probes),
                 _fmt(r.jitter), branch, _fmt(r.time)]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_trace(path) -> TraceFile:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if not lines or not lines[0].startswith(TRACE_MAGIC):
        raise TraceFormatError(f"{path}: missing trace header")
    version = lines[0][len(TRACE_MAGIC):].strip()
    if version != f"v{TRACE_VERSION}":
        raise IncompatibleTraceError(f"{path}: trace version {version!r}, expected v{TRACE_VERSION}")
    header: dict[str, str] = {}
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        key, _, value = lines[i][1:].partition(":")
        header[key.strip()] = value.strip()
        i += 1
    if i >= len(lines) or tuple(lines[i].split(",")) != TRACE_COLUMNS:
        raise TraceFormatError(f"{path}: missing column line")
    try:
        expected = int(header["rows"])
        method = header["method"]
        dataset = header["dataset"]
    except (KeyError, ValueError):
        raise TraceFormatError(f"{path}: incomplete header") from None
    if not text.endswith("\n"):
        raise TraceFormatError(f"{path}: truncated (no final newline)")
    records = []
    for lineno, line in enumerate(lines[i + 1:], start=i + 2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(TRACE_COLUMNS):
            raise TraceFormatError(f"{path}:{lineno}: expected {len(TRACE_COLUMNS)} fields")
        try:
            rec = TraceRecord(
                int(parts[0]), float(parts[1]), float(parts[2]), float(parts[3]), int(parts[4]),
                float(parts[5]), float(parts[7]), Branch(parts[6]),
            )
        except ValueError as exc:
            raise TraceFormatError(f"{path}:{lineno}: {exc}") from None
        if rec.k != len(records):
            raise TraceFormatError(f"{path}:{lineno}: row index {rec.k} out of sequence")
        records.append(rec)
    if len(records) != expected:
        raise TraceFormatError(f"{path}: truncated ({len(records)} of {expected} rows)")
    seed = header.get("seed", "")
    config = {k[len("config."):]: v for k, v in header.items() if k.startswith("config.")}
    return TraceFile(method, dataset, int(seed) if seed else None, config, records)


def write_iterates(path, iterates) -> None:
    """One iterate per line, comma separated, 17 significant digits."""
    X = np.atleast_2d(np.asarray(iterates, dtype=float))
    np.savetxt(path, X, fmt="%.17g", delimiter=",")


def read_iterates(path) -> list[np.ndarray]:
    X = np.loadtxt(path, delimiter=",", ndmin=2)
    return [row.copy() for row in X]


def problem_from_id(dataset: str, reg: float) -> LogisticProblem:
    """Rebuild a problem from a trace's dataset id."""
    kind, _, rest = dataset.partition(":")
    if kind == "libsvm":
        return load_libsvm(rest, reg)
    if kind == "synthetic":
        regime, *fields = rest.split(":")
        kw = dict(f.split("=", 1) for f in fields)
        spec = SyntheticSpec(Regime(regime), m=int(kw["m"]), n=int(kw["n"]), seed=int(kw["seed"]))
        return generate(spec, reg)
    raise ValueError(f"unknown dataset id {dataset!r}")
