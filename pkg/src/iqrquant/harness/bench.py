"""Timed comparison of FP32, I8 and TM-IQR feed-forward passes."""

from __future__ import annotations

import csv
import io
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, TextIO

from ..ffn import FfnMode, FfnWeights, ffn_forward
from ..quantizer import MAX_BITS, MIN_BITS
from ..tensor import DenseMatrix
from ..tmiqr import TUKEY_SCALE
from .metrics import metrics
from .synthetic import SyntheticSpec, gen_synthetic, hidden_outlier_gain, random_weights

MIN_REPS = 4
OUTLIER_SITES = ("hidden", "input")


@dataclass
class BenchConfig:
    seq_len: int = 512
    hidden: int = 1024
    modes: tuple[FfnMode, ...] = (FfnMode.FP32, FfnMode.I8, FfnMode.TMIQR)
    bits: int = 8
    seed: int = 0
    seeds: int = 5
    outlier_frac: float = 0.02
    outlier_mag: float = 50.0
    # "hidden": one x-magnitude channel per outlier token in the FF1 activations
    # "input": whole input rows scaled by the magnitude
    outlier_site: str = "hidden"
    iqr_scale: float = TUKEY_SCALE
    rounding: str = "nearest"
    clip_ff1: bool = False
    warmup: int = 3
    reps: int = 5
    threads: int = 1
    weights: FfnWeights | None = field(default=None, repr=False)

    def validate(self) -> None:
        if self.seq_len < 1 or self.hidden < 1:
            raise ValueError("--seq-len and --hidden must be positive")
        if not self.modes:
            raise ValueError("at least one mode is required")
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise ValueError(f"--bits must be in [{MIN_BITS}, {MAX_BITS}]")
        if self.seeds < 1:
            raise ValueError("--seeds must be >= 1")
        if not 0.0 <= self.outlier_frac <= 1.0:
            raise ValueError("--outlier-frac must be in [0, 1]")
        if not self.outlier_mag >= 1.0:
            raise ValueError("--outlier-mag must be >= 1")
        if self.outlier_site not in OUTLIER_SITES:
            raise ValueError(f"--outlier-site must be one of {OUTLIER_SITES}")
        if not self.iqr_scale >= 0:
            raise ValueError("--iqr-scale must be non-negative")
        if self.rounding not in ("nearest", "floor"):
            raise ValueError("--rounding must be 'nearest' or 'floor'")
        if self.warmup < 0:
            raise ValueError("--warmup must be >= 0")
        if self.reps < MIN_REPS:
            raise ValueError(f"--reps must be >= {MIN_REPS}")
        if self.threads < 1:
            raise ValueError("--threads must be >= 1")
        if self.weights is not None and self.weights.hidden != self.hidden:
            raise ValueError(f"weights have H={self.weights.hidden}, config asks for {self.hidden}")


@dataclass
class EvalReport:
    mode: str
    seed: int
    L: int
    H: int
    bits: int
    mse: float
    max_abs_err: float
    cosine_sim: float
    clip_t: float
    median_runtime_ns: int
    clip_runtime_ns: int
    tokens_per_sec: float

    @property
    def clip_overhead(self) -> float:
        if self.median_runtime_ns == 0:
            return 0.0
        return self.clip_runtime_ns / self.median_runtime_ns


@dataclass
class _Case:
    seed: int
    x: DenseMatrix
    weights: FfnWeights
    gain: DenseMatrix | None


def make_case(config: BenchConfig, seed: int) -> _Case:
    site_input = config.outlier_site == "input"
    x = gen_synthetic(
        SyntheticSpec(
            l=config.seq_len,
            h=config.hidden,
            seed=seed,
            outlier_token_fraction=config.outlier_frac if site_input else 0.0,
            outlier_magnitude=config.outlier_mag if site_input else 1.0,
        )
    )
    weights = config.weights if config.weights is not None else random_weights(config.hidden, seed)
    gain = None
    if not site_input and config.outlier_frac > 0 and config.outlier_mag != 1.0:
        gain = hidden_outlier_gain(
            config.seq_len, 4 * config.hidden, seed, config.outlier_frac, config.outlier_mag
        )
    return _Case(seed, x, weights, gain)


def _forward(case: _Case, mode: FfnMode, config: BenchConfig, trace=None):
    return ffn_forward(
        case.x,
        case.weights,
        mode,
        config.bits,
        rounding=config.rounding,
        iqr_scale=config.iqr_scale,
        clip_ff1=config.clip_ff1,
        hidden_gain=case.gain,
        trace=trace,
    )


def _accuracy(case: _Case, config: BenchConfig) -> dict:
    reference, _ = _forward(case, FfnMode.FP32, config)
    out = {}
    for mode in config.modes:
        y, thr = _forward(case, mode, config)
        out[mode] = (metrics(reference, y), float("nan") if thr is None else thr.t)
    return out


def _timing(case: _Case, mode: FfnMode, config: BenchConfig) -> tuple[list[int], list[int]]:
    for _ in range(config.warmup):
        _forward(case, mode, config)
    runtimes, clips = [], []
    for _ in range(config.reps):
        trace = {}
        t0 = time.perf_counter_ns()
        _forward(case, mode, config, trace)
        runtimes.append(time.perf_counter_ns() - t0)
        clips.append(trace["clip_ns"])
    return runtimes, clips


def evaluate_case(case: _Case, config: BenchConfig, accuracy: dict | None = None) -> list[EvalReport]:
    if accuracy is None:
        accuracy = _accuracy(case, config)
    reports = []
    for mode in config.modes:
        (m, clip_t) = accuracy[mode]
        runtimes, clips = _timing(case, mode, config)
        reports.append(
            EvalReport(
                mode=mode.value,
                seed=case.seed,
                L=case.x.rows,
                H=case.x.cols,
                bits=config.bits,
                mse=m.mse,
                max_abs_err=m.max_abs_err,
                cosine_sim=m.cosine_sim,
                clip_t=clip_t,
                median_runtime_ns=int(statistics.median(runtimes)),
                clip_runtime_ns=int(statistics.median(clips)),
                tokens_per_sec=case.x.rows * len(runtimes) / (sum(runtimes) / 1e9),
            )
        )
    return reports


def evaluate(x: DenseMatrix, weights: FfnWeights, config: BenchConfig) -> list[EvalReport]:
    """Evaluate a given input and weight set, e.g. loaded from files."""
    return evaluate_case(_Case(config.seed, x, weights, None), config)


def run_bench(config: BenchConfig) -> list[EvalReport]:
    """Evaluate every mode on ``config.seeds`` consecutive seeds starting at ``config.seed``.

    Accuracy passes may run on ``config.threads`` worker threads. Timed
    repetitions always run one at a time so they measure single-stream latency.
    """
    config.validate()
    seeds = [config.seed + i for i in range(config.seeds)]
    cases = [make_case(config, s) for s in seeds]
    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            accuracies = list(pool.map(lambda c: _accuracy(c, config), cases))
    else:
        accuracies = [_accuracy(c, config) for c in cases]

    reports = []
    for case, acc in zip(cases, accuracies):
        reports.extend(evaluate_case(case, config, acc))
    return reports


CSV_COLUMNS = [f.name for f in fields(EvalReport)]


def write_csv(reports: Iterable[EvalReport], out: TextIO | None = None) -> None:
    out = out or sys.stdout
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow({k: _fmt(v) for k, v in asdict(r).items()})


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def to_csv_string(reports: Iterable[EvalReport]) -> str:
    buf = io.StringIO()
    write_csv(reports, buf)
    return buf.getvalue()
