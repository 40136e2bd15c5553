import csv
import io
import math

import pytest

from iqrquant.ffn import FfnMode
from iqrquant.harness.bench import CSV_COLUMNS, BenchConfig, evaluate, run_bench, to_csv_string
from iqrquant.harness.synthetic import SyntheticSpec, gen_synthetic, random_weights

TIMING_COLUMNS = {"median_runtime_ns", "clip_runtime_ns", "tokens_per_sec"}


def small(**kw):
    base = dict(seq_len=32, hidden=16, seeds=2, warmup=1, reps=4)
    base.update(kw)
    return BenchConfig(**base)


def _rows(reports):
    return list(csv.DictReader(io.StringIO(to_csv_string(reports))))


def test_fp32_only_compares_against_itself():
    (r,) = run_bench(small(modes=(FfnMode.FP32,), seeds=1))
    assert (r.mse, r.max_abs_err, r.cosine_sim) == (0.0, 0.0, 1.0)
    assert r.clip_runtime_ns == 0
    assert math.isnan(r.clip_t)


def test_one_row_per_mode_and_seed():
    reports = run_bench(small(seed=10, seeds=3))
    assert [(r.mode, r.seed) for r in reports] == [
        (m.value, s) for s in (10, 11, 12) for m in FfnMode
    ]
    for r in reports:
        assert r.L == 32 and r.H == 16
        assert -1 <= r.cosine_sim <= 1 and r.mse >= 0
        assert r.median_runtime_ns > 0 and r.tokens_per_sec > 0
        assert (r.clip_runtime_ns > 0) == (r.mode == "tmiqr")


def test_csv_deterministic_except_timing():
    a = _rows(run_bench(small()))
    b = _rows(run_bench(small()))
    assert list(a[0]) == CSV_COLUMNS
    strip = lambda rows: [{k: v for k, v in r.items() if k not in TIMING_COLUMNS} for r in rows]
    assert strip(a) == strip(b)


def test_threads_do_not_change_results():
    strip = lambda rows: [{k: v for k, v in r.items() if k not in TIMING_COLUMNS} for r in rows]
    assert strip(_rows(run_bench(small(threads=3, seeds=3)))) == strip(_rows(run_bench(small(seeds=3))))


def test_input_site_uses_row_contamination():
    hidden = run_bench(small(seeds=1, modes=(FfnMode.I8,), outlier_frac=0.1))
    rows = run_bench(small(seeds=1, modes=(FfnMode.I8,), outlier_frac=0.1, outlier_site="input"))
    assert hidden[0].mse != rows[0].mse


def test_evaluate_on_given_tensors():
    w = random_weights(16, seed=1)
    x = gen_synthetic(SyntheticSpec(10, 16, seed=1))
    reports = evaluate(x, w, small(seq_len=10, weights=w))
    assert [r.mode for r in reports] == ["fp32", "i8", "tmiqr"]
    assert reports[0].mse == 0.0


@pytest.mark.parametrize(
    "kw",
    [dict(reps=3), dict(modes=()), dict(bits=1), dict(outlier_frac=2.0), dict(outlier_mag=0.5),
     dict(outlier_site="ff2"), dict(rounding="up"), dict(threads=0), dict(seeds=0),
     dict(weights=random_weights(8))],
)
def test_invalid_config(kw):
    with pytest.raises(ValueError):
        small(**kw).validate()
