import math

import numpy as np
import pytest

from iqrquant.harness.metrics import metrics
from iqrquant.harness.synthetic import SyntheticSpec, gen_synthetic, hidden_outlier_gain, random_weights
from iqrquant.tensor import DenseMatrix, new_matrix
from iqrquant.tmiqr import token_maxes


def test_gen_synthetic_deterministic():
    spec = SyntheticSpec(64, 32, seed=9, outlier_token_fraction=0.1, outlier_magnitude=50)
    assert np.array_equal(gen_synthetic(spec).data, gen_synthetic(spec).data)


def test_gen_synthetic_seed_changes_stream():
    a = gen_synthetic(SyntheticSpec(8, 8, seed=1)).data
    b = gen_synthetic(SyntheticSpec(8, 8, seed=2)).data
    assert not np.array_equal(a, b)


def test_unit_magnitude_is_identity():
    clean = gen_synthetic(SyntheticSpec(40, 16, seed=3))
    full = gen_synthetic(SyntheticSpec(40, 16, seed=3, outlier_token_fraction=1.0, outlier_magnitude=1.0))
    assert np.array_equal(clean.data, full.data)


@pytest.mark.parametrize("fraction", [0.0, 0.02, 0.1, 0.24, 1.0])
def test_contaminated_row_count(fraction):
    l, mag = 200, 1000.0
    clean = gen_synthetic(SyntheticSpec(l, 16, seed=4))
    dirty = gen_synthetic(SyntheticSpec(l, 16, seed=4, outlier_token_fraction=fraction, outlier_magnitude=mag))
    scaled = ~np.all(clean.data == dirty.data, axis=1)
    assert scaled.sum() == math.floor(fraction * l)
    np.testing.assert_array_equal(dirty.data[scaled], clean.data[scaled] * np.float32(mag))


def test_zero_fraction_has_no_outlier_tokens():
    a = gen_synthetic(SyntheticSpec(512, 64, seed=0))
    m = token_maxes(a)
    assert m.max() < 8


def test_standard_normal_moments():
    a = gen_synthetic(SyntheticSpec(256, 256, seed=5)).data
    assert abs(a.mean()) < 0.01
    assert abs(a.std() - 1) < 0.01


@pytest.mark.parametrize(
    "kwargs",
    [dict(outlier_token_fraction=-0.1), dict(outlier_token_fraction=1.5), dict(outlier_magnitude=0.5),
     dict(base_distribution="uniform")],
)
def test_synthetic_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SyntheticSpec(4, 4, **kwargs)


def test_hidden_gain_one_channel_per_token():
    g = hidden_outlier_gain(100, 40, seed=1, fraction=0.05, magnitude=50).data
    hit = g != 1
    assert hit.sum() == 5
    assert hit.sum(axis=1).max() == 1
    assert set(np.unique(g)) == {1.0, 50.0}
    again = hidden_outlier_gain(100, 40, seed=1, fraction=0.05, magnitude=50).data
    assert np.array_equal(g, again)


def test_random_weights_deterministic_and_scaled():
    w = random_weights(64, seed=2)
    assert np.array_equal(w.w1.data, random_weights(64, seed=2).w1.data)
    assert w.w1.data.std() == pytest.approx(1 / 8, rel=0.05)
    assert w.w2.data.std() == pytest.approx(1 / 16, rel=0.05)


def test_metrics_identical():
    m = DenseMatrix(np.random.default_rng(0).standard_normal((6, 7)))
    assert metrics(m, m) == (0.0, 0.0, 1.0)
    z = DenseMatrix(np.zeros((2, 2)))
    assert metrics(z, z) == (0.0, 0.0, 1.0)


def test_metrics_orthogonal():
    assert metrics(new_matrix(1, 2, [1, 0]), new_matrix(1, 2, [0, 1])) == (1.0, 1.0, 0.0)


def test_metrics_antipodal_and_one_zero():
    m = DenseMatrix(np.random.default_rng(1).standard_normal((3, 3)))
    assert metrics(m, DenseMatrix(-m.data)).cosine_sim == pytest.approx(-1.0, abs=1e-12)
    assert metrics(m, DenseMatrix(np.zeros((3, 3)))).cosine_sim == 0.0


def test_metrics_hand_values():
    ref = new_matrix(1, 4, [1, 2, 3, 4])
    cand = new_matrix(1, 4, [1, 2, 3, 6])
    mse, mx, cos = metrics(ref, cand)
    assert mse == 1.0 and mx == 2.0
    assert cos == pytest.approx(38 / math.sqrt(30 * 50))


def test_metrics_shape_mismatch():
    with pytest.raises(ValueError):
        metrics(new_matrix(1, 2, [1, 2]), new_matrix(2, 1, [1, 2]))
