import math

import numpy as np
import pytest

from causalstream.analysis import (
    SIGNIFICANCE_LEVELS,
    acf,
    chi_square_upper_tail,
    ljung_box,
    median_bandwidth,
    mmd2_rbf,
    mmd_heatmap,
)
from causalstream.temporal import TemporalParams, simulate_ar_noise

# 10-point hand oracle, worked out from the Q formula with plain arithmetic
# before the implementation existed
_HAND_SERIES = [0.5, -1.0, 2.0, 0.25, -0.75, 1.5, -2.0, 0.0, 1.0, -0.5]
_HAND_RHO = (-0.52146892655367227, -0.07495291902071563, 0.44783427495291894)
_HAND_Q = 7.1480952532949074
_HAND_P = 0.0673243170664


def test_chi_square_upper_tail_oracles():
    assert chi_square_upper_tail(0.0, 5) == pytest.approx(1.0)
    # sf(2 ln 2, df=2) = exp(-ln 2) = 1/2 exactly
    assert chi_square_upper_tail(2.0 * math.log(2.0), 2) == pytest.approx(0.5)
    # textbook 5% critical value for df=20
    assert chi_square_upper_tail(31.410, 20) == pytest.approx(0.0500052392, abs=5e-4)
    xs = [0.5, 2.0, 10.0, 30.0]
    vals = [chi_square_upper_tail(x, 6) for x in xs]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_acf_hand_oracles():
    rho = acf(np.asarray(_HAND_SERIES), 3)
    assert rho[0] == pytest.approx(1.0)
    for k in range(1, 4):
        assert rho[k] == pytest.approx(_HAND_RHO[k - 1], abs=1e-12)
    # alternating signs: lag-1 is -(n-1)/n, lag-2 is +(n-2)/n
    alt = np.tile([1.0, -1.0], 5)
    r = acf(alt, 2)
    assert r[1] == pytest.approx(-0.9, abs=1e-12)
    assert r[2] == pytest.approx(0.8, abs=1e-12)


def test_acf_input_guards():
    with pytest.raises(ValueError):
        acf(np.ones(50), 5)  # constant series has no correlation
    with pytest.raises(ValueError):
        acf(np.arange(4, dtype=float), 5)  # too short for the lag
    with pytest.raises(ValueError):
        acf(np.array([1.0, np.nan, 2.0, 0.5, 1.5, 0.2]), 2)


def test_ljung_box_hand_oracle():
    res = ljung_box(np.asarray(_HAND_SERIES), 3)
    assert res.Q == pytest.approx(_HAND_Q, abs=1e-10)
    assert res.p_value == pytest.approx(_HAND_P, abs=1e-9)
    assert res.h == 3
    assert set(res.reject_at) == set(SIGNIFICANCE_LEVELS)
    assert not res.reject_at[0.05]


def test_ljung_box_needs_enough_points():
    with pytest.raises(ValueError):
        ljung_box(np.arange(20, dtype=float), 20)


def test_ljung_box_calibration_on_white_noise():
    """Rejection rate at 5% stays near nominal on iid gaussian noise."""
    rng = np.random.default_rng(0)
    rejections = sum(
        ljung_box(rng.normal(size=500), 20).reject_at[0.05] for _ in range(200)
    )
    assert 1 <= rejections <= 21  # binomial(200, 0.05) within ~3 sigma


def test_ljung_box_flags_ar_memory():
    params = TemporalParams(alpha=1.0, rho=0.6, sigma=1.0)
    x = simulate_ar_noise(2000, params, np.random.default_rng(3))
    assert ljung_box(x, 20).reject_at[0.001]


def test_acf_pattern_matches_temporal_modes():
    flat = simulate_ar_noise(
        20_000, TemporalParams(rho=0.0, sigma=1.0), np.random.default_rng(1)
    )
    assert np.all(np.abs(acf(flat, 5).correlations[1:]) < 0.05)
    decaying = simulate_ar_noise(
        20_000, TemporalParams(rho=0.8, sigma=1.0), np.random.default_rng(2)
    )
    r = acf(decaying, 5)
    assert all(r[k] > r[k + 1] > 0 for k in range(1, 5))


def test_mmd_singleton_oracle():
    # one pair at distance sqrt(2) with unit bandwidth: 2(1 - e^-1)
    a = np.array([[0.0]])
    b = np.array([[math.sqrt(2.0)]])
    v = mmd2_rbf(a, b, 1.0)
    assert v == pytest.approx(2.0 * (1.0 - math.exp(-1.0)), abs=1e-12)
    assert v == pytest.approx(1.2642411176571154, abs=1e-12)


def test_mmd_identical_batches_is_zero():
    X = np.random.default_rng(4).normal(size=(40, 3))
    assert mmd2_rbf(X, X, 1.3) == 0.0


def test_mmd_guards():
    X = np.ones((5, 2))
    with pytest.raises(ValueError):
        mmd2_rbf(X, np.ones((5, 3)), 1.0)
    with pytest.raises(ValueError):
        mmd2_rbf(X, X, 0.0)


def test_mmd_separates_shifted_batches():
    rng = np.random.default_rng(5)
    A = rng.normal(0.0, 1.0, size=(300, 2))
    B = rng.normal(3.0, 1.0, size=(300, 2))
    C = rng.normal(0.0, 1.0, size=(300, 2))
    bw = median_bandwidth(np.vstack([A, B]))
    assert mmd2_rbf(A, B, bw) > 10 * max(mmd2_rbf(A, C, bw), 1e-6)


def test_median_bandwidth_two_points():
    X = np.array([[0.0, 0.0], [3.0, 4.0]])
    assert median_bandwidth(X) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        median_bandwidth(np.array([[1.0, 1.0]]))


def test_mmd_heatmap_shape_and_symmetry():
    rng = np.random.default_rng(6)
    X = np.vstack([
        rng.normal(0.0, 1.0, size=(400, 3)),
        rng.normal(4.0, 1.0, size=(400, 3)),
    ])
    hm = mmd_heatmap(X, batch_size=200)
    v = hm.values
    assert v.shape == (4, 4)
    assert np.array_equal(v, v.T)
    assert np.all(np.diag(v) == 0.0)
    assert np.all(v >= 0.0)
    # batches from different halves are far apart, same-half pairs are not
    assert v[0, 2] > 5 * v[0, 1]
    assert v[0, 3] > 5 * v[2, 3]
    assert hm.batch_size == 200


def test_mmd_heatmap_joint_option_sees_label_flips():
    rng = np.random.default_rng(7)
    X = rng.normal(0.0, 1.0, size=(600, 2))
    y = (X[:, 0] > 0).astype(float)
    y2 = y.copy()
    y2[300:] = 1.0 - y2[300:]  # relabel the second half
    plain = mmd_heatmap(X, batch_size=300, y=y2, include_label=False)
    joint = mmd_heatmap(X, batch_size=300, y=y2, include_label=True)
    assert joint.values[0, 1] > 5 * plain.values[0, 1]


def test_mmd_heatmap_guards():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(100, 2))
    with pytest.raises(ValueError):
        mmd_heatmap(X, batch_size=100)  # needs at least two complete batches
    X[3, 0] = np.nan
    with pytest.raises(ValueError):
        mmd_heatmap(X, batch_size=50)


def test_mmd_heatmap_drops_trailing_partial_batch():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(250, 2))
    hm = mmd_heatmap(X, batch_size=100)
    assert hm.values.shape == (2, 2)
