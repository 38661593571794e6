"""Ridge solves, PRESS/GCV scoring, grid search, t-ratios, classification."""

from __future__ import annotations

import numpy as np
import pytest

from itcridge import (
    Criterion,
    RidgeFit,
    RidgeSearchConfig,
    StandardizationParams,
    default_k_grid,
    gcv,
    log_shift_transform,
    predict_class,
    press,
    ridge_fit,
    select_k,
    standardize,
    t_ratios,
)
from oracles import gcv_reference, press_reference, ridge_coefficients_reference


def random_instance(rng, m=None, n=None, scale=1.0):
    m = m or int(rng.integers(8, 40))
    n = n or int(rng.integers(1, min(m - 2, 12) + 1))
    x = scale * rng.normal(size=(m, n))
    y = rng.normal(size=m)
    return x, y


# ---------------------------------------------------------------------------
# the solve itself
# ---------------------------------------------------------------------------


def test_orthonormal_design_shrinks_coordinatewise():
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.normal(size=(10, 4)))
    y = rng.normal(size=10)
    xty = q.T @ y
    for k in (0.0, 0.5, 3.0):
        fit = ridge_fit(q, y, k)
        assert np.allclose(fit.coefficients, xty / (1.0 + k), atol=1e-12)


def test_identity_design_closed_form():
    y = np.array([2.0, -1.0, 0.5, 4.0])
    x = np.eye(4)
    for k in (0.0, 0.25, 2.0):
        fit = ridge_fit(x, y, k)
        assert np.allclose(fit.coefficients, y / (1.0 + k), atol=1e-12)
        assert np.allclose(fit.hat_diagonal, np.full(4, 1.0 / (1.0 + k)), atol=1e-12)


def test_matches_extended_precision_oracle():
    rng = np.random.default_rng(11)
    for trial in range(25):
        x, y = random_instance(rng)
        for k in (0.0, 1e-4, 0.1, 1.0, 100.0):
            got = ridge_fit(x, y, k).coefficients
            want = ridge_coefficients_reference(x, y, k)
            assert np.max(np.abs(got - want)) <= 1e-8 * max(1.0, np.max(np.abs(want)))


def test_k_zero_equals_least_squares():
    rng = np.random.default_rng(5)
    x, y = random_instance(rng, m=20, n=6)
    fit = ridge_fit(x, y, 0.0)
    want = np.linalg.lstsq(x, y, rcond=None)[0]
    assert np.allclose(fit.coefficients, want, atol=1e-10)


def test_singular_design_rejected_at_k_zero_only():
    rng = np.random.default_rng(3)
    col = rng.normal(size=(8, 1))
    x = np.hstack([col, col])
    y = rng.normal(size=8)
    for solver in ("auto", "cholesky", "spectral"):
        with pytest.raises(np.linalg.LinAlgError):
            ridge_fit(x, y, 0.0, solver=solver)
    fit = ridge_fit(x, y, 0.5)
    assert np.all(np.isfinite(fit.coefficients))


def test_solver_paths_agree():
    rng = np.random.default_rng(8)
    col = rng.normal(size=(15, 1))
    x = np.hstack([col, col + 1e-7 * rng.normal(size=(15, 1)), rng.normal(size=(15, 3))])
    y = rng.normal(size=15)
    a = ridge_fit(x, y, 1e-3, solver="cholesky")
    b = ridge_fit(x, y, 1e-3, solver="spectral")
    assert np.allclose(a.coefficients, b.coefficients, atol=1e-8)
    assert np.allclose(a.hat_diagonal, b.hat_diagonal, atol=1e-8)
    assert a.rss == pytest.approx(b.rss, rel=1e-8)


def test_auto_uses_spectral_path_when_k_is_tiny_against_scale():
    rng = np.random.default_rng(9)
    x = 1e3 * rng.normal(size=(20, 5))
    y = rng.normal(size=20)
    auto = ridge_fit(x, y, 1e-6, solver="auto")
    spectral = ridge_fit(x, y, 1e-6, solver="spectral")
    assert np.array_equal(auto.coefficients, spectral.coefficients)


def test_hat_diagonal_stays_in_unit_interval():
    rng = np.random.default_rng(21)
    for trial in range(10):
        x, y = random_instance(rng)
        fit = ridge_fit(x, y, float(rng.uniform(1e-6, 10.0)))
        assert np.all(fit.hat_diagonal >= 0.0)
        assert np.all(fit.hat_diagonal < 1.0 + 1e-12)
        assert fit.hat_trace <= x.shape[1] + 1e-9


def test_input_validation():
    with pytest.raises(ValueError, match="matching m"):
        ridge_fit(np.zeros((3, 2)), np.zeros(4), 1.0)
    with pytest.raises(ValueError, match="finite"):
        ridge_fit(np.array([[np.nan]]), np.zeros(1), 1.0)
    with pytest.raises(ValueError, match=">= 0"):
        ridge_fit(np.eye(2), np.zeros(2), -1.0)
    with pytest.raises(ValueError, match="unknown solver"):
        ridge_fit(np.eye(2), np.ones(2), 1.0, solver="qr")


def test_coefficient_norm_strictly_decreases_in_k():
    rng = np.random.default_rng(14)
    x, y = random_instance(rng, m=30, n=8)
    ks = np.logspace(-6, 6, 25)
    norms = [np.linalg.norm(ridge_fit(x, y, k).coefficients) for k in ks]
    assert np.all(np.diff(norms) < 0.0)
    assert norms[-1] < 1e-3 * norms[0]


# ---------------------------------------------------------------------------
# PRESS and GCV
# ---------------------------------------------------------------------------


def test_press_matches_literal_leave_one_out():
    rng = np.random.default_rng(2)
    x, y = random_instance(rng, m=12, n=4)
    for k in (0.1, 1.0, 10.0):
        got = press(x, y, k)
        want = press_reference(x, y, k)
        assert abs(got - want) <= 1e-8 * max(1.0, abs(want))


def test_press_on_empty_signal_is_response_energy():
    y = np.array([1.0, -2.0, 0.5, 3.0])
    x = np.zeros((4, 3))
    assert press(x, y, 1.0) == pytest.approx(float(y @ y), abs=1e-12)


def test_press_rejects_unit_leverage():
    x = np.eye(2)
    y = np.array([1.0, 2.0])
    with pytest.raises(ValueError, match="PRESS undefined"):
        press(x, y, 0.0)


def test_gcv_on_empty_signal_is_mean_square():
    y = np.array([1.0, -2.0, 0.5, 3.0])
    x = np.zeros((4, 3))
    assert gcv(x, y, 1.0) == pytest.approx(float(y @ y) / 4.0, abs=1e-12)


def test_gcv_matches_dense_hat_oracle():
    rng = np.random.default_rng(17)
    for trial in range(8):
        x, y = random_instance(rng)
        for k in (0.05, 1.0, 50.0):
            got = gcv(x, y, k)
            want = gcv_reference(x, y, k)
            assert abs(got - want) <= 1e-8 * max(1.0, abs(want))


def test_gcv_rejects_saturated_hat():
    x = np.eye(3)
    y = np.array([1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="GCV undefined"):
        gcv(x, y, 0.0)


# ---------------------------------------------------------------------------
# grid search
# ---------------------------------------------------------------------------


def test_default_grid_shape():
    grid = default_k_grid()
    assert grid.shape == (181,)
    assert grid[0] == pytest.approx(1e-6)
    assert grid[-1] == pytest.approx(1e3)
    assert np.all(np.diff(grid) > 0.0)


def test_search_config_domain_checks():
    with pytest.raises(ValueError, match="strictly increasing"):
        RidgeSearchConfig(grid=np.array([1.0, 1.0, 2.0]))
    with pytest.raises(ValueError, match=">= 0"):
        RidgeSearchConfig(grid=np.array([-1.0, 1.0]))
    with pytest.raises(ValueError, match="non-empty"):
        RidgeSearchConfig(grid=np.array([]))


def test_curve_matches_pointwise_scorers():
    rng = np.random.default_rng(23)
    x, y = random_instance(rng, m=16, n=5)
    grid = np.logspace(-4, 2, 13)
    for criterion, scorer in ((Criterion.PRESS, press), (Criterion.GCV, gcv)):
        best, curve = select_k(x, y, RidgeSearchConfig(grid=grid, criterion=criterion))
        for i, k in enumerate(grid):
            assert curve[i] == pytest.approx(scorer(x, y, k), rel=1e-10)
        assert best == grid[int(np.nanargmin(curve))]


def test_noiseless_response_selects_smallest_k():
    rng = np.random.default_rng(31)
    x = rng.normal(size=(25, 4))
    y = x @ np.array([1.0, -2.0, 0.5, 3.0])
    cfg = RidgeSearchConfig(grid=np.logspace(-6, 3, 19))
    best, curve = select_k(x, y, cfg)
    assert best == cfg.grid[0]
    assert np.all(np.diff(curve) > 0.0)


def test_pure_noise_prefers_heavy_shrinkage():
    hits = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(15, 10))
        y = rng.normal(size=15)
        best, _ = select_k(x, y, RidgeSearchConfig())
        if best >= 1.0:
            hits += 1
    assert hits >= 6


def test_flat_curve_ties_to_smallest_k():
    x = np.zeros((5, 2))
    y = np.array([1.0, 2.0, -1.0, 0.5, 0.0])
    best, curve = select_k(x, y, RidgeSearchConfig(grid=np.array([0.5, 1.0, 2.0])))
    assert best == 0.5
    assert np.allclose(curve, float(y @ y))


def test_undefined_grid_points_become_nan():
    rng = np.random.default_rng(3)
    col = rng.normal(size=(8, 1))
    x = np.hstack([col, col])
    y = rng.normal(size=8)
    best, curve = select_k(x, y, RidgeSearchConfig(grid=np.array([0.0, 0.1, 1.0])))
    assert np.isnan(curve[0])
    assert best in (0.1, 1.0)


def test_entirely_undefined_grid_raises():
    rng = np.random.default_rng(3)
    col = rng.normal(size=(8, 1))
    x = np.hstack([col, col])
    y = rng.normal(size=8)
    with pytest.raises(ValueError, match="entire grid"):
        select_k(x, y, RidgeSearchConfig(grid=np.array([0.0])))


# ---------------------------------------------------------------------------
# t-ratios
# ---------------------------------------------------------------------------


def test_t_ratios_match_ols_at_k_zero():
    import statsmodels.api as sm

    rng = np.random.default_rng(41)
    x = rng.normal(size=(30, 5))
    y = x @ rng.normal(size=5) + rng.normal(size=30)
    fit = ridge_fit(x, y, 0.0)
    got = t_ratios(x, y, fit)
    want = sm.OLS(y, x).fit().tvalues
    assert np.max(np.abs(got - want)) <= 1e-8


def test_zero_coefficient_gets_zero_t_ratio():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(12, 3))
    x[:, 1] = 0.0
    y = rng.normal(size=12)
    fit = ridge_fit(x, y, 0.5)
    assert fit.coefficients[1] == 0.0
    assert fit.t_ratios[1] == 0.0
    assert np.all(np.isfinite(fit.t_ratios))


def test_t_ratios_reject_zero_degrees_of_freedom():
    x = np.eye(4)
    y = np.array([1.0, 2.0, 3.0, 4.0])
    fit = ridge_fit(x, y, 0.0)
    with pytest.raises(ValueError, match="undefined"):
        t_ratios(x, y, fit)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def dummy_fit(coefficients, params):
    b = np.asarray(coefficients, dtype=float)
    return RidgeFit(
        coefficients=b,
        ridge_constant=1.0,
        hat_diagonal=np.zeros(2),
        hat_trace=0.0,
        rss=0.0,
        sigma2_hat=0.0,
        t_ratios=np.zeros_like(b),
        standardization=params,
    )


def test_cutoff_comparison_is_strict():
    params = StandardizationParams(
        means=np.zeros(1), sds=np.ones(1), response_mean=0.5, response_sd=1.0
    )
    fit = dummy_fit([2.0], params)
    # x_raw = 0 passes through the shifted log to 0, so the score is exactly
    # the response mean
    label, score = predict_class(fit, np.array([0.0]), cutoff=0.5)
    assert score == 0.5
    assert label == 0
    above = StandardizationParams(
        means=np.zeros(1), sds=np.ones(1), response_mean=0.5 + 1e-9, response_sd=1.0
    )
    label, _ = predict_class(dummy_fit([2.0], above), np.array([0.0]), cutoff=0.5)
    assert label == 1


def test_predicted_score_reconstructs_response_scale():
    rng = np.random.default_rng(19)
    raw = rng.uniform(0.5, 9.0, size=(14, 4))
    y = np.array([1, 0] * 7)
    logged = log_shift_transform(raw)
    xs, ys, params = standardize(logged, y)
    fit = ridge_fit(xs, ys, 0.7, standardization=params)
    row = raw[3]
    label, score = predict_class(fit, row)
    xs_row = (log_shift_transform(row) - params.means) / params.sds
    want = params.response_mean + params.response_sd * float(fit.coefficients @ xs_row)
    assert score == pytest.approx(want, abs=1e-12)
    assert label == (1 if score > 0.5 else 0)


def test_predict_class_validation():
    params = StandardizationParams(
        means=np.zeros(2), sds=np.ones(2), response_mean=0.5, response_sd=1.0
    )
    fit = dummy_fit([1.0, -1.0], params)
    with pytest.raises(ValueError, match="cutoff"):
        predict_class(fit, np.zeros(2), cutoff=1.0)
    with pytest.raises(ValueError, match="length"):
        predict_class(fit, np.zeros(3))
    bare = dummy_fit([1.0, -1.0], None)
    with pytest.raises(ValueError, match="standardization"):
        predict_class(bare, np.zeros(2))
