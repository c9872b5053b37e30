import numpy as np
import pytest

from csp import (
    CspModel,
    class_covariance,
    component_count,
    fit_band,
    fit_csp,
    fit_csp_ovr,
    top_filter_variance_ratio,
    trial_covariances,
    transform,
    transform_batch,
)
from dsp import get_band
from errors import ConfigError, DimensionError, InsufficientDataError

ALPHA = get_band('alpha')


def orthogonal_classes(rng, n=40, windows=60):
    """Clase 0 con la varianza en el canal 0, clase 1 en el canal 1 (1 frente a 0.01)."""
    a = rng.standard_normal((n, 2, windows)) * np.array([1.0, 0.1])[:, None]
    b = rng.standard_normal((n, 2, windows)) * np.array([0.1, 1.0])[:, None]
    return np.concatenate([a, b]), np.repeat([0, 1], n)


def random_classes(rng, n_classes=2, n=20, channels=4, windows=40):
    mixing = rng.standard_normal((n_classes, channels, channels))
    series = np.concatenate([
        np.einsum('cd,ndw->ncw', mixing[k], rng.standard_normal((n, channels, windows)))
        for k in range(n_classes)
    ])
    return series, np.repeat(np.arange(n_classes), n)


class TestCovariance:

    def test_single_channel_variance(self, rng):
        series = np.zeros((5, 3, 30))
        series[:, 0, :] = rng.standard_normal((5, 30))
        cov = class_covariance(series, np.zeros(5, dtype=int), 0, ridge=0.0)
        assert np.allclose(cov, np.diag([1.0, 0.0, 0.0]), atol=1e-12)

    def test_duplicates_do_not_change_average(self, rng):
        trial = rng.standard_normal((1, 3, 30))
        once = class_covariance(trial, [0], 0)
        thrice = class_covariance(np.repeat(trial, 3, axis=0), [0, 0, 0], 0)
        assert np.allclose(once, thrice, atol=1e-15)

    def test_white_noise_tends_to_scaled_identity(self, rng):
        series = rng.standard_normal((500, 3, 200))
        cov = class_covariance(series, np.zeros(500, dtype=int), 0)
        assert np.allclose(cov, np.eye(3) / 3.0, atol=0.02)

    def test_unit_trace_and_symmetry(self, rng):
        covs = trial_covariances(rng.standard_normal((6, 4, 25)))
        assert np.allclose(np.trace(covs, axis1=1, axis2=2), 1.0)
        assert np.allclose(covs, covs.transpose(0, 2, 1))

    def test_ridge_added(self, rng):
        series = rng.standard_normal((4, 2, 20))
        plain = class_covariance(series, [0] * 4, 0, ridge=0.0)
        ridged = class_covariance(series, [0] * 4, 0)
        assert np.allclose(ridged - plain, 1e-8 * np.eye(2), atol=1e-18)

    def test_missing_class(self, rng):
        with pytest.raises(InsufficientDataError):
            class_covariance(rng.standard_normal((4, 2, 20)), [0, 0, 0, 0], 1)


class TestFitCsp:

    def test_whitening_identity(self, rng):
        for _ in range(5):
            series, labels = random_classes(rng)
            model = fit_csp(series, labels, ALPHA, 4)
            composite = class_covariance(series, labels, 0) + class_covariance(series, labels, 1)
            W = model.filters
            assert np.allclose(W @ composite @ W.T, np.eye(4), atol=1e-6)

    def test_eigenvalue_complementarity(self, rng):
        series, labels = random_classes(rng)
        model = fit_csp(series, labels, ALPHA, 4)
        sa = class_covariance(series, labels, 0)
        sb = class_covariance(series, labels, 1)
        for w, lam in zip(model.filters, model.eigenvalues):
            assert w @ sa @ w == pytest.approx(lam, abs=1e-6)
            assert w @ sa @ w + w @ sb @ w == pytest.approx(1.0, abs=1e-6)

    def test_orthogonal_variance_ratio(self, rng):
        series, labels = orthogonal_classes(rng)
        model = fit_csp(series, labels, ALPHA, 2)
        ratio = top_filter_variance_ratio(model, series[labels == 0], series[labels == 1])
        assert ratio >= 10.0

    def test_alternating_selection(self, rng):
        series, labels = random_classes(rng, channels=6)
        model = fit_csp(series, labels, ALPHA, 5)
        ev = model.eigenvalues
        assert ev[0] > ev[2] > ev[4]
        assert ev[1] < ev[3]
        assert ev[4] > ev[3]

    def test_equal_covariances(self, rng):
        trials = rng.standard_normal((10, 3, 40))
        series = np.concatenate([trials, trials])
        model = fit_csp(series, np.repeat([0, 1], 10), ALPHA, 3)
        assert np.allclose(model.eigenvalues, 0.5, atol=1e-9)

    def test_components_capped_at_channels(self, rng):
        series, labels = random_classes(rng, channels=4)
        model = fit_csp(series, labels, get_band('all'), 25)
        assert model.n_components == 4
        assert model.filters.shape == (4, 4)

    def test_sign_convention(self, rng):
        series, labels = random_classes(rng)
        for row in fit_csp(series, labels, ALPHA, 4).filters:
            assert row[np.flatnonzero(np.abs(row) > 1e-12)[0]] > 0

    def test_deterministic(self, rng):
        series, labels = random_classes(rng)
        first = fit_csp(series, labels, ALPHA, 4)
        second = fit_csp(series.copy(), labels.copy(), ALPHA, 4)
        assert np.array_equal(first.filters, second.filters)

    def test_two_classes_only(self, rng):
        series, labels = random_classes(rng, n_classes=3)
        with pytest.raises(ConfigError):
            fit_csp(series, labels, ALPHA, 2)

    def test_single_class(self, rng):
        with pytest.raises(InsufficientDataError):
            fit_csp(rng.standard_normal((6, 2, 20)), [1] * 6, ALPHA, 2)


class TestOneVsRest:

    def test_two_classes_single_model(self, rng):
        series, labels = random_classes(rng)
        models = fit_csp_ovr(series, labels, ALPHA, 4)
        assert len(models) == 1
        assert np.array_equal(models[0].filters, fit_csp(series, labels, ALPHA, 4).filters)

    def test_four_classes(self, rng):
        series, labels = random_classes(rng, n_classes=4)
        models = fit_csp_ovr(series, labels, ALPHA, 2)
        assert [m.class_pair for m in models] == [(0, None), (1, None), (2, None), (3, None)]
        assert transform_batch(models, series).shape == (len(labels), 8)

    def test_absent_class(self, rng):
        series, labels = random_classes(rng)
        with pytest.raises(InsufficientDataError):
            fit_csp_ovr(series, labels, ALPHA, 2, n_classes=3)

    def test_fit_band_uses_configured_count(self, rng):
        series, labels = random_classes(rng, channels=4)
        assert fit_band(series, labels, get_band('delta'))[0].n_components == 3
        assert fit_band(series, labels, ALPHA)[0].n_components == 4

    def test_component_count(self):
        assert component_count('beta', 4) == 4
        assert component_count('smr', 4) == 3
        assert component_count('beta', 22) == 15
        assert component_count('beta', 22, {'beta': 2}) == 2


class TestTransform:

    def test_finite_on_training_data(self, rng):
        series, labels = orthogonal_classes(rng)
        model = fit_csp(series, labels, ALPHA, 2)
        assert np.all(np.isfinite(transform_batch(model, series)))

    def test_scale_invariance(self, rng):
        series, labels = random_classes(rng)
        model = fit_csp(series, labels, ALPHA, 4)
        for c in (1e-3, 0.5, 7.0, 1e4):
            assert np.allclose(transform_batch(model, c * series), transform_batch(model, series), atol=1e-9)

    def test_single_trial_matches_batch(self, rng):
        series, labels = random_classes(rng)
        model = fit_csp(series, labels, ALPHA, 4)
        feature = transform(model, series[3], trial_id=3)
        assert feature.trial_id == 3
        assert feature.band == ALPHA
        assert np.array_equal(feature.values, transform_batch(model, series[3:4])[0])

    def test_zero_variance_floor(self):
        model = CspModel(ALPHA, np.eye(2), 2, (0, 1), np.array([0.5, 0.5]))
        series = np.zeros((1, 2, 10))
        series[0, 0] = np.arange(10.0)
        values = transform_batch(model, series)[0]
        var = np.var(np.arange(10.0))
        assert np.all(np.isfinite(values))
        assert values[1] == pytest.approx(np.log(1e-12 / (var + 1e-12)), abs=1e-9)

    def test_channel_mismatch(self, rng):
        series, labels = random_classes(rng, channels=4)
        model = fit_csp(series, labels, ALPHA, 2)
        with pytest.raises(DimensionError):
            transform_batch(model, rng.standard_normal((2, 3, 20)))

    def test_serialised_model_gives_same_features(self, rng):
        series, labels = random_classes(rng)
        model = fit_csp(series, labels, ALPHA, 3)
        restored = CspModel.from_dict(model.to_dict())
        assert np.array_equal(transform_batch(restored, series), transform_batch(model, series))
