import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ecg_rr.dct_layer import (DctCache, DctLayer, cosine_basis, dct_forward, dct_layer_backward,
                              dct_layer_forward, idct, scale_coeffs, soft_threshold)

from gradcheck import dct_kink_margin, numeric_grad, rel_err

coeff = st.floats(-50, 50, allow_nan=False)


def direct_dct(x, m):
    n = len(x)
    return np.array([np.sqrt(2 / n) * sum(x[i] * np.cos(np.pi / (2 * n) * (2 * i + 1) * k)
                                          for i in range(n)) for k in range(m)])


def direct_idct(c, n):
    out = []
    for i in range(n):
        acc = 0.5 * c[0] + sum(c[k] * np.cos(np.pi / (2 * n) * (2 * i + 1) * k)
                               for k in range(1, len(c)))
        out.append(np.sqrt(2 / n) * acc)
    return np.array(out)


class TestTransforms:
    def test_basis_closed_form(self):
        b = cosine_basis(32, 8)
        for k in range(8):
            for i in range(32):
                assert abs(b[k, i] - np.cos(np.pi / 64 * (2 * i + 1) * k)) < 1e-12

    def test_constant_input(self):
        c = dct_forward(DctLayer(), np.ones(32))
        assert c[0] == pytest.approx(8.0, abs=1e-12)
        assert np.all(np.abs(c[1:]) < 1e-12)

    def test_zero_input(self):
        assert np.all(dct_forward(DctLayer(), np.zeros(32)) == 0.0)

    def test_matches_direct_summation(self, rng):
        x = rng.normal(size=32)
        np.testing.assert_allclose(dct_forward(DctLayer(), x), direct_dct(x, 8), atol=1e-12)

    def test_idct_dc(self):
        c = np.zeros(8)
        c[0] = 8.0
        np.testing.assert_allclose(idct(DctLayer(), c), np.ones(32), atol=1e-12)

    def test_idct_matches_direct_summation(self, rng):
        c = rng.normal(size=8)
        np.testing.assert_allclose(idct(DctLayer(), c), direct_idct(c, 32), atol=1e-12)

    def test_idct_zero(self):
        assert np.all(idct(DctLayer(), np.zeros(8)) == 0.0)

    def test_full_round_trip(self, rng):
        layer = DctLayer(32, 32)
        x = rng.normal(size=(20, 32))
        np.testing.assert_allclose(idct(layer, dct_forward(layer, x)), x, atol=1e-10)

    @pytest.mark.parametrize("fn,arg_len", [(dct_forward, 31), (scale_coeffs, 7),
                                            (soft_threshold, 9), (idct, 32)])
    def test_length_mismatch(self, fn, arg_len):
        with pytest.raises(ValueError):
            fn(DctLayer(), np.zeros(arg_len))

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            DctLayer(8, 9)
        with pytest.raises(ValueError):
            DctLayer(32, 8, scales=np.ones(7))


class TestScaleAndThreshold:
    def test_scale_examples(self):
        x = np.arange(1.0, 9.0)
        np.testing.assert_array_equal(scale_coeffs(DctLayer(), x), x)
        np.testing.assert_array_equal(scale_coeffs(DctLayer(scales=np.zeros(8)), x), np.zeros(8))
        np.testing.assert_array_equal(
            scale_coeffs(DctLayer(scales=np.full(8, 2.0)), np.ones(8)), np.full(8, 2.0))

    @pytest.mark.parametrize("value,expected", [(2.5, 1.5), (-2.5, -1.5), (0.5, 0.0), (0.0, 0.0)])
    def test_soft_threshold_examples(self, value, expected):
        layer = DctLayer(thresholds=np.ones(8))
        assert soft_threshold(layer, np.full(8, value))[0] == expected

    def test_negative_threshold_is_clamped(self):
        layer = DctLayer(thresholds=np.full(8, -1.0))
        x = np.linspace(-2, 2, 8)
        np.testing.assert_array_equal(soft_threshold(layer, x), x)

    @settings(max_examples=100)
    @given(x=arrays(np.float64, 8, elements=coeff), t=arrays(np.float64, 8, elements=coeff))
    def test_odd_symmetry(self, x, t):
        layer = DctLayer(thresholds=t)
        np.testing.assert_array_equal(soft_threshold(layer, -x), -soft_threshold(layer, x))

    @settings(max_examples=100)
    @given(x=arrays(np.float64, 8, elements=coeff), t=arrays(np.float64, 8, elements=coeff))
    def test_shrinkage(self, x, t):
        layer = DctLayer(thresholds=t)
        assert np.all(np.abs(soft_threshold(layer, x)) <= np.abs(x))


class TestComposite:
    def test_identity_when_nothing_truncated(self, rng):
        x = rng.normal(size=(10, 32))
        y, _ = dct_layer_forward(DctLayer(32, 32), x)
        np.testing.assert_allclose(y, x, atol=1e-10)

    def test_low_pass_projection(self, rng):
        x = rng.normal(size=32)
        y, _ = dct_layer_forward(DctLayer(), x)
        np.testing.assert_allclose(y, direct_idct(direct_dct(x, 8), 32), atol=1e-12)

    def test_huge_threshold_zeroes_output(self, rng):
        y, _ = dct_layer_forward(DctLayer(thresholds=np.full(8, 1e6)), rng.normal(size=32))
        assert np.all(y == 0.0)

    @settings(max_examples=100)
    @given(arrays(np.float64, 32, elements=st.floats(-100, 100)))
    def test_projection_idempotent(self, x):
        layer = DctLayer()
        once, _ = dct_layer_forward(layer, x)
        twice, _ = dct_layer_forward(layer, once)
        np.testing.assert_allclose(twice, once, atol=1e-10 * max(1.0, np.abs(x).max()))


class TestBackward:
    def _layer_and_input(self, seed):
        rng = np.random.default_rng(seed)
        while True:
            layer = DctLayer(32, 8, rng.uniform(0.5, 2, 8), rng.uniform(-0.3, 0.5, 8))
            x = rng.normal(size=(3, 32))
            if dct_kink_margin(layer, x) > 1e-3:
                return layer, x, rng.normal(size=(3, 32))

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_finite_differences(self, seed):
        layer, x, w = self._layer_and_input(seed)

        def loss():
            return float(np.sum(w * dct_layer_forward(layer, x)[0]))

        _, cache = dct_layer_forward(layer, x)
        g_in, g_v, g_t = dct_layer_backward(layer, cache, w)
        assert rel_err(g_in, numeric_grad(loss, x)) < 1e-5
        assert rel_err(g_v, numeric_grad(loss, layer.scales)) < 1e-5
        assert rel_err(g_t, numeric_grad(loss, layer.thresholds)) < 1e-5

    def test_negative_thresholds_get_no_gradient(self):
        layer, x, w = self._layer_and_input(0)
        layer.thresholds[:] = -0.5
        _, cache = dct_layer_forward(layer, x)
        assert np.all(dct_layer_backward(layer, cache, w)[2] == 0.0)

    def test_zero_threshold_can_grow(self, rng):
        # at T = 0 the clamp's right derivative applies, so training can move T
        layer = DctLayer()
        x = rng.normal(size=32)
        _, cache = dct_layer_forward(layer, x)
        _, _, g_t = dct_layer_backward(layer, cache, rng.normal(size=32))
        assert np.any(g_t != 0.0)

    def test_zero_upstream(self, rng):
        layer, x, _ = self._layer_and_input(1)
        _, cache = dct_layer_forward(layer, x)
        for g in dct_layer_backward(layer, cache, np.zeros_like(x)):
            assert np.all(g == 0.0)

    def test_adjoint_matches_dense_transpose(self, rng):
        layer = DctLayer()
        x = rng.normal(size=32) * 5
        _, cache = dct_layer_forward(layer, x)
        assert np.all(np.abs(cache.scaled) > 0)
        # dense matrix of the linear map x -> idct(dct(x)), built column by column
        dense = np.column_stack([idct(layer, dct_forward(layer, e)) for e in np.eye(32)])
        g = rng.normal(size=32)
        g_in, _, _ = dct_layer_backward(layer, cache, g)
        np.testing.assert_allclose(g_in, dense.T @ g, atol=1e-10)

    def test_rejects_foreign_cache(self, rng):
        layer = DctLayer()
        bad = DctCache(np.zeros(16), np.zeros(4), np.zeros(4), np.zeros(4))
        with pytest.raises(ValueError):
            dct_layer_backward(layer, bad, np.zeros(16))
        _, cache = dct_layer_forward(layer, rng.normal(size=32))
        with pytest.raises(ValueError):
            dct_layer_backward(layer, cache, np.zeros(31))
