import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rgbdsal.cnn_pooling import (
    GradientStack,
    ScoreMapStack,
    gbp_class_map,
    gbp_saliency,
    gbp_upsample_max,
    load_gradient_stack,
    load_score_stack,
    nonobjectness_saliency,
    objectness_lambda,
    objectness_saliency,
    save_gradient_stack,
    save_score_stack,
)

TOL = 1e-9


def stack_1d(*rows, background=None, names=()):
    """Build a stack of 1 x N score grids from flat rows."""
    scores = np.stack([np.asarray(r, dtype=float)[None, :] for r in rows])
    bg = None if background is None else np.asarray(background, dtype=float)[None, :]
    return ScoreMapStack(scores=scores, background=bg, class_names=names)


class TestObjectnessLambda:
    def test_uniform_single_class_guard(self):
        lam = objectness_lambda(stack_1d([3.0, 3.0, 3.0]))
        np.testing.assert_allclose(lam, 0.0, atol=TOL)

    def test_two_identical_classes(self):
        lam = objectness_lambda(stack_1d([1.0, 0.0], [1.0, 0.0]))
        np.testing.assert_allclose(lam, [[1.0, 1.0]], atol=TOL)

    def test_three_value_population_std(self):
        # O = [0, 1, 2]: mu = 1, sigma = sqrt(2/3), z^2 = [1.5, 0, 1.5] -> F -> [1, 0, 1]
        lam = objectness_lambda(stack_1d([0.0, 1.0, 2.0]))
        np.testing.assert_allclose(lam, [[1.0, 0.0, 1.0]], atol=TOL)

    def test_mismatched_extents_rejected(self):
        with pytest.raises(ValueError):
            ScoreMapStack(scores=np.zeros((2, 3)))

    @given(
        arrays(np.float64, (2, 3, 4), elements=st.integers(-10, 10).map(float)),
        st.floats(0.1, 50.0),
        st.floats(-20.0, 20.0),
    )
    @settings(max_examples=50)
    def test_invariant_under_per_class_affine(self, scores, a, b):
        # integer-valued scores keep the sigma computation well conditioned,
        # so the exact z-score invariance survives the float arithmetic
        base = ScoreMapStack(scores=scores)
        shifted = ScoreMapStack(scores=a * scores + b)
        np.testing.assert_allclose(
            objectness_lambda(base), objectness_lambda(shifted), atol=1e-9
        )


class TestObjectnessSaliency:
    def test_two_identical_classes(self):
        s = objectness_saliency(stack_1d([1.0, 0.0], [1.0, 0.0]))
        np.testing.assert_allclose(s, [[1.0, 0.0]], atol=TOL)

    def test_constant_stack_propagates_degeneracy(self):
        s = objectness_saliency(stack_1d([2.0, 2.0], [2.0, 2.0]))
        np.testing.assert_allclose(s, 1.0, atol=TOL)
        s0 = objectness_saliency(stack_1d([0.0, 0.0]))
        np.testing.assert_allclose(s0, 0.0, atol=TOL)

    def test_exponent_semantics_with_zero_lambda(self):
        # F(mean) = [0, 0.5, 1], lambda = [1, 0, 1] -> [0, 0.5^0, 1] = [0, 1, 1]
        s = objectness_saliency(stack_1d([0.0, 1.0, 2.0]))
        np.testing.assert_allclose(s, [[0.0, 1.0, 1.0]], atol=TOL)

    def test_argmax_invariant_under_global_scaling(self):
        rng = np.random.default_rng(11)
        scores = rng.normal(size=(3, 6, 7))
        s1 = objectness_saliency(ScoreMapStack(scores=scores))
        s2 = objectness_saliency(ScoreMapStack(scores=4.2 * scores))
        assert np.argmax(s1) == np.argmax(s2)

    def test_output_in_unit_interval(self):
        rng = np.random.default_rng(5)
        s = objectness_saliency(ScoreMapStack(scores=rng.normal(size=(4, 5, 5))))
        assert s.min() >= 0.0 and s.max() <= 1.0


class TestNonObjectness:
    def test_hand_minmax(self):
        s = nonobjectness_saliency(stack_1d([0.0, 0.0], background=[0.2, 0.9]))
        np.testing.assert_allclose(s, [[1.0, 0.0]], atol=TOL)

    def test_constant_background_degenerate(self):
        s = nonobjectness_saliency(stack_1d([0.0, 0.0], background=[-0.5, -0.5]))
        np.testing.assert_allclose(s, 1.0, atol=TOL)  # -NO > 0
        s2 = nonobjectness_saliency(stack_1d([0.0, 0.0], background=[0.5, 0.5]))
        np.testing.assert_allclose(s2, 0.0, atol=TOL)

    def test_order_reversal(self):
        s = nonobjectness_saliency(stack_1d([0.0, 0.0], background=[0.0, 1.0]))
        np.testing.assert_allclose(s, [[1.0, 0.0]], atol=TOL)

    def test_missing_background_rejected(self):
        with pytest.raises(ValueError):
            nonobjectness_saliency(stack_1d([1.0, 2.0]))


def gradient_stack(tensors, layers=(3,), labels=("a", "b", "c"), frame=(4, 4)):
    return GradientStack(
        layers=layers, class_labels=labels, frame_shape=frame, tensors=tensors
    )


class TestGbpUpsampleMax:
    def test_channel_max_of_1x1(self):
        g = gradient_stack({(3, 0): np.array([[[0.1]], [[0.5]], [[0.3]]])})
        out = gbp_upsample_max(g, 3, 0, 4, 4)
        np.testing.assert_allclose(out, 0.5, atol=TOL)

    def test_identity_at_target_size(self):
        t = np.arange(16.0).reshape(1, 4, 4)
        g = gradient_stack({(3, 0): t})
        np.testing.assert_array_equal(gbp_upsample_max(g, 3, 0, 4, 4), t[0])

    def test_bilinear_center(self):
        t = np.array([[[0.0, 0.0], [0.0, 1.0]]])
        g = gradient_stack({(3, 0): t}, frame=(3, 3))
        out = gbp_upsample_max(g, 3, 0, 3, 3)
        assert out[1, 1] == pytest.approx(0.25, abs=TOL)

    def test_downsampling_rejected(self):
        g = gradient_stack({(3, 0): np.zeros((1, 4, 4))})
        with pytest.raises(ValueError):
            gbp_upsample_max(g, 3, 0, 2, 2)

    def test_commutes_with_channel_permutation(self):
        rng = np.random.default_rng(2)
        t = rng.uniform(size=(5, 3, 3))
        g1 = gradient_stack({(3, 0): t})
        g2 = gradient_stack({(3, 0): t[::-1]})
        np.testing.assert_array_equal(
            gbp_upsample_max(g1, 3, 0, 6, 6), gbp_upsample_max(g2, 3, 0, 6, 6)
        )


class TestGbpClassMap:
    def test_zero_gradients(self):
        g = gradient_stack({(3, 0): np.zeros((2, 4, 4))})
        np.testing.assert_array_equal(gbp_class_map(g, 0), np.zeros((4, 4)))

    def test_tanh_of_three(self):
        g = gradient_stack({(3, 0): np.ones((1, 4, 4))})
        out = gbp_class_map(g, 0, scale=3.0)
        np.testing.assert_allclose(out, math.tanh(3.0), atol=1e-12)
        assert out[0, 0] == pytest.approx(0.995054, abs=1e-6)

    def test_two_layer_average(self):
        g = gradient_stack(
            {(3, 0): np.ones((1, 4, 4)), (4, 0): np.zeros((1, 4, 4))}, layers=(3, 4)
        )
        out = gbp_class_map(g, 0, scale=3.0)
        np.testing.assert_allclose(out, math.tanh(3.0) / 2.0, atol=1e-12)
        assert out[0, 0] == pytest.approx(0.497527, abs=1e-6)

    def test_monotone_in_gradient_magnitude(self):
        rng = np.random.default_rng(8)
        m = rng.uniform(size=(2, 4, 4))
        bigger = m + rng.uniform(0.0, 0.5, size=m.shape)
        g1 = gradient_stack({(3, 0): m})
        g2 = gradient_stack({(3, 0): bigger})
        assert np.all(gbp_class_map(g2, 0) >= gbp_class_map(g1, 0))


class TestGbpSaliency:
    def _stack_with_maps(self, maps):
        tensors = {(3, c): m[None] for c, m in enumerate(maps)}
        return gradient_stack(tensors, labels=tuple(f"c{i}" for i in range(len(maps))), frame=maps[0].shape)

    def test_k_identical_class_maps(self):
        from rgbdsal.core import minmax_normalize

        m = np.random.default_rng(1).uniform(size=(4, 4))
        g = self._stack_with_maps([m, m, m])
        expected = minmax_normalize(gbp_class_map(g, 0))
        np.testing.assert_allclose(gbp_saliency(g, top_k=3), expected, atol=TOL)
        np.testing.assert_allclose(gbp_saliency(g, top_k=1), expected, atol=TOL)

    def test_k2_complementary_maps_degenerate_mean(self):
        # class maps [v, 0] and [0, v]: the mean is constant, so F gives ones
        v = np.arctanh(0.9) / 3.0
        g = self._stack_with_maps([np.array([[v, 0.0]]), np.array([[0.0, v]])])
        out = gbp_saliency(g, top_k=2)
        np.testing.assert_allclose(out, 1.0, atol=TOL)

    def test_zero_k_rejected(self):
        g = self._stack_with_maps([np.ones((2, 2))])
        with pytest.raises(ValueError):
            gbp_saliency(g, top_k=0)

    def test_k_beyond_stack_rejected(self):
        g = self._stack_with_maps([np.ones((2, 2))])
        with pytest.raises(ValueError):
            gbp_saliency(g, top_k=2)


class TestFileTransport:
    def test_score_stack_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        stack = ScoreMapStack(
            scores=rng.normal(size=(3, 5, 6)),
            background=rng.normal(size=(5, 6)),
            class_names=("cat", "dog", "mat"),
        )
        manifest = save_score_stack(stack, tmp_path, "frame0")
        back = load_score_stack(manifest)
        assert back.class_names == ("cat", "dog", "mat")
        np.testing.assert_allclose(back.scores, stack.scores, atol=1e-6)
        np.testing.assert_allclose(back.background, stack.background, atol=1e-6)

    def test_gradient_stack_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        stack = GradientStack(
            layers=(3, 4, 5),
            class_labels=("x", "y"),
            frame_shape=(8, 8),
            tensors={(l, c): np.abs(rng.normal(size=(2, 4, 4))) for l in (3, 4, 5) for c in (0, 1)},
        )
        manifest = save_gradient_stack(stack, tmp_path)
        back = load_gradient_stack(manifest)
        assert back.layers == (3, 4, 5)
        assert back.class_labels == ("x", "y")
        assert back.frame_shape == (8, 8)
        for key, t in stack.tensors.items():
            np.testing.assert_allclose(back.tensor(*key), t, atol=1e-6)
