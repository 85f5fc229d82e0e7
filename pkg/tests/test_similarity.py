#!/usr/bin/env python3
"""Tests for projection, affinity, row softmax and transition matrices"""

import math
import unittest

import numpy as np

from diffusion_seg.core import EngineConfig, NodeGrid
from diffusion_seg.errors import BoundsError, ShapeMismatchError
from diffusion_seg.features import FeatureMap, FeaturePyramid, extract_pyramid
from diffusion_seg.similarity import (
    AffinityMatrix,
    Projection,
    TransitionMatrix,
    affinity,
    build_transitions,
    default_projections,
    pool,
    project,
    row_softmax,
    standardize,
    transition_row,
)
from tests.fixtures import textured_image


def _affinity(values) -> AffinityMatrix:
    w = np.asarray(values, dtype=float)
    return AffinityMatrix(values=w, degrees=w.sum(axis=1))


class TestProjection(unittest.TestCase):
    """Ψ = affine map, standardization, pooling"""

    def test_constant_features_embed_to_zero(self):
        fmap = FeatureMap(level=1, grid_height=10, grid_width=10, data=np.full((2, 100), 3.0))
        proj = Projection(1, np.ones((4, 2)), np.zeros(4), 1e-5, 5)
        embedded = project(fmap, proj, NodeGrid.for_image(10, 10, 5))
        np.testing.assert_array_equal(embedded, 0.0)

    def test_identity_weights_at_unit_pooling(self):
        rng = np.random.default_rng(0)
        data = rng.random((3, 12))
        fmap = FeatureMap(level=1, grid_height=3, grid_width=4, data=data)
        proj = Projection(1, np.eye(3), np.zeros(3), 1e-5, 1)
        embedded = project(fmap, proj, NodeGrid(3, 4, 1))
        np.testing.assert_allclose(embedded, standardize(data, 1e-5), atol=1e-15)

    def test_block_average_pooling(self):
        rng = np.random.default_rng(1)
        data = rng.random((2, 100))
        fmap = FeatureMap(level=1, grid_height=10, grid_width=10, data=data)
        proj = Projection(1, np.eye(2), np.zeros(2), 1e-5, 5)
        embedded = project(fmap, proj, NodeGrid.for_image(10, 10, 5))
        self.assertEqual(embedded.shape, (2, 4))
        block = standardize(data, 1e-5).reshape(2, 10, 10)[:, :5, :5]
        np.testing.assert_allclose(embedded[:, 0], block.mean(axis=(1, 2)), atol=1e-14)

    def test_ragged_border_replicates_edges(self):
        values = np.arange(12, dtype=float).reshape(1, 3, 4)
        grid = NodeGrid.for_image(3, 4, 2)
        pooled = pool(values, grid, "average")
        # bottom-right block covers rows {2, 2}, cols {2, 3}
        self.assertAlmostEqual(pooled[0, 3], (10 + 11 + 10 + 11) / 4)
        pooled_max = pool(values, grid, "max")
        self.assertEqual(pooled_max[0, 0], 5.0)

    def test_dimension_mismatch(self):
        fmap = FeatureMap(level=1, grid_height=5, grid_width=5, data=np.zeros((3, 25)))
        proj = Projection(1, np.ones((4, 2)), np.zeros(4), 1e-5, 5)
        with self.assertRaises(ShapeMismatchError):
            project(fmap, proj, NodeGrid(1, 1, 5))

    def test_default_projections_are_seeded(self):
        cfg = EngineConfig()
        a = default_projections([5, 6, 5, 3, 8], cfg)
        b = default_projections([5, 6, 5, 3, 8], cfg)
        for pa, pb in zip(a, b):
            np.testing.assert_array_equal(pa.weights, pb.weights)
            self.assertEqual(pa.out_dim, 16)
            self.assertLessEqual(np.abs(pa.weights).max(), 1 / math.sqrt(pa.in_dim))


class TestAffinityAndSoftmax(unittest.TestCase):
    """W = ZᵀZ and P = softmax(W/τ)"""

    def setUp(self):
        self.unscaled = EngineConfig(affinity_scale=False)

    def test_zero_embeddings(self):
        w = affinity(np.zeros((3, 4)), EngineConfig())
        np.testing.assert_array_equal(w.values, 0.0)
        np.testing.assert_array_equal(w.degrees, 0.0)

    def test_orthonormal_columns_give_identity(self):
        w = affinity(np.eye(3), self.unscaled)
        np.testing.assert_array_equal(w.values, np.eye(3))

    def test_hand_inner_products(self):
        z = np.array([[1.0, 1.0], [0.0, 1.0]])
        w = affinity(z, self.unscaled)
        np.testing.assert_array_equal(w.values, [[1.0, 1.0], [1.0, 2.0]])
        np.testing.assert_array_equal(w.degrees, [2.0, 3.0])

    def test_scaling_divides_by_root_dim(self):
        z = np.random.default_rng(2).normal(size=(16, 5))
        scaled = affinity(z, EngineConfig())
        plain = affinity(z, self.unscaled)
        np.testing.assert_allclose(scaled.values, plain.values / 4.0)
        np.testing.assert_allclose(scaled.values, scaled.values.T, atol=1e-9)

    def test_uniform_rows_for_zero_affinity(self):
        p = row_softmax(_affinity(np.zeros((2, 2))), 1.0)
        np.testing.assert_array_equal(p.values, np.full((2, 2), 0.5))

    def test_hand_row(self):
        p = row_softmax(_affinity([[0.0, math.log(3)], [0.0, 0.0]]), 1.0)
        np.testing.assert_allclose(p.values[0], [0.25, 0.75])

    def test_low_temperature_approaches_argmax(self):
        rng = np.random.default_rng(3)
        w = 0.1 * rng.permuted(np.tile(np.arange(6.0), (6, 1)), axis=1)
        p = row_softmax(_affinity(w), 1e-3)
        onehot = np.eye(6)[w.argmax(axis=1)]
        np.testing.assert_allclose(p.values, onehot, atol=1e-9)

    def test_temperature_monotonicity(self):
        w = _affinity(np.random.default_rng(4).normal(size=(8, 8)))
        previous = None
        for tau in [4.0, 2.0, 1.0, 0.5, 0.1]:
            row_max = row_softmax(w, tau).values.max(axis=1)
            if previous is not None:
                self.assertTrue(np.all(row_max >= previous - 1e-15))
            previous = row_max

    def test_large_affinities_stay_finite(self):
        p = row_softmax(_affinity([[1000.0, 0.0], [0.0, 1000.0]]), 1.0)
        self.assertTrue(p.is_row_stochastic())

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(5)
        z = rng.normal(size=(4, 16))
        perm = rng.permutation(16)
        cfg = EngineConfig()
        p = row_softmax(affinity(z, cfg), 1.0).values
        q = row_softmax(affinity(z[:, perm], cfg), 1.0).values
        np.testing.assert_allclose(q, p[np.ix_(perm, perm)], atol=1e-15)


class TestBuildTransitions(unittest.TestCase):
    """Per-level P_t from a pyramid"""

    def setUp(self):
        self.cfg = EngineConfig()

    def test_constant_single_level_is_uniform(self):
        cfg = EngineConfig(num_stages=1)
        fmap = FeatureMap(level=1, grid_height=10, grid_width=10, data=np.full((3, 100), 0.4))
        pyramid = FeaturePyramid((fmap,))
        grid = NodeGrid.for_image(10, 10, 5)
        (p,) = build_transitions(pyramid, default_projections(pyramid.dims, cfg), grid, cfg)
        np.testing.assert_array_equal(p.values, np.full((4, 4), 0.25))

    def test_identical_embeddings_share_rows(self):
        z = np.random.default_rng(6).normal(size=(16, 5))
        z[:, 3] = z[:, 1]
        p = row_softmax(affinity(z, self.cfg), 1.0)
        np.testing.assert_allclose(p.values[1], p.values[3], atol=1e-15)

    def test_rows_sum_to_one_on_real_image(self):
        image = textured_image(height=20, width=20)
        pyramid = extract_pyramid(image, self.cfg)
        grid = NodeGrid.for_image(20, 20, 5)
        transitions = build_transitions(pyramid, default_projections(pyramid.dims, self.cfg), grid, self.cfg)
        self.assertEqual(len(transitions), 5)
        for t, p in enumerate(transitions, start=1):
            self.assertEqual(p.level, t)
            self.assertEqual(p.size, 16)
            self.assertLessEqual(p.max_row_deviation(), 1e-9)
            self.assertTrue(p.is_row_stochastic())

    def test_threaded_build_matches_sequential(self):
        image = textured_image(seed=1, height=20, width=20)
        pyramid = extract_pyramid(image, self.cfg)
        grid = NodeGrid.for_image(20, 20, 5)
        projections = default_projections(pyramid.dims, self.cfg)
        seq = build_transitions(pyramid, projections, grid, self.cfg)
        par = build_transitions(pyramid, projections, grid, self.cfg, workers=3)
        for a, b in zip(seq, par):
            np.testing.assert_array_equal(a.values, b.values)

    def test_projection_count_must_match(self):
        image = textured_image(height=20, width=20)
        pyramid = extract_pyramid(image, self.cfg)
        grid = NodeGrid.for_image(20, 20, 5)
        with self.assertRaises(ShapeMismatchError):
            build_transitions(pyramid, default_projections(pyramid.dims, self.cfg)[:4], grid, self.cfg)


class TestTransitionRow(unittest.TestCase):
    """Heat grid of one row of P"""

    def test_uniform_row(self):
        grid = NodeGrid(2, 3)
        row = transition_row(TransitionMatrix(np.full((6, 6), 1 / 6)), 4, grid)
        self.assertEqual(row.shape, (2, 3))
        np.testing.assert_allclose(row, 1 / 6)

    def test_identity_row_is_one_hot(self):
        grid = NodeGrid(3, 3)
        row = transition_row(TransitionMatrix(np.eye(9)), 5, grid)
        expected = np.zeros((3, 3))
        expected[1, 2] = 1.0
        np.testing.assert_array_equal(row, expected)

    def test_hand_built_row(self):
        p = TransitionMatrix(np.array([
            [0.1, 0.2, 0.3, 0.4],
            [0.25, 0.25, 0.25, 0.25],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.5, 0.0],
        ]))
        np.testing.assert_array_equal(transition_row(p, 0, NodeGrid(2, 2)), [[0.1, 0.2], [0.3, 0.4]])

    def test_node_out_of_range(self):
        with self.assertRaises(BoundsError) as ctx:
            transition_row(TransitionMatrix(np.eye(16)), 9999, NodeGrid(4, 4))
        self.assertIn("9999", str(ctx.exception))


if __name__ == '__main__':
    unittest.main(verbosity=2)
