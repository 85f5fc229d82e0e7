#!/usr/bin/env python3
"""Tests for walk steps, the cascade, the closed-form oracle and the energy"""

import math
import unittest

import numpy as np
from scipy.special import expit

from diffusion_seg.core import EngineConfig, NodeGrid, ScoreMap
from diffusion_seg.diffusion import (
    CascadeParams,
    CascadeSolver,
    ClosedFormSolver,
    cascade_step,
    closed_form,
    energy,
    fixed_point_residual,
    mean_transition,
    power_series,
    run_cascade,
    walk_step,
)
from diffusion_seg.errors import DegenerateGraphError, NonFiniteError, ShapeMismatchError
from diffusion_seg.seed import ImportanceMap
from diffusion_seg.similarity import AffinityMatrix, TransitionMatrix
from tests.fixtures import random_scores, random_transition, uniform_transition

HALF_IDENTITY = np.array([[0.75, 0.25], [0.25, 0.75]])


class TestWalkAndCascadeStep(unittest.TestCase):
    """R(y, P, s, μ) and its identity-mapped blend"""

    def setUp(self):
        self.rng = np.random.default_rng(0)
        self.grid = NodeGrid(2, 3)
        self.p = random_transition(self.rng, 6)
        self.y = random_scores(self.rng, self.grid, 2)
        self.s = random_scores(self.rng, self.grid, 2)

    def test_zero_mu_returns_seed(self):
        np.testing.assert_array_equal(walk_step(self.y, self.p, self.s, 0.0).values, self.s.values)

    def test_unit_mu_identity_p_returns_y(self):
        eye = TransitionMatrix(np.eye(6))
        np.testing.assert_array_equal(walk_step(self.y, eye, self.s, 1.0).values, self.y.values)

    def test_hand_two_node_step(self):
        grid = NodeGrid(1, 2)
        identity = ScoreMap(grid, np.eye(2))
        out = walk_step(identity, uniform_transition(2), identity, 0.5)
        np.testing.assert_allclose(out.values, HALF_IDENTITY)

    def test_cascade_step_limits(self):
        walked = walk_step(self.y, self.p, self.s, 0.3)
        np.testing.assert_allclose(cascade_step(self.y, self.p, self.s, 0.3, 1.0).values, walked.values)
        np.testing.assert_array_equal(cascade_step(self.y, self.p, self.s, 0.3, 0.0).values, self.y.values)
        np.testing.assert_allclose(
            cascade_step(self.y, self.p, self.s, 0.0, 0.5).values,
            0.5 * self.s.values + 0.5 * self.y.values,
        )

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeMismatchError):
            walk_step(self.y, random_transition(self.rng, 5), self.s, 0.5)


class TestCascadeParams(unittest.TestCase):
    """Logit storage of μ_t and β_t"""

    def test_initial_values(self):
        mu, beta = CascadeParams.initial(3).effective()
        np.testing.assert_array_equal(mu, 0.5)
        np.testing.assert_array_equal(beta, 0.5)

    def test_from_values_round_trip(self):
        params = CascadeParams.from_values([0.3, 0.9], [0.6, 0.1])
        mu, beta = params.effective()
        np.testing.assert_allclose(mu, [0.3, 0.9])
        np.testing.assert_allclose(beta, [0.6, 0.1])

    def test_invalid_logits(self):
        with self.assertRaises(NonFiniteError):
            CascadeParams([np.nan], [0.0])
        with self.assertRaises(ShapeMismatchError):
            CascadeParams([0.0, 1.0], [0.0])


class TestRunCascade(unittest.TestCase):
    """The T-stage cascade starting from y⁰ = s"""

    def setUp(self):
        self.rng = np.random.default_rng(1)
        self.grid = NodeGrid(2, 2)
        self.cfg = EngineConfig(num_stages=3)
        self.transitions = [random_transition(self.rng, 4, t) for t in (1, 2, 3)]

    def test_vanishing_mu_returns_seed(self):
        s = random_scores(self.rng, self.grid, 3)
        params = CascadeParams(np.full(3, -50.0), np.zeros(3))
        out = run_cascade(s, self.transitions, params, self.cfg).current
        np.testing.assert_allclose(out.values, s.values, atol=1e-12, rtol=0)

    def test_vanishing_beta_returns_seed_exactly(self):
        s = ScoreMap(self.grid, self.rng.uniform(0.5, 1.0, size=(4, 3)))
        params = CascadeParams(np.zeros(3), np.full(3, -50.0))
        out = run_cascade(s, self.transitions, params, self.cfg).current
        np.testing.assert_array_equal(out.values, s.values)

    def test_matches_hand_unrolled_evaluation(self):
        s = random_scores(self.rng, self.grid, 2)
        params = CascadeParams(self.rng.normal(size=3), self.rng.normal(size=3))
        state = run_cascade(s, self.transitions, params, self.cfg, keep_trace=True)

        y = s.values
        for t in range(3):
            mu, beta = expit(params.mu_logits[t]), expit(params.beta_logits[t])
            walked = mu * self.transitions[t].values @ y + (1 - mu) * s.values
            y = beta * walked + (1 - beta) * y
        np.testing.assert_allclose(state.current.values, y, atol=1e-14)
        self.assertEqual(state.stage, 3)
        self.assertEqual(state.executed, [1, 2, 3])
        self.assertEqual(len(state.trace), 4)
        np.testing.assert_array_equal(state.trace[0].values, s.values)

    def test_linear_in_seed(self):
        params = CascadeParams(self.rng.normal(size=3), self.rng.normal(size=3))
        s1 = random_scores(self.rng, self.grid, 2)
        s2 = random_scores(self.rng, self.grid, 2)
        a, b = 1.7, -0.4
        combined = ScoreMap(self.grid, a * s1.values + b * s2.values)
        lhs = run_cascade(combined, self.transitions, params, self.cfg).current.values
        rhs = (a * run_cascade(s1, self.transitions, params, self.cfg).current.values
               + b * run_cascade(s2, self.transitions, params, self.cfg).current.values)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_outputs_stay_in_unit_interval(self):
        params = CascadeParams(self.rng.normal(size=3), self.rng.normal(size=3))
        s = ScoreMap(self.grid, self.rng.random((4, 3)))
        out = run_cascade(s, self.transitions, params, self.cfg).current.values
        self.assertTrue(np.all(out >= 0.0) and np.all(out <= 1.0))

    def test_skipped_stages_equal_shorter_cascade(self):
        cfg5 = EngineConfig(num_stages=5, skip_stages={2, 4})
        transitions = [random_transition(self.rng, 4, t) for t in range(1, 6)]
        params = CascadeParams(self.rng.normal(size=5), self.rng.normal(size=5))
        s = random_scores(self.rng, self.grid, 2)

        skipped = run_cascade(s, transitions, params, cfg5)
        short = run_cascade(
            s, [transitions[0], transitions[2], transitions[4]], params.select([1, 3, 5]),
            EngineConfig(num_stages=3),
        )
        self.assertEqual(skipped.executed, [1, 3, 5])
        np.testing.assert_allclose(skipped.current.values, short.current.values, atol=1e-12)

    def test_stage_count_mismatch(self):
        s = random_scores(self.rng, self.grid, 2)
        with self.assertRaises(ShapeMismatchError):
            run_cascade(s, self.transitions[:2], CascadeParams.initial(3), self.cfg)

    def test_single_walk_reaches_the_far_corner(self):
        grid = NodeGrid(20, 20)
        x = np.zeros((400, 2))
        x[0, 1] = 1.0
        s = ScoreMap(grid, x)
        out = walk_step(s, uniform_transition(400), s, 0.5)
        self.assertGreater(out.values[399, 1], 0.0)


class TestClosedFormOracle(unittest.TestCase):
    """Direct solve, power series and fixed-point residual"""

    def setUp(self):
        self.rng = np.random.default_rng(2)

    def test_zero_mu_and_identity_p(self):
        grid = NodeGrid(1, 5)
        s = random_scores(self.rng, grid, 3)
        p = random_transition(self.rng, 5)
        np.testing.assert_allclose(closed_form(p, s, 0.0).values, s.values, atol=1e-15)
        np.testing.assert_allclose(closed_form(TransitionMatrix(np.eye(5)), s, 0.7).values, s.values, atol=1e-14)

    def test_hand_two_node_solve(self):
        grid = NodeGrid(1, 2)
        s = ScoreMap(grid, np.eye(2))
        np.testing.assert_allclose(closed_form(uniform_transition(2), s, 0.5).values, HALF_IDENTITY)

    def test_power_series_single_unroll(self):
        grid = NodeGrid(2, 2)
        s = random_scores(self.rng, grid, 2)
        p = random_transition(self.rng, 4)
        np.testing.assert_allclose(
            power_series(p, s, 0.4, 0).values, walk_step(s, p, s, 0.4).values, atol=1e-15
        )

    def test_power_series_matches_iterated_walks(self):
        for trial in range(50):
            n = int(self.rng.integers(2, 101))
            k = int(self.rng.integers(1, 6))
            grid = NodeGrid(1, n)
            p = random_transition(self.rng, n)
            s = random_scores(self.rng, grid, k)
            mu = float(self.rng.uniform(0.05, 0.95))
            terms = int(self.rng.integers(0, 12))
            y = s
            for _ in range(terms + 1):
                y = walk_step(y, p, s, mu)
            with self.subTest(trial=trial):
                np.testing.assert_allclose(power_series(p, s, mu, terms).values, y.values, atol=1e-10)

    def test_power_series_tail_vanishes(self):
        grid = NodeGrid(2, 4)
        s = random_scores(self.rng, grid, 2)
        p = uniform_transition(8)
        np.testing.assert_allclose(
            power_series(p, s, 0.5, 60).values, closed_form(p, s, 0.5).values, atol=1e-12
        )

    def test_geometric_convergence(self):
        sizes, mus = (16, 100, 400), (0.3, 0.5, 0.9)
        for trial in range(20):
            n, mu = sizes[trial % 3], mus[(trial // 3) % 3]
            grid = NodeGrid(1, n)
            p = random_transition(self.rng, n)
            s = ScoreMap(grid, self.rng.uniform(-1.0, 1.0, size=(n, 4)))
            steps = math.ceil(math.log(1e-10) / math.log(mu)) + 1
            y = s
            for _ in range(steps):
                y = walk_step(y, p, s, mu)
            deviation = np.max(np.abs(y.values - closed_form(p, s, mu).values))
            with self.subTest(trial=trial, n=n, mu=mu):
                self.assertLessEqual(deviation, 2 * mu ** steps / (1 - mu) + 1e-12)
                self.assertLessEqual(deviation, 1e-8)

    def test_fixed_point_residual(self):
        grid = NodeGrid(3, 3)
        s = random_scores(self.rng, grid, 2)
        p = random_transition(self.rng, 9)
        y = closed_form(p, s, 0.6)
        self.assertLessEqual(fixed_point_residual(y, p, s, 0.6), 1e-10)
        self.assertEqual(fixed_point_residual(s, p, s, 0.0), 0.0)
        bumped = ScoreMap(grid, s.values + 1.0)
        self.assertGreater(fixed_point_residual(bumped, uniform_transition(9), s, 0.5), 0.0)

    def test_singular_system_is_reported(self):
        grid = NodeGrid(1, 3)
        s = random_scores(self.rng, grid, 2)
        outcome = ClosedFormSolver(1.0).solve(s, TransitionMatrix(np.eye(3)))
        self.assertFalse(outcome["success"])
        self.assertEqual(outcome["status"], "singular")


class TestEnergy(unittest.TestCase):
    """½(μ Σ W‖y_i/√d_i − y_j/√d_j‖ + (1 − μ) Σ M‖y_i − x_i‖)"""

    def test_vanishing_terms(self):
        grid = NodeGrid(1, 3)
        x = ScoreMap(grid, np.random.default_rng(3).normal(size=(3, 2)))
        w = AffinityMatrix(values=np.zeros((3, 3)), degrees=np.ones(3))
        m = ImportanceMap(grid, [0.5, 0.5, 0.5])
        self.assertEqual(energy(x, w, m, x, 0.5), 0.0)

    def test_self_loop(self):
        grid = NodeGrid(1, 1)
        x = ScoreMap(grid, [[0.3, -0.2]])
        w = AffinityMatrix(values=np.ones((1, 1)), degrees=np.ones(1))
        self.assertEqual(energy(x, w, ImportanceMap(grid, [1.0]), x, 0.5), 0.0)

    def test_hand_two_node_instance(self):
        grid = NodeGrid(1, 2)
        y = ScoreMap(grid, np.eye(2))
        x = ScoreMap.zeros(grid, 2)
        w = AffinityMatrix(values=np.array([[0.0, 1.0], [1.0, 0.0]]), degrees=np.ones(2))
        m = ImportanceMap(grid, [1.0, 1.0])
        self.assertAlmostEqual(energy(y, w, m, x, 0.5), 0.5 * (math.sqrt(2) + 1.0))
        self.assertAlmostEqual(energy(y, w, m, x, 0.5, squared=True), 1.5)

    def test_zero_degree(self):
        grid = NodeGrid(1, 2)
        y = ScoreMap.zeros(grid, 1)
        w = AffinityMatrix(values=np.zeros((2, 2)), degrees=np.zeros(2))
        with self.assertRaises(DegenerateGraphError):
            energy(y, w, ImportanceMap(grid, [1.0, 1.0]), y, 0.5)


class TestSolvers(unittest.TestCase):
    """Result-dict wrappers around the cascade and the direct solve"""

    def setUp(self):
        self.rng = np.random.default_rng(4)
        self.grid = NodeGrid(2, 2)
        self.cfg = EngineConfig(num_stages=2)
        self.transitions = [random_transition(self.rng, 4, t) for t in (1, 2)]

    def test_cascade_solver(self):
        s = random_scores(self.rng, self.grid, 2)
        outcome = CascadeSolver(self.cfg, CascadeParams.initial(2)).solve(s, self.transitions)
        self.assertTrue(outcome["success"])
        self.assertEqual(outcome["status"], "complete")
        self.assertIn("stage 2", outcome["solver_log"])
        self.assertNotIn("log", outcome)

    def test_cascade_solver_reports_failure(self):
        s = random_scores(self.rng, self.grid, 2)
        outcome = CascadeSolver(self.cfg, CascadeParams.initial(3)).solve(s, self.transitions)
        self.assertFalse(outcome["success"])
        self.assertIn("error", outcome)

    def test_mean_transition_is_row_stochastic(self):
        p = mean_transition(self.transitions)
        self.assertTrue(p.is_row_stochastic())

    def test_closed_form_solver(self):
        s = random_scores(self.rng, self.grid, 2)
        outcome = ClosedFormSolver(0.5).solve(s, self.transitions[0])
        self.assertTrue(outcome["success"])
        self.assertLessEqual(outcome["residual"], 1e-10)
        self.assertIn("residual", outcome["solver_log"])
        self.assertNotIn("log", outcome)


if __name__ == '__main__':
    unittest.main(verbosity=2)
