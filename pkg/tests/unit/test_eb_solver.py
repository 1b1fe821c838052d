import math
import os
import sys
import unittest
from unittest import mock

import numpy as np
from numpy.testing import assert_allclose

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..', 'src'))

from ebrpca.domain import eb_solver
from ebrpca.domain.eb_solver import (
    INIT_FLOOR,
    compute_cost,
    initialize,
    iterate_once,
    map_cost,
    map_objective,
    solve,
    solve_completion,
    update_hyperparams,
    update_means,
    update_uv,
)
from ebrpca.domain.exceptions import ErrorCode, ExceptionNode
from ebrpca.domain.models import RpcaProblem, SolverMode, SolverOptions, VariationalState


def _random_pd(rng, m, scale=1.0):
    a = rng.standard_normal((m, m))
    return scale * (a @ a.T / m + 0.5 * np.eye(m))


def _log_det_a(p, ginv, lam):
    """log|A| with A = blockdiag(P, diag(ginv)) + (1/lam) [[I, I], [I, I]]."""
    m = p.shape[0]
    eye = np.eye(m)
    a = np.block([[p + eye / lam, eye / lam], [eye / lam, np.diag(ginv) + eye / lam]])
    return np.linalg.slogdet(a)[1]


class InitializeTests(unittest.TestCase):
    def test_constant_matrix(self):
        state = initialize(RpcaProblem(np.full((2, 2), 2.0)))
        assert_allclose(state.psi, 4.0 * np.eye(2))
        assert_allclose(state.gamma, np.full((2, 2), 4.0))
        self.assertTrue(math.isfinite(state.cost))
        self.assertEqual(state.x_hat.shape, (2, 2))

    def test_identity(self):
        state = initialize(RpcaProblem(np.eye(2)))
        assert_allclose(state.psi, 0.5 * np.eye(2))

    def test_zero_data_uses_floor(self):
        state = initialize(RpcaProblem(np.zeros((2, 3))))
        assert_allclose(state.psi, INIT_FLOOR * np.eye(2))
        assert_allclose(state.gamma, np.full((2, 3), INIT_FLOOR))

    def test_tall_problem_is_rejected(self):
        with self.assertRaises(ExceptionNode) as ctx:
            initialize(RpcaProblem(np.ones((3, 2))))
        self.assertEqual(ctx.exception.error_code, ErrorCode.SHAPE_MISMATCH)

    def test_completion_pins_masked_gamma(self):
        mask = np.zeros((2, 3), dtype=bool)
        mask[1, 2] = True
        state = initialize(RpcaProblem(np.ones((2, 3)), known_corruption_mask=mask),
                           SolverOptions(mode=SolverMode.COMPLETION))
        self.assertTrue(np.isposinf(state.gamma[1, 2]))
        self.assertEqual(int(np.isinf(state.gamma).sum()), 1)

    def test_completion_without_mask(self):
        with self.assertRaises(ExceptionNode) as ctx:
            initialize(RpcaProblem(np.ones((2, 3))), SolverOptions(mode=SolverMode.COMPLETION))
        self.assertEqual(ctx.exception.error_code, ErrorCode.INVALID_OPTIONS)


class UpdateMeansTests(unittest.TestCase):
    def test_symmetric_split(self):
        state = VariationalState(psi=np.eye(2), gamma=np.ones((2, 1)))
        x, s = update_means(state, RpcaProblem([[2.0], [4.0]], lam=1e-12))
        assert_allclose(x[:, 0], [1.0, 2.0], rtol=1e-9)
        assert_allclose(s[:, 0], [1.0, 2.0], rtol=1e-9)

    def test_zero_gamma_sends_everything_to_x(self):
        y = np.array([[3.0], [-1.0]])
        state = VariationalState(psi=np.eye(2), gamma=np.zeros((2, 1)))
        x, s = update_means(state, RpcaProblem(y, lam=1e-12))
        assert_allclose(x, y, rtol=1e-9)
        assert_allclose(s, 0.0, atol=1e-9)

    def test_means_minimize_the_quadratic(self):
        # y' Sigma^-1 y = min (1/lam)|y - x - s|^2 + x' Psi^-1 x + sum s^2 / gamma
        rng = np.random.default_rng(11)
        cases = [(np.diag([1.0, 2.0, 3.0]), np.array([3.0, 2.0, 1.0]), 0.1)]
        for _ in range(20):
            m = int(rng.integers(2, 6))
            cases.append((_random_pd(rng, m), rng.uniform(0.1, 3.0, m), float(rng.uniform(0.01, 1.0))))
        for psi, g, lam in cases:
            m = psi.shape[0]
            y = rng.standard_normal(m)
            eye = np.eye(m)
            normal = np.block([[np.linalg.inv(psi) + eye / lam, eye / lam],
                               [eye / lam, np.diag(1.0 / g) + eye / lam]])
            xs = np.linalg.solve(normal, np.concatenate([y, y]) / lam)
            x_ref, s_ref = xs[:m], xs[m:]
            state = VariationalState(psi=psi, gamma=g[:, None])
            x, s = update_means(state, RpcaProblem(y[:, None], lam=lam))
            assert_allclose(x[:, 0], x_ref, rtol=1e-6, atol=1e-10)
            assert_allclose(s[:, 0], s_ref, rtol=1e-6, atol=1e-10)
            attained = (np.sum((y - x_ref - s_ref) ** 2) / lam + x_ref @ np.linalg.solve(psi, x_ref)
                        + np.sum(s_ref ** 2 / g))
            cost = compute_cost(psi, g[:, None], RpcaProblem(y[:, None], lam=lam))
            logdet = np.linalg.slogdet(psi + np.diag(g) + lam * eye)[1]
            self.assertAlmostEqual(cost - logdet, attained, delta=1e-8 * (1.0 + abs(attained)))

    def test_masked_rows_use_the_reduced_system(self):
        rng = np.random.default_rng(3)
        psi = _random_pd(rng, 3)
        gamma = rng.uniform(0.5, 2.0, (3, 4))
        gamma[0, 1] = math.inf
        y = rng.standard_normal((3, 4))
        lam = 0.05
        problem = RpcaProblem(y, lam=lam)
        x, s = update_means(VariationalState(psi=psi, gamma=gamma), problem)
        keep = [1, 2]
        sigma_kk = psi[np.ix_(keep, keep)] + np.diag(gamma[keep, 1]) + lam * np.eye(2)
        z = np.linalg.solve(sigma_kk, y[keep, 1])
        assert_allclose(x[:, 1], psi[:, keep] @ z, rtol=1e-10)
        assert_allclose(s[keep, 1], gamma[keep, 1] * z, rtol=1e-10)
        self.assertAlmostEqual(s[0, 1], y[0, 1] - x[0, 1], places=12)
        cost = compute_cost(psi, gamma, problem)
        expected = y[keep, 1] @ z + np.linalg.slogdet(sigma_kk)[1]
        for j in (0, 2, 3):
            sig = psi + np.diag(gamma[:, j]) + lam * np.eye(3)
            expected += y[:, j] @ np.linalg.solve(sig, y[:, j]) + np.linalg.slogdet(sig)[1]
        self.assertAlmostEqual(cost, expected, delta=1e-10 * abs(expected))

    def test_columns_are_solved_through_their_cholesky_factor(self):
        rng = np.random.default_rng(8)
        problem = RpcaProblem(rng.standard_normal((4, 9)), lam=0.1)
        state = VariationalState(psi=_random_pd(rng, 4), gamma=rng.uniform(0.5, 2.0, (4, 9)))
        with mock.patch.object(eb_solver.scipy.linalg, "cho_solve", wraps=eb_solver.scipy.linalg.cho_solve) as solved, \
                mock.patch.object(np.linalg, "inv", side_effect=AssertionError("explicit inverse")):
            update_uv(state, problem)
        self.assertEqual(solved.call_count, 9)

    def test_column_without_finite_gamma(self):
        gamma = np.ones((2, 3))
        gamma[:, 2] = math.inf
        with self.assertRaises(ExceptionNode) as ctx:
            compute_cost(np.eye(2), gamma, RpcaProblem(np.ones((2, 3))))
        self.assertEqual(ctx.exception.error_code, ErrorCode.MASK_ALL_ONES)
        self.assertEqual(ctx.exception.location, "column 2")


class UpdateUvTests(unittest.TestCase):
    def test_identity_halves(self):
        state = VariationalState(psi=np.eye(2), gamma=np.ones((2, 1)))
        u, v = update_uv(state, RpcaProblem(np.ones((2, 1)), lam=1e-12))
        self.assertEqual(u.shape, (1, 2, 2))
        assert_allclose(u[0], 0.5 * np.eye(2), atol=1e-9)
        assert_allclose(v[:, 0], [0.5, 0.5], atol=1e-9)

    def test_zero_psi(self):
        state = VariationalState(psi=np.zeros((2, 2)), gamma=np.ones((2, 3)))
        u, _ = update_uv(state, RpcaProblem(np.ones((2, 3))))
        assert_allclose(u, 0.0, atol=1e-15)

    def test_map_mode_is_zero(self):
        state = VariationalState(psi=np.eye(2), gamma=np.ones((2, 3)))
        u, v = update_uv(state, RpcaProblem(np.ones((2, 3))), SolverMode.MAP)
        self.assertEqual(u.shape, (3, 2, 2))
        self.assertFalse(u.any() or v.any())

    def test_closed_forms(self):
        rng = np.random.default_rng(5)
        psi = _random_pd(rng, 4)
        gamma = rng.uniform(0.1, 2.0, (4, 6))
        lam = 0.3
        u, v = update_uv(VariationalState(psi=psi, gamma=gamma), RpcaProblem(np.zeros((4, 6)), lam=lam))
        for j in range(6):
            g = np.diag(gamma[:, j])
            sinv = np.linalg.inv(psi + g + lam * np.eye(4))
            assert_allclose(u[j], psi - psi @ sinv @ psi, rtol=1e-9, atol=1e-12)
            assert_allclose(v[:, j], np.diag(g - g @ sinv @ g), rtol=1e-9, atol=1e-12)

    def test_gradients_of_log_det_a(self):
        rng = np.random.default_rng(17)
        h = 1e-5
        for _ in range(10):
            psi = _random_pd(rng, 3)
            g = rng.uniform(0.2, 2.0, 3)
            lam = 0.5
            state = VariationalState(psi=psi, gamma=g[:, None])
            u, v = update_uv(state, RpcaProblem(rng.standard_normal((3, 1)), lam=lam))
            p = np.linalg.inv(psi)
            ginv = 1.0 / g

            e = rng.standard_normal((3, 3))
            e = 0.5 * (e + e.T)
            fd = (_log_det_a(p + h * e, ginv, lam) - _log_det_a(p - h * e, ginv, lam)) / (2 * h)
            exact = float(np.sum(u[0] * e))
            self.assertLessEqual(abs(fd - exact), 1e-5 * max(1.0, abs(exact)))

            for i in range(3):
                d = np.zeros(3)
                d[i] = h
                fd = (_log_det_a(p, ginv + d, lam) - _log_det_a(p, ginv - d, lam)) / (2 * h)
                self.assertLessEqual(abs(fd - v[i, 0]), 1e-5 * max(1.0, abs(v[i, 0])))

    def test_masked_column_bounds(self):
        psi = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 1.5]])
        gamma = np.array([[math.inf], [1.0], [0.5]])
        lam = 0.1
        u, v = update_uv(VariationalState(psi=psi, gamma=gamma), RpcaProblem(np.ones((3, 1)), lam=lam))
        keep = [1, 2]
        sigma_kk = psi[np.ix_(keep, keep)] + np.diag(gamma[keep, 0]) + lam * np.eye(2)
        expected = psi - psi[:, keep] @ np.linalg.solve(sigma_kk, psi[keep, :])
        assert_allclose(u[0], expected, rtol=1e-10, atol=1e-13)
        self.assertTrue(np.all(np.isfinite(v)))
        self.assertTrue(np.all(v >= 0.0))


class UpdateHyperparamsTests(unittest.TestCase):
    def _state(self, x, s, u_sum, v_diag, gamma=None):
        m, n = x.shape
        return VariationalState(psi=np.eye(m), gamma=np.ones((m, n)) if gamma is None else gamma,
                                x_hat=x, s_hat=s, u_sum=u_sum, v_diag=v_diag)

    def test_single_outer_product(self):
        state = self._state(np.array([[1.0], [0.0]]), np.zeros((2, 1)), np.zeros((2, 2)), np.zeros((2, 1)))
        psi, _ = update_hyperparams(state)
        assert_allclose(psi, [[1.0, 0.0], [0.0, 0.0]])

    def test_gamma_adds_v(self):
        state = self._state(np.zeros((1, 1)), np.array([[2.0]]), np.zeros((1, 1)), np.array([[0.25]]))
        _, gamma = update_hyperparams(state)
        self.assertEqual(gamma[0, 0], 4.25)

    def test_map_reduces_to_outer_products(self):
        state = self._state(np.eye(2), np.array([[1.0, -3.0], [0.0, 0.5]]), None, None)
        psi, gamma = update_hyperparams(state, SolverMode.MAP)
        assert_allclose(psi, 0.5 * np.eye(2))
        assert_allclose(gamma, [[1.0, 9.0], [0.0, 0.25]])

    def test_u_stack_is_used_without_u_sum(self):
        u = np.stack([np.eye(2), 3.0 * np.eye(2)])
        state = VariationalState(psi=np.eye(2), gamma=np.ones((2, 2)), x_hat=np.zeros((2, 2)),
                                 s_hat=np.zeros((2, 2)), u=u, v_diag=np.zeros((2, 2)))
        psi, _ = update_hyperparams(state)
        assert_allclose(psi, 2.0 * np.eye(2))

    def test_masked_gamma_stays_infinite(self):
        gamma = np.array([[1.0, math.inf]])
        state = self._state(np.ones((1, 2)), np.ones((1, 2)), np.zeros((1, 1)), np.zeros((1, 2)), gamma)
        _, new = update_hyperparams(state)
        self.assertTrue(np.isposinf(new[0, 1]))
        self.assertEqual(new[0, 0], 1.0)

    def test_missing_terms(self):
        with self.assertRaises(ExceptionNode) as ctx:
            update_hyperparams(VariationalState(psi=np.eye(2), gamma=np.ones((2, 2))))
        self.assertEqual(ctx.exception.error_code, ErrorCode.INVALID_STATE)
        state = VariationalState(psi=np.eye(2), gamma=np.ones((2, 2)), x_hat=np.zeros((2, 2)),
                                 s_hat=np.zeros((2, 2)))
        with self.assertRaises(ExceptionNode):
            update_hyperparams(state)

    def test_gamma_is_the_minimizer_of_the_scalar_bound(self):
        # min_gamma s^2 / gamma + log gamma - 1 = log s^2, attained at gamma = s^2
        s = np.array([[-3.0, -0.5, 1e-3, 0.7, 2.0, 40.0]])
        state = self._state(np.zeros_like(s), s, None, None)
        _, gamma = update_hyperparams(state, SolverMode.MAP)
        bound = s ** 2 / gamma + np.log(gamma) - 1.0
        assert_allclose(bound, np.log(s ** 2), rtol=0, atol=1e-10)
        for factor in (0.5, 0.9, 1.1, 2.0):
            self.assertTrue(np.all(s ** 2 / (factor * gamma) + np.log(factor * gamma) - 1.0 >= bound))

    def test_psi_is_the_minimizer_of_the_matrix_bound(self):
        # Tr[X X' Psi^-1] + n log|Psi| is smallest at Psi = X X' / n
        rng = np.random.default_rng(23)
        m, n = 3, 8
        x = rng.standard_normal((m, n))
        state = self._state(x, np.zeros((m, n)), None, None)
        psi, _ = update_hyperparams(state, SolverMode.MAP)

        def bound(p):
            return np.trace(x @ x.T @ np.linalg.inv(p)) + n * np.linalg.slogdet(p)[1]

        at_min = bound(psi)
        expected = n * np.linalg.slogdet(x @ x.T)[1] + n * m * (1.0 - math.log(n))
        self.assertAlmostEqual(at_min, expected, delta=1e-10 * abs(expected))
        for _ in range(20):
            e = rng.standard_normal((m, m))
            p = psi + 0.05 * (e @ e.T) + 0.01 * (e + e.T)
            if np.linalg.eigvalsh(p)[0] > 0:
                self.assertGreaterEqual(bound(p), at_min - 1e-10)


class CostTests(unittest.TestCase):
    def test_scalar_examples(self):
        self.assertAlmostEqual(compute_cost([[1.0]], [[1.0]], RpcaProblem([[0.0]], lam=1e-12)),
                               math.log(2.0), places=9)
        self.assertAlmostEqual(compute_cost([[1.0]], [[1.0]], RpcaProblem([[1.0]], lam=1e-12)),
                               0.5 + math.log(2.0), places=9)

    def test_two_by_two_against_explicit_inverse(self):
        rng = np.random.default_rng(8)
        psi = _random_pd(rng, 2)
        gamma = rng.uniform(0.1, 1.0, (2, 2))
        y = rng.standard_normal((2, 2))
        lam = 0.2
        expected = 0.0
        for j in range(2):
            (a, b), (c, d) = psi + np.diag(gamma[:, j]) + lam * np.eye(2)
            det = a * d - b * c
            inv = np.array([[d, -b], [-c, a]]) / det
            expected += y[:, j] @ inv @ y[:, j] + math.log(det)
        got = compute_cost(psi, gamma, RpcaProblem(y, lam=lam))
        self.assertAlmostEqual(got, expected, delta=1e-10 * abs(expected))

    def test_log_det_differences(self):
        # log|Sigma| = log|Psi| + log|Gamma| + m log lam + log|A|; the constant cancels in differences
        rng = np.random.default_rng(29)
        for _ in range(20):
            m = int(rng.integers(2, 5))
            lam = float(rng.uniform(0.05, 1.0))
            zero = RpcaProblem(np.zeros((m, 1)), lam=lam)
            pairs = [(_random_pd(rng, m), rng.uniform(0.1, 2.0, m)) for _ in range(2)]
            lhs = [compute_cost(p, g[:, None], zero) for p, g in pairs]
            rhs = [np.linalg.slogdet(p)[1] + np.sum(np.log(g))
                   + _log_det_a(np.linalg.inv(p), 1.0 / g, lam) for p, g in pairs]
            self.assertAlmostEqual(lhs[0] - lhs[1], rhs[0] - rhs[1], delta=1e-8 * (1.0 + abs(lhs[0])))

    def test_map_cost_matches_the_expanded_objective_at_the_means(self):
        rng = np.random.default_rng(31)
        problem = RpcaProblem(rng.standard_normal((3, 7)), lam=0.05)
        state = initialize(problem, SolverOptions(mode=SolverMode.MAP))
        direct = map_objective(state.x_hat, state.s_hat, state.psi, state.gamma, problem)
        self.assertAlmostEqual(state.map_cost, direct, delta=1e-8 * (1.0 + abs(direct)))
        self.assertAlmostEqual(map_cost(state.psi, state.gamma, problem), state.map_cost, places=9)

    def test_map_objective_needs_positive_hyperparameters(self):
        problem = RpcaProblem(np.ones((2, 2)))
        with self.assertRaises(ExceptionNode) as ctx:
            map_objective(np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2), np.zeros((2, 2)), problem)
        self.assertEqual(ctx.exception.error_code, ErrorCode.NUMERICAL_DEGENERACY)
        with self.assertRaises(ExceptionNode):
            map_objective(np.zeros((2, 2)), np.zeros((2, 2)), np.diag([1.0, 0.0]), np.ones((2, 2)), problem)


class IterateTests(unittest.TestCase):
    def test_zero_data_is_a_fixed_point(self):
        problem = RpcaProblem(np.zeros((2, 3)))
        state = initialize(problem)
        _, report = iterate_once(state, problem)
        self.assertLessEqual(abs(report.cost_after - report.cost_before), 1e-10)

    def test_each_step_descends(self):
        rng = np.random.default_rng(41)
        for _ in range(10):
            m = int(rng.integers(2, 6))
            n = int(rng.integers(m, 15))
            problem = RpcaProblem(rng.standard_normal((m, n)) * rng.uniform(0.1, 10.0), lam=1e-3)
            state = initialize(problem)
            for k in range(15):
                new, report = iterate_once(state, problem, iteration=k)
                self.assertTrue(report.descended, (k, report))
                self.assertAlmostEqual(new.cost, compute_cost(new.psi, new.gamma, problem),
                                       delta=1e-8 * (1.0 + abs(new.cost)))
                state = new

    def test_map_iterations_descend_on_the_expanded_objective(self):
        rng = np.random.default_rng(43)
        problem = RpcaProblem(rng.standard_normal((3, 8)), lam=0.01)
        options = SolverOptions(mode=SolverMode.MAP)
        state = initialize(problem, options)
        previous = map_objective(state.x_hat, state.s_hat, state.psi, state.gamma, problem)
        for k in range(5):
            state, report = iterate_once(state, problem, options, k)
            current = map_objective(state.x_hat, state.s_hat, state.psi, state.gamma, problem)
            self.assertLessEqual(current, previous + 1e-8 * (1.0 + abs(previous)))
            self.assertTrue(report.descended)
            previous = current


class SolveTests(unittest.TestCase):
    def test_zero_data(self):
        dec = solve(RpcaProblem(np.zeros((3, 5))))
        self.assertFalse(dec.x_hat.any())
        self.assertFalse(dec.s_hat.any())
        self.assertEqual(dec.mode, "EB")

    def test_trace_and_iteration_cap(self):
        rng = np.random.default_rng(2)
        problem = RpcaProblem(rng.standard_normal((4, 10)))
        dec = solve(problem, SolverOptions(max_iterations=3, rel_tolerance=0.0))
        self.assertEqual(dec.iterations, 3)
        self.assertEqual(len(dec.cost_trace), 4)
        self.assertFalse(dec.converged)
        self.assertTrue(dec.cost_is_monotone())

    def test_threaded_blocks_match_serial(self):
        rng = np.random.default_rng(13)
        problem = RpcaProblem(rng.standard_normal((3, 20)))
        serial = solve(problem, SolverOptions(max_iterations=5, rel_tolerance=0.0))
        with mock.patch.object(eb_solver, "_BLOCK_BUDGET", 27):
            options = SolverOptions(max_iterations=5, rel_tolerance=0.0, workers=3)
            ordered = solve(problem, options)
            again = solve(problem, options)
            unordered = solve(problem, SolverOptions(max_iterations=5, rel_tolerance=0.0, workers=3,
                                                     deterministic=False))
        assert_allclose(ordered.x_hat, serial.x_hat, rtol=1e-10, atol=1e-12)
        self.assertEqual(ordered.cost_trace, again.cost_trace)
        self.assertTrue(np.array_equal(ordered.x_hat, again.x_hat))
        assert_allclose(unordered.cost_trace, ordered.cost_trace, rtol=1e-12)

    def test_retained_bounds(self):
        problem = RpcaProblem(np.arange(6.0).reshape(2, 3))
        state = initialize(problem, SolverOptions(retain_bounds=True))
        self.assertEqual(state.u.shape, (3, 2, 2))
        assert_allclose(state.u.sum(axis=0), state.u_sum)


class CompletionTests(unittest.TestCase):
    def test_empty_mask_matches_plain_solve(self):
        rng = np.random.default_rng(19)
        y = rng.standard_normal((4, 12))
        plain = solve(RpcaProblem(y), SolverOptions(max_iterations=10))
        masked = solve_completion(RpcaProblem(y, known_corruption_mask=np.zeros((4, 12), dtype=bool)),
                                  SolverOptions(max_iterations=10))
        self.assertEqual(masked.mode, "COMPLETION")
        assert_allclose(masked.x_hat, plain.x_hat, rtol=0, atol=1e-12 * (1 + np.abs(plain.x_hat).max()))
        assert_allclose(masked.s_hat, plain.s_hat, rtol=0, atol=1e-12 * (1 + np.abs(plain.s_hat).max()))

    def test_fully_masked_column(self):
        mask = np.zeros((3, 4), dtype=bool)
        mask[:, 2] = True
        with self.assertRaises(ExceptionNode) as ctx:
            solve_completion(RpcaProblem(np.ones((3, 4)), known_corruption_mask=mask))
        self.assertEqual(ctx.exception.error_code, ErrorCode.MASK_ALL_ONES)
        self.assertEqual(ctx.exception.location, "column 2")

    def test_masked_entries_absorb_the_residual(self):
        rng = np.random.default_rng(37)
        y = rng.standard_normal((3, 9))
        mask = rng.random((3, 9)) < 0.2
        mask[:, mask.all(axis=0)] = False
        problem = RpcaProblem(y, known_corruption_mask=mask)
        dec = solve_completion(problem, SolverOptions(max_iterations=5))
        assert_allclose((dec.x_hat + dec.s_hat)[mask], y[mask], atol=1e-12)
        self.assertTrue(dec.cost_is_monotone())


if __name__ == "__main__":
    unittest.main()
