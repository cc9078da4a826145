import math

import numpy as np
from django.test import SimpleTestCase

from common.exceptions import NotPSDError, ParameterError, ShapeError
from hypotest.services import CqStateService, HypothesisTestService
from linalg.services import OperatorService, SamplingService


def greedy_beta(p, q, eps):
    """Classical Neyman-Pearson: accept outcomes by decreasing likelihood ratio, fractionally at the edge."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    ratio = np.where(q > 0, p / np.where(q > 0, q, 1.0), np.inf)
    order = sorted(range(len(p)), key=lambda i: -ratio[i])
    need, beta = 1.0 - eps, 0.0
    for i in order:
        if need <= 0:
            break
        if p[i] <= 0:
            continue
        take = min(1.0, need / p[i])
        need -= take * p[i]
        beta += take * q[i]
    return beta


PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def sphere_grid(points=400):
    """Fibonacci lattice of Bloch directions."""
    i = np.arange(points) + 0.5
    z = 1.0 - 2.0 * i / points
    r = np.sqrt(1.0 - z * z)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def real_circle(points=400):
    theta = np.linspace(0.0, 2 * np.pi, points, endpoint=False)
    return np.stack([np.sin(theta), np.zeros(points), np.cos(theta)], axis=1)


def qubit_grid_beta(rho, sigma, eps, directions, step=1e-3):
    """Best test a P(n) + b (I - P(n)) over Bloch directions n and a on a grid; b solved exactly."""
    best = math.inf
    a = np.arange(0.0, 1.0 + step / 2, step)
    for n in directions:
        p = 0.5 * (np.eye(2) + sum(c * s for c, s in zip(n, PAULI)))
        pr = float(np.real(np.trace(p @ rho)))
        ps = float(np.real(np.trace(p @ sigma)))
        if pr >= 1.0:
            continue
        b = np.clip((1.0 - eps - a * pr) / (1.0 - pr), 0.0, None)
        ok = b <= 1.0
        if np.any(ok):
            best = min(best, float(np.min(a[ok] * ps + b[ok] * (1.0 - ps))))
    return best


class NeymanPearsonTests(SimpleTestCase):
    def assertFeasible(self, test, rho, eps):
        self.assertGreaterEqual(float(np.real(np.trace(test.q @ rho))), 1 - eps - 1e-9)
        w = np.linalg.eigvalsh(test.q)
        self.assertGreaterEqual(w.min(), -1e-9)
        self.assertLessEqual(w.max(), 1 + 1e-9)

    def test_identical_states(self):
        rho = SamplingService.sample_state(3, 4)
        for eps in (0.0, 0.1, 0.5):
            test = HypothesisTestService.neyman_pearson(rho, rho, eps)
            self.assertAlmostEqual(test.beta, 1 - eps, places=9)
        self.assertAlmostEqual(HypothesisTestService.d_h_epsilon(rho, rho, 0.5), 1.0, places=9)

    def test_pure_against_maximally_mixed(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        test = HypothesisTestService.neyman_pearson(rho, np.eye(2) / 2, 0.0)
        self.assertAlmostEqual(test.beta, 0.5, places=12)
        self.assertLess(np.max(np.abs(test.q - rho)), 1e-12)
        self.assertLess(abs(test.duality_gap), 1e-12)

        psi = SamplingService.sample_pure(4, 2)
        self.assertAlmostEqual(HypothesisTestService.d_h_epsilon(psi, np.eye(4) / 4, 0.0), 2.0, places=10)

    def test_zero_eps_non_commuting_pair(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
        sigma = 0.5 * np.outer(plus, plus.conj()) + np.eye(2) / 4
        test = HypothesisTestService.neyman_pearson(rho, sigma, 0.0)
        self.assertAlmostEqual(test.beta, 0.5, places=12)
        self.assertLess(test.type1_error, 1e-12)
        self.assertTrue(math.isinf(test.multiplier))
        self.assertLess(abs(test.duality_gap), 1e-12)

    def test_zero_eps_rank_deficient_null(self):
        for seed in range(200):
            rng = np.random.default_rng(700 + seed)
            d = int(rng.integers(2, 6))
            rank = int(rng.integers(1, d))
            vectors = [SamplingService.sample_pure_vector(d, rng) for _ in range(rank)]
            rho = sum(w * np.outer(v, v.conj()) for w, v in zip(rng.dirichlet(np.ones(rank)), vectors))
            sigma = SamplingService.sample_state(d, rng)

            test = HypothesisTestService.neyman_pearson(rho, sigma, 0.0)
            exact = float(np.real(np.trace(OperatorService.support_projector(rho) @ sigma)))
            self.assertFeasible(test, rho, 0.0)
            self.assertLess(abs(test.beta - exact), 1e-10)
            self.assertGreater(test.duality_gap, -1e-10)

    def test_null_trace_below_acceptance_target(self):
        rho = np.diag([0.5, 0.0]).astype(complex)
        with self.assertRaises(ParameterError):
            HypothesisTestService.neyman_pearson(rho, np.eye(2) / 2, 0.1)
        test = HypothesisTestService.neyman_pearson(rho, np.eye(2) / 2, 0.5)
        self.assertFeasible(test, rho, 0.5)
        self.assertAlmostEqual(test.beta, 0.5, places=12)

    def test_orthogonal_supports_are_infinite(self):
        value = HypothesisTestService.d_h_epsilon(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), 0.0)
        self.assertTrue(math.isinf(value))

    def test_commuting_matches_greedy_oracle(self):
        test = HypothesisTestService.neyman_pearson(np.diag([0.75, 0.25]), np.diag([0.25, 0.75]), 0.1)
        self.assertLess(abs(test.beta - greedy_beta([0.75, 0.25], [0.25, 0.75], 0.1)), 1e-9)
        self.assertLess(abs(test.duality_gap), 1e-9)

        rng = np.random.default_rng(8)
        for _ in range(100):
            d = int(rng.integers(2, 7))
            p, q = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
            eps = float(rng.choice([0.0, 0.01, 0.1, 0.3]))
            test = HypothesisTestService.neyman_pearson(np.diag(p), np.diag(q), eps)
            self.assertLess(abs(test.beta - greedy_beta(p, q, eps)), 1e-9)

    def test_qubit_grid_oracle(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
        sigma = 0.5 * np.outer(plus, plus.conj()) + 0.5 * np.eye(2) / 2
        test = HypothesisTestService.neyman_pearson(rho, sigma, 0.1)
        self.assertLessEqual(test.beta, qubit_grid_beta(rho, sigma, 0.1, sphere_grid()) + 1e-9)

        # the optimal direction lies in the real plane of rho and sigma
        grid = qubit_grid_beta(rho, sigma, 0.1, np.concatenate([sphere_grid(), real_circle()]))
        self.assertLessEqual(test.beta, grid + 1e-9)
        self.assertLess(grid - test.beta, 1e-3)

    def test_random_instances_feasible_with_small_gap(self):
        for seed in range(150):
            rng = np.random.default_rng(seed)
            d = int(rng.integers(2, 7))
            eps = float(rng.choice([0.0, 0.01, 0.1, 0.3]))
            rho = SamplingService.sample_state(d, rng)
            sigma = SamplingService.sample_state(d, rng)
            test = HypothesisTestService.neyman_pearson(rho, sigma, eps)

            self.assertFeasible(test, rho, eps)
            self.assertLessEqual(test.type1_error, eps + 1e-9)
            self.assertLess(test.duality_gap, 1e-7)
            self.assertGreater(test.duality_gap, -1e-9)
            dual = HypothesisTestService.dual_certificate(test.multiplier, rho, sigma, eps)
            self.assertAlmostEqual(dual, test.dual_value, places=12)

    def test_rank_deficient_sigma(self):
        rho = SamplingService.sample_state(3, 1)
        sigma = SamplingService.sample_pure(3, 2)
        for eps in (0.0, 0.2):
            test = HypothesisTestService.neyman_pearson(rho, sigma, eps)
            self.assertFeasible(test, rho, eps)
            self.assertLess(test.duality_gap, 1e-7)

    def test_zero_multiplier_certificate(self):
        rho, sigma = SamplingService.sample_state(2, 0), SamplingService.sample_state(2, 1)
        self.assertEqual(HypothesisTestService.dual_certificate(0.0, rho, sigma, 0.1), 0.0)
        with self.assertRaises(ParameterError):
            HypothesisTestService.dual_certificate(-1.0, rho, sigma, 0.1)

    def test_monotone_in_eps(self):
        rho, sigma = SamplingService.sample_state(3, 10), SamplingService.sample_state(3, 11)
        values = [HypothesisTestService.d_h_epsilon(rho, sigma, e) for e in np.arange(0.0, 0.51, 0.05)]
        for lo, hi in zip(values, values[1:]):
            self.assertGreaterEqual(hi, lo - 1e-9)
        self.assertGreaterEqual(values[0], -1e-9)

    def test_invalid_inputs(self):
        rho = SamplingService.sample_state(2, 0)
        with self.assertRaises(ParameterError):
            HypothesisTestService.neyman_pearson(rho, rho, 1.0)
        with self.assertRaises(ShapeError):
            HypothesisTestService.neyman_pearson(rho, np.eye(3) / 3, 0.1)
        with self.assertRaises(NotPSDError):
            HypothesisTestService.neyman_pearson(rho, np.diag([1.0, -0.5]), 0.1)


class CqTests(SimpleTestCase):
    def random_cq(self, seed, symbols=3, d=2):
        rng = np.random.default_rng(seed)
        return CqStateService.cq_state(rng.dirichlet(np.ones(symbols)), [SamplingService.sample_state(d, rng) for _ in range(symbols)])

    def test_cq_embed_marginals(self):
        s = self.random_cq(0)
        joint, product = CqStateService.cq_embed(s)
        self.assertAlmostEqual(float(np.real(np.trace(joint))), 1.0, places=10)
        marginal = OperatorService.partial_trace(joint, [3, 2], 0)
        self.assertLess(np.max(np.abs(marginal - s.average)), 1e-12)

    def test_identical_blocks(self):
        rho = SamplingService.sample_state(2, 3)
        s = CqStateService.cq_state([0.3, 0.7], [rho, rho])
        joint, product = CqStateService.cq_embed(s)
        self.assertLess(np.max(np.abs(joint - product)), 1e-14)
        value, _ = HypothesisTestService.d_h_cq(s, 0.2)
        self.assertAlmostEqual(value, -math.log2(0.8), places=8)

    def test_distinguishable_blocks(self):
        s = CqStateService.cq_state([0.5, 0.5], [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
        value, q = HypothesisTestService.d_h_cq(s, 0.0)
        self.assertAlmostEqual(value, 1.0, places=8)
        self.assertEqual(q.shape, (4, 4))

    def test_blockwise_matches_dense(self):
        for seed in range(40):
            s = self.random_cq(100 + seed, symbols=2 + seed % 2, d=2)
            eps = (0.0, 0.05, 0.2)[seed % 3]
            joint, product = CqStateService.cq_embed(s)
            block_test = HypothesisTestService.cq_test(s, eps)
            dense_test = HypothesisTestService.neyman_pearson(joint, product, eps)
            self.assertLess(abs(block_test.beta - dense_test.beta), 1e-9)

    def test_side_information(self):
        s = self.random_cq(7)
        value, q = HypothesisTestService.d_h_side_information(s, s.average, 0.1)
        joint, _ = CqStateService.cq_embed(s)
        dense = HypothesisTestService.neyman_pearson(joint, np.kron(np.eye(3), s.average) / 3, 0.1)
        self.assertAlmostEqual(value, HypothesisTestService.bits(3 * dense.beta), places=6)

    def test_invalid_prior(self):
        rho = SamplingService.sample_state(2, 0)
        with self.assertRaises(ParameterError):
            CqStateService.cq_state([0.5, 0.6], [rho, rho])
        with self.assertRaises(ShapeError):
            CqStateService.cq_state([1.0], [rho, rho])

    def test_prior_within_tolerance_is_renormalized(self):
        rho = SamplingService.sample_state(2, 0)
        s = CqStateService.cq_state([0.5, 0.4999999995], [rho, rho])
        self.assertAlmostEqual(math.fsum(s.prior), 1.0, places=15)
        self.assertAlmostEqual(s.prior[0], 0.5 / 0.9999999995, places=15)
