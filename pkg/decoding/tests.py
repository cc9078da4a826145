import math

import numpy as np
from django.test import SimpleTestCase

from common.exceptions import BoundViolation, ParameterError, RangeError, SymbolError
from decoding import consts
from decoding.entities import UnionBoundCheck
from decoding.services import (
    CapacityService,
    ChannelService,
    KrausService,
    RandomCodingService,
    SequentialDecoderService,
)
from hypotest.services import CqStateService
from linalg.services import OperatorHelper, SamplingService


def random_instance(seed, d=None, m=None):
    rng = np.random.default_rng(seed)
    d = d or int(rng.integers(2, 5))
    m = m or int(rng.integers(1, 4))
    return SamplingService.sample_state(d, rng), [SamplingService.sample_effect(d, rng) for _ in range(m)]


class PositionOperatorTests(SimpleTestCase):
    def setUp(self):
        rho = SamplingService.sample_state(2, 0)
        self.state = CqStateService.cq_state([0.5, 0.5], [rho, rho], ["a", "b"])

    def test_identity_test(self):
        for x in ("a", "b"):
            self.assertTrue(np.allclose(SequentialDecoderService.position_operator(np.eye(4), self.state, x), np.eye(2)))

    def test_single_block_support(self):
        gamma = SamplingService.sample_effect(2, 1)
        q = np.kron(np.diag([1.0, 0.0]), gamma)
        self.assertTrue(np.allclose(SequentialDecoderService.position_operator(q, self.state, "a"), gamma))
        self.assertTrue(np.allclose(SequentialDecoderService.position_operator(q, self.state, "b"), 0))

    def test_unknown_symbol(self):
        with self.assertRaises(SymbolError):
            SequentialDecoderService.position_operator(np.eye(4), self.state, "c")


class KrausMapTests(SimpleTestCase):
    def test_extreme_operators(self):
        tau = SamplingService.sample_state(3, 2)
        self.assertLess(np.max(np.abs(KrausService.reject_map(np.zeros((3, 3))).apply(tau) - tau)), 1e-12)
        self.assertLess(np.max(np.abs(KrausService.reject_map(np.eye(3)).apply(tau))), 1e-12)

    def test_trace_contract(self):
        for seed in range(50):
            tau, (lam,) = random_instance(seed, m=1)
            eye = np.eye(lam.shape[0])
            rejected = np.trace(KrausService.reject_map(lam).apply(tau))
            accepted = np.trace(KrausService.accept_map(lam).apply(tau))
            self.assertLess(abs(rejected - np.trace((eye - lam) @ tau)), 1e-10)
            self.assertLess(abs(accepted - np.trace(lam @ tau)), 1e-10)


class SuccessProbabilityTests(SimpleTestCase):
    def test_single_message(self):
        rho, ops = random_instance(3, m=1)
        self.assertAlmostEqual(SequentialDecoderService.success_prob_exact(rho, ops, 0), OperatorHelper.expectation(ops[0], rho), places=12)
        self.assertAlmostEqual(SequentialDecoderService.success_prob_dilated(rho, ops, 0), OperatorHelper.expectation(ops[0], rho), places=10)

    def test_diagonal_matches_classical_recursion(self):
        rng = np.random.default_rng(4)
        r = rng.dirichlet(np.ones(3))
        lams = [rng.uniform(0, 1, 3) for _ in range(3)]
        for m in range(3):
            classical = float(np.sum(r * lams[m] * np.prod([1 - lams[j] for j in range(m)], axis=0)))
            exact = SequentialDecoderService.success_prob_exact(np.diag(r), [np.diag(x) for x in lams], m)
            self.assertAlmostEqual(exact, classical, places=12)

    def test_compressed_matches_dilated(self):
        for seed in range(120):
            rho, ops = random_instance(100 + seed)
            for m in range(len(ops)):
                self.assertLess(
                    abs(SequentialDecoderService.success_prob_exact(rho, ops, m) - SequentialDecoderService.success_prob_dilated(rho, ops, m)),
                    1e-9,
                )

    def test_certain_acceptance(self):
        rho = SamplingService.sample_state(2, 5)
        self.assertAlmostEqual(SequentialDecoderService.success_prob_dilated(rho, [np.eye(2)], 0), 1.0, places=12)
        self.assertAlmostEqual(SequentialDecoderService.success_prob_dilated(rho, [np.eye(2), np.eye(2)], 1), 0.0, places=12)

    def test_probability_bookkeeping(self):
        for seed in range(50):
            rho, ops = random_instance(200 + seed)
            total = sum(SequentialDecoderService.success_prob_exact(rho, ops, m) for m in range(len(ops)))
            self.assertLess(abs(total + SequentialDecoderService.failure_prob(rho, ops) - 1), 1e-8)

    def test_range(self):
        rho, ops = random_instance(6, m=2)
        with self.assertRaises(RangeError):
            SequentialDecoderService.success_prob_exact(rho, ops, 2)


class UnionBoundTests(SimpleTestCase):
    def test_perfect_measurements(self):
        check = SequentialDecoderService.union_bound_check(SamplingService.sample_state(2, 0), [np.eye(2)] * 3)
        self.assertAlmostEqual(check.lhs, 0.0, places=12)
        self.assertEqual(check.rhs, 0.0)

    def test_single_commuting_projector(self):
        sigma = np.diag([0.6, 0.4])
        check = SequentialDecoderService.union_bound_check(sigma, [np.diag([1.0, 0.0])])
        self.assertAlmostEqual(check.lhs, 0.4, places=12)
        self.assertAlmostEqual(check.rhs, 2 * math.sqrt(0.4), places=12)

    def test_random_povms(self):
        for seed in range(300):
            rng = np.random.default_rng(seed)
            d, m = int(rng.integers(2, 5)), int(rng.integers(1, 5))
            sigma = SamplingService.sample_state(d, rng) * rng.uniform(0, 1)
            lambdas = [SamplingService.sample_effect(d, rng) for _ in range(m)]
            self.assertGreaterEqual(SequentialDecoderService.union_bound_check(sigma, lambdas).slack, -1e-8)

    def test_random_projectors(self):
        for seed in range(200):
            rng = np.random.default_rng(5000 + seed)
            d, m = int(rng.integers(2, 6)), int(rng.integers(1, 5))
            projectors = [SamplingService.sample_projector(d, int(rng.integers(0, d + 1)), rng) for _ in range(m)]
            check = SequentialDecoderService.union_bound_check(SamplingService.sample_state(d, rng), projectors)
            self.assertGreaterEqual(check.slack, -1e-8)

    def test_compressed_matches_dilated(self):
        for seed in range(40):
            sigma, lambdas = random_instance(900 + seed)
            compressed = SequentialDecoderService.union_bound_check(sigma, lambdas)
            dilated = SequentialDecoderService.union_bound_dilated(sigma, lambdas)
            self.assertLess(abs(compressed.lhs - dilated.lhs), 1e-9)

    def test_enforce_raises(self):
        with self.assertRaises(BoundViolation):
            SequentialDecoderService._enforce(UnionBoundCheck(lhs=1.0, rhs=0.5), True, "Union bound")


class TrajectoryTests(SimpleTestCase):
    def test_classical_scan(self):
        ops = [np.diag([0.0, 1.0, 0.0]), np.diag([1.0, 0.0, 0.0]), np.eye(3)]
        result = SequentialDecoderService.decode_trajectory(np.diag([1.0, 0.0, 0.0]), ops, 0)
        self.assertEqual(result.decoded, 1)
        self.assertEqual(result.path, (consts.REJECT, consts.ACCEPT))

        failure = SequentialDecoderService.decode_trajectory(np.diag([0.0, 0.0, 1.0]), ops[:2], 0)
        self.assertIsNone(failure.decoded)
        self.assertEqual(failure.path, (consts.REJECT, consts.REJECT))

    def test_same_seed_same_path(self):
        rho, ops = random_instance(7, m=3)
        paths = {SequentialDecoderService.decode_trajectory(rho, ops, 42).path for _ in range(5)}
        self.assertEqual(len(paths), 1)

    def test_frequencies_converge(self):
        n = 100_000
        for seed in range(20):
            rho, ops = random_instance(8 + seed)
            decoded = SequentialDecoderService.decode_trajectories(rho, ops, n, seed)
            for m in range(len(ops)):
                p = SequentialDecoderService.success_prob_exact(rho, ops, m)
                freq = np.count_nonzero(decoded == m) / n
                self.assertLess(abs(freq - p), 4 * math.sqrt(max(p * (1 - p), 1e-12) / n) + 1e-12)

    def test_batched_classical_scan(self):
        ops = [np.diag([0.0, 1.0, 0.0]), np.diag([1.0, 0.0, 0.0]), np.eye(3)]
        decoded = SequentialDecoderService.decode_trajectories(np.diag([1.0, 0.0, 0.0]), ops, 50, 1)
        self.assertTrue(np.all(decoded == 1))
        failures = SequentialDecoderService.decode_trajectories(np.diag([0.0, 0.0, 1.0]), ops[:2], 50, 1)
        self.assertTrue(np.all(failures == -1))
        with self.assertRaises(ParameterError):
            SequentialDecoderService.decode_trajectories(np.diag([1.0, 0.0, 0.0]), ops, 0, 1)


class CoherentDecoderTests(SimpleTestCase):
    def test_norm_and_prefix_weights(self):
        for seed in range(20):
            rng = np.random.default_rng(300 + seed)
            d, m = int(rng.integers(2, 4)), int(rng.integers(1, 5))
            psi = SamplingService.sample_pure_vector(d, rng)
            ops = [SamplingService.sample_effect(d, rng) for _ in range(m)]
            branches = SequentialDecoderService.coherent_decode(psi, ops)

            self.assertEqual(len(branches), 2 ** m)
            self.assertLess(abs(sum(SequentialDecoderService.branch_weights(branches).values()) - 1), 1e-9)
            rho = np.outer(psi, psi.conj())
            for j in range(m):
                exact = SequentialDecoderService.success_prob_exact(rho, ops, j)
                self.assertLess(abs(SequentialDecoderService.prefix_weight(branches, "0" * j + "1") - exact), 1e-9)

    def test_classical_case_accepts_second_message(self):
        ops = [np.diag([0.0, 1.0]), np.diag([1.0, 0.0])]
        weights = SequentialDecoderService.branch_weights(SequentialDecoderService.coherent_decode(np.array([1.0, 0.0]), ops))
        self.assertAlmostEqual(weights["01"], 1.0, places=12)
        self.assertAlmostEqual(sum(weights.values()), 1.0, places=12)

    def test_rejects_unnormalized_input(self):
        with self.assertRaises(ParameterError):
            SequentialDecoderService.coherent_decode(np.array([1.0, 1.0]), [np.eye(2)])


class ChannelServiceTests(SimpleTestCase):
    def test_two_pure_states_overlap(self):
        channel = ChannelService.two_pure_states(0.5)
        fidelity = OperatorHelper.expectation(channel.output("0"), channel.output("1"))
        self.assertAlmostEqual(fidelity, 0.25, places=12)

    def test_tensor_power(self):
        channel = ChannelService.tensor_power(ChannelService.noiseless_bits(), 2)
        self.assertEqual(channel.symbols, ("00", "01", "10", "11"))
        self.assertTrue(np.allclose(channel.output("10"), np.diag([0, 0, 1, 0])))
        self.assertTrue(np.allclose(ChannelService.product_prior([0.25, 0.75], 2), [0.0625, 0.1875, 0.1875, 0.5625]))

    def test_payload_round_trip(self):
        channel = ChannelService.two_pure_states(0.3)
        again = ChannelService.from_payload(ChannelService.to_payload(channel))
        self.assertEqual(again.symbols, channel.symbols)
        for x in channel.symbols:
            self.assertTrue(np.array_equal(again.output(x), channel.output(x)))

    def test_codebook_symbols(self):
        with self.assertRaises(SymbolError):
            ChannelService.codebook(["0", "2"], ChannelService.noiseless_bits())


class DecodingStatsTests(SimpleTestCase):
    def test_modes_agree(self):
        channel = ChannelService.two_pure_states(0.5)
        codebook = ChannelService.codebook(["0", "1", "0"], channel)
        spec = SequentialDecoderService.decoder_spec(channel, [0.5, 0.5], codebook, 0.05)

        exact = SequentialDecoderService.decoding_stats(channel, codebook, spec, mode=consts.DecodeMode.EXACT)
        dilated = SequentialDecoderService.decoding_stats(channel, codebook, spec, mode=consts.DecodeMode.DILATED)
        coherent = SequentialDecoderService.decoding_stats(channel, codebook, spec, mode=consts.DecodeMode.COHERENT)
        for other in (dilated, coherent):
            self.assertTrue(np.allclose(exact.per_message_success, other.per_message_success, atol=1e-9))

        self.assertAlmostEqual(exact.average_error, 1 - float(np.mean(exact.per_message_success)), places=12)
        self.assertGreaterEqual(exact.maximal_error, exact.average_error)
        for p, bound in zip(exact.per_message_success, exact.per_message_sen_rhs):
            self.assertLessEqual(1 - p, bound + 1e-8)
        self.assertLessEqual(exact.average_error, exact.bound_value + 1e-8)

    def test_trajectory_mode_is_seeded(self):
        channel = ChannelService.two_pure_states(0.5)
        codebook = ChannelService.codebook(["0", "1"], channel)
        spec = SequentialDecoderService.decoder_spec(channel, [0.5, 0.5], codebook, 0.05)
        a = SequentialDecoderService.decoding_stats(channel, codebook, spec, mode=consts.DecodeMode.TRAJECTORY, trials=200, seed=3)
        b = SequentialDecoderService.decoding_stats(channel, codebook, spec, mode=consts.DecodeMode.TRAJECTORY, trials=200, seed=3)
        self.assertEqual(a.per_message_success, b.per_message_success)

    def test_coherent_needs_pure_outputs(self):
        channel = ChannelService.constant_channel(np.eye(2) / 2)
        codebook = ChannelService.codebook(["0"], channel)
        spec = SequentialDecoderService.decoder_spec(channel, [0.5, 0.5], codebook, 0.1)
        with self.assertRaises(ParameterError):
            SequentialDecoderService.decoding_stats(channel, codebook, spec, mode=consts.DecodeMode.COHERENT)


class RandomCodingTests(SimpleTestCase):
    def test_single_message_expectation(self):
        channel = ChannelService.two_pure_states(0.5)
        setup = RandomCodingService.prepare(channel, [0.5, 0.5], 0.05)
        expected = sum(
            p * (1 - OperatorHelper.expectation(a, rho))
            for p, a, rho in zip(setup.state.prior, setup.accept_ops, setup.state.blocks)
        )
        self.assertAlmostEqual(expected, 1 - setup.tr_q_joint, places=12)
        self.assertLessEqual(expected, 0.05 + 1e-9)

        errors = RandomCodingService.run_trials(setup, message_count=1, seed=1, start=0, stop=5)
        for k, err in enumerate(errors):
            picked = OperatorHelper.deterministic_rng(seed=1, stream=k).choice(2, size=1, p=setup.state.prior)[0]
            self.assertAlmostEqual(err, 1 - OperatorHelper.expectation(setup.accept_ops[picked], setup.state.blocks[picked]), places=12)

    def test_identical_outputs_closed_form(self):
        r = np.array([0.7, 0.3])
        channel = ChannelService.constant_channel(np.diag(r))
        setup = RandomCodingService.prepare(channel, [0.5, 0.5], 0.1)
        a = np.real(np.diag(setup.accept_ops[0]))
        self.assertTrue(np.allclose(setup.accept_ops[0], setup.accept_ops[1]))

        m_count = 3
        closed = 1 - np.mean([np.sum(r * a * (1 - a) ** m) for m in range(m_count)])
        report = RandomCodingService.random_coding_experiment(channel, [0.5, 0.5], m_count, 0.1, 20, 4)
        self.assertLess(abs(report.empirical_error - closed), 1e-9)
        self.assertLess(report.stderr, 1e-9)

    def test_two_pure_state_experiment_under_bound(self):
        channel = ChannelService.two_pure_states(0.5)
        report = RandomCodingService.random_coding_experiment(channel, [0.5, 0.5], 2, 0.01, 1000, 7)
        self.assertEqual(report.trials, 1000)
        self.assertLessEqual(report.empirical_error, report.analytic_bound)
        self.assertLessEqual(report.intermediate_bound, report.analytic_bound + 1e-12)

    def test_bound_holds_on_base_and_tensor_power_channels(self):
        base = ChannelService.two_pure_states(0.5)
        cases = [
            (base, [0.5, 0.5]),
            (ChannelService.tensor_power(base, 3), ChannelService.product_prior([0.5, 0.5], 3)),
        ]
        for channel, prior in cases:
            for message_count in (2, 4):
                for eps_prime in (0.01, 0.05):
                    with self.subTest(symbols=len(channel.symbols), messages=message_count, eps_prime=eps_prime):
                        report = RandomCodingService.random_coding_experiment(channel, prior, message_count, eps_prime, 1000, 7)
                        self.assertEqual(report.trials, 1000)
                        self.assertLessEqual(report.empirical_error, report.analytic_bound + 3 * report.stderr)

    def test_trials_split_is_seed_stable(self):
        setup = RandomCodingService.prepare(ChannelService.two_pure_states(0.4), [0.3, 0.7], 0.02)
        whole = RandomCodingService.run_trials(setup, message_count=3, seed=9, start=0, stop=30)
        parts = []
        for start in range(0, 30, 7):
            parts.extend(RandomCodingService.run_trials(setup, message_count=3, seed=9, start=start, stop=min(start + 7, 30)))
        self.assertEqual(whole, parts)

    def test_invalid_counts(self):
        with self.assertRaises(ParameterError):
            RandomCodingService.random_coding_experiment(ChannelService.noiseless_bits(), [0.5, 0.5], 0, 0.01, 10, 0)


class CapacityTests(SimpleTestCase):
    def test_noiseless_bit_matches_classical_value(self):
        grid = [0.01, 0.02, 0.03]
        best = CapacityService.capacity_lower_bound(ChannelService.noiseless_bits(), 0.4, [[0.5, 0.5]], grid)
        expected = max(-math.log2((1 - e) / 2) + math.log2(0.04 - e) for e in grid)
        self.assertAlmostEqual(best.bits, expected, places=6)
        self.assertEqual(best.evaluations, 3)

    def test_identical_outputs_are_not_positive(self):
        channel = ChannelService.constant_channel(SamplingService.sample_state(2, 3))
        best = CapacityService.capacity_lower_bound(channel, 0.2, [[0.5, 0.5], [0.2, 0.8]], [0.001, 0.005])
        self.assertLessEqual(best.bits, 0.0)

    def test_monotone_in_eps(self):
        channel = ChannelService.two_pure_states(0.5)
        grid = [0.005, 0.01, 0.02]
        values = [CapacityService.capacity_lower_bound(channel, eps, [[0.5, 0.5]], grid).bits for eps in (0.3, 0.4, 0.5)]
        self.assertTrue(values[0] <= values[1] <= values[2])

    def test_infeasible_grids(self):
        channel = ChannelService.noiseless_bits()
        with self.assertRaises(ParameterError):
            CapacityService.capacity_lower_bound(channel, 0.2, [[0.5, 0.5]], [0.01])
        with self.assertRaises(ParameterError):
            CapacityService.capacity_lower_bound(channel, 0.4, [], [0.01])
        with self.assertRaises(ParameterError):
            CapacityService.capacity_lower_bound(channel, 0.4, [[0.5, 0.5]], [])
