import math

import numpy as np
from django.test import SimpleTestCase

from common.exceptions import BoundViolation, MeasurementSpecError, ParameterError, ShapeError
from gentle import consts
from gentle.services import GentleService
from linalg.services import OperatorService, SamplingService
from measurement.services import PovmService

PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
PLUS_STATE = np.outer(PLUS, PLUS.conj())
KET0 = np.diag([1.0, 0.0]).astype(complex)


def random_projectors(rng, dim, count):
    return [SamplingService.sample_projector(dim, int(rng.integers(0, dim + 1)), rng) for _ in range(count)]


class GentleGapTests(SimpleTestCase):
    def test_certain_acceptance(self):
        gap = GentleService.gentle_gap(SamplingService.sample_state(3, 0), np.eye(3))
        self.assertLess(gap.disturbance, 1e-9)
        self.assertEqual(gap.bound, 0.0)

    def test_plus_state_against_zero_projector(self):
        gap = GentleService.gentle_gap(PLUS_STATE, KET0)
        self.assertAlmostEqual(gap.disturbance, math.sqrt(5) / 2, places=9)
        self.assertAlmostEqual(gap.bound, math.sqrt(2), places=12)

    def test_scaled_identity(self):
        rho = SamplingService.sample_state(3, 1)
        for delta in (0.01, 0.2, 0.7):
            gap = GentleService.gentle_gap(rho, (1 - delta) * np.eye(3))
            self.assertAlmostEqual(gap.disturbance, delta, places=9)
            self.assertAlmostEqual(gap.bound, 2 * math.sqrt(delta), places=9)

    def test_random_effects(self):
        for seed in range(200):
            rng = np.random.default_rng(seed)
            d = int(rng.integers(2, 6))
            gap = GentleService.gentle_gap(SamplingService.sample_state(d, rng), SamplingService.sample_effect(d, rng))
            self.assertGreaterEqual(gap.slack, -1e-9)

    def test_subnormalized_state(self):
        gap = GentleService.gentle_gap(0.5 * PLUS_STATE, KET0)
        self.assertAlmostEqual(gap.disturbance, math.sqrt(5) / 4, places=9)
        self.assertAlmostEqual(gap.bound, 1.0, places=12)

    def test_invalid_effect(self):
        with self.assertRaises(MeasurementSpecError):
            GentleService.gentle_gap(PLUS_STATE, 2 * np.eye(2))
        with self.assertRaises(ShapeError):
            GentleService.gentle_gap(PLUS_STATE, np.eye(3))


class ReversalTests(SimpleTestCase):
    def test_single_projector_is_plain_projection(self):
        for seed in range(20):
            rng = np.random.default_rng(100 + seed)
            rho = SamplingService.sample_state(3, rng)
            p = SamplingService.sample_projector(3, int(rng.integers(1, 3)), rng)
            report = GentleService.polar_reversal(rho, [p])
            self.assertLess(np.max(np.abs(report.post_state - p @ rho @ p)), 1e-9)
            self.assertAlmostEqual(report.disturbance, OperatorService.trace_norm(rho - p @ rho @ p), places=9)

    def test_identity_projectors_leave_state_alone(self):
        rho = SamplingService.sample_state(2, 3)
        for scheme in (GentleService.polar_reversal, GentleService.forward_backward):
            report = scheme(rho, [np.eye(2)] * 4)
            self.assertLess(report.disturbance, 1e-9)
            self.assertLess(abs(report.success_gap), 1e-12)
            self.assertEqual(report.bound, 0.0)

    def test_schemes_are_labelled(self):
        rho = SamplingService.sample_state(2, 4)
        self.assertEqual(GentleService.polar_reversal(rho, [KET0]).scheme, consts.ReversalScheme.POLAR)
        self.assertEqual(GentleService.forward_backward(rho, [KET0]).scheme, consts.ReversalScheme.FORWARD_BACKWARD)

    def test_random_sequences_respect_bounds(self):
        for seed in range(150):
            rng = np.random.default_rng(2000 + seed)
            d, n = int(rng.integers(2, 5)), int(rng.integers(1, 5))
            rho = SamplingService.sample_state(d, rng)
            projectors = random_projectors(rng, d, n)
            for scheme in (GentleService.polar_reversal, GentleService.forward_backward):
                report = scheme(rho, projectors)
                self.assertGreaterEqual(report.slack, -1e-9)
                self.assertGreaterEqual(report.success_slack, -1e-9)

    def test_polar_post_state_has_sequence_success(self):
        rng = np.random.default_rng(7)
        rho = SamplingService.sample_state(3, rng)
        projectors = random_projectors(rng, 3, 3)
        m = projectors[2] @ projectors[1] @ projectors[0]
        report = GentleService.polar_reversal(rho, projectors)
        expected = float(np.real(np.trace(m @ rho @ m.conj().T)))
        self.assertAlmostEqual(float(np.real(np.trace(report.post_state))), expected, places=9)

    def test_rejects_non_projector(self):
        with self.assertRaises(MeasurementSpecError):
            GentleService.polar_reversal(PLUS_STATE, [0.5 * np.eye(2)])
        with self.assertRaises(ParameterError):
            GentleService.forward_backward(PLUS_STATE, [])


class DilatedGentleTests(SimpleTestCase):
    def test_extreme_effects(self):
        rho = SamplingService.sample_state(2, 5)
        accepted = GentleService.dilated_gentle(rho, PovmService.binary(np.eye(2)))
        self.assertLess(accepted.disturbance, 1e-9)

        rejected = GentleService.dilated_gentle(rho, PovmService.binary(np.zeros((2, 2))))
        self.assertAlmostEqual(rejected.disturbance, 1.0, places=9)
        self.assertAlmostEqual(rejected.bound, 2.0, places=12)

    def test_random_effects(self):
        for seed in range(100):
            rng = np.random.default_rng(3000 + seed)
            d = int(rng.integers(2, 5))
            gap = GentleService.dilated_gentle(SamplingService.sample_state(d, rng), PovmService.binary(SamplingService.sample_effect(d, rng)))
            self.assertGreaterEqual(gap.slack, -1e-9)

    def test_violation_raises_when_enforced(self):
        with self.assertRaises(BoundViolation):
            GentleService._check("test", 1.0, 0.5, True)
        GentleService._check("test", 1.0, 0.5, False)
