import numpy as np
from django.test import SimpleTestCase, override_settings

from common.exceptions import MeasurementSpecError, SizeError
from linalg.services import OperatorHelper, SamplingService
from measurement import consts
from measurement.services import DilationService, PovmService

PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


def accept_probability(dilation, rho):
    return OperatorHelper.expectation(DilationService.accept_projector(dilation), DilationService.prepare(dilation, rho))


class PovmServiceTests(SimpleTestCase):
    def test_binary_rejects_out_of_interval(self):
        with self.assertRaises(MeasurementSpecError):
            PovmService.binary(np.diag([1.5, 0.0]))

    def test_general_requires_completeness(self):
        with self.assertRaises(MeasurementSpecError):
            PovmService.general([np.diag([1.0, 0.0]), np.diag([0.0, 0.5])])
        with self.assertRaises(MeasurementSpecError):
            PovmService.general([])

    def test_as_binary_reads_accept_element(self):
        lam = np.diag([0.2, 0.9])
        p = PovmService.as_binary(PovmService.general([np.eye(2) - lam, lam]))
        self.assertTrue(np.allclose(p.accept, lam))
        self.assertTrue(np.allclose(PovmService.from_binary(p).elements[consts.REJECT_OUTCOME], np.eye(2) - lam))


class BinaryDilationTests(SimpleTestCase):
    def test_deterministic_outcomes(self):
        rho = SamplingService.sample_state(3, 0)
        self.assertAlmostEqual(accept_probability(DilationService.dilate_binary(PovmService.binary(np.eye(3))), rho), 1.0, places=12)
        self.assertAlmostEqual(accept_probability(DilationService.dilate_binary(PovmService.binary(np.zeros((3, 3)))), rho), 0.0, places=12)

    def test_plus_projector_on_zero(self):
        dilation = DilationService.dilate_binary(PovmService.binary(np.outer(PLUS, PLUS.conj())))
        self.assertAlmostEqual(accept_probability(dilation, np.diag([1.0, 0.0])), 0.5, places=12)

    def test_unitary_and_projector_identities(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            d = int(rng.integers(2, 7))
            lam = SamplingService.sample_effect(d, rng)
            rho = SamplingService.sample_state(d, rng)
            dilation = DilationService.dilate_binary(PovmService.binary(lam))

            self.assertTrue(dilation.is_binary)
            self.assertTrue(OperatorHelper.is_unitary(dilation.unitary))
            pi = DilationService.accept_projector(dilation)
            self.assertLess(np.max(np.abs(pi @ pi - pi)), 1e-9)
            self.assertLess(abs(accept_probability(dilation, rho) - OperatorHelper.expectation(lam, rho)), 1e-9)
            self.assertLess(np.max(np.abs(pi + DilationService.reject_projector(dilation) - np.eye(2 * d))), 1e-12)

    def test_reject_projector_is_binary_only(self):
        dilation = DilationService.dilate_general(PovmService.general([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))
        with self.assertRaises(MeasurementSpecError):
            DilationService.reject_projector(dilation)

    @override_settings(CQSEQDEC_MAX_DIM=4)
    def test_size_limit(self):
        with self.assertRaises(SizeError):
            DilationService.dilate_binary(PovmService.binary(np.eye(3) / 2))


class GeneralDilationTests(SimpleTestCase):
    def test_projective_measurement(self):
        dilation = DilationService.dilate_general(PovmService.general([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))
        probs = DilationService.outcome_distribution(dilation, np.diag([0.3, 0.7]))
        self.assertTrue(np.allclose(probs, [0.3, 0.7], atol=1e-12))

    def test_trine(self):
        elements = []
        for k in range(3):
            phi = np.array([np.cos(2 * np.pi * k / 3), np.sin(2 * np.pi * k / 3)], dtype=complex)
            elements.append(2 / 3 * np.outer(phi, phi.conj()))
        dilation = DilationService.dilate_general(PovmService.general(elements))
        self.assertEqual(dilation.probe_dim, 3)
        self.assertTrue(OperatorHelper.is_unitary(dilation.unitary))
        self.assertTrue(np.allclose(DilationService.outcome_distribution(dilation, np.eye(2) / 2), [1 / 3] * 3, atol=1e-9))

    def test_random_povms_follow_born_rule(self):
        for seed in range(60):
            rng = np.random.default_rng(1000 + seed)
            d, k = int(rng.integers(1, 5)), int(rng.integers(1, 5))
            elements = SamplingService.sample_povm(d, k, rng)
            rho = SamplingService.sample_state(d, rng)
            dilation = DilationService.dilate_general(PovmService.general(elements))

            probs = DilationService.outcome_distribution(dilation, rho)
            born = [OperatorHelper.expectation(e, rho) for e in elements]
            self.assertLess(np.max(np.abs(probs - born)), 1e-9)
            self.assertLess(abs(probs.sum() - 1), 1e-10)

    def test_completion_is_reproducible(self):
        elements = SamplingService.sample_povm(3, 3, 5)
        a = DilationService.dilate_general(PovmService.general(elements)).unitary
        b = DilationService.dilate_general(PovmService.general(elements)).unitary
        self.assertEqual(a.tobytes(), b.tobytes())

    def test_binary_and_general_agree(self):
        for seed in range(30):
            lam = SamplingService.sample_effect(3, seed)
            rho = SamplingService.sample_state(3, seed + 500)
            binary = DilationService.dilate_binary(PovmService.binary(lam))
            general = DilationService.dilate_general(PovmService.general([np.eye(3) - lam, lam]))
            self.assertLess(
                np.max(np.abs(DilationService.outcome_distribution(binary, rho) - DilationService.outcome_distribution(general, rho))),
                1e-9,
            )
