import numpy as np
from django.test import SimpleTestCase, override_settings

from common.exceptions import NotHermitianError, NotPSDError, ParameterError, ShapeError, SizeError
from linalg.services import OperatorHelper, OperatorService, SamplingService
from linalg.utils import decode_matrix, encode_matrix

KET0 = np.array([[1, 0], [0, 0]], dtype=complex)
KET1 = np.array([[0, 0], [0, 1]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


def random_hermitian(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


class OperatorHelperTests(SimpleTestCase):
    def test_hermitian_symmetrizes_within_tolerance(self):
        m = np.array([[1, 1e-11], [0, 2]], dtype=complex)
        h = OperatorHelper.hermitian(m)
        self.assertTrue(np.array_equal(h, h.conj().T))

    def test_hermitian_rejects_skew(self):
        with self.assertRaises(NotHermitianError):
            OperatorHelper.hermitian(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_non_square_and_non_finite(self):
        with self.assertRaises(ShapeError):
            OperatorHelper.as_square(np.zeros((2, 3)))
        with self.assertRaises(ParameterError):
            OperatorHelper.as_matrix(np.array([[np.nan]]))

    def test_density_clips_tiny_negative_eigenvalue(self):
        rho = np.diag([1 + 5e-10, -5e-10]).astype(complex)
        out = OperatorHelper.density(rho)
        self.assertGreaterEqual(np.linalg.eigvalsh(out).min(), -1e-15)

    def test_density_rejects_negative_and_bad_trace(self):
        with self.assertRaises(NotPSDError):
            OperatorHelper.density(np.diag([1.1, -0.1]))
        with self.assertRaises(ParameterError):
            OperatorHelper.density(np.diag([0.5, 0.4]))
        OperatorHelper.density(np.diag([0.5, 0.4]), subnormalized=True)

    def test_effect_interval(self):
        OperatorHelper.effect(np.eye(2))
        with self.assertRaises(NotPSDError):
            OperatorHelper.effect(2 * np.eye(2))

    @override_settings(CQSEQDEC_MAX_DIM=8)
    def test_dimension_cap_from_settings(self):
        with self.assertRaises(SizeError):
            OperatorService.tensor(np.eye(4), np.eye(4))

    def test_deterministic_rng_streams(self):
        a = OperatorHelper.deterministic_rng(seed=7, stream=3).random(4)
        b = OperatorHelper.deterministic_rng(seed=7, stream=3).random(4)
        c = OperatorHelper.deterministic_rng(seed=7, stream=4).random(4)
        self.assertTrue(np.array_equal(a, b))
        self.assertFalse(np.array_equal(a, c))


class OperatorServiceTests(SimpleTestCase):
    def test_tensor_examples(self):
        self.assertTrue(np.allclose(OperatorService.tensor(np.eye(2), np.eye(2)), np.eye(4)))
        self.assertTrue(np.allclose(OperatorService.tensor(KET0, KET1), np.diag([0, 1, 0, 0])))

    def test_tensor_mixed_product(self):
        rng = np.random.default_rng(1)
        a, b, c, d = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(4))
        left = OperatorService.tensor(a, b) @ OperatorService.tensor(c, d)
        self.assertLess(np.max(np.abs(left - OperatorService.tensor(a @ c, b @ d))), 1e-12)

    def test_partial_trace(self):
        rho = SamplingService.sample_state(2, 1)
        tau = SamplingService.sample_state(3, 2)
        out = OperatorService.partial_trace(OperatorService.tensor(rho, tau), [2, 3], 1)
        self.assertLess(np.max(np.abs(out - rho)), 1e-12)

        phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        bell = np.outer(phi, phi.conj())
        for factor in (0, 1):
            self.assertTrue(np.allclose(OperatorService.partial_trace(bell, [2, 2], factor), np.eye(2) / 2))

    def test_partial_trace_preserves_trace(self):
        rng = np.random.default_rng(2)
        m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        out = OperatorService.partial_trace(m, [2, 3], 0)
        self.assertLess(abs(np.trace(out) - np.trace(m)), 1e-12)
        with self.assertRaises(ShapeError):
            OperatorService.partial_trace(m, [2, 2], 0)

    def test_embed_operator_matches_kron_order(self):
        rng = np.random.default_rng(3)
        a = random_hermitian(rng, 2)
        dims = [2, 3, 2]
        lifted = OperatorService.embed_operator(a, dims, [2])
        expected = np.kron(np.eye(6), a)
        self.assertLess(np.max(np.abs(lifted - expected)), 1e-12)

        ab = np.kron(random_hermitian(rng, 2), random_hermitian(rng, 2))
        lifted = OperatorService.embed_operator(ab, dims, [0, 2])
        state = np.kron(np.kron(KET0, np.eye(3) / 3), KET1)
        direct = np.trace(ab @ np.kron(KET0, KET1))
        self.assertLess(abs(np.trace(lifted @ state) - direct), 1e-12)

    def test_eig_hermitian_descending(self):
        w, _ = OperatorService.eig_hermitian(PAULI_Z)
        self.assertTrue(np.allclose(w, [1, -1]))
        w, _ = OperatorService.eig_hermitian(np.diag([0.2, 0.8]))
        self.assertTrue(np.allclose(w, [0.8, 0.2]))

    def test_eig_reconstruction_and_unitarity(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            h = random_hermitian(rng, int(rng.integers(1, 6)))
            w, v = OperatorService.eig_hermitian(h)
            self.assertLess(np.max(np.abs(v.conj().T @ v - np.eye(len(w)))), 1e-10)
            self.assertLess(np.max(np.abs(OperatorService.from_spectrum(w, v) - h)), 1e-9)

    def test_psd_sqrt(self):
        self.assertTrue(np.allclose(OperatorService.psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0])))
        p = SamplingService.sample_projector(4, 2, 5)
        self.assertLess(np.max(np.abs(OperatorService.psd_sqrt(p) - p)), 1e-9)
        for seed in range(100):
            a = SamplingService.sample_state(4, seed)
            r = OperatorService.psd_sqrt(a)
            self.assertLess(np.max(np.abs(r @ r - a)), 1e-9)
        with self.assertRaises(NotPSDError):
            OperatorService.psd_sqrt(np.diag([1.0, -1.0]))

    def test_trace_norm(self):
        self.assertEqual(OperatorService.trace_norm(np.zeros((2, 2))), 0.0)
        self.assertAlmostEqual(OperatorService.trace_norm(KET0 - KET1), 2.0, places=12)
        self.assertAlmostEqual(OperatorService.trace_norm(np.diag([0.5, -0.5])), 1.0, places=12)

    def test_trace_norm_unitary_invariance(self):
        rng = np.random.default_rng(6)
        for seed in range(100):
            a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            u = SamplingService.sample_unitary(3, 2 * seed)
            v = SamplingService.sample_unitary(3, 2 * seed + 1)
            self.assertLess(abs(OperatorService.trace_norm(u @ a @ v) - OperatorService.trace_norm(a)), 1e-9)

    def test_polar_unitary(self):
        v, abs_m = OperatorService.polar_unitary(np.eye(2))
        self.assertTrue(np.allclose(v, np.eye(2)) and np.allclose(abs_m, np.eye(2)))
        v, abs_m = OperatorService.polar_unitary(np.diag([2.0, 3.0]))
        self.assertTrue(np.allclose(v, np.eye(2)) and np.allclose(abs_m, np.diag([2.0, 3.0])))

        for seed in range(50):
            m = np.eye(4, dtype=complex)
            for k in range(3):
                m = SamplingService.sample_projector(4, 1 + (seed + k) % 3, 10 * seed + k) @ m
            v, abs_m = OperatorService.polar_unitary(m)
            self.assertTrue(OperatorHelper.is_unitary(v))
            self.assertLess(np.max(np.abs(v @ m - abs_m)), 1e-9)
            self.assertLess(np.max(np.abs(abs_m - OperatorService.psd_sqrt(m.conj().T @ m))), 1e-6)


class SamplingServiceTests(SimpleTestCase):
    def test_sample_state(self):
        for seed in range(20):
            rho = SamplingService.sample_state(3, seed)
            self.assertLess(abs(np.trace(rho) - 1), 1e-12)
            self.assertGreaterEqual(np.linalg.eigvalsh(rho).min(), -1e-12)

    def test_sample_povm(self):
        elements = SamplingService.sample_povm(3, 4, 11)
        self.assertLess(np.max(np.abs(sum(elements) - np.eye(3))), 1e-10)
        for e in elements:
            self.assertGreaterEqual(np.linalg.eigvalsh(e).min(), -1e-12)

    def test_sample_projector_rank(self):
        p = SamplingService.sample_projector(5, 2, 3)
        self.assertTrue(OperatorHelper.is_projector(p))
        self.assertAlmostEqual(float(np.real(np.trace(p))), 2.0, places=10)

    def test_same_seed_same_bytes(self):
        self.assertEqual(SamplingService.sample_state(4, 9).tobytes(), SamplingService.sample_state(4, 9).tobytes())
        self.assertEqual(SamplingService.sample_pure(4, 9).tobytes(), SamplingService.sample_pure(4, 9).tobytes())


class MatrixCodecTests(SimpleTestCase):
    def test_encoding_is_exact(self):
        m = SamplingService.sample_state(3, 0)
        self.assertTrue(np.array_equal(decode_matrix(encode_matrix(m)), m))
