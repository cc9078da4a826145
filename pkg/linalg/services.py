import hashlib
import logging
from math import prod

import numpy as np
import scipy.linalg as sla
from django.conf import settings

from common.exceptions import NotHermitianError, NotPSDError, NumericError, ParameterError, ShapeError, SizeError
from linalg import consts

logger = logging.getLogger(__name__)


class OperatorHelper:
    @staticmethod
    def check_dim(total: int) -> None:
        limit = settings.CQSEQDEC_MAX_DIM
        if total > limit:
            raise SizeError(f"Total dimension {total} exceeds the maximum of {limit} (CQSEQDEC_MAX_DIM).", dim=total)

    @staticmethod
    def as_matrix(m) -> np.ndarray:
        a = np.asarray(m, dtype=complex)
        if a.ndim != 2:
            raise ShapeError(f"Expected a matrix, got an array with {a.ndim} axes.")
        if not np.all(np.isfinite(a)):
            raise ParameterError("Matrix has non-finite entries.")
        return a

    @staticmethod
    def as_square(m) -> np.ndarray:
        a = OperatorHelper.as_matrix(m)
        if a.shape[0] != a.shape[1]:
            raise ShapeError(f"Expected a square matrix, got {a.shape[0]}x{a.shape[1]}.")
        return a

    @staticmethod
    def hermitian(m, *, name: str = "operator") -> np.ndarray:
        a = OperatorHelper.as_square(m)
        skew = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
        if skew > consts.CONSTRUCTION_TOL:
            raise NotHermitianError(f"{name} deviates from Hermitian by {skew:.3e}.", name=name)
        return (a + a.conj().T) / 2

    @staticmethod
    def density(m, *, subnormalized: bool = False, name: str = "state") -> np.ndarray:
        h = OperatorHelper.hermitian(m, name=name)
        w, v = OperatorService.eig_hermitian(h)
        if w.size and w[-1] < -consts.CONSTRUCTION_TOL:
            raise NotPSDError(f"{name} has eigenvalue {w[-1]:.3e} below zero.", name=name)
        if w.size and w[-1] < 0:
            h = OperatorService.from_spectrum(np.clip(w, 0.0, None), v)

        tr = float(np.real(np.trace(h)))
        if subnormalized:
            if tr > 1 + consts.CONSTRUCTION_TOL:
                raise ParameterError(f"{name} has trace {tr!r} above one.", name=name)
        elif abs(tr - 1) > consts.CONSTRUCTION_TOL:
            raise ParameterError(f"{name} has trace {tr!r}, expected one.", name=name)
        return h

    @staticmethod
    def psd(m, *, name: str = "operator") -> np.ndarray:
        h = OperatorHelper.hermitian(m, name=name)
        w = np.linalg.eigvalsh(h)
        if w.size and w[0] < -consts.CONSTRUCTION_TOL:
            raise NotPSDError(f"{name} has eigenvalue {w[0]:.3e} below zero.", name=name)
        return h

    @staticmethod
    def effect(m, *, name: str = "operator") -> np.ndarray:
        """Validate 0 <= m <= I within tolerance; returns the symmetrized operator clipped into [0, I]."""
        h = OperatorHelper.hermitian(m, name=name)
        w, v = OperatorService.eig_hermitian(h)
        if w.size and (w[-1] < -consts.CONSTRUCTION_TOL or w[0] > 1 + consts.CONSTRUCTION_TOL):
            raise NotPSDError(f"{name} has spectrum [{w[-1]:.3e}, {w[0]:.3e}] outside [0, 1].", name=name)
        if w.size and (w[-1] < 0 or w[0] > 1):
            h = OperatorService.from_spectrum(np.clip(w, 0.0, 1.0), v)
        return h

    @staticmethod
    def is_projector(m, *, tol: float = consts.CONSTRUCTION_TOL) -> bool:
        a = np.asarray(m, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            return False
        return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol and np.max(np.abs(a @ a - a), initial=0.0) <= tol)

    @staticmethod
    def is_unitary(m, *, tol: float = consts.CONSTRUCTION_TOL) -> bool:
        a = np.asarray(m, dtype=complex)
        return bool(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0])), initial=0.0) <= tol)

    @staticmethod
    def basis_projector(index: int, dim: int) -> np.ndarray:
        p = np.zeros((dim, dim), dtype=complex)
        p[index, index] = 1.0
        return p

    @staticmethod
    def expectation(op: np.ndarray, rho: np.ndarray) -> float:
        return float(np.real(np.trace(op @ rho)))

    @staticmethod
    def deterministic_rng(*, seed: int, stream="") -> np.random.Generator:
        raw = f"{int(seed)}:{stream}".encode("utf-8")
        derived = int.from_bytes(hashlib.sha256(raw).digest()[:8], "big", signed=False)
        return np.random.default_rng(derived)


class OperatorService:
    @staticmethod
    def tensor(a, b) -> np.ndarray:
        a = OperatorHelper.as_matrix(a)
        b = OperatorHelper.as_matrix(b)
        OperatorHelper.check_dim(max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]))
        return np.kron(a, b)

    @staticmethod
    def tensor_all(*ops) -> np.ndarray:
        out = np.eye(1, dtype=complex)
        for op in ops:
            out = OperatorService.tensor(out, op)
        return out

    @staticmethod
    def partial_trace(m, factor_dims: list[int], traced_factor: int) -> np.ndarray:
        a = OperatorHelper.as_square(m)
        dims = [int(d) for d in factor_dims]
        if not dims or any(d < 1 for d in dims) or prod(dims) != a.shape[0]:
            raise ShapeError(f"Factor dimensions {dims} do not multiply to {a.shape[0]}.")
        if not 0 <= traced_factor < len(dims):
            raise ShapeError(f"Factor index {traced_factor} out of range for {len(dims)} factors.")

        n = len(dims)
        t = a.reshape(dims + dims)
        t = np.trace(t, axis1=traced_factor, axis2=n + traced_factor)
        rest = prod(d for i, d in enumerate(dims) if i != traced_factor)
        return t.reshape(rest, rest)

    @staticmethod
    def embed_operator(op, dims: list[int], targets: list[int]) -> np.ndarray:
        """Lift ``op`` acting on factors ``targets`` (in that order) to the full space of ``dims``."""
        op = OperatorHelper.as_square(op)
        n = len(dims)
        targets = list(targets)
        if len(set(targets)) != len(targets) or any(not 0 <= t < n for t in targets):
            raise ShapeError(f"Invalid target factors {targets} for {n} factors.")
        if prod(dims[t] for t in targets) != op.shape[0]:
            raise ShapeError("Operator dimension does not match its target factors.")

        total = prod(dims)
        OperatorHelper.check_dim(total)

        rest = [i for i in range(n) if i not in targets]
        order = targets + rest
        big = np.kron(op, np.eye(prod(dims[i] for i in rest), dtype=complex))
        shape = [dims[i] for i in order]
        inverse = [order.index(i) for i in range(n)]
        t = big.reshape(shape + shape).transpose(inverse + [n + k for k in inverse])
        return t.reshape(total, total)

    @staticmethod
    def eig_hermitian(h) -> tuple[np.ndarray, np.ndarray]:
        a = np.asarray(h, dtype=complex)
        try:
            w, v = sla.eigh(a, check_finite=True)
        except (sla.LinAlgError, ValueError) as exc:
            raise NumericError(f"Hermitian eigensolver failed: {exc}", iterations=None) from exc

        order = np.argsort(-w, kind="stable")
        return w[order], v[:, order]

    @staticmethod
    def from_spectrum(w: np.ndarray, v: np.ndarray) -> np.ndarray:
        out = (v * w) @ v.conj().T
        return (out + out.conj().T) / 2

    @staticmethod
    def apply_function(h, fn) -> np.ndarray:
        w, v = OperatorService.eig_hermitian(h)
        return OperatorService.from_spectrum(fn(w), v)

    @staticmethod
    def psd_sqrt(h) -> np.ndarray:
        h = OperatorHelper.hermitian(h)
        w, v = OperatorService.eig_hermitian(h)
        if w.size and w[-1] < -consts.CONSTRUCTION_TOL:
            raise NotPSDError(f"Eigenvalue {w[-1]:.3e} below zero; square root undefined.")
        return OperatorService.from_spectrum(np.sqrt(np.clip(w, 0.0, None)), v)

    @staticmethod
    def support_projector(h, *, tol: float = consts.KERNEL_TOL) -> np.ndarray:
        w, v = OperatorService.eig_hermitian(OperatorHelper.hermitian(h))
        scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
        keep = w > tol * scale
        return v[:, keep] @ v[:, keep].conj().T

    @staticmethod
    def trace_norm(m) -> float:
        a = OperatorHelper.as_square(m)
        if a.size == 0:
            return 0.0
        try:
            s = sla.svd(a, compute_uv=False, check_finite=True)
        except sla.LinAlgError as exc:
            raise NumericError(f"Singular value decomposition failed: {exc}", iterations=None) from exc
        return float(np.sum(s))

    @staticmethod
    def polar_unitary(m) -> tuple[np.ndarray, np.ndarray]:
        """
        Return (v, |m|) with v @ m = |m| = sqrt(m^dagger m).

        With m = U S W^dagger from LAPACK's gesdd, v = W U^dagger and |m| = W S W^dagger.
        On degenerate (including zero) singular subspaces v inherits the pairing of the
        returned singular bases, so the result is a fixed function of the input bits.
        """
        a = OperatorHelper.as_square(m)
        try:
            u, s, wh = sla.svd(a, full_matrices=True, check_finite=True, lapack_driver="gesdd")
        except sla.LinAlgError as exc:
            raise NumericError(f"Singular value decomposition failed: {exc}", iterations=None) from exc

        w = wh.conj().T
        v = w @ u.conj().T
        abs_m = (w * s) @ wh
        return v, (abs_m + abs_m.conj().T) / 2


class SamplingService:
    @staticmethod
    def _check(dim: int) -> int:
        if int(dim) < 1:
            raise ShapeError(f"Dimension must be at least 1, got {dim}.")
        OperatorHelper.check_dim(int(dim))
        return int(dim)

    @staticmethod
    def _rng(seed) -> np.random.Generator:
        if isinstance(seed, np.random.Generator):
            return seed
        return np.random.default_rng(int(seed))

    @staticmethod
    def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    @staticmethod
    def sample_state(dim: int, seed) -> np.ndarray:
        d = SamplingService._check(dim)
        g = SamplingService._gaussian(SamplingService._rng(seed), (d, d))
        rho = g @ g.conj().T
        rho = (rho + rho.conj().T) / 2
        return rho / np.real(np.trace(rho))

    @staticmethod
    def sample_pure_vector(dim: int, seed) -> np.ndarray:
        d = SamplingService._check(dim)
        psi = SamplingService._gaussian(SamplingService._rng(seed), d)
        return psi / np.linalg.norm(psi)

    @staticmethod
    def sample_pure(dim: int, seed) -> np.ndarray:
        psi = SamplingService.sample_pure_vector(dim, seed)
        return np.outer(psi, psi.conj())

    @staticmethod
    def sample_povm(dim: int, outcomes: int, seed) -> list[np.ndarray]:
        d = SamplingService._check(dim)
        if int(outcomes) < 1:
            raise ShapeError(f"A POVM needs at least one outcome, got {outcomes}.")

        rng = SamplingService._rng(seed)
        grams = []
        for _ in range(int(outcomes)):
            g = SamplingService._gaussian(rng, (d, d))
            grams.append(g @ g.conj().T)

        inv_sqrt = OperatorService.apply_function(sum(grams), lambda w: 1 / np.sqrt(w))
        elements = []
        for gram in grams:
            e = inv_sqrt @ gram @ inv_sqrt
            elements.append((e + e.conj().T) / 2)
        return elements

    @staticmethod
    def sample_effect(dim: int, seed) -> np.ndarray:
        """A random operator 0 <= Λ <= I (the second element of a random binary POVM)."""
        return SamplingService.sample_povm(dim, 2, seed)[1]

    @staticmethod
    def sample_projector(dim: int, rank: int, seed) -> np.ndarray:
        d = SamplingService._check(dim)
        if not 0 <= int(rank) <= d:
            raise ShapeError(f"Rank {rank} outside [0, {d}].")
        if int(rank) == 0:
            return np.zeros((d, d), dtype=complex)

        g = SamplingService._gaussian(SamplingService._rng(seed), (d, int(rank)))
        q, _ = np.linalg.qr(g)
        p = q @ q.conj().T
        return (p + p.conj().T) / 2

    @staticmethod
    def sample_unitary(dim: int, seed) -> np.ndarray:
        d = SamplingService._check(dim)
        g = SamplingService._gaussian(SamplingService._rng(seed), (d, d))
        q, r = np.linalg.qr(g)
        phases = np.diag(r) / np.abs(np.diag(r))
        return q * phases
