import logging

import numpy as np

from common.exceptions import LabException, MeasurementSpecError, NumericError, RangeError, ShapeError
from linalg import consts as linalg_consts
from linalg.services import OperatorHelper, OperatorService
from measurement import consts
from measurement.entities import BinaryPovm, DilatedMeasurement, Povm

logger = logging.getLogger(__name__)


class PovmService:
    @staticmethod
    def binary(accept) -> BinaryPovm:
        try:
            lam = OperatorHelper.effect(accept, name="accept operator")
        except LabException as exc:
            raise MeasurementSpecError(f"Not a binary POVM element: {exc}") from exc
        return BinaryPovm(accept=lam, dim=lam.shape[0])

    @staticmethod
    def general(elements) -> Povm:
        elements = list(elements)
        if not elements:
            raise MeasurementSpecError("A POVM needs at least one element.")

        checked = []
        for i, e in enumerate(elements):
            try:
                h = OperatorHelper.hermitian(e, name=f"element {i}")
            except LabException as exc:
                raise MeasurementSpecError(str(exc)) from exc
            w, _ = OperatorService.eig_hermitian(h)
            if w[-1] < -linalg_consts.CONSTRUCTION_TOL:
                raise MeasurementSpecError(f"element {i} has eigenvalue {w[-1]:.3e} below zero.")
            checked.append(h)

        dim = checked[0].shape[0]
        if any(h.shape[0] != dim for h in checked):
            raise ShapeError("POVM elements have different dimensions.")

        total = sum(checked)
        residual = float(np.max(np.abs(total - np.eye(dim))))
        if residual > linalg_consts.CONSTRUCTION_TOL:
            raise MeasurementSpecError(f"POVM elements sum to identity only within {residual:.3e}.")

        return Povm(elements=tuple(checked), dim=dim)

    @staticmethod
    def as_binary(p: Povm) -> BinaryPovm:
        """Read a two-outcome POVM ordered (reject, accept) as a binary POVM."""
        if p.outcomes != 2:
            raise MeasurementSpecError(f"Expected two outcomes, got {p.outcomes}.")
        return PovmService.binary(p.elements[consts.ACCEPT_OUTCOME])

    @staticmethod
    def from_binary(p: BinaryPovm) -> Povm:
        return Povm(elements=(p.reject, p.accept), dim=p.dim)


class DilationService:
    @staticmethod
    def _probe_op(row: int, col: int, dim: int) -> np.ndarray:
        out = np.zeros((dim, dim), dtype=complex)
        out[row, col] = 1.0
        return out

    @staticmethod
    def dilate_binary(p: BinaryPovm) -> DilatedMeasurement:
        OperatorHelper.check_dim(2 * p.dim)

        w, v = OperatorService.eig_hermitian(p.accept)
        w = np.clip(w, 0.0, 1.0)
        s = OperatorService.from_spectrum(np.sqrt(w), v)
        c = OperatorService.from_spectrum(np.sqrt(1.0 - w), v)

        e = DilationService._probe_op
        u = (
            np.kron(c, e(0, 0, 2))
            + np.kron(s, e(1, 0, 2))
            - np.kron(s, e(0, 1, 2))
            + np.kron(c, e(1, 1, 2))
        )
        return DilatedMeasurement(
            unitary=u,
            system_dim=p.dim,
            probe_dim=2,
            outcome_basis=(consts.REJECT_OUTCOME, consts.ACCEPT_OUTCOME),
            kind=consts.DilationKind.BINARY,
        )

    @staticmethod
    def dilate_general(p: Povm) -> DilatedMeasurement:
        d, k = p.dim, p.outcomes
        total = d * k
        OperatorHelper.check_dim(total)

        # isometry columns: index (i, 0) of system (x) probe maps |i>|0> to sum_x sqrt(G_x)|i> (x) |x>
        roots = [OperatorService.psd_sqrt(g) for g in p.elements]
        u = np.zeros((total, total), dtype=complex)
        for x, r in enumerate(roots):
            u[x::k, 0::k] = r

        basis = u[:, 0::k].copy()
        filled = []
        for i in range(total):
            candidate = np.zeros(total, dtype=complex)
            candidate[i] = 1.0
            for _ in range(2):
                candidate -= basis @ (basis.conj().T @ candidate)
            norm = np.linalg.norm(candidate)
            if norm <= linalg_consts.ORTHONORMAL_TOL:
                continue
            candidate /= norm
            basis = np.column_stack([basis, candidate])
            filled.append(candidate)
            if len(filled) == total - d:
                break

        if len(filled) != total - d:
            raise NumericError(
                f"Unitary completion found {len(filled)} of {total - d} complement vectors.",
                iterations=total,
            )

        free_columns = [col for col in range(total) if col % k != 0]
        for col, vec in zip(free_columns, filled):
            u[:, col] = vec

        if not OperatorHelper.is_unitary(u):
            raise NumericError("Completed dilation is not unitary within tolerance.", iterations=total)

        logger.debug("Dilated %s-outcome POVM", k, extra={"system_dim": d, "probe_dim": k})
        return DilatedMeasurement(
            unitary=u,
            system_dim=d,
            probe_dim=k,
            outcome_basis=tuple(range(k)),
            kind=consts.DilationKind.GENERAL,
        )

    @staticmethod
    def accept_projector(d: DilatedMeasurement, outcome: int = consts.ACCEPT_OUTCOME) -> np.ndarray:
        if not 0 <= int(outcome) < d.probe_dim:
            raise RangeError(f"Outcome {outcome} outside [0, {d.probe_dim}).")

        marker = np.kron(np.eye(d.system_dim), OperatorHelper.basis_projector(int(outcome), d.probe_dim))
        pi = d.unitary.conj().T @ marker @ d.unitary
        return (pi + pi.conj().T) / 2

    @staticmethod
    def reject_projector(d: DilatedMeasurement) -> np.ndarray:
        if not d.is_binary:
            raise MeasurementSpecError("Reject projector is defined for binary dilations only.")
        pi = DilationService.accept_projector(d, consts.ACCEPT_OUTCOME)
        return np.eye(pi.shape[0], dtype=complex) - pi

    @staticmethod
    def prepare(d: DilatedMeasurement, rho) -> np.ndarray:
        ready = OperatorHelper.basis_projector(consts.PROBE_READY_STATE, d.probe_dim)
        return np.kron(np.asarray(rho, dtype=complex), ready)

    @staticmethod
    def outcome_distribution(d: DilatedMeasurement, rho) -> np.ndarray:
        joint = DilationService.prepare(d, rho)
        probs = [
            OperatorHelper.expectation(DilationService.accept_projector(d, x), joint)
            for x in d.outcome_basis
        ]
        return np.array(probs)
