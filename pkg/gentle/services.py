import logging
import math

import numpy as np

from common.exceptions import BoundViolation, LabException, MeasurementSpecError, NumericError, ParameterError, ShapeError
from gentle import consts
from gentle.entities import GentleGap, ReversalReport
from linalg import consts as linalg_consts
from linalg.services import OperatorHelper, OperatorService
from measurement.entities import BinaryPovm
from measurement.services import DilationService

logger = logging.getLogger(__name__)


class GentleService:
    @staticmethod
    def _state(rho) -> np.ndarray:
        return OperatorHelper.density(rho, subnormalized=True, name="rho")

    @staticmethod
    def _check(label: str, lhs: float, rhs: float, enforce: bool) -> None:
        if lhs > rhs + linalg_consts.SLACK_TOL:
            logger.warning("%s bound violated", label, extra={"lhs": lhs, "rhs": rhs})
            if enforce:
                raise BoundViolation(f"{label} exceeds its bound.", lhs=lhs, rhs=rhs)

    @staticmethod
    def _projectors(projectors, dim: int) -> list[np.ndarray]:
        projectors = list(projectors)
        if not projectors:
            raise ParameterError("At least one projector is required.")

        checked = []
        for i, p in enumerate(projectors):
            try:
                h = OperatorHelper.hermitian(p, name=f"projector {i}")
            except LabException as exc:
                raise MeasurementSpecError(str(exc)) from exc
            if h.shape[0] != dim:
                raise ShapeError(f"Projector {i} is {h.shape[0]}-dimensional, state is {dim}-dimensional.")
            if not OperatorHelper.is_projector(h):
                raise MeasurementSpecError(f"Operator {i} is not a projector.")
            checked.append(h)
        return checked

    @staticmethod
    def _missed(rho: np.ndarray, projectors: list[np.ndarray]) -> float:
        eye = np.eye(rho.shape[0], dtype=complex)
        return max(0.0, sum(OperatorHelper.expectation(eye - p, rho) for p in projectors))

    @staticmethod
    def gentle_gap(rho, lambda_op, *, enforce: bool = True) -> GentleGap:
        rho = GentleService._state(rho)
        try:
            lam = OperatorHelper.effect(lambda_op, name="Lambda")
        except LabException as exc:
            raise MeasurementSpecError(str(exc)) from exc
        if lam.shape != rho.shape:
            raise ShapeError("Lambda and rho have different dimensions.")

        root = OperatorService.psd_sqrt(lam)
        disturbance = OperatorService.trace_norm(rho - root @ rho @ root)
        bound = 2.0 * math.sqrt(max(0.0, OperatorHelper.expectation(np.eye(lam.shape[0]) - lam, rho)))

        GentleService._check("Gentle measurement disturbance", disturbance, bound, enforce)
        return GentleGap(disturbance=disturbance, bound=bound)

    @staticmethod
    def _sequence(projectors: list[np.ndarray]) -> np.ndarray:
        """M = P_N ... P_1."""
        m = np.eye(projectors[0].shape[0], dtype=complex)
        for p in projectors:
            m = p @ m
        return m

    @staticmethod
    def _report(scheme, rho, post, bound, success_bound, enforce) -> ReversalReport:
        report = ReversalReport(
            scheme=scheme,
            post_state=post,
            disturbance=OperatorService.trace_norm(rho - post),
            success_gap=float(np.real(np.trace(rho) - np.trace(post))),
            bound=bound,
            success_bound=success_bound,
        )
        GentleService._check(f"{scheme} disturbance", report.disturbance, report.bound, enforce)
        GentleService._check(f"{scheme} success gap", report.success_gap, report.success_bound, enforce)
        return report

    @staticmethod
    def polar_reversal(rho, projectors, *, enforce: bool = True) -> ReversalReport:
        rho = GentleService._state(rho)
        projectors = GentleService._projectors(projectors, rho.shape[0])

        m = GentleService._sequence(projectors)
        v, abs_m = OperatorService.polar_unitary(m)
        residual = float(np.max(np.abs(v @ m - abs_m)))
        if residual > consts.POLAR_FACTOR_TOL:
            raise NumericError(f"Polar factor check V M = |M| failed by {residual:.3e}.", iterations=None)

        missed = GentleService._missed(rho, projectors)
        post = abs_m @ rho @ abs_m
        return GentleService._report(
            consts.ReversalScheme.POLAR,
            rho,
            (post + post.conj().T) / 2,
            bound=2.0 * math.sqrt(2.0) * missed ** 0.25,
            success_bound=2.0 * math.sqrt(missed),
            enforce=enforce,
        )

    @staticmethod
    def forward_backward(rho, projectors, *, enforce: bool = True) -> ReversalReport:
        rho = GentleService._state(rho)
        projectors = GentleService._projectors(projectors, rho.shape[0])

        m = GentleService._sequence(projectors)
        f = m.conj().T @ m
        missed = GentleService._missed(rho, projectors)
        post = f @ rho @ f
        return GentleService._report(
            consts.ReversalScheme.FORWARD_BACKWARD,
            rho,
            (post + post.conj().T) / 2,
            bound=2.0 * math.sqrt(2.0) * 2.0 ** 0.25 * missed ** 0.25,
            success_bound=2.0 * math.sqrt(2.0 * missed),
            enforce=enforce,
        )

    @staticmethod
    def dilated_gentle(rho, p: BinaryPovm, *, enforce: bool = True) -> GentleGap:
        rho = GentleService._state(rho)
        if p.dim != rho.shape[0]:
            raise ShapeError("POVM and rho have different dimensions.")

        dil = DilationService.dilate_binary(p)
        pi = DilationService.accept_projector(dil)
        joint = DilationService.prepare(dil, rho)

        disturbance = OperatorService.trace_norm(joint - pi @ joint @ pi)
        bound = 2.0 * math.sqrt(max(0.0, float(np.real(np.trace(rho))) - OperatorHelper.expectation(p.accept, rho)))

        GentleService._check("Dilated gentle measurement disturbance", disturbance, bound, enforce)
        return GentleGap(disturbance=disturbance, bound=bound)
