import logging
import math

import numpy as np
import scipy.linalg as sla

from common.exceptions import NumericError, ParameterError, ShapeError
from hypotest import consts
from hypotest.entities import CqJointState, HypothesisTest
from linalg import consts as linalg_consts
from linalg.services import OperatorHelper, OperatorService

logger = logging.getLogger(__name__)


class _BlockSpectrum:
    """Eigendecomposition of a_x - lam * b_x for every block at one threshold."""

    def __init__(self, blocks, lam: float):
        self.lam = lam
        self.parts = []
        for a, b in blocks:
            w, v = OperatorService.eig_hermitian(a - lam * b)
            self.parts.append((w, v, a))

    @staticmethod
    def _projector(v: np.ndarray, mask: np.ndarray) -> np.ndarray:
        cols = v[:, mask]
        return cols @ cols.conj().T

    def above(self) -> list[np.ndarray]:
        return [self._projector(v, w > consts.BOUNDARY_TOL) for w, v, _ in self.parts]

    def boundary(self) -> list[np.ndarray]:
        return [self._projector(v, np.abs(w) <= consts.BOUNDARY_TOL) for w, v, _ in self.parts]

    def weight(self, projectors: list[np.ndarray]) -> float:
        return sum(OperatorHelper.expectation(p, a) for p, (_, _, a) in zip(projectors, self.parts))


class NeymanPearsonSolver:
    """
    Minimize sum_x Tr{Q_x b_x} subject to sum_x Tr{Q_x a_x} >= 1 - eps and 0 <= Q_x <= I.

    A dense problem is a single block; a classical-quantum problem has one block per symbol.
    """

    def __init__(self, blocks, eps: float):
        eps = float(eps)
        if not 0 <= eps < 1:
            raise ParameterError(f"eps must lie in [0, 1), got {eps!r}.", eps=eps)

        self.eps = eps
        self.target = 1.0 - eps
        self.blocks = [(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)) for a, b in blocks]
        self.live = [i for i, (a, b) in enumerate(self.blocks) if np.any(a) or np.any(b)]
        self.total = sum(float(np.real(np.trace(a))) for a, _ in self.blocks)
        if self.total < self.target - consts.FULL_ACCEPT_TOL:
            raise ParameterError(
                f"No test accepts weight {self.target!r}: the null hypothesis has trace {self.total!r}.",
                eps=eps,
                trace=self.total,
            )

    @property
    def full_acceptance(self) -> bool:
        """The target leaves no type-I budget: every test must accept the whole null weight."""
        return self.target >= self.total - consts.FULL_ACCEPT_TOL

    def _live_blocks(self):
        return [self.blocks[i] for i in self.live]

    def _assemble(self, live_qs: list[np.ndarray]) -> list[np.ndarray]:
        out = [np.zeros_like(a) for a, _ in self.blocks]
        for i, q in zip(self.live, live_qs):
            out[i] = (q + q.conj().T) / 2
        return out

    def _weight_at(self, lam: float) -> float:
        spectrum = _BlockSpectrum(self._live_blocks(), lam)
        return spectrum.weight(spectrum.above())

    def _kernel_solution(self):
        kernels = []
        free = 0.0
        for a, b in self._live_blocks():
            k = np.eye(b.shape[0], dtype=complex) - OperatorService.support_projector(b)
            kernels.append(k)
            free += OperatorHelper.expectation(k, a)

        if free < self.target - consts.ZERO_EPS_SLACK:
            return None

        fraction = min(1.0, self.target / free)
        return self._assemble([fraction * k for k in kernels]), fraction

    def _upper_threshold(self) -> float:
        top = 0.0
        floor = math.inf
        for a, b in self._live_blocks():
            top = max(top, float(np.max(np.linalg.eigvalsh(a), initial=0.0)))
            wb = np.linalg.eigvalsh(b)
            scale = max(1.0, float(np.max(np.abs(wb), initial=0.0)))
            nonzero = wb[wb > linalg_consts.KERNEL_TOL * scale]
            if nonzero.size:
                floor = min(floor, float(nonzero.min()))
        if math.isinf(floor):
            return 1.0
        return top / floor + 1.0

    def _bracket(self) -> tuple[float, float]:
        hi = self._upper_threshold()
        for doubling in range(consts.BRACKET_MAX_DOUBLINGS + 1):
            if self._weight_at(hi) < self.target:
                return 0.0, hi
            logger.warning("Threshold bracket too narrow; doubling", extra={"hi": hi, "doubling": doubling})
            hi *= 2.0
        raise NumericError("Could not bracket the Neyman-Pearson threshold.", iterations=consts.BRACKET_MAX_DOUBLINGS)

    def _bisect(self, lo: float, hi: float) -> tuple[float, float]:
        for _ in range(consts.BISECTION_MAX_ITERATIONS):
            if hi - lo <= consts.BISECTION_REL_TOL * max(1.0, hi):
                return lo, hi
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                return lo, hi
            if self._weight_at(mid) >= self.target:
                lo = mid
            else:
                hi = mid
        raise NumericError(
            "Neyman-Pearson threshold bisection did not converge.",
            iterations=consts.BISECTION_MAX_ITERATIONS,
        )

    def _support_solution(self) -> list[np.ndarray]:
        return self._assemble([OperatorService.support_projector(a) for a, _ in self._live_blocks()])

    def dual_value(self, multiplier: float) -> float:
        if math.isinf(multiplier):
            # supremum of the dual objective as the multiplier grows without bound
            if not self.full_acceptance:
                return -math.inf
            return sum(OperatorHelper.expectation(q, b) for q, (_, b) in zip(self._support_solution(), self.blocks))
        value = multiplier * self.target
        for a, b in self.blocks:
            w = np.linalg.eigvalsh(multiplier * a - b)
            value -= float(np.sum(np.clip(w, 0.0, None)))
        return value

    def solve(self) -> tuple[list[np.ndarray], float, float]:
        """Return (block tests, threshold, boundary fraction)."""
        if not self.live:
            raise ParameterError("Hypothesis test has no non-zero block.")

        kernel = self._kernel_solution()
        if kernel is not None:
            qs, fraction = kernel
            return qs, math.inf, fraction

        if self.full_acceptance:
            return self._support_solution(), 0.0, 1.0

        lo, hi = self._bisect(*self._bracket())

        spectrum = _BlockSpectrum(self._live_blocks(), hi)
        above = spectrum.above()
        boundary = spectrum.boundary()
        w_above = spectrum.weight(above)
        w_boundary = spectrum.weight(boundary)

        if w_above + w_boundary >= self.target - consts.ZERO_EPS_SLACK:
            t = 0.0 if w_boundary <= 0 else float(np.clip((self.target - w_above) / w_boundary, 0.0, 1.0))
            return self._assemble([p + t * z for p, z in zip(above, boundary)]), hi, t

        # boundary eigenspace fell between the bracket ends: mix the two neighbouring tests
        inner = _BlockSpectrum(self._live_blocks(), lo)
        inner_above = inner.above()
        w_inner = inner.weight(inner_above)
        s = float(np.clip((self.target - w_above) / (w_inner - w_above), 0.0, 1.0)) if w_inner > w_above else 1.0
        logger.debug("Boundary mixing across bracket", extra={"lo": lo, "hi": hi, "s": s})
        qs = [(1 - s) * p + s * r for p, r in zip(above, inner_above)]
        return self._assemble(qs), hi, s


class HypothesisTestService:
    @staticmethod
    def _pair(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
        rho = OperatorHelper.density(rho, subnormalized=True, name="rho")
        sigma = OperatorHelper.psd(sigma, name="sigma")
        if rho.shape != sigma.shape:
            raise ShapeError(f"rho is {rho.shape[0]}-dimensional but sigma is {sigma.shape[0]}-dimensional.")
        return rho, sigma

    @staticmethod
    def _build(solver: NeymanPearsonSolver, qs, threshold: float, fraction: float, *, joint: bool) -> HypothesisTest:
        q = sla.block_diag(*qs) if joint else qs[0]
        accepted = sum(OperatorHelper.expectation(qx, a) for qx, (a, _) in zip(qs, solver.blocks))
        beta = sum(OperatorHelper.expectation(qx, b) for qx, (_, b) in zip(qs, solver.blocks))
        multiplier = 0.0 if math.isinf(threshold) else (math.inf if threshold == 0 else 1.0 / threshold)
        return HypothesisTest(
            q=q,
            type1_error=max(0.0, 1.0 - accepted),
            type2_error=max(0.0, beta),
            threshold=threshold,
            boundary_fraction=fraction,
            dual_value=solver.dual_value(multiplier),
            blocks=tuple(qs) if joint else (),
        )

    @staticmethod
    def neyman_pearson(rho, sigma, eps: float) -> HypothesisTest:
        rho, sigma = HypothesisTestService._pair(rho, sigma)
        solver = NeymanPearsonSolver([(rho, sigma)], eps)
        qs, threshold, fraction = solver.solve()
        return HypothesisTestService._build(solver, qs, threshold, fraction, joint=False)

    @staticmethod
    def bits(beta: float) -> float:
        if beta <= consts.BETA_ZERO:
            return consts.INFINITE_BITS
        return -math.log2(beta)

    @staticmethod
    def d_h_epsilon(rho, sigma, eps: float) -> float:
        return HypothesisTestService.bits(HypothesisTestService.neyman_pearson(rho, sigma, eps).beta)

    @staticmethod
    def dual_certificate(multiplier: float, rho, sigma, eps: float) -> float:
        """Weak-duality lower bound mu*(1 - eps) - Tr{(mu*rho - sigma)_+} on beta_eps."""
        if multiplier < 0:
            raise ParameterError(f"Dual multiplier must be non-negative, got {multiplier!r}.")
        rho, sigma = HypothesisTestService._pair(rho, sigma)
        return NeymanPearsonSolver([(rho, sigma)], eps).dual_value(float(multiplier))

    @staticmethod
    def cq_test(s: CqJointState, eps: float) -> HypothesisTest:
        OperatorHelper.check_dim(len(s.symbols) * s.dim_b)
        avg = s.average
        solver = NeymanPearsonSolver([(p * rho, p * avg) for p, rho in zip(s.prior, s.blocks)], eps)
        qs, threshold, fraction = solver.solve()
        return HypothesisTestService._build(solver, qs, threshold, fraction, joint=True)

    @staticmethod
    def d_h_cq(s: CqJointState, eps: float) -> tuple[float, np.ndarray]:
        test = HypothesisTestService.cq_test(s, eps)
        return HypothesisTestService.bits(test.beta), test.q

    @staticmethod
    def d_h_side_information(s: CqJointState, sigma_b, eps: float) -> tuple[float, np.ndarray]:
        """D_H^eps(rho_XB || I_X (x) sigma_B) for a caller-supplied sigma_B."""
        sigma_b = OperatorHelper.density(sigma_b, subnormalized=True, name="sigma_B")
        if sigma_b.shape[0] != s.dim_b:
            raise ShapeError(f"sigma_B is {sigma_b.shape[0]}-dimensional, expected {s.dim_b}.")
        OperatorHelper.check_dim(len(s.symbols) * s.dim_b)

        solver = NeymanPearsonSolver([(p * rho, sigma_b) for p, rho in zip(s.prior, s.blocks)], eps)
        qs, threshold, fraction = solver.solve()
        test = HypothesisTestService._build(solver, qs, threshold, fraction, joint=True)
        return HypothesisTestService.bits(test.beta), test.q


class CqStateService:
    @staticmethod
    def cq_state(prior, blocks, symbols=None) -> CqJointState:
        prior = np.asarray(prior, dtype=float)
        blocks = list(blocks)
        if prior.ndim != 1 or len(prior) != len(blocks) or not blocks:
            raise ShapeError(f"{len(prior)} prior entries for {len(blocks)} blocks.")
        if np.any(prior < 0) or abs(float(prior.sum()) - 1) > consts.PRIOR_SUM_TOL:
            raise ParameterError(f"Prior must be a probability vector; sum is {float(prior.sum())!r}.")
        prior = prior / math.fsum(prior)

        checked = [OperatorHelper.density(rho, name=f"block {i}") for i, rho in enumerate(blocks)]
        dim_b = checked[0].shape[0]
        if any(rho.shape[0] != dim_b for rho in checked):
            raise ShapeError("Blocks have different dimensions.")

        symbols = tuple(str(x) for x in (symbols if symbols is not None else range(len(blocks))))
        if len(symbols) != len(blocks) or len(set(symbols)) != len(symbols):
            raise ShapeError("Symbols must be distinct and match the blocks.")

        return CqJointState(symbols=symbols, prior=prior, blocks=tuple(checked), dim_b=dim_b)

    @staticmethod
    def cq_embed(s: CqJointState) -> tuple[np.ndarray, np.ndarray]:
        OperatorHelper.check_dim(len(s.symbols) * s.dim_b)
        avg = s.average
        joint = sla.block_diag(*[p * rho for p, rho in zip(s.prior, s.blocks)])
        product = sla.block_diag(*[p * avg for p in s.prior])
        return joint, product
