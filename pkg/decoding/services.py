import logging
import math
from itertools import product

import numpy as np
from django.conf import settings

from common.exceptions import (
    BoundViolation,
    LabException,
    MeasurementSpecError,
    ParameterError,
    RangeError,
    ShapeError,
    SizeError,
    SymbolError,
)
from decoding import consts
from decoding.entities import (
    CapacityBound,
    CodingSetup,
    Codebook,
    CqChannel,
    DecoderSpec,
    DecodingStats,
    ExperimentReport,
    KrausMap,
    Trajectory,
    UnionBoundCheck,
)
from hypotest.entities import CqJointState
from hypotest.services import CqStateService, HypothesisTestService
from linalg import consts as linalg_consts
from linalg.services import OperatorHelper, OperatorService, SamplingService
from linalg.utils import decode_matrix, encode_matrix
from measurement.services import DilationService, PovmService

logger = logging.getLogger(__name__)


class ChannelService:
    @staticmethod
    def channel(outputs: dict, symbols=None) -> CqChannel:
        if not outputs:
            raise ShapeError("A channel needs at least one input symbol.")

        symbols = tuple(str(x) for x in (symbols if symbols is not None else outputs.keys()))
        if len(set(symbols)) != len(symbols):
            raise ShapeError("Channel symbols must be distinct.")

        checked = {}
        for x in symbols:
            if x not in outputs:
                raise SymbolError(f"No output state for symbol {x!r}.", symbol=x)
            checked[x] = OperatorHelper.density(outputs[x], name=f"output of {x!r}")

        dim_b = checked[symbols[0]].shape[0]
        for x, rho in checked.items():
            if rho.shape[0] != dim_b:
                raise ShapeError(f"Output of {x!r} is {rho.shape[0]}-dimensional, expected {dim_b}.")

        return CqChannel(symbols=symbols, outputs=checked, dim_b=dim_b)

    @staticmethod
    def joint_state(channel: CqChannel, prior) -> CqJointState:
        return CqStateService.cq_state(prior, [channel.outputs[x] for x in channel.symbols], channel.symbols)

    @staticmethod
    def uniform_prior(channel: CqChannel) -> np.ndarray:
        n = len(channel.symbols)
        return np.full(n, 1.0 / n)

    @staticmethod
    def two_pure_states(overlap: float) -> CqChannel:
        """Qubit channel 0 -> |0>, 1 -> overlap|0> + sqrt(1 - overlap^2)|1> with real overlap."""
        c = float(overlap)
        if not 0 <= c <= 1:
            raise ParameterError(f"Overlap must lie in [0, 1], got {c!r}.")
        psi0 = np.array([1.0, 0.0], dtype=complex)
        psi1 = np.array([c, math.sqrt(1 - c * c)], dtype=complex)
        return ChannelService.channel({"0": np.outer(psi0, psi0.conj()), "1": np.outer(psi1, psi1.conj())})

    @staticmethod
    def noiseless_bits(dim: int = 2) -> CqChannel:
        return ChannelService.channel({str(i): OperatorHelper.basis_projector(i, dim) for i in range(dim)})

    @staticmethod
    def constant_channel(rho, symbols=("0", "1")) -> CqChannel:
        return ChannelService.channel({str(x): rho for x in symbols}, symbols)

    @staticmethod
    def tensor_power(channel: CqChannel, n: int) -> CqChannel:
        if int(n) < 1:
            raise ParameterError(f"Tensor power must be at least 1, got {n}.")
        OperatorHelper.check_dim(channel.dim_b ** int(n))

        sep = "" if all(len(x) == 1 for x in channel.symbols) else ","
        outputs = {}
        for word in product(channel.symbols, repeat=int(n)):
            outputs[sep.join(word)] = OperatorService.tensor_all(*[channel.outputs[x] for x in word])
        return ChannelService.channel(outputs)

    @staticmethod
    def product_prior(prior, n: int) -> np.ndarray:
        out = np.ones(1)
        for _ in range(int(n)):
            out = np.kron(out, np.asarray(prior, dtype=float))
        return out

    @staticmethod
    def to_payload(channel: CqChannel) -> dict:
        return {
            "symbols": list(channel.symbols),
            "outputs": {x: encode_matrix(channel.outputs[x]) for x in channel.symbols},
        }

    @staticmethod
    def from_payload(payload: dict) -> CqChannel:
        """Rebuild a channel produced by to_payload; outputs were validated when it was built."""
        symbols = tuple(payload["symbols"])
        outputs = {x: decode_matrix(payload["outputs"][x]) for x in symbols}
        return CqChannel(symbols=symbols, outputs=outputs, dim_b=outputs[symbols[0]].shape[0])

    @staticmethod
    def codebook(codewords, channel: CqChannel) -> Codebook:
        codewords = tuple(str(x) for x in codewords)
        if not codewords:
            raise ParameterError("A codebook needs at least one codeword.")
        for x in codewords:
            if x not in channel.outputs:
                raise SymbolError(f"Codeword {x!r} is not a channel symbol.", symbol=x)
        return Codebook(codewords=codewords)


class KrausService:
    @staticmethod
    def _parts(lambda_op) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (Lambda, I - Lambda, sqrt(Lambda (I - Lambda))) from one eigendecomposition."""
        try:
            lam = OperatorHelper.effect(lambda_op, name="measurement operator")
        except LabException as exc:
            raise MeasurementSpecError(str(exc)) from exc

        w, v = OperatorService.eig_hermitian(lam)
        w = np.clip(w, 0.0, 1.0)
        lam = OperatorService.from_spectrum(w, v)
        rest = OperatorService.from_spectrum(1.0 - w, v)
        cross = OperatorService.from_spectrum(np.sqrt(w * (1.0 - w)), v)
        return lam, rest, cross

    @staticmethod
    def reject_map(lambda_op) -> KrausMap:
        _, rest, cross = KrausService._parts(lambda_op)
        return KrausMap(kraus=(rest, -cross))

    @staticmethod
    def accept_map(lambda_op) -> KrausMap:
        lam, _, cross = KrausService._parts(lambda_op)
        return KrausMap(kraus=(lam, cross))


class SequentialDecoderService:
    @staticmethod
    def position_operator(q_xb, s: CqJointState, x: str) -> np.ndarray:
        q = OperatorHelper.hermitian(q_xb, name="Q_XB")
        n, d = len(s.symbols), s.dim_b
        if q.shape[0] != n * d:
            raise ShapeError(f"Q_XB is {q.shape[0]}-dimensional, expected {n} x {d}.")
        if x not in s.symbols:
            raise SymbolError(f"Unknown symbol {x!r}.", symbol=x)

        i = s.index(x)
        block = q[i * d:(i + 1) * d, i * d:(i + 1) * d]
        return OperatorHelper.effect(block, name=f"A_{x}")

    @staticmethod
    def _checked(rho, ops, *, subnormalized: bool = False) -> tuple[np.ndarray, list[np.ndarray]]:
        rho = OperatorHelper.density(rho, subnormalized=subnormalized, name="rho")
        ops = list(ops)
        if not ops:
            raise ParameterError("At least one measurement operator is required.")
        checked = []
        for j, op in enumerate(ops):
            try:
                a = OperatorHelper.effect(op, name=f"operator {j}")
            except LabException as exc:
                raise MeasurementSpecError(str(exc)) from exc
            if a.shape != rho.shape:
                raise ShapeError(f"Operator {j} is {a.shape[0]}-dimensional, state is {rho.shape[0]}-dimensional.")
            checked.append(a)
        return rho, checked

    @staticmethod
    def _target(target: int, count: int) -> int:
        if not 0 <= int(target) < count:
            raise RangeError(f"Message index {target} outside [0, {count}).", target=target)
        return int(target)

    @staticmethod
    def _success(rho: np.ndarray, accept: list[np.ndarray], rejects: list[KrausMap], target: int) -> float:
        tau = rho
        for r in rejects[:target]:
            tau = r.apply(tau)
        return OperatorHelper.expectation(accept[target], tau)

    @staticmethod
    def success_prob_exact(rho, ops, target: int) -> float:
        rho, ops = SequentialDecoderService._checked(rho, ops)
        m = SequentialDecoderService._target(target, len(ops))
        rejects = [KrausService.reject_map(op) for op in ops[:m]]
        return SequentialDecoderService._success(rho, ops, rejects, m)

    @staticmethod
    def failure_prob(rho, ops) -> float:
        """Probability that every measurement rejects."""
        rho, ops = SequentialDecoderService._checked(rho, ops)
        tau = rho
        for op in ops:
            tau = KrausService.reject_map(op).apply(tau)
        return float(np.real(np.trace(tau)))

    @staticmethod
    def _probe_projectors(ops: list[np.ndarray]) -> tuple[list[int], list[np.ndarray]]:
        """Accept projectors of each binary dilation lifted to S (x) P_1 (x) ... (x) P_M."""
        d = ops[0].shape[0]
        dims = [d] + [2] * len(ops)
        total = d * 2 ** len(ops)
        OperatorHelper.check_dim(total)

        lifted = []
        for j, op in enumerate(ops):
            dil = DilationService.dilate_binary(PovmService.binary(op))
            lifted.append(OperatorService.embed_operator(DilationService.accept_projector(dil), dims, [0, j + 1]))
        return dims, lifted

    @staticmethod
    def _with_ready_probes(rho: np.ndarray, probes: int) -> np.ndarray:
        ready = OperatorHelper.basis_projector(0, 2 ** probes)
        return OperatorService.tensor(rho, ready)

    @staticmethod
    def success_prob_dilated(rho, ops, target: int) -> float:
        rho, ops = SequentialDecoderService._checked(rho, ops)
        m = SequentialDecoderService._target(target, len(ops))
        OperatorHelper.check_dim(rho.shape[0] * 2 ** len(ops))

        _, lifted = SequentialDecoderService._probe_projectors(ops)
        eye = np.eye(lifted[0].shape[0], dtype=complex)
        k = lifted[m]
        for pi in reversed(lifted[:m]):
            k = k @ (eye - pi)

        joint = SequentialDecoderService._with_ready_probes(rho, len(ops))
        return float(np.real(np.trace(k @ joint @ k.conj().T)))

    @staticmethod
    def union_bound_check(sigma, lambdas, *, enforce: bool = False) -> UnionBoundCheck:
        sigma, lambdas = SequentialDecoderService._checked(sigma, lambdas, subnormalized=True)
        tau = sigma
        for lam in lambdas:
            tau = KrausService.accept_map(lam).apply(tau)

        lhs = float(np.real(np.trace(sigma) - np.trace(tau)))
        missed = sum(OperatorHelper.expectation(np.eye(lam.shape[0]) - lam, sigma) for lam in lambdas)
        check = UnionBoundCheck(lhs=lhs, rhs=2.0 * math.sqrt(max(0.0, missed)))
        SequentialDecoderService._enforce(check, enforce, "Union bound")
        return check

    @staticmethod
    def union_bound_dilated(sigma, lambdas, *, enforce: bool = False) -> UnionBoundCheck:
        sigma, lambdas = SequentialDecoderService._checked(sigma, lambdas, subnormalized=True)
        OperatorHelper.check_dim(sigma.shape[0] * 2 ** len(lambdas))

        _, lifted = SequentialDecoderService._probe_projectors(lambdas)
        k = np.eye(lifted[0].shape[0], dtype=complex)
        for pi in lifted:
            k = pi @ k

        joint = SequentialDecoderService._with_ready_probes(sigma, len(lambdas))
        kept = float(np.real(np.trace(k @ joint @ k.conj().T)))
        lhs = float(np.real(np.trace(sigma))) - kept
        missed = sum(OperatorHelper.expectation(np.eye(lam.shape[0]) - lam, sigma) for lam in lambdas)
        check = UnionBoundCheck(lhs=lhs, rhs=2.0 * math.sqrt(max(0.0, missed)))
        SequentialDecoderService._enforce(check, enforce, "Union bound")
        return check

    @staticmethod
    def _enforce(check, enforce: bool, label: str) -> None:
        if check.slack < -linalg_consts.SLACK_TOL:
            logger.warning("%s violated", label, extra={"lhs": check.lhs, "rhs": check.rhs})
            if enforce:
                raise BoundViolation(f"{label} violated.", lhs=check.lhs, rhs=check.rhs)

    @staticmethod
    def decode_trajectory(rho, ops, seed) -> Trajectory:
        rho, ops = SequentialDecoderService._checked(rho, ops)
        rng = SamplingService._rng(seed)
        return SequentialDecoderService._walk(rho, ops, [KrausService.reject_map(op) for op in ops], rng)

    @staticmethod
    def _walk(rho: np.ndarray, ops: list[np.ndarray], rejects: list[KrausMap], rng: np.random.Generator) -> Trajectory:
        tau = rho
        path = []
        for j, (op, reject) in enumerate(zip(ops, rejects)):
            p_accept = min(1.0, max(0.0, OperatorHelper.expectation(op, tau)))
            p_reject = 1.0 - p_accept
            if p_reject < consts.DEGENERATE_REJECT_PROB or rng.random() < p_accept:
                path.append(consts.ACCEPT)
                return Trajectory(decoded=j, path=tuple(path))
            path.append(consts.REJECT)
            nxt = reject.apply(tau)
            tau = nxt / float(np.real(np.trace(nxt)))
        return Trajectory(decoded=None, path=tuple(path))

    @staticmethod
    def decode_trajectories(rho, ops, trials: int, seed) -> np.ndarray:
        """Decoded index of each of ``trials`` sampled walks, -1 where every step rejected."""
        rho, ops = SequentialDecoderService._checked(rho, ops)
        if int(trials) < 1:
            raise ParameterError(f"trials must be at least 1, got {trials}.")
        rejects = [KrausService.reject_map(op) for op in ops]
        return SequentialDecoderService._sample_walks(rho, ops, rejects, int(trials), SamplingService._rng(seed))

    @staticmethod
    def _accept_schedule(rho: np.ndarray, ops: list[np.ndarray], rejects: list[KrausMap]) -> np.ndarray:
        """Accept probability of each step given that every earlier step rejected."""
        schedule = np.zeros(len(ops))
        tau = rho
        for j, (op, reject) in enumerate(zip(ops, rejects)):
            p_accept = min(1.0, max(0.0, OperatorHelper.expectation(op, tau)))
            if 1.0 - p_accept < consts.DEGENERATE_REJECT_PROB:
                schedule[j] = 1.0
                break
            schedule[j] = p_accept
            nxt = reject.apply(tau)
            tau = nxt / float(np.real(np.trace(nxt)))
        return schedule

    @staticmethod
    def _sample_walks(
        rho: np.ndarray, ops: list[np.ndarray], rejects: list[KrausMap], trials: int, rng: np.random.Generator
    ) -> np.ndarray:
        # a walk only continues along the all-reject branch, so its step probabilities are fixed in advance
        accepted = rng.random((trials, len(ops))) < SequentialDecoderService._accept_schedule(rho, ops, rejects)
        return np.where(accepted.any(axis=1), np.argmax(accepted, axis=1), -1)

    @staticmethod
    def _sen(rho: np.ndarray, ops: list[np.ndarray], m: int) -> float:
        missed = 1.0 - OperatorHelper.expectation(ops[m], rho)
        confused = sum(OperatorHelper.expectation(op, rho) for op in ops[:m])
        return 2.0 * math.sqrt(max(0.0, missed + confused))

    @staticmethod
    def coherent_decode(psi, ops) -> dict[str, np.ndarray]:
        """
        Branch decomposition of the coherent decoder.

        Each key is the control bitstring b_1...b_M (1 = accepted at that step); its value has
        one row per probe bitstring (first probe most significant) holding the unnormalized
        system vector.
        """
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        norm = float(np.linalg.norm(psi))
        if abs(norm - 1) > linalg_consts.CONSTRUCTION_TOL:
            raise ParameterError(f"Input vector has norm {norm!r}, expected one.")

        ops = list(ops)
        if len(ops) > consts.COHERENT_MAX_MESSAGES:
            raise SizeError(f"Coherent decoding supports at most {consts.COHERENT_MAX_MESSAGES} messages.")
        _, ops = SequentialDecoderService._checked(np.outer(psi, psi.conj()), ops)

        amplitudes = 4 ** len(ops) * psi.shape[0]
        if amplitudes > settings.CQSEQDEC_MAX_BRANCH_AMPLITUDES:
            raise SizeError(
                f"{amplitudes} branch amplitudes exceed CQSEQDEC_MAX_BRANCH_AMPLITUDES.",
                amplitudes=amplitudes,
            )

        branches = {"": psi[None, :]}
        for op in ops:
            lam, rest, cross = KrausService._parts(op)
            grown = {}
            for bits, rows in branches.items():
                grown[bits + "0"] = SequentialDecoderService._split(rows, rest, -cross)
                grown[bits + "1"] = SequentialDecoderService._split(rows, lam, cross)
            branches = grown
        return branches

    @staticmethod
    def _split(rows: np.ndarray, on_ready: np.ndarray, on_flip: np.ndarray) -> np.ndarray:
        ready = rows @ on_ready.T
        flip = rows @ on_flip.T
        return np.stack([ready, flip], axis=1).reshape(2 * rows.shape[0], rows.shape[1])

    @staticmethod
    def branch_weights(branches: dict[str, np.ndarray]) -> dict[str, float]:
        return {bits: float(np.sum(np.abs(rows) ** 2)) for bits, rows in branches.items()}

    @staticmethod
    def prefix_weight(branches: dict[str, np.ndarray], prefix: str) -> float:
        return sum(w for bits, w in SequentialDecoderService.branch_weights(branches).items() if bits.startswith(prefix))

    @staticmethod
    def decoder_spec(channel: CqChannel, prior, codebook: Codebook, eps_prime: float) -> DecoderSpec:
        setup = RandomCodingService.prepare(channel, prior, eps_prime)
        ops = tuple(setup.accept_ops[setup.state.index(x)] for x in codebook.codewords)
        return DecoderSpec(q_xb=setup.test.q, position_ops=ops, eps_prime=float(eps_prime))

    @staticmethod
    def _pure_vector(rho: np.ndarray) -> np.ndarray:
        w, v = OperatorService.eig_hermitian(rho)
        if w[0] < 1 - linalg_consts.CONSTRUCTION_TOL:
            raise ParameterError("Coherent decoding needs pure channel outputs.")
        return v[:, 0]

    @staticmethod
    def decoding_stats(
        channel: CqChannel,
        codebook: Codebook,
        spec: DecoderSpec,
        *,
        mode: str = consts.DecodeMode.EXACT,
        trials: int = 1000,
        seed: int = 0,
        enforce: bool = False,
    ) -> DecodingStats:
        if mode not in consts.DecodeMode.VALUES:
            raise ParameterError(f"Unknown decode mode {mode!r}.")

        ops = [OperatorHelper.effect(a, name=f"A_{j}") for j, a in enumerate(spec.position_ops)]
        if len(ops) != codebook.message_count:
            raise ShapeError(f"{len(ops)} position operators for {codebook.message_count} codewords.")
        rejects = [KrausService.reject_map(a) for a in ops]

        success, sen = [], []
        for m, x in enumerate(codebook.codewords):
            rho = channel.outputs[x]
            if mode == consts.DecodeMode.EXACT:
                p = SequentialDecoderService._success(rho, ops, rejects, m)
            elif mode == consts.DecodeMode.DILATED:
                if codebook.message_count > consts.DILATED_MAX_MESSAGES:
                    raise SizeError(f"Dilated mode supports at most {consts.DILATED_MAX_MESSAGES} messages.")
                p = SequentialDecoderService.success_prob_dilated(rho, ops, m)
            elif mode == consts.DecodeMode.COHERENT:
                branches = SequentialDecoderService.coherent_decode(SequentialDecoderService._pure_vector(rho), ops)
                p = SequentialDecoderService.prefix_weight(branches, "0" * m + "1")
            else:
                rng = OperatorHelper.deterministic_rng(seed=seed, stream=f"trajectory:{m}")
                if int(trials) < 1:
                    raise ParameterError(f"trials must be at least 1, got {trials}.")
                decoded = SequentialDecoderService._sample_walks(rho, ops, rejects, int(trials), rng)
                p = int(np.count_nonzero(decoded == m)) / int(trials)

            bound = SequentialDecoderService._sen(rho, ops, m)
            success.append(float(p))
            sen.append(bound)

            if mode != consts.DecodeMode.TRAJECTORY and 1 - p > bound + linalg_consts.SLACK_TOL:
                logger.warning("Per-message bound violated", extra={"message": m, "error": 1 - p, "bound": bound})
                if enforce:
                    raise BoundViolation(f"Error of message {m} exceeds its bound.", lhs=1 - p, rhs=bound, message=m)

        errors = [1.0 - p for p in success]
        return DecodingStats(
            per_message_success=tuple(success),
            average_error=float(np.mean(errors)),
            maximal_error=float(np.max(errors)),
            sen_rhs=float(np.mean(sen)),
            per_message_sen_rhs=tuple(sen),
            bound_value=2.0 * math.sqrt(float(np.mean([(b / 2) ** 2 for b in sen]))),
        )


class RandomCodingService:
    @staticmethod
    def prepare(channel: CqChannel, prior, eps_prime: float) -> CodingSetup:
        state = ChannelService.joint_state(channel, prior)
        test = HypothesisTestService.cq_test(state, eps_prime)
        accept = tuple(OperatorHelper.effect(q, name=f"A_{x}") for x, q in zip(state.symbols, test.blocks))
        rejects = tuple(KrausService.reject_map(a) for a in accept)

        avg = state.average
        tr_joint = sum(p * OperatorHelper.expectation(a, rho) for p, a, rho in zip(state.prior, accept, state.blocks))
        tr_product = sum(p * OperatorHelper.expectation(a, avg) for p, a in zip(state.prior, accept))
        logger.debug("Prepared coding setup", extra={"eps_prime": eps_prime, "beta": test.beta})
        return CodingSetup(
            state=state,
            test=test,
            eps_prime=float(eps_prime),
            accept_ops=accept,
            reject_maps=rejects,
            tr_q_joint=float(tr_joint),
            tr_q_product=float(tr_product),
        )

    @staticmethod
    def analytic_bound(setup: CodingSetup, message_count: int) -> float:
        return 2.0 * math.sqrt(max(0.0, setup.eps_prime + message_count * setup.tr_q_product))

    @staticmethod
    def intermediate_bound(setup: CodingSetup, message_count: int) -> float:
        value = 1.0 - setup.tr_q_joint + (message_count - 1) * setup.tr_q_product
        return 2.0 * math.sqrt(max(0.0, value))

    @staticmethod
    def trial_error(setup: CodingSetup, message_count: int, seed: int, trial: int) -> float:
        rng = OperatorHelper.deterministic_rng(seed=seed, stream=trial)
        picks = rng.choice(len(setup.state.symbols), size=int(message_count), p=setup.state.prior)

        ops = [setup.accept_ops[i] for i in picks]
        rejects = [setup.reject_maps[i] for i in picks]
        success = [
            SequentialDecoderService._success(setup.state.blocks[i], ops, rejects, m) for m, i in enumerate(picks)
        ]
        return 1.0 - float(np.mean(success))

    @staticmethod
    def run_trials(setup: CodingSetup, *, message_count: int, seed: int, start: int, stop: int) -> list[float]:
        return [RandomCodingService.trial_error(setup, message_count, seed, k) for k in range(start, stop)]

    @staticmethod
    def summarize(setup: CodingSetup, errors: list[float], message_count: int, *, enforce: bool = True) -> ExperimentReport:
        errors = np.asarray(errors, dtype=float)
        n = errors.size
        if n == 0:
            raise ParameterError("An experiment needs at least one trial.")

        mean = float(errors.mean())
        stderr = float(errors.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        report = ExperimentReport(
            message_count=int(message_count),
            eps_prime=setup.eps_prime,
            trials=n,
            empirical_error=mean,
            stderr=stderr,
            analytic_bound=RandomCodingService.analytic_bound(setup, message_count),
            intermediate_bound=RandomCodingService.intermediate_bound(setup, message_count),
            tr_q_joint=setup.tr_q_joint,
            tr_q_product=setup.tr_q_product,
            d_h_bits=HypothesisTestService.bits(setup.test.beta),
        )

        allowed = report.analytic_bound + consts.EXPERIMENT_STDERR_FACTOR * stderr
        if mean > allowed:
            logger.warning("Random coding bound violated", extra={"mean": mean, "allowed": allowed})
            if enforce:
                raise BoundViolation("Empirical error exceeds the random coding bound.", lhs=mean, rhs=allowed)

        logger.info("Random coding experiment finished", extra={"trials": n, "mean": mean, "bound": report.analytic_bound})
        return report

    @staticmethod
    def check_counts(message_count: int, trials: int) -> None:
        if int(message_count) < 1:
            raise ParameterError(f"Message count must be at least 1, got {message_count}.")
        if int(trials) < 1:
            raise ParameterError(f"Trial count must be at least 1, got {trials}.")

    @staticmethod
    def random_coding_experiment(
        channel: CqChannel,
        prior,
        message_count: int,
        eps_prime: float,
        trials: int,
        seed: int,
        *,
        enforce: bool = True,
    ) -> ExperimentReport:
        RandomCodingService.check_counts(message_count, trials)
        setup = RandomCodingService.prepare(channel, prior, eps_prime)
        errors = RandomCodingService.run_trials(setup, message_count=message_count, seed=seed, start=0, stop=int(trials))
        return RandomCodingService.summarize(setup, errors, message_count, enforce=enforce)


class CapacityService:
    @staticmethod
    def capacity_lower_bound(channel: CqChannel, eps: float, prior_grid, eps_prime_grid) -> CapacityBound:
        """
        Maximize D_H^{eps'}(rho_XB || rho_X (x) rho_B) - log2(1 / (eps^2/4 - eps')) over the grids.

        The grid maximum is a lower bound on the maximum over all priors and eps'.
        """
        eps = float(eps)
        if not 0 < eps <= 1:
            raise ParameterError(f"eps must lie in (0, 1], got {eps!r}.")

        priors = [np.asarray(p, dtype=float) for p in prior_grid]
        eps_primes = [float(e) for e in eps_prime_grid]
        if not priors or not eps_primes:
            raise ParameterError("Prior and eps' grids must be non-empty.")

        budget = eps * eps / 4
        for e in eps_primes:
            if not 0 <= e < budget:
                raise ParameterError(f"eps' = {e!r} must satisfy 0 <= eps' < eps^2/4 = {budget!r}.", eps_prime=e)

        best = None
        for prior in priors:
            state = ChannelService.joint_state(channel, prior)
            for e in eps_primes:
                d_h, _ = HypothesisTestService.d_h_cq(state, e)
                bits = d_h + math.log2(budget - e)
                if best is None or bits > best.bits:
                    best = CapacityBound(
                        bits=bits,
                        prior=tuple(float(p) for p in prior),
                        eps_prime=e,
                        d_h_bits=d_h,
                        evaluations=len(priors) * len(eps_primes),
                    )
        return best
