from dataclasses import dataclass

import numpy as np

from hypotest.entities import CqJointState, HypothesisTest


@dataclass(frozen=True)
class CqChannel:
    symbols: tuple[str, ...]
    outputs: dict[str, np.ndarray]
    dim_b: int

    def output(self, symbol: str) -> np.ndarray:
        return self.outputs[symbol]


@dataclass(frozen=True)
class Codebook:
    codewords: tuple[str, ...]

    @property
    def message_count(self) -> int:
        return len(self.codewords)


@dataclass(frozen=True)
class KrausMap:
    kraus: tuple[np.ndarray, ...]

    def apply(self, tau: np.ndarray) -> np.ndarray:
        out = sum(k @ tau @ k.conj().T for k in self.kraus)
        return (out + out.conj().T) / 2


@dataclass(frozen=True)
class DecoderSpec:
    q_xb: np.ndarray
    position_ops: tuple[np.ndarray, ...]
    eps_prime: float


@dataclass(frozen=True)
class DecodingStats:
    per_message_success: tuple[float, ...]
    average_error: float
    maximal_error: float
    sen_rhs: float
    per_message_sen_rhs: tuple[float, ...]
    bound_value: float


@dataclass(frozen=True)
class UnionBoundCheck:
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class Trajectory:
    decoded: int | None
    path: tuple[int, ...]


@dataclass(frozen=True)
class CodingSetup:
    state: CqJointState
    test: HypothesisTest
    eps_prime: float
    accept_ops: tuple[np.ndarray, ...]
    reject_maps: tuple[KrausMap, ...]
    tr_q_joint: float
    tr_q_product: float


@dataclass(frozen=True)
class ExperimentReport:
    message_count: int
    eps_prime: float
    trials: int
    empirical_error: float
    stderr: float
    analytic_bound: float
    intermediate_bound: float
    tr_q_joint: float
    tr_q_product: float
    d_h_bits: float

    @property
    def slack(self) -> float:
        return self.analytic_bound - self.empirical_error


@dataclass(frozen=True)
class CapacityBound:
    bits: float
    prior: tuple[float, ...]
    eps_prime: float
    d_h_bits: float
    evaluations: int
