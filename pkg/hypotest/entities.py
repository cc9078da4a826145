import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class HypothesisTest:
    q: np.ndarray
    type1_error: float
    type2_error: float
    threshold: float
    boundary_fraction: float
    dual_value: float
    blocks: tuple[np.ndarray, ...] = field(default=())

    @property
    def beta(self) -> float:
        return self.type2_error

    @property
    def multiplier(self) -> float:
        """Dual multiplier paired with the threshold: the test is optimal for mu*rho - sigma."""
        if math.isinf(self.threshold):
            return 0.0
        if self.threshold == 0:
            return math.inf
        return 1.0 / self.threshold

    @property
    def duality_gap(self) -> float:
        return self.type2_error - self.dual_value


@dataclass(frozen=True)
class CqJointState:
    symbols: tuple[str, ...]
    prior: np.ndarray
    blocks: tuple[np.ndarray, ...]
    dim_b: int

    @property
    def average(self) -> np.ndarray:
        return sum(p * rho for p, rho in zip(self.prior, self.blocks))

    def index(self, symbol: str) -> int:
        return self.symbols.index(symbol)
