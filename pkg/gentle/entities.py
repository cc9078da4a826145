from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GentleGap:
    disturbance: float
    bound: float

    @property
    def slack(self) -> float:
        return self.bound - self.disturbance


@dataclass(frozen=True)
class ReversalReport:
    scheme: str
    post_state: np.ndarray
    disturbance: float
    success_gap: float
    bound: float
    success_bound: float

    @property
    def slack(self) -> float:
        return self.bound - self.disturbance

    @property
    def success_slack(self) -> float:
        return self.success_bound - self.success_gap
