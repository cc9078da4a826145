from dataclasses import dataclass, field

import numpy as np

from measurement import consts


@dataclass(frozen=True)
class BinaryPovm:
    accept: np.ndarray
    dim: int

    @property
    def reject(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex) - self.accept


@dataclass(frozen=True)
class Povm:
    elements: tuple[np.ndarray, ...]
    dim: int

    @property
    def outcomes(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class DilatedMeasurement:
    unitary: np.ndarray
    system_dim: int
    probe_dim: int
    outcome_basis: tuple[int, ...]
    kind: str = field(default=consts.DilationKind.GENERAL)

    @property
    def is_binary(self) -> bool:
        return self.kind == consts.DilationKind.BINARY
