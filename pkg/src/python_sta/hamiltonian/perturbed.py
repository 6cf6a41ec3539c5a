from typing import Sequence

import numpy as np

from python_sta.errors import DomainError
from python_sta.hamiltonian.hamiltonian import DIMENSION, TimeDependentHamiltonian


class ScaledHamiltonian(TimeDependentHamiltonian):
    """The executed Hamiltonian factor * H(t): a miscalibrated drive amplitude."""

    def __init__(self, inner: TimeDependentHamiltonian, factor: float) -> None:
        self.inner = inner
        self.factor = float(factor)

    @property
    def duration(self) -> float:
        return self.inner.duration

    def at(self, t) -> np.ndarray:
        return self.factor * self.inner.at(t)


class DetunedHamiltonian(TimeDependentHamiltonian):
    """
    The executed Hamiltonian H(t) + offset * sum_k |k><k| over the given levels (1-based):
    a static frequency offset that appears at run time, after the protocol was designed.
    """

    def __init__(self, inner: TimeDependentHamiltonian, offset: float, levels: Sequence[int] = (2,)) -> None:
        if not levels or any(level < 1 or level > DIMENSION for level in levels):
            raise DomainError(f"levels must be drawn from 1..{DIMENSION}, got {tuple(levels)!r}")
        self.inner = inner
        self.offset = float(offset)
        self.levels = tuple(levels)

    @property
    def duration(self) -> float:
        return self.inner.duration

    def at(self, t) -> np.ndarray:
        h = np.array(self.inner.at(t), dtype=complex)
        for level in self.levels:
            h[..., level - 1, level - 1] += self.offset
        return h
