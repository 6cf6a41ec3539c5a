import math

import numpy as np

from python_sta.errors import DomainError
from python_sta.hamiltonian.hamiltonian import DIMENSION, TimeDependentHamiltonian


class PiPulseHamiltonian(TimeDependentHamiltonian):
    """
    A flat resonant pulse on the {|1>, |3>} pair: H(1,3) = H(3,1) = rabi / 2, everything else 0.
    With rabi * duration = pi the population of |1> is inverted into |3>; |2> is never coupled.
    """

    def __init__(self, rabi: float, duration: float) -> None:
        if duration <= 0:
            raise DomainError(f"duration must be > 0, got {duration!r}")
        if not math.isfinite(rabi):
            raise DomainError(f"rabi must be finite, got {rabi!r}")
        self.rabi = float(rabi)
        self._duration = float(duration)

    @property
    def duration(self) -> float:
        return self._duration

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        h = np.zeros(t.shape + (DIMENSION, DIMENSION), dtype=complex)
        h[..., 0, 2] = h[..., 2, 0] = self.rabi / 2
        return h


def rabi_transfer_probability(rabi: float, detuning: float, duration: float) -> float:
    """
    Generalised Rabi formula for a two-level system driven at Rabi frequency `rabi` with
    detuning `detuning` for `duration`:

        P = rabi^2 / (rabi^2 + detuning^2) * sin^2(sqrt(rabi^2 + detuning^2) * duration / 2)
    """
    generalized = math.hypot(rabi, detuning)
    if generalized == 0:
        return 0.0
    return (rabi / generalized) ** 2 * math.sin(generalized * duration / 2) ** 2
