import enum
import math
from dataclasses import dataclass

import numpy as np

from python_sta.errors import DomainError
from python_sta.hamiltonian import (
    CounterdiabaticHamiltonian,
    PiPulseHamiltonian,
    StirapParams,
    TimeDependentHamiltonian,
)
from python_sta.hamiltonian.stirap import NOMINAL_OMEGA0

DEFAULT_DURATION = 1.0          # us
DEFAULT_CD_T0_FRACTION = 1 / 8


class BaselineKind(enum.Enum):
    COUNTERDIABATIC = "counterdiabatic"
    PI_PULSE = "pi_pulse"


@dataclass(frozen=True)
class BaselineSpec:
    """
    A comparison protocol over the same operation window as the shortcut under test.

    For the counterdiabatic kind `stirap` holds the underlying pulse pair (its t_f is the
    duration); for the pi pulse `rabi` is the flat effective Rabi frequency with
    rabi * duration = pi.
    """
    kind: BaselineKind
    duration: float = DEFAULT_DURATION
    stirap: StirapParams | None = None
    rabi: float | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.duration) or self.duration <= 0:
            raise DomainError(f"duration must be > 0, got {self.duration!r}")
        if self.kind is BaselineKind.COUNTERDIABATIC:
            if self.stirap is None:
                raise DomainError("a counterdiabatic baseline needs its STIRAP pulses")
            if abs(self.stirap.t_f - self.duration) > 1e-12 * self.duration:
                raise DomainError(f"counterdiabatic pulses last {self.stirap.t_f!r} us, not {self.duration!r} us")
        else:
            if self.rabi is None:
                raise DomainError("a pi pulse needs its Rabi frequency")
            if abs(self.rabi * self.duration - math.pi) > 1e-12:
                raise DomainError(f"pi pulse area must be pi, got {self.rabi * self.duration!r}")

    @classmethod
    def counterdiabatic(cls, duration: float = DEFAULT_DURATION, t0_fraction: float = DEFAULT_CD_T0_FRACTION,
                        omega0: float = NOMINAL_OMEGA0) -> "BaselineSpec":
        """The reference pulse shape squeezed into `duration`, with t0 = t0_fraction * duration."""
        stirap = StirapParams.standard(omega0=omega0, t_f=duration, t0=t0_fraction * duration, sigma=duration / 6)
        return cls(BaselineKind.COUNTERDIABATIC, duration=duration, stirap=stirap)

    @classmethod
    def pi_pulse(cls, duration: float = DEFAULT_DURATION) -> "BaselineSpec":
        return cls(BaselineKind.PI_PULSE, duration=duration, rabi=math.pi / duration)

    def build(self) -> TimeDependentHamiltonian:
        if self.kind is BaselineKind.COUNTERDIABATIC:
            return CounterdiabaticHamiltonian(self.stirap)
        return PiPulseHamiltonian(self.rabi, self.duration)


def pi_pulse_hamiltonian(spec: BaselineSpec, t) -> np.ndarray:
    """
    The constant pi-pulse Hamiltonian of a baseline spec.

    Raises:
    DomainError: If spec is not a pi pulse or t lies outside [0, duration].
    """
    if spec.kind is not BaselineKind.PI_PULSE:
        raise DomainError(f"expected a pi pulse spec, got {spec.kind.value}")
    return PiPulseHamiltonian(spec.rabi, spec.duration)(t)
