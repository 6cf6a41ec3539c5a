import enum
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np
from sortedcontainers import SortedDict

from python_sta.baselines import BaselineSpec
from python_sta.errors import DomainError, StaError
from python_sta.hamiltonian import (
    CounterdiabaticHamiltonian,
    DetunedHamiltonian,
    ScaledHamiltonian,
    StirapHamiltonian,
    StirapParams,
    TimeDependentHamiltonian,
    tr_hamiltonian,
)
from python_sta.hamiltonian.stirap import TWO_PI
from python_sta.propagator import REFERENCE_STEPS, default_steps, evolve, fidelity, ket
from python_sta.rescale import RescaleParams

logger = logging.getLogger(__name__)

DEFAULT_POINTS = 121
DEFAULT_AMPLITUDE_RANGE = (-0.3, 0.3)
DEFAULT_DETUNING_RANGE = (-TWO_PI * 6, TWO_PI * 6)     # +-6 MHz in rad/us
DEFAULT_DELAY_RANGE = (-0.2, 0.2)
DEFAULT_DURATION = 1.0                                 # us
CD_LABEL = "standard CD"


class Protocol(enum.Enum):
    REFERENCE = "reference"
    TR = "tr"
    CD = "cd"
    PI_PULSE = "pi_pulse"


class ErrorKind(enum.Enum):
    AMPLITUDE = "amplitude_beta"
    DETUNING = "detuning_shift"
    DELAY = "delay_shift"


class DetuningModel(enum.Enum):
    """Which diagonal entries a pump frequency error shifts (pi pulses always use |3>)."""
    ONE_PHOTON = "one_photon"
    ONE_AND_TWO_PHOTON = "one_and_two_photon"

    @property
    def levels(self) -> Tuple[int, ...]:
        return (2,) if self is DetuningModel.ONE_PHOTON else (2, 3)


@dataclass(frozen=True)
class ScanSpec:
    """
    One robustness scan: a protocol executed with a systematic error swept over [low, high].

    error kinds:
      amplitude_beta  omega0 -> omega0 (1 + beta) on the executed pulses
      detuning_shift  static offset (rad/us) on the executed Hamiltonian
      delay_shift     t0 -> t0 (1 + eps) on the executed pulses

    duration is the operation time T. For the tr protocol the reference lasts a * T; stirap,
    when given, must agree with that.
    """
    protocol: Protocol
    error_kind: ErrorKind
    low: float
    high: float
    n_points: int = DEFAULT_POINTS
    duration: float = DEFAULT_DURATION
    a: float | None = None
    stirap: StirapParams | None = None
    detuning_model: DetuningModel = DetuningModel.ONE_PHOTON
    steps: int | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n_points < 2:
            raise DomainError(f"n_points must be >= 2, got {self.n_points!r}")
        if not (math.isfinite(self.low) and math.isfinite(self.high)) or self.low > self.high:
            raise DomainError(f"scan range must be finite with low <= high, got [{self.low!r}, {self.high!r}]")
        if not math.isfinite(self.duration) or self.duration <= 0:
            raise DomainError(f"duration must be > 0, got {self.duration!r}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers!r}")
        if self.steps is not None and self.steps < 1:
            raise DomainError(f"steps must be >= 1, got {self.steps!r}")
        if self.protocol is Protocol.TR:
            if self.a is None:
                raise DomainError("a tr scan needs the time contraction parameter a")
            RescaleParams(self.a, self.a * self.duration)
        if self.protocol is Protocol.PI_PULSE and self.error_kind is ErrorKind.DELAY:
            raise DomainError("a delay scan needs a pulse pair, the pi pulse has none")
        if self.stirap is not None:
            expected = self.a * self.duration if self.protocol is Protocol.TR else self.duration
            if abs(self.stirap.t_f - expected) > 1e-9 * expected:
                raise DomainError(f"stirap t_f must be {expected!r} us for this scan, got {self.stirap.t_f!r}")

    @classmethod
    def amplitude(cls, protocol: Protocol, low: float = DEFAULT_AMPLITUDE_RANGE[0],
                  high: float = DEFAULT_AMPLITUDE_RANGE[1], **kwargs) -> "ScanSpec":
        return cls(protocol, ErrorKind.AMPLITUDE, low, high, **kwargs)

    @classmethod
    def detuning(cls, protocol: Protocol, low: float = DEFAULT_DETUNING_RANGE[0],
                 high: float = DEFAULT_DETUNING_RANGE[1], **kwargs) -> "ScanSpec":
        return cls(protocol, ErrorKind.DETUNING, low, high, **kwargs)

    @classmethod
    def delay(cls, protocol: Protocol, low: float = DEFAULT_DELAY_RANGE[0],
              high: float = DEFAULT_DELAY_RANGE[1], **kwargs) -> "ScanSpec":
        return cls(protocol, ErrorKind.DELAY, low, high, **kwargs)

    @property
    def error_values(self) -> np.ndarray:
        return np.linspace(self.low, self.high, self.n_points)

    @property
    def label(self) -> str:
        if self.protocol is Protocol.TR:
            return f"tr(a={self.a:g})"
        if self.protocol is Protocol.CD:
            return CD_LABEL
        return self.protocol.value

    def pulse_params(self) -> StirapParams | None:
        """The error-free pulse pair the protocol is built on (None for the pi pulse)."""
        if self.stirap is not None:
            return self.stirap
        if self.protocol is Protocol.TR:
            return StirapParams.nominal(t_f=self.a * self.duration)
        if self.protocol is Protocol.REFERENCE:
            return StirapParams.nominal(t_f=self.duration)
        if self.protocol is Protocol.CD:
            return BaselineSpec.counterdiabatic(self.duration).stirap
        return None

    def rescale_params(self) -> RescaleParams | None:
        if self.protocol is not Protocol.TR:
            return None
        return RescaleParams(self.a, self.pulse_params().t_f)

    def total_steps(self) -> int:
        if self.steps is not None:
            return self.steps
        return default_steps(self.rescale_params()) if self.protocol is Protocol.TR else REFERENCE_STEPS


@dataclass(frozen=True, eq=False)
class ScanResult:
    spec: ScanSpec
    error_values: np.ndarray
    fidelities: np.ndarray
    failed: np.ndarray
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def protocol(self) -> str:
        return self.spec.label

    def __len__(self) -> int:
        return self.error_values.size


def executed_hamiltonian(spec: ScanSpec, error: float) -> TimeDependentHamiltonian:
    """
    Build the Hamiltonian that actually runs when the protocol of `spec` meets a systematic
    error of size `error`.

    Amplitude errors scale the physical pulses (for tr the already rescaled ones, which is the
    same as scaling omega0 before rescaling). Detuning errors are a static run-time offset and do
    not go through the f_dot modulation. Delay errors move the pulses; a counterdiabatic
    correction stays designed for the nominal timing.
    """
    kind = spec.error_kind
    if spec.protocol is Protocol.PI_PULSE:
        hamiltonian = BaselineSpec.pi_pulse(spec.duration).build()
        if kind is ErrorKind.AMPLITUDE:
            return ScaledHamiltonian(hamiltonian, 1 + error)
        return DetunedHamiltonian(hamiltonian, error, levels=(3,))

    nominal = spec.pulse_params()
    if kind is ErrorKind.DELAY:
        executed = nominal.replace(t0=nominal.t0 * (1 + error))
    elif kind is ErrorKind.AMPLITUDE and spec.protocol is not Protocol.CD:
        executed = nominal.replace(omega0=nominal.omega0 * (1 + error))
    else:
        executed = nominal

    if spec.protocol is Protocol.CD:
        hamiltonian = CounterdiabaticHamiltonian(executed, correction_params=nominal)
        if kind is ErrorKind.AMPLITUDE:
            hamiltonian = ScaledHamiltonian(hamiltonian, 1 + error)
    elif spec.protocol is Protocol.TR:
        hamiltonian = tr_hamiltonian(StirapHamiltonian(executed), spec.rescale_params())
    else:
        hamiltonian = StirapHamiltonian(executed)

    if kind is ErrorKind.DETUNING:
        hamiltonian = DetunedHamiltonian(hamiltonian, error, levels=spec.detuning_model.levels)
    return hamiltonian


def _run_point(spec: ScanSpec, error: float) -> Tuple[float, bool]:
    try:
        hamiltonian = executed_hamiltonian(spec, error)
        trajectory = evolve(hamiltonian, ket(1), [0.0, hamiltonian.duration], spec.total_steps())
        return fidelity(trajectory.final_state, ket(3)), False
    except (StaError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        logger.warning("%s scan point %s=%r failed: %s", spec.label, spec.error_kind.value, error, exc)
        return math.nan, True


def _scan(spec: ScanSpec, values: np.ndarray) -> ScanResult:
    results: SortedDict = SortedDict()
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            futures = {pool.submit(_run_point, spec, float(v)): i for i, v in enumerate(values)}
            for future in as_completed(futures):
                results[futures[future]] = future.result()
    else:
        for i, v in enumerate(values):
            results[i] = _run_point(spec, float(v))

    fidelities = np.array([results[i][0] for i in results], dtype=float)
    failed = np.array([results[i][1] for i in results], dtype=bool)
    metadata = {
        "protocol": spec.label,
        "error_kind": spec.error_kind.value,
        "steps": spec.total_steps(),
        "operation_time_us": spec.duration,
    }
    if spec.error_kind is ErrorKind.DETUNING:
        levels = (3,) if spec.protocol is Protocol.PI_PULSE else spec.detuning_model.levels
        metadata["detuning_model"] = spec.detuning_model.value
        metadata["detuning_injection"] = f"static run-time offset on levels {list(levels)}, not f_dot modulated"
    logger.info("%s %s scan: %d points, %d failed", spec.label, spec.error_kind.value, values.size, int(failed.sum()))
    return ScanResult(spec, np.asarray(values, dtype=float), fidelities, failed, metadata)


def _require_kind(spec: ScanSpec, kind: ErrorKind) -> None:
    if spec.error_kind is not kind:
        raise DomainError(f"expected a {kind.value} scan, got {spec.error_kind.value}")


def run_amplitude_scan(spec: ScanSpec) -> ScanResult:
    """Fidelity of |1> -> |3> versus a systematic amplitude error omega0 -> omega0 (1 + beta)."""
    _require_kind(spec, ErrorKind.AMPLITUDE)
    return _scan(spec, spec.error_values)


def run_detuning_scan(spec: ScanSpec) -> ScanResult:
    """Fidelity of |1> -> |3> versus a static detuning error (rad/us)."""
    _require_kind(spec, ErrorKind.DETUNING)
    return _scan(spec, spec.error_values)


def run_delay_scan(spec: ScanSpec) -> ScanResult:
    """Fidelity of |1> -> |3> versus a relative error on the pulse delay t0."""
    _require_kind(spec, ErrorKind.DELAY)
    return _scan(spec, spec.error_values)


def run_scan(spec: ScanSpec) -> ScanResult:
    runners = {
        ErrorKind.AMPLITUDE: run_amplitude_scan,
        ErrorKind.DETUNING: run_detuning_scan,
        ErrorKind.DELAY: run_delay_scan,
    }
    return runners[spec.error_kind](spec)


def a_independence_check(
    a_values: Sequence[float],
    error_grid: Iterable[float],
    error_kind: ErrorKind = ErrorKind.AMPLITUDE,
    reference: StirapParams | None = None,
    workers: int = 1,
) -> float:
    """
    Run the same scan for several contraction parameters on one reference protocol (so each
    rescaled process lasts t_f / a) and return the largest pointwise distance between any
    two fidelity curves.

    Returns:
    float: max over the grid and over pairs of |F_a - F_a'|; inf if any point failed.
    """
    reference = StirapParams.nominal() if reference is None else reference
    values = np.asarray(list(error_grid), dtype=float)
    if values.size == 0:
        raise DomainError("error_grid must not be empty")
    curves = []
    for a in a_values:
        spec = ScanSpec(
            Protocol.TR, error_kind, float(values.min()), float(values.max()), n_points=max(2, values.size),
            duration=reference.t_f / a, a=a, stirap=reference, workers=workers,
        )
        curves.append(_scan(spec, values).fidelities)
    distance = 0.0
    for first, second in itertools.combinations(curves, 2):
        gap = np.abs(first - second)
        if np.any(np.isnan(gap)):
            return math.inf
        distance = max(distance, float(gap.max()))
    logger.info("a-independence over a=%s: max curve distance %.3e", list(a_values), distance)
    return distance


def dominance_margin(leader: ScanResult, other: ScanResult) -> float:
    """min over the shared error grid of F_leader - F_other (negative where `other` wins)."""
    if leader.error_values.shape != other.error_values.shape or \
            not np.allclose(leader.error_values, other.error_values):
        raise DomainError("curves must share the same error grid")
    return float(np.min(leader.fidelities - other.fidelities))
