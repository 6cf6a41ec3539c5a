import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np
from scipy.integrate import simpson

from python_sta.errors import DegeneratePointError, DomainError
from python_sta.hamiltonian.hamiltonian import DIMENSION, TimeDependentHamiltonian

logger = logging.getLogger(__name__)

TWO_PI = 2 * np.pi
NOMINAL_OMEGA0 = TWO_PI * 3.0     # 2 pi x 3 MHz in rad/us
NOMINAL_T_F = 10.0                # us
DEFAULT_AREA_POINTS = 2001


@dataclass(frozen=True)
class StirapParams:
    """
    Drive parameters of the Lambda system: Gaussian pump and Stokes pulses of common amplitude
    omega0 and width sigma, peaked at t_f/2 + t0 (pump) and t_f/2 - t0 (Stokes), plus the
    one-photon detuning delta_p and the two-photon detuning delta_2. Frequencies in rad/us,
    times in us. sigma = inf gives flat pulses.
    """
    omega0: float = NOMINAL_OMEGA0
    t_f: float = NOMINAL_T_F
    t0: float = NOMINAL_T_F / 10
    sigma: float = NOMINAL_T_F / 6
    delta_p: float = 0.0
    delta_2: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.omega0) or self.omega0 <= 0:
            raise DomainError(f"omega0 must be > 0, got {self.omega0!r}")
        if not math.isfinite(self.t_f) or self.t_f <= 0:
            raise DomainError(f"t_f must be > 0, got {self.t_f!r}")
        if math.isnan(self.sigma) or self.sigma <= 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma!r}")
        if not 0 < self.t0 < self.t_f / 2:
            raise DomainError(f"t0 must lie in (0, t_f/2), got {self.t0!r}")
        if not (math.isfinite(self.delta_p) and math.isfinite(self.delta_2)):
            raise DomainError("detunings must be finite")

    @classmethod
    def standard(cls, omega0: float, t_f: float, t0: float, sigma: float, delta_p: float = 0.0) -> "StirapParams":
        """Two-photon resonant protocol (delta_2 = 0), the only case STIRAP transfers population in."""
        return cls(omega0=omega0, t_f=t_f, t0=t0, sigma=sigma, delta_p=delta_p, delta_2=0.0)

    @classmethod
    def nominal(cls, t_f: float = NOMINAL_T_F, omega0: float = NOMINAL_OMEGA0, delta_p: float = 0.0) -> "StirapParams":
        """The reference parameter set: t0 = t_f / 10 and sigma = t_f / 6."""
        return cls.standard(omega0=omega0, t_f=t_f, t0=t_f / 10, sigma=t_f / 6, delta_p=delta_p)

    def replace(self, **changes) -> "StirapParams":
        return dataclasses.replace(self, **changes)

    @property
    def pump_peak(self) -> float:
        return self.t_f / 2 + self.t0

    @property
    def stokes_peak(self) -> float:
        return self.t_f / 2 - self.t0


class MixingAngles(NamedTuple):
    theta: float
    phi: float


class Eigensystem(NamedTuple):
    e0: float
    e_plus: float
    e_minus: float
    n0: np.ndarray
    n_plus: np.ndarray
    n_minus: np.ndarray


def _out(value: np.ndarray):
    return float(value) if np.ndim(value) == 0 else value


def _gaussian(p: StirapParams, t, centre: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return p.omega0 * np.exp(-((t - centre) ** 2) / p.sigma ** 2)


def _gaussian_rate(p: StirapParams, t, centre: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return -2 * (t - centre) / p.sigma ** 2 * _gaussian(p, t, centre)


def pump_pulse(p: StirapParams, t):
    """Pump Rabi frequency Omega_p(t) = omega0 exp[-(t - t_f/2 - t0)^2 / sigma^2] in rad/us."""
    return _out(_gaussian(p, t, p.pump_peak))


def stokes_pulse(p: StirapParams, t):
    """Stokes Rabi frequency Omega_s(t) = omega0 exp[-(t - t_f/2 + t0)^2 / sigma^2] in rad/us."""
    return _out(_gaussian(p, t, p.stokes_peak))


def rabi_frequency(p: StirapParams, t):
    """Rms Rabi frequency Omega(t) = sqrt(Omega_p^2 + Omega_s^2)."""
    return _out(np.hypot(_gaussian(p, t, p.pump_peak), _gaussian(p, t, p.stokes_peak)))


def hamiltonian(p: StirapParams, t) -> np.ndarray:
    """
    The rotating-wave Hamiltonian (hbar = 1)

        H(t) = 1/2 [[0, Omega_p, 0], [Omega_p, 2 delta_p, Omega_s], [0, Omega_s, 2 delta_2]]

    Args:
    p (StirapParams): The drive parameters.
    t (float | np.ndarray): Time(s) in us.

    Returns:
    np.ndarray: Real symmetric complex-typed array of shape np.shape(t) + (3, 3).
    """
    t = np.asarray(t, dtype=float)
    omega_p = _gaussian(p, t, p.pump_peak)
    omega_s = _gaussian(p, t, p.stokes_peak)
    h = np.zeros(t.shape + (DIMENSION, DIMENSION), dtype=complex)
    h[..., 0, 1] = h[..., 1, 0] = omega_p / 2
    h[..., 1, 2] = h[..., 2, 1] = omega_s / 2
    h[..., 1, 1] = p.delta_p
    h[..., 2, 2] = p.delta_2
    return h


def mixing_theta(p: StirapParams, t):
    """theta(t) = atan2(Omega_p, Omega_s); 0 where both pulses vanish."""
    return _out(np.arctan2(_gaussian(p, t, p.pump_peak), _gaussian(p, t, p.stokes_peak)))


def theta_on_grid(p: StirapParams, grid) -> Tuple[np.ndarray, bool]:
    """
    Evaluate theta on an ordered grid. Where both pulses underflow to zero the angle is
    continued with the previous grid value (0 at the first point).

    Returns:
    Tuple[np.ndarray, bool]: The angles and whether any degenerate point was met.
    """
    grid = np.asarray(grid, dtype=float)
    omega_p = _gaussian(p, grid, p.pump_peak)
    omega_s = _gaussian(p, grid, p.stokes_peak)
    theta = np.arctan2(omega_p, omega_s)
    degenerate = (omega_p == 0) & (omega_s == 0)
    for i in np.flatnonzero(degenerate):
        theta[i] = theta[i - 1] if i > 0 else 0.0
    return theta, bool(degenerate.any())


def theta_rate(p: StirapParams, t):
    """
    Analytic d(theta)/dt = (dOmega_p Omega_s - Omega_p dOmega_s) / Omega^2, 0 where Omega = 0.
    """
    t = np.asarray(t, dtype=float)
    omega_p = _gaussian(p, t, p.pump_peak)
    omega_s = _gaussian(p, t, p.stokes_peak)
    numerator = _gaussian_rate(p, t, p.pump_peak) * omega_s - omega_p * _gaussian_rate(p, t, p.stokes_peak)
    omega_sq = omega_p ** 2 + omega_s ** 2
    rate = np.divide(numerator, omega_sq, out=np.zeros_like(omega_sq), where=omega_sq > 0)
    return _out(rate)


def mixing_angles(p: StirapParams, t: float) -> MixingAngles:
    """
    theta from tan(theta) = Omega_p / Omega_s and phi from tan(2 phi) = Omega / delta_p,
    both through atan2 so that theta is in [0, pi/2] and phi in (0, pi/2) for Omega > 0.

    Raises:
    DegeneratePointError: If Omega(t) = 0.
    """
    omega_p = float(_gaussian(p, t, p.pump_peak))
    omega_s = float(_gaussian(p, t, p.stokes_peak))
    omega = math.hypot(omega_p, omega_s)
    if omega == 0:
        raise DegeneratePointError(t)
    return MixingAngles(theta=math.atan2(omega_p, omega_s), phi=0.5 * math.atan2(omega, p.delta_p))


def eigensystem(p: StirapParams, t: float) -> Eigensystem:
    """
    Closed-form instantaneous eigenpairs of the two-photon resonant Hamiltonian:

        E0 = 0,                   |n0> = cos(theta)|1> - sin(theta)|3>
        E+ = Omega cot(phi) / 2,  |n+> = sin(theta) sin(phi)|1> + cos(phi)|2> + cos(theta) sin(phi)|3>
        E- = -Omega tan(phi) / 2, |n-> = sin(theta) cos(phi)|1> - sin(phi)|2> + cos(theta) cos(phi)|3>

    Raises:
    DomainError: If delta_2 != 0, where these expressions do not hold.
    DegeneratePointError: If Omega(t) = 0.
    """
    if p.delta_2 != 0:
        raise DomainError("the closed-form eigensystem needs two-photon resonance (delta_2 = 0)")
    theta, phi = mixing_angles(p, t)
    omega = float(rabi_frequency(p, t))
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    return Eigensystem(
        e0=0.0,
        e_plus=omega * cp / sp / 2,
        e_minus=-omega * sp / cp / 2,
        n0=np.array([ct, 0.0, -st], dtype=complex),
        n_plus=np.array([st * sp, cp, ct * sp], dtype=complex),
        n_minus=np.array([st * cp, -sp, ct * cp], dtype=complex),
    )


def dark_state(p: StirapParams, t) -> np.ndarray:
    """The dark state cos(theta)|1> - sin(theta)|3>, shape np.shape(t) + (3,)."""
    theta = np.asarray(mixing_theta(p, t))
    state = np.zeros(theta.shape + (DIMENSION,), dtype=complex)
    state[..., 0] = np.cos(theta)
    state[..., 2] = -np.sin(theta)
    return state


def dark_state_populations(p: StirapParams, t):
    """Level populations (cos^2 theta, 0, sin^2 theta) of the dark state."""
    theta = np.asarray(mixing_theta(p, t))
    p1 = np.cos(theta) ** 2
    return _out(p1), _out(np.zeros_like(p1)), _out(np.sin(theta) ** 2)


@dataclass(frozen=True)
class AdiabaticityReport:
    """
    min_local_ratio is the smallest Omega / |theta_dot| on the grid (inf when theta never
    moves) and pulse_area the integral of Omega over the grid.
    """
    min_local_ratio: float
    pulse_area: float
    degenerate: bool

    @property
    def global_ratio(self) -> float:
        return self.pulse_area / (np.pi / 2)


def adiabaticity_report(p: StirapParams, grid=None) -> AdiabaticityReport:
    """
    Evaluate the local (Omega >> theta_dot) and global (area >> pi/2) adiabaticity conditions.

    Args:
    p (StirapParams): The drive parameters.
    grid (np.ndarray, optional): Time grid in [0, t_f]; defaults to 2001 uniform points.

    Returns:
    AdiabaticityReport: The local ratio minimum and the Simpson pulse area.
    """
    grid = np.linspace(0.0, p.t_f, DEFAULT_AREA_POINTS) if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DomainError("grid must be a one dimensional array of at least two times")
    if grid.min() < 0 or grid.max() > p.t_f * (1 + 1e-12):
        raise DomainError(f"grid must lie within [0, {p.t_f!r}] us")

    omega = np.asarray(rabi_frequency(p, grid))
    rate = np.abs(np.asarray(theta_rate(p, grid)))
    ratio = np.divide(omega, rate, out=np.full_like(omega, np.inf), where=rate > 0)
    degenerate = bool(np.any(omega == 0))
    report = AdiabaticityReport(
        min_local_ratio=float(ratio.min()),
        pulse_area=float(simpson(omega, x=grid)),
        degenerate=degenerate,
    )
    logger.debug("adiabaticity: min Omega/theta_dot = %.3g, area = %.3g rad", report.min_local_ratio, report.pulse_area)
    return report


class StirapHamiltonian(TimeDependentHamiltonian):
    """The reference STIRAP protocol as a Hamiltonian on [0, t_f]."""

    def __init__(self, params: StirapParams) -> None:
        self.params = params

    @property
    def duration(self) -> float:
        return self.params.t_f

    def at(self, t) -> np.ndarray:
        return hamiltonian(self.params, t)
