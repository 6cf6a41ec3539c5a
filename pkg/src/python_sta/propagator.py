import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from python_sta import rescale
from python_sta.errors import DegeneratePointError, DomainError, NormalizationError
from python_sta.hamiltonian import StirapParams, TimeDependentHamiltonian
from python_sta.hamiltonian.hamiltonian import DIMENSION
from python_sta.hamiltonian.stirap import dark_state, rabi_frequency, theta_on_grid
from python_sta.rescale import RescaleParams

logger = logging.getLogger(__name__)

NORM_TOL = 1e-10
REFERENCE_STEPS = 4000
DEFAULT_CONVERGENCE_TOL = 1e-8


def ket(level: int) -> np.ndarray:
    """Basis state |level> for level in 1..3."""
    if not 1 <= level <= DIMENSION:
        raise DomainError(f"level must be in 1..{DIMENSION}, got {level!r}")
    state = np.zeros(DIMENSION, dtype=complex)
    state[level - 1] = 1.0
    return state


def check_normalized(psi: np.ndarray, atol: float = NORM_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (DIMENSION,):
        raise NormalizationError(f"expected a state of shape ({DIMENSION},), got {psi.shape}")
    norm_sq = float(np.vdot(psi, psi).real)
    if abs(norm_sq - 1) > atol:
        raise NormalizationError(f"state is not normalised: <psi|psi> = {norm_sq!r}")
    return psi


def fidelity(psi: np.ndarray, target: np.ndarray) -> float:
    """
    Transfer probability |<target|psi>|^2, clipped to [0, 1].

    Raises:
    NormalizationError: If either state is not normalised.
    """
    psi = check_normalized(psi)
    target = check_normalized(target)
    return float(min(max(abs(np.vdot(target, psi)) ** 2, 0.0), 1.0))


def uniform_grid(duration: float, n_points: int) -> np.ndarray:
    if n_points < 2:
        raise DomainError(f"a grid needs at least two points, got {n_points!r}")
    return np.linspace(0.0, duration, n_points)


def default_steps(params: RescaleParams | None = None) -> int:
    """
    Total step count for a protocol: REFERENCE_STEPS for a reference, and
    REFERENCE_STEPS * max(1, ceil(f_dot_max)) / a for a rescaled one so that the
    fastest part of the bracket factor stays resolved.
    """
    if params is None:
        return REFERENCE_STEPS
    return int(math.ceil(REFERENCE_STEPS * max(1, math.ceil(params.max_rate)) / params.a))


def substeps_for(total_steps: int, grid: np.ndarray) -> int:
    """Substeps per grid interval so that the whole grid gets at least total_steps steps."""
    return max(1, int(math.ceil(total_steps / (len(grid) - 1))))


class TrajectoryMethod(enum.Enum):
    NUMERIC = "numeric"
    ADIABATIC = "adiabatic"
    REPARAMETRIZED = "reparametrized"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    States on an increasing time grid. The arrays are made read-only on construction.

    converged is None unless a step-doubling check was requested; convergence_error then
    holds the largest amplitude change observed when the step count was doubled.
    """
    times: np.ndarray
    states: np.ndarray
    method: TrajectoryMethod
    converged: bool | None = None
    convergence_error: float | None = None

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float)
        states = np.array(self.states, dtype=complex)
        if times.ndim != 1 or times.size < 1:
            raise DomainError("trajectory times must be a non-empty one dimensional array")
        if states.shape != (times.size, DIMENSION):
            raise DomainError(f"states must have shape ({times.size}, {DIMENSION}), got {states.shape}")
        if np.any(np.diff(times) <= 0):
            raise DomainError("trajectory times must be strictly increasing")
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @property
    def populations(self) -> np.ndarray:
        """Level populations (P1, P2, P3) per grid point, shape (N, 3)."""
        return np.abs(self.states) ** 2

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return self.times.size


def _step_unitaries(hamiltonians: np.ndarray, dt: np.ndarray) -> np.ndarray:
    """exp(-i H dt) through the eigendecomposition of each Hermitian H in the stack."""
    energies, vectors = np.linalg.eigh(hamiltonians)
    phases = np.exp(-1j * energies * dt[..., None])
    return (vectors * phases[..., None, :]) @ np.conj(np.swapaxes(vectors, -1, -2))


def _ordered_product(unitaries: np.ndarray) -> np.ndarray:
    """
    Time-ordered product U[n-1] ... U[1] U[0] along axis -3, by pairwise reduction.
    """
    while unitaries.shape[-3] > 1:
        if unitaries.shape[-3] % 2:
            pad = np.broadcast_to(np.eye(DIMENSION, dtype=complex), unitaries.shape[:-3] + (1, DIMENSION, DIMENSION))
            unitaries = np.concatenate([unitaries, pad], axis=-3)
        unitaries = unitaries[..., 1::2, :, :] @ unitaries[..., 0::2, :, :]
    return unitaries[..., 0, :, :]


def _propagate(hamiltonian: TimeDependentHamiltonian, psi0: np.ndarray, grid: np.ndarray, substeps: int) -> np.ndarray:
    starts = grid[:-1]
    widths = np.diff(grid)
    dt = widths / substeps
    midpoints = starts[:, None] + (np.arange(substeps)[None, :] + 0.5) * dt[:, None]
    unitaries = _step_unitaries(hamiltonian.at(midpoints), np.broadcast_to(dt[:, None], midpoints.shape))
    interval_unitaries = _ordered_product(unitaries)

    states = np.empty((grid.size, DIMENSION), dtype=complex)
    states[0] = psi0
    for i, unitary in enumerate(interval_unitaries):
        states[i + 1] = unitary @ states[i]
    return states


def evolve(
    hamiltonian: TimeDependentHamiltonian,
    psi0: np.ndarray,
    grid,
    steps_per_interval: int,
    check_convergence: bool = False,
    convergence_tol: float = DEFAULT_CONVERGENCE_TOL,
) -> Trajectory:
    """
    Integrate i d|psi>/dt = H(t)|psi> with the exponential midpoint rule: every substep applies
    exp(-i H(t_mid) dt), computed exactly from the eigendecomposition of H(t_mid), so each
    step is unitary and no renormalisation is needed.

    Args:
    hamiltonian (TimeDependentHamiltonian): The protocol to integrate.
    psi0 (np.ndarray): Normalised initial state.
    grid (np.ndarray): Increasing output times inside the Hamiltonian's domain.
    steps_per_interval (int): Substeps between consecutive grid points.
    check_convergence (bool): Repeat with doubled substeps and record the difference.
    convergence_tol (float): Largest amplitude change accepted by the doubling check.

    Returns:
    Trajectory: The numeric trajectory on the grid.

    Raises:
    NormalizationError: If psi0 is not normalised.
    DomainError: If the grid leaves the Hamiltonian's domain or is not increasing.
    """
    psi0 = check_normalized(psi0)
    grid = hamiltonian.check_domain(np.asarray(grid, dtype=float))
    if grid.ndim != 1 or grid.size < 2:
        raise DomainError("the output grid needs at least two times")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("the output grid must be strictly increasing")
    if steps_per_interval < 1:
        raise DomainError(f"steps_per_interval must be >= 1, got {steps_per_interval!r}")

    states = _propagate(hamiltonian, psi0, grid, steps_per_interval)
    converged = error = None
    if check_convergence:
        refined = _propagate(hamiltonian, psi0, grid, 2 * steps_per_interval)
        error = float(np.max(np.abs(refined - states)))
        converged = error < convergence_tol
        if not converged:
            logger.warning("step doubling changed amplitudes by %.3e (> %.1e)", error, convergence_tol)

    logger.debug("evolved %d intervals x %d substeps up to t = %.6g us", grid.size - 1, steps_per_interval, grid[-1])
    return Trajectory(grid, states, TrajectoryMethod.NUMERIC, converged, error)


def adiabatic_trajectory(p: StirapParams, grid) -> Trajectory:
    """
    The adiabatic dark-state route |psi(t)> = cos(theta)|1> - sin(theta)|3>. E0 = 0, so there is
    no dynamical phase.

    Raises:
    DegeneratePointError: If both pulses vanish at an interior grid point.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.min() < -1e-12 * p.t_f or grid.max() > p.t_f * (1 + 1e-12):
        raise DomainError(f"grid must lie within [0, {p.t_f!r}] us")
    interior = np.asarray(rabi_frequency(p, grid[1:-1]))
    if np.any(interior == 0):
        raise DegeneratePointError(float(grid[1 + np.flatnonzero(interior == 0)[0]]))
    theta, _ = theta_on_grid(p, grid)
    states = np.zeros((grid.size, DIMENSION), dtype=complex)
    states[:, 0] = np.cos(theta)
    states[:, 2] = -np.sin(theta)
    return Trajectory(grid, states, TrajectoryMethod.ADIABATIC)


def reparametrized_trajectory(
    reference: Trajectory,
    params: RescaleParams,
    grid=None,
    stirap: StirapParams | None = None,
) -> Trajectory:
    """
    The rescaled dynamics obtained from a reference trajectory by |psi~(t)> = |psi(f(t))>.

    For an adiabatic reference with its StirapParams given, the closed form
    cos(theta[f(t)])|1> - sin(theta[f(t)])|3> is used. Otherwise real and imaginary parts are
    interpolated with cubic splines at f(t) and renormalised.

    Args:
    reference (Trajectory): Trajectory spanning [0, t_f].
    params (RescaleParams): The rescaling parameters.
    grid (np.ndarray, optional): Times in [0, t_f / a]; defaults to the reference grid divided by a.
    stirap (StirapParams, optional): Drive parameters of an adiabatic reference.

    Raises:
    DomainError: If f(t) leaves the span of the reference trajectory.
    """
    grid = reference.times / params.a if grid is None else np.asarray(grid, dtype=float)
    reference_times = np.atleast_1d(rescale.f(params, grid))
    span = reference.times
    slack = 1e-12 * max(1.0, params.t_f)
    if reference_times.min() < span[0] - slack or reference_times.max() > span[-1] + slack:
        raise DomainError(
            f"f(t) spans [{reference_times.min()!r}, {reference_times.max()!r}] us, outside the "
            f"reference trajectory [{span[0]!r}, {span[-1]!r}] us"
        )
    reference_times = np.clip(reference_times, span[0], span[-1])

    if reference.method is TrajectoryMethod.ADIABATIC and stirap is not None:
        theta, _ = theta_on_grid(stirap, reference_times)
        states = np.zeros((grid.size, DIMENSION), dtype=complex)
        states[:, 0] = np.cos(theta)
        states[:, 2] = -np.sin(theta)
    else:
        if span.size < 2:
            raise DomainError("interpolating a reference needs at least two samples")
        real = CubicSpline(span, reference.states.real, axis=0)(reference_times)
        imag = CubicSpline(span, reference.states.imag, axis=0)(reference_times)
        states = real + 1j * imag
        states /= np.linalg.norm(states, axis=1, keepdims=True)
    return Trajectory(grid, states, TrajectoryMethod.REPARAMETRIZED)


def route_overlap(trajectory: Trajectory, p: StirapParams, params: RescaleParams | None = None) -> np.ndarray:
    """
    |<n0(f(t))|psi(t)>|^2 on the trajectory grid: how much of the state stays on the
    instantaneous dark state of the (rescaled) route. Without params, f is the identity.
    """
    reference_times = trajectory.times if params is None else np.atleast_1d(rescale.f(params, trajectory.times))
    route = dark_state(p, reference_times)
    return np.abs(np.sum(np.conj(route) * trajectory.states, axis=-1)) ** 2
