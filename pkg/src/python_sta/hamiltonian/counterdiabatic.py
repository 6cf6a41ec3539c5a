import numpy as np

from python_sta.errors import DomainError
from python_sta.hamiltonian.hamiltonian import DIMENSION, TimeDependentHamiltonian
from python_sta.hamiltonian.stirap import StirapParams, hamiltonian, theta_rate


def cd_correction(p: StirapParams, t) -> np.ndarray:
    """
    Transitionless correction theta_dot(t) (i|1><3| - i|3><1|) for the dark-state route.
    It satisfies H_cd |n0> = i d|n0>/dt, so |n0(t)> solves the corrected equation exactly.
    """
    rate = np.asarray(theta_rate(p, t))
    h = np.zeros(rate.shape + (DIMENSION, DIMENSION), dtype=complex)
    h[..., 0, 2] = 1j * rate
    h[..., 2, 0] = -1j * rate
    return h


def cd_hamiltonian(p: StirapParams, t) -> np.ndarray:
    """
    Counterdiabatic total Hamiltonian H_ref(t) + theta_dot(t)(i|1><3| - i|3><1|).

    Args:
    p (StirapParams): Resonant drive parameters (delta_p = 0).
    t (float | np.ndarray): Time(s) in us.

    Raises:
    DomainError: If the drive is not resonant.
    """
    if p.delta_p != 0 or p.delta_2 != 0:
        raise DomainError("the counterdiabatic baseline is defined for resonant drives only (delta_p = delta_2 = 0)")
    return hamiltonian(p, t) + cd_correction(p, t)


class CounterdiabaticHamiltonian(TimeDependentHamiltonian):
    """
    STIRAP pulses plus the standard transitionless term on the |1> <-> |3> link.

    correction_params lets the correction be designed for other pulses than the ones executed,
    which is how a timing error on the lasers shows up once the correction field is fixed.
    """

    def __init__(self, params: StirapParams, correction_params: StirapParams | None = None) -> None:
        if params.delta_p != 0 or params.delta_2 != 0:
            raise DomainError("the counterdiabatic baseline is defined for resonant drives only (delta_p = delta_2 = 0)")
        self.params = params
        self.correction_params = params if correction_params is None else correction_params

    @property
    def duration(self) -> float:
        return self.params.t_f

    def at(self, t) -> np.ndarray:
        return hamiltonian(self.params, t) + cd_correction(self.correction_params, t)
