import logging
from typing import Iterable, Tuple

import numpy as np

from python_sta import rescale
from python_sta.errors import DomainError
from python_sta.hamiltonian.hamiltonian import TimeDependentHamiltonian, commutator
from python_sta.hamiltonian.stirap import StirapParams
from python_sta.rescale import RescaleParams

logger = logging.getLogger(__name__)


class RescaledHamiltonian(TimeDependentHamiltonian):
    """
    The time-rescaled Hamiltonian H~(t) = H[f(t)] f_dot(t) on [0, t_f / a].

    Only composition and a positive scalar factor are involved, so no eigenstate of the
    reference is needed and Hermiticity carries over. Any reference Hamiltonian works, as
    long as its domain covers [0, t_f].
    """

    def __init__(self, reference: TimeDependentHamiltonian, params: RescaleParams) -> None:
        if reference.duration < params.t_f * (1 - 1e-12):
            raise DomainError(
                f"reference domain [0, {reference.duration!r}] does not cover [0, t_f = {params.t_f!r}]"
            )
        self.reference = reference
        self.params = params

    @property
    def duration(self) -> float:
        return self.params.duration

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        reference_time = np.asarray(rescale.f(self.params, t))
        rate = np.asarray(rescale.f_dot(self.params, t))
        return self.reference.at(reference_time) * rate[..., None, None]


def tr_hamiltonian(reference: TimeDependentHamiltonian, params: RescaleParams) -> RescaledHamiltonian:
    """
    Build the time-rescaled version of a reference Hamiltonian.

    Args:
    reference (TimeDependentHamiltonian): The slow (adiabatic) reference protocol.
    params (RescaleParams): Time contraction parameter and reference duration.

    Returns:
    RescaledHamiltonian: A protocol that reaches the reference's final state a times faster.
    """
    return RescaledHamiltonian(reference, params)


def tr_pulses_closed_form(p: StirapParams, r: RescaleParams, t) -> Tuple:
    """
    Rescaled STIRAP controls written out explicitly:

        Omega~_p(t) = omega0 exp(-{g(t) - t_f/2 - t0}^2 / sigma^2) [a - (a-1) cos(2 pi a t / t_f)]
        Omega~_s(t) = omega0 exp(-{g(t) - t_f/2 + t0}^2 / sigma^2) [a - (a-1) cos(2 pi a t / t_f)]
        Delta~(t)   = delta_p [a - (a-1) cos(2 pi a t / t_f)]

    with g(t) = a t - (a-1)/(2 pi a) t_f sin(2 pi a t / t_f). This path does not go through
    RescaledHamiltonian and serves as an independent cross-check of it.

    Raises:
    DomainError: If t lies outside [0, t_f / a].
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < -1e-12 * r.t_f) or np.any(t > r.duration * (1 + 1e-12)):
        raise DomainError(f"t must lie in [0, {r.duration!r}] us")
    a, t_f = r.a, r.t_f
    phase = 2 * np.pi * a * t / t_f
    g = a * t - (a - 1) / (2 * np.pi * a) * t_f * np.sin(phase)
    bracket = a - (a - 1) * np.cos(phase)
    omega_p = p.omega0 * np.exp(-((g - t_f / 2 - p.t0) ** 2) / p.sigma ** 2) * bracket
    omega_s = p.omega0 * np.exp(-((g - t_f / 2 + p.t0) ** 2) / p.sigma ** 2) * bracket
    delta = p.delta_p * bracket
    if t.ndim == 0:
        return float(omega_p), float(omega_s), float(delta)
    return omega_p, omega_s, delta


def commutator_check(reference: TimeDependentHamiltonian, params: RescaleParams, gammas: Iterable[float]) -> float:
    """
    Largest entry of [H(gamma t_f), H~(f_inv(gamma t_f))] over the route fractions gamma.
    The two operators are scalar multiples of each other, so this is zero up to rounding.

    Args:
    reference (TimeDependentHamiltonian): The reference protocol.
    params (RescaleParams): The rescaling parameters.
    gammas (Iterable[float]): Route fractions in [0, 1].

    Returns:
    float: max over gamma of ||[H, H~]||_max.
    """
    rescaled = tr_hamiltonian(reference, params)
    worst = 0.0
    for gamma in gammas:
        if not 0 <= gamma <= 1:
            raise DomainError(f"route fraction must lie in [0, 1], got {gamma!r}")
        s = gamma * params.t_f
        h_ref = reference(s)
        h_tr = rescaled(rescale.f_inv(params, s))
        worst = max(worst, float(np.max(np.abs(commutator(h_ref, h_tr)))))
    logger.debug("commutator check a=%s: max |[H, H~]| = %.3e", params.a, worst)
    return worst
