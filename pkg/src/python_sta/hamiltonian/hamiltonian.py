import abc
from typing import Callable

import numpy as np

from python_sta.errors import DomainError

DIMENSION = 3
HERMITICITY_TOL = 1e-14

## Relative slack on the declared domain, absorbs rounding in grid endpoints.
_DOMAIN_SLACK = 1e-12


def is_hermitian(matrix: np.ndarray, atol: float = HERMITICITY_TOL) -> bool:
    """
    Check ||M - M^dagger||_max <= atol for a matrix or a stack of matrices.

    Args:
    matrix (np.ndarray): Array of shape (..., n, n).
    atol (float): Absolute tolerance on the largest entry of M - M^dagger.
    """
    matrix = np.asarray(matrix)
    return bool(np.max(np.abs(matrix - np.conj(np.swapaxes(matrix, -1, -2))), initial=0.0) <= atol)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return [A, B] = AB - BA (broadcasts over leading axes)."""
    return a @ b - b @ a


class TimeDependentHamiltonian(abc.ABC):
    """
    A Hamiltonian H(t) defined on the closed interval [0, duration], in units where hbar = 1
    (entries in rad/us, time in us). It provides a common interface from which the reference,
    rescaled and baseline protocols inherit, so the propagator never needs to know which
    protocol it is driving.

    Implementations evaluate vectorised: `at(t)` with an array of times returns an array of
    shape t.shape + (3, 3).
    """

    @property
    @abc.abstractmethod
    def duration(self) -> float:
        """End of the domain [0, duration] in us."""
        pass

    @abc.abstractmethod
    def at(self, t) -> np.ndarray:
        """
        Evaluate the Hamiltonian without a domain check.

        Args:
        t (float | np.ndarray): Time(s) in us.

        Returns:
        np.ndarray: Complex array of shape np.shape(t) + (3, 3).
        """
        pass

    def check_domain(self, t) -> np.ndarray:
        """
        Return t as an array clipped to [0, duration], rejecting times outside it.

        Raises:
        DomainError: If any time lies outside the declared domain.
        """
        t = np.asarray(t, dtype=float)
        slack = _DOMAIN_SLACK * max(1.0, self.duration)
        if np.any(np.isnan(t)) or np.any(t < -slack) or np.any(t > self.duration + slack):
            raise DomainError(f"time outside the Hamiltonian domain [0, {self.duration!r}] us")
        return np.clip(t, 0.0, self.duration)

    def __call__(self, t) -> np.ndarray:
        return self.at(self.check_domain(t))


class FunctionHamiltonian(TimeDependentHamiltonian):
    """
    Wrap a plain callable t -> (3, 3) matrix with a declared domain. The callable only has to
    accept scalar times; stacks are built point by point.
    """

    def __init__(self, function: Callable[[float], np.ndarray], duration: float) -> None:
        if duration <= 0:
            raise DomainError(f"duration must be > 0, got {duration!r}")
        self.function = function
        self._duration = float(duration)

    @property
    def duration(self) -> float:
        return self._duration

    def at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flat = [np.asarray(self.function(float(x)), dtype=complex) for x in t.ravel()]
        return np.stack(flat).reshape(t.shape + (DIMENSION, DIMENSION)) if flat else \
            np.zeros(t.shape + (DIMENSION, DIMENSION), dtype=complex)
