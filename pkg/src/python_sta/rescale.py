import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.optimize import brentq

from python_sta.errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
MAX_ITERATIONS = 200
NEWTON_STEPS = 8

## Relative slack on the process window so that t_f / a computed elsewhere still counts as inside.
_WINDOW_SLACK = 1e-12


@dataclass(frozen=True)
class RescaleParams:
    """
    Parameters of the sinusoidal time-rescaling function

        f(t) = a t - (a - 1) / (2 pi a) * t_f * sin(2 pi a t / t_f)

    a is the time contraction parameter and t_f the duration of the reference
    protocol, so the rescaled process lasts t_f / a.
    """
    a: float
    t_f: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.a) or self.a < 1:
            raise DomainError(f"a must be >= 1, got {self.a!r}")
        if not math.isfinite(self.t_f) or self.t_f <= 0:
            raise DomainError(f"t_f must be > 0, got {self.t_f!r}")

    @property
    def duration(self) -> float:
        """Length of the rescaled process, t_f / a."""
        return self.t_f / self.a

    @property
    def max_rate(self) -> float:
        """Largest value of f_dot, reached at mid-process."""
        return 2 * self.a - 1


def _check_window(params: RescaleParams, t, name: str = "t") -> np.ndarray:
    t = np.asarray(t, dtype=float)
    upper = params.duration
    slack = _WINDOW_SLACK * params.t_f
    if np.any(t < -slack) or np.any(t > upper + slack) or np.any(np.isnan(t)):
        raise DomainError(f"{name} must lie in [0, {upper!r}] us (the rescaled process window)")
    return np.clip(t, 0.0, upper)


def _phase(params: RescaleParams, t: np.ndarray) -> np.ndarray:
    return 2 * np.pi * params.a * t / params.t_f


def f(params: RescaleParams, t):
    """
    Map a time of the rescaled process onto the reference time axis.

    Args:
    params (RescaleParams): The rescaling parameters.
    t (float | np.ndarray): Time(s) in [0, t_f / a] us.

    Returns:
    float | np.ndarray: Reference time(s) in [0, t_f] us.

    Raises:
    DomainError: If any t lies outside the process window.
    """
    t = _check_window(params, t)
    a = params.a
    value = a * t - (a - 1) / (2 * np.pi * a) * params.t_f * np.sin(_phase(params, t))
    ## Rounding can push the endpoints a hair outside [0, t_f].
    value = np.clip(value, 0.0, params.t_f)
    return float(value) if value.ndim == 0 else value


def f_dot(params: RescaleParams, t):
    """
    Derivative of f, the factor that multiplies the reference Hamiltonian.

    Args:
    params (RescaleParams): The rescaling parameters.
    t (float | np.ndarray): Time(s) in [0, t_f / a] us.

    Returns:
    float | np.ndarray: a - (a - 1) cos(2 pi a t / t_f), always in [1, 2a - 1].
    """
    t = _check_window(params, t)
    a = params.a
    value = a - (a - 1) * np.cos(_phase(params, t))
    return float(value) if value.ndim == 0 else value


def f_inv(params: RescaleParams, y: float, tol: float = DEFAULT_TOL, max_iterations: int = MAX_ITERATIONS) -> float:
    """
    Invert f by a bracketed Brent solve polished with Newton steps on the analytic f_dot.

    Args:
    params (RescaleParams): The rescaling parameters.
    y (float): Reference time in [0, t_f] us.
    tol (float): Absolute tolerance on the returned time (us).
    max_iterations (int): Iteration budget of the bracketed stage.

    Returns:
    float: The unique t in [0, t_f / a] with f(t) = y.

    Raises:
    DomainError: If y is outside [0, t_f] or tol is not positive.
    ConvergenceError: If the bracketed stage exhausts its budget.
    """
    if tol <= 0:
        raise DomainError(f"tol must be > 0, got {tol!r}")
    slack = _WINDOW_SLACK * params.t_f
    if not (-slack <= y <= params.t_f + slack):
        raise DomainError(f"y must lie in [0, {params.t_f!r}] us, got {y!r}")
    y = min(max(float(y), 0.0), params.t_f)
    upper = params.duration

    if y == 0.0:
        return 0.0
    if y == params.t_f:
        return upper

    root, info = brentq(
        lambda t: f(params, t) - y, 0.0, upper,
        xtol=tol, maxiter=max_iterations, full_output=True, disp=False,
    )
    if not info.converged:
        raise ConvergenceError(
            f"f_inv({y!r}) did not converge in {max_iterations} iterations ({info.flag})"
        )

    for _ in range(NEWTON_STEPS):
        step = (f(params, root) - y) / f_dot(params, root)
        root = min(max(root - step, 0.0), upper)
        if abs(step) <= np.finfo(float).eps * max(1.0, root):
            break
    return root


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    residual: float


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of the admissibility checks on one rescaling function."""
    params: RescaleParams
    checks: List[PropertyCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def __getitem__(self, name: str) -> PropertyCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)


def validate_properties(params: RescaleParams, n_samples: int, tol: float = DEFAULT_TOL) -> PropertyReport:
    """
    Check the four properties a time-rescaling function needs to build a shortcut,
    plus monotonicity on a uniform sample grid:

    (i)   f_inv(0) = 0, both processes start together
    (ii)  f_inv(t_f) < t_f, the rescaled process is faster
    (iii) f_dot(0) = 1, the initial Hamiltonians agree
    (iv)  f_dot(f_inv(t_f)) = 1, the final Hamiltonians agree

    Args:
    params (RescaleParams): The rescaling parameters.
    n_samples (int): Number of grid points for the monotonicity check (>= 2).
    tol (float): Tolerance used for f_inv and for the equalities above.

    Returns:
    PropertyReport: One PropertyCheck per property; failures are reported, never raised.
    """
    if n_samples < 2:
        raise DomainError(f"n_samples must be >= 2, got {n_samples!r}")

    start = f_inv(params, 0.0, tol)
    end = f_inv(params, params.t_f, tol)
    ## (ii) needs a margin: for a = 1 the inverse lands within tol of t_f from either side.
    speedup_margin = max(tol, 1e-9 * params.t_f)

    grid = np.linspace(0.0, params.duration, n_samples)
    steps = np.diff(f(params, grid))

    checks = [
        PropertyCheck("start", abs(start) <= tol, abs(start)),
        PropertyCheck("faster", params.t_f - end > speedup_margin, end - params.t_f),
        PropertyCheck("initial_hamiltonian", abs(f_dot(params, 0.0) - 1) <= tol, abs(f_dot(params, 0.0) - 1)),
        PropertyCheck("final_hamiltonian", abs(f_dot(params, end) - 1) <= tol, abs(f_dot(params, end) - 1)),
        PropertyCheck("monotonic", bool(np.all(steps > 0)), float(steps.min())),
    ]
    report = PropertyReport(params, checks)
    logger.debug("rescale properties for a=%s t_f=%s: %s", params.a, params.t_f,
                 {c.name: c.passed for c in checks})
    return report
