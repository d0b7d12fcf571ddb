"""
Harrod growth model: the classical exponential income path, the corrected
rational path with its finite forecast horizon, and the discrete
capital-accumulation recursion with its geometric closed form.

Time is dimensionless throughout. ``s = a = m/n`` where ``m`` is the
saved share of income and ``n`` the capital/income ratio.
"""

import logging
import math

import numpy as np

from .errors import (
    HorizonExceededError,
    InvalidArgumentError,
    InvalidParametersError,
    UndefinedHorizonError,
)
from .models import SolverReport, Trajectory

logger = logging.getLogger("econodyn")


def _times(t):
    values = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise InvalidArgumentError("t must be finite and non-negative")
    return values


def _result(values):
    return float(values) if np.ndim(values) == 0 else values


def _check_horizon(params, times):
    if params.m > 0 and np.any(params.s * times >= 1.0):
        horizon = forecast_horizon(params)
        raise HorizonExceededError(
            f"t must stay below the forecast horizon n/m = {horizon:.6g}",
            horizon=horizon,
            t=float(np.max(times)),
        )


def income_exponential(params, t):
    """``Y0 · exp(m t / n)``."""
    times = _times(t)
    return _result(params.Y0 * np.exp(params.s * times))


def income_corrected(params, t):
    """``Y0 / (1 - s t)²`` for ``0 <= t < n/m``.

    Raises:
        HorizonExceededError: if any ``t >= n/m``.
    """
    times = _times(t)
    _check_horizon(params, times)
    return _result(params.Y0 / (1.0 - params.s * times) ** 2)


def corrected_rate(params, t):
    """Growth coefficient ``2s / (1 - s t)`` of ``dY/dt = 2s/(1 - st) · Y``."""
    times = _times(t)
    _check_horizon(params, times)
    return _result(2.0 * params.s / (1.0 - params.s * times))


def forecast_horizon(params):
    """Time ``n/m`` at which the corrected income blows up.

    Raises:
        UndefinedHorizonError: if ``m = 0``.
    """
    if params.m == 0:
        raise UndefinedHorizonError("Forecast horizon is undefined for m = 0")
    return params.n / params.m


def _discrete_ratio(params):
    a = params.a
    if a >= 1.0:
        raise InvalidParametersError(
            f"The discrete model needs a = m/n < 1, got {a:.6g}", details={"field": "n"}
        )
    base = params.K0 / params.n
    if not math.isclose(params.Y0, base, rel_tol=1e-12, abs_tol=0.0):
        logger.warning(
            "Discrete Harrod model uses Y_c0 = K0/n = %.6g; Y0 = %.6g is ignored",
            base,
            params.Y0,
        )
    return a, base


def _check_steps(steps):
    if isinstance(steps, bool) or not isinstance(steps, (int, np.integer)) or steps < 0:
        raise InvalidArgumentError("steps must be a non-negative integer")
    return int(steps)


def income_discrete(params, steps):
    """Income after ``steps`` accumulation rounds,
    ``Y_c0 · (1 - a^{steps+1}) / (1 - a)`` with ``Y_c0 = K0/n``.

    Raises:
        InvalidParametersError: if ``a = m/n >= 1``.
    """
    steps = _check_steps(steps)
    a, base = _discrete_ratio(params)
    return base * (1.0 - a ** (steps + 1)) / (1.0 - a)


def discrete_path(params, steps):
    """Step listing of the recursion ``K_{i+1} = K0 + a K_i``.

    Returns a :class:`Trajectory` indexed by step with columns ``K``,
    ``Y`` (``K_i / n``) and ``I`` (``K_i · m/n``).
    """
    steps = _check_steps(steps)
    a, _ = _discrete_ratio(params)
    capital = np.empty(steps + 1)
    capital[0] = params.K0
    for i in range(steps):
        capital[i + 1] = params.K0 + a * capital[i]
    return Trajectory(
        times=np.arange(steps + 1, dtype=float),
        series={"K": capital, "Y": capital / params.n, "I": capital * a},
        report=SolverReport(iterations=steps, final_residual=0.0, converged=True),
        metadata={"a": a, "limit": params.K0 / params.n / (1.0 - a)},
    )


def exponential_discrepancy(params, steps):
    """Ratio of the exponential discrete income ``Y_c0 · e^{a·steps}`` to the
    geometric one; equals 1 at ``steps = 0`` and grows without bound."""
    steps = _check_steps(steps)
    a, _ = _discrete_ratio(params)
    geometric = (1.0 - a ** (steps + 1)) / (1.0 - a)
    return math.exp(a * steps) / geometric


def trajectory(params, segments=200, fraction=0.99):
    """Both continuous income paths on ``[0, fraction · n/m]``."""
    if not 0.0 < fraction < 1.0:
        raise InvalidArgumentError("fraction must lie in (0, 1)")
    if isinstance(segments, bool) or not isinstance(segments, (int, np.integer)) or segments < 1:
        raise InvalidArgumentError("segments must be a positive integer")
    horizon = forecast_horizon(params)
    times = np.linspace(0.0, fraction * horizon, int(segments) + 1)
    return Trajectory(
        times=times,
        series={
            "Y_exponential": income_exponential(params, times),
            "Y_corrected": income_corrected(params, times),
        },
        report=SolverReport(iterations=0, final_residual=0.0, converged=True),
        metadata={"horizon": horizon, "s": params.s, "fraction": fraction},
    )
