"""
Phillips multiplier-accelerator model.

The classical form is the constant-coefficient equation
``Y'' + aY' + bY = 0``. The corrected form has coefficients that decay
like ``1/(1 + kt)``; in the dimensionless time ``τ = 1 + kt`` it reads

    Y'' + (α + β/τ) Y' + (γ/τ) Y = 0,   α = ml/k, β = 2 - nl, γ = 2ml/k,

and is solved by writing ``Y'' = φ`` and solving the resulting Volterra
equation on ``[1, T]`` by successive approximations.
"""

import logging
import math

import numpy as np

from .errors import InvalidArgumentError
from .models import Trajectory
from .numcore import make_uniform_grid
from .volterra import VolterraProblem, double_integral, solve_picard

logger = logging.getLogger("econodyn")

REPEATED_ROOT_RTOL = 1e-12


def classical_coeffs(params):
    """``(a, b) = (k + ml - nkl, mkl)``."""
    a = params.k + params.m * params.l - params.n * params.k * params.l
    b = params.m * params.k * params.l
    return a, b


def _solve_constant(a, b, y0, y0p, t):
    disc = a * a - 4.0 * b
    if abs(disc) <= REPEATED_ROOT_RTOL * max(1.0, a * a, abs(b)):
        root = -a / 2.0
        return (y0 + (y0p - root * y0) * t) * np.exp(root * t)
    if disc > 0:
        sq = math.sqrt(disc)
        r1, r2 = (-a + sq) / 2.0, (-a - sq) / 2.0
        c1 = (y0p - r2 * y0) / (r1 - r2)
        return c1 * np.exp(r1 * t) + (y0 - c1) * np.exp(r2 * t)
    decay = -a / 2.0
    omega = math.sqrt(-disc) / 2.0
    return np.exp(decay * t) * (
        y0 * np.cos(omega * t) + (y0p - decay * y0) / omega * np.sin(omega * t)
    )


def classical_solution(params, Y0, Y0p, t):
    """Exact solution of ``Y'' + aY' + bY = 0`` with ``Y(0) = Y0``, ``Y'(0) = Y0p``.

    Dispatches on the characteristic roots: distinct real, repeated, or a
    complex pair.
    """
    times = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(times)) or np.any(times < 0):
        raise InvalidArgumentError("t must be finite and non-negative")
    a, b = classical_coeffs(params)
    values = _solve_constant(a, b, float(Y0), float(Y0p), times)
    return float(values) if np.ndim(values) == 0 else values


def corrected_coeffs(params, t):
    """``(a(t), b(t)) = (ml + (2k - nkl)/(1 + kt), 2mkl/(1 + kt))``."""
    times = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(times)) or np.any(times < 0):
        raise InvalidArgumentError("t must be finite and non-negative")
    k, n, m, l = params.k, params.n, params.m, params.l  # noqa: E741
    scale = 1.0 + k * times
    a = m * l + (2.0 * k - n * k * l) / scale
    b = 2.0 * m * k * l / scale
    if np.ndim(times) == 0:
        return float(a), float(b)
    return a, b


def build_volterra(params):
    """Volterra problem on ``τ >= 1`` whose solution is ``φ = Y''``."""
    alpha, beta, gamma = params.alpha, params.beta, params.gamma
    y1, y1p = params.Y1, params.Y1p

    def kernel(tau, eta):
        return -(alpha + beta / tau) - gamma * (tau - eta) / tau

    def free_term(tau):
        return -(alpha + beta / tau) * y1p - (gamma / tau) * ((tau - 1.0) * y1p + y1)

    return VolterraProblem(lower=1.0, kernel=kernel, free_term=free_term, lam=1.0)


def corrected_income(params, grid, tol=1e-10, max_iter=500, strict=True):
    """Corrected income on a grid over ``[1, T]`` in dimensionless time.

    Returns a :class:`Trajectory` with series ``Y_corrected`` and
    ``dY_corrected`` (derivative in τ).
    """
    if grid.lower != 1.0:
        raise InvalidArgumentError("The corrected Phillips grid must start at τ = 1")
    second, report = solve_picard(
        build_volterra(params), grid, tol=tol, max_iter=max_iter, strict=strict
    )
    shift = grid.nodes - 1.0
    income = double_integral(second, grid) + shift * params.Y1p + params.Y1
    slope = grid.running_weights() @ second + params.Y1p
    report.metadata.update(
        {"alpha": params.alpha, "beta": params.beta, "gamma": params.gamma}
    )
    return Trajectory(
        times=grid.nodes.copy(),
        series={"Y_corrected": income, "dY_corrected": slope},
        report=report,
        metadata={"time": "tau"},
    )


def classical_trajectory(params, tau):
    """Classical solution at dimensionless times ``τ`` (``t = (τ - 1)/k``),
    started from the same data: ``Y(0) = Y1`` and ``dY/dt(0) = k·Y1p``."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 1.0):
        raise InvalidArgumentError("τ must be at least 1")
    return classical_solution(params, params.Y1, params.k * params.Y1p, (tau - 1.0) / params.k)


def corrected_equation_residual(params, grid, values):
    """Centered-difference residual of the dimensionless corrected equation
    at the interior nodes of a uniform grid."""
    if not grid.is_uniform():
        raise InvalidArgumentError("Finite-difference residuals need a uniform grid")
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.size,):
        raise InvalidArgumentError(f"Expected {grid.size} samples, got shape {values.shape}")
    step = grid.nodes[1] - grid.nodes[0]
    tau = grid.nodes[1:-1]
    second = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / step**2
    first = (values[2:] - values[:-2]) / (2.0 * step)
    return second + (params.alpha + params.beta / tau) * first + params.gamma / tau * values[1:-1]


def trajectory(params, upper=3.0, segments=200, tol=1e-10, max_iter=500, strict=True):
    """Corrected and classical income side by side on ``[1, upper]``."""
    grid = make_uniform_grid(1.0, upper, segments)
    corrected = corrected_income(params, grid, tol=tol, max_iter=max_iter, strict=strict)
    residual = corrected_equation_residual(params, grid, corrected["Y_corrected"])
    corrected.report.metadata["equation_residual"] = (
        float(np.max(np.abs(residual))) if residual.size else 0.0
    )
    return Trajectory(
        times=grid.nodes.copy(),
        series={
            "Y_corrected": corrected["Y_corrected"],
            "Y_classical": classical_trajectory(params, grid.nodes),
        },
        report=corrected.report,
        metadata={"time": "tau", "classical_coeffs": list(classical_coeffs(params))},
    )
