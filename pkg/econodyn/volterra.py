"""
Volterra integral equations of the second kind,

    φ(t) = λ ∫_lower^t k(t, h) φ(h) dh + q(t),

discretised with trapezoidal running weights. The same discrete system is
solved two ways: by successive approximations from φ₀ = 0, and by
marching node by node for the diagonal unknown.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateStepError, InvalidArgumentError
from .numcore import PIVOT_RTOL, fixed_point_iterate, sample, sample_kernel

logger = logging.getLogger("econodyn")

Kernel = Callable[[np.ndarray, np.ndarray], np.ndarray]
FreeTerm = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class VolterraProblem:
    """Kernel, free term and spectral parameter of a scalar equation."""

    lower: float
    kernel: Kernel
    free_term: FreeTerm
    lam: float = 1.0


@dataclass(frozen=True)
class VolterraSystem:
    """Coupled equations φ_i = λ Σ_j ∫ k_ij φ_j + q_i sharing one λ."""

    lower: float
    kernels: Sequence[Sequence[Kernel]]
    free_terms: Sequence[FreeTerm]
    lam: float = 1.0

    def __post_init__(self):
        size = len(self.free_terms)
        if size == 0:
            raise InvalidArgumentError("A Volterra system needs at least one equation")
        if len(self.kernels) != size or any(len(row) != size for row in self.kernels):
            raise InvalidArgumentError(
                f"Kernel table must be {size}x{size} to match the free terms"
            )

    @property
    def size(self):
        return len(self.free_terms)


def _check_grid(lower, grid):
    if grid.lower != lower:
        raise InvalidArgumentError(
            f"Grid starts at {grid.lower!r} but the problem starts at {lower!r}"
        )


def weighted_kernel(kernel, lam, grid):
    """Matrix ``M`` with ``(M @ φ)[i] ≈ λ ∫_lower^{t_i} k(t_i, h) φ(h) dh``."""
    t, h = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    table = sample_kernel(kernel, grid.nodes, grid.nodes, mask=h <= t)
    return lam * grid.running_weights() * table


def _system_matrix(system, grid):
    weights = grid.running_weights()
    t, h = np.meshgrid(grid.nodes, grid.nodes, indexing="ij")
    mask = h <= t
    blocks = [
        [system.lam * weights * sample_kernel(k, grid.nodes, grid.nodes, mask=mask) for k in row]
        for row in system.kernels
    ]
    return np.block(blocks)


def solve_picard(problem, grid, tol=1e-10, max_iter=500, strict=True):
    """Successive approximations ``φ_{s+1} = λ∫kφ_s + q`` from ``φ₀ = 0``.

    Returns:
        (samples, SolverReport). With ``strict=False`` an exhausted budget
        returns the last iterate and an unconverged report.
    """
    _check_grid(problem.lower, grid)
    matrix = weighted_kernel(problem.kernel, problem.lam, grid)
    free = sample(problem.free_term, grid.nodes)
    return fixed_point_iterate(
        lambda phi: matrix @ phi + free,
        np.zeros(grid.size),
        tol=tol,
        max_iter=max_iter,
        strict=strict,
        label="volterra picard",
    )


def solve_marching(problem, grid):
    """Direct forward solve of the discretised equation.

    At node ``i`` the unknown ``φ_i`` appears only through the diagonal
    weight, so ``φ_i = (q_i + Σ_{j<i} M_ij φ_j) / (1 - M_ii)``.
    """
    _check_grid(problem.lower, grid)
    matrix = weighted_kernel(problem.kernel, problem.lam, grid)
    free = sample(problem.free_term, grid.nodes)
    values = np.zeros(grid.size)
    for i in range(grid.size):
        factor = 1.0 - matrix[i, i]
        if abs(factor) < PIVOT_RTOL:
            raise DegenerateStepError(
                f"Diagonal factor vanishes at node {i} (t = {grid.nodes[i]:.6g})",
                node=i,
                factor=float(factor),
            )
        values[i] = (free[i] + matrix[i, :i] @ values[:i]) / factor
    return values


def solve_system_picard(system, grid, tol=1e-10, max_iter=500, strict=True):
    """Picard iteration for a coupled system, all components started at zero.

    Returns:
        (samples of shape ``(n, grid.size)``, SolverReport). The iteration
        count is the number of terms of the power series in λ that were
        summed.
    """
    _check_grid(system.lower, grid)
    matrix = _system_matrix(system, grid)
    free = np.concatenate([sample(q, grid.nodes) for q in system.free_terms])
    values, report = fixed_point_iterate(
        lambda phi: matrix @ phi + free,
        np.zeros(free.size),
        tol=tol,
        max_iter=max_iter,
        strict=strict,
        label="volterra system picard",
    )
    report.metadata["components"] = system.size
    return values.reshape(system.size, grid.size), report


def double_integral(samples, grid):
    """``∫_lower^{t_i} (t_i - h) φ(h) dh`` at every node, i.e. the function
    whose second derivative is φ and which starts with zero value and slope."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[-1] != grid.size:
        raise InvalidArgumentError(
            f"Expected {grid.size} samples per row, got shape {samples.shape}"
        )
    lag = grid.nodes[:, None] - grid.nodes[None, :]
    return samples @ (grid.running_weights() * lag).T
