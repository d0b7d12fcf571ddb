"""
Shared numerical primitives: grids, trapezoidal quadrature, dense solves,
matrix norms, eigenvalues and the fixed-point loop used by every
successive-approximation solver in the package.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import InvalidArgumentError, NoConvergenceError, SingularMatrixError
from .models import SolverReport

logger = logging.getLogger("econodyn")

PIVOT_RTOL = 1e-14
_WEIGHT_SUM_RTOL = 1e-12


def _readonly(values):
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Grid:
    """Ordered sample nodes on ``[lower, upper]`` with trapezoidal weights."""

    lower: float
    upper: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        nodes = _readonly(self.nodes)
        weights = _readonly(self.weights)
        if nodes.ndim != 1 or nodes.size < 2:
            raise InvalidArgumentError("A grid needs at least 2 nodes")
        if weights.shape != nodes.shape:
            raise InvalidArgumentError("Grid weights must match the node count")
        if not np.all(np.diff(nodes) > 0):
            raise InvalidArgumentError("Grid nodes must be strictly increasing")
        if nodes[0] != self.lower or nodes[-1] != self.upper:
            raise InvalidArgumentError("Grid nodes must start at lower and end at upper")
        length = self.upper - self.lower
        if not math.isclose(float(weights.sum()), length, rel_tol=_WEIGHT_SUM_RTOL):
            raise InvalidArgumentError(
                f"Grid weights sum to {weights.sum()!r}, expected {length!r}"
            )
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self):
        return self.nodes.size

    @property
    def segments(self):
        return self.nodes.size - 1

    def is_uniform(self, rtol=1e-9):
        steps = np.diff(self.nodes)
        return bool(np.allclose(steps, steps[0], rtol=rtol, atol=0.0))

    def running_weights(self):
        """Lower-triangular matrix W with ``W[i] @ f ≈ ∫_lower^{t_i} f``.

        Row ``i`` holds the trapezoidal weights of the sub-interval
        ``[lower, t_i]``; row 0 is zero and the last row equals ``weights``.
        """
        halves = np.diff(self.nodes) / 2.0
        left = np.append(halves, 0.0)
        right = np.insert(halves, 0, 0.0)
        size = self.size
        strict = np.tril(np.ones((size, size)), -1)
        inclusive = np.tril(np.ones((size, size)))
        return strict * left[None, :] + inclusive * right[None, :]


@dataclass(frozen=True)
class BlockGrid:
    """``blocks`` copies of a unit-interval grid laid end to end on ``[0, blocks]``.

    Nodes at the joins are duplicated (the last node of block ``b`` and the
    first node of block ``b + 1`` share a coordinate) so that stacked
    unknowns may jump across block boundaries.
    """

    panel: Grid
    blocks: int

    def __post_init__(self):
        if isinstance(self.blocks, bool) or not isinstance(self.blocks, (int, np.integer)):
            raise InvalidArgumentError("blocks must be a positive integer")
        if self.blocks < 1:
            raise InvalidArgumentError("blocks must be a positive integer")

    @property
    def lower(self):
        return self.panel.lower

    @property
    def upper(self):
        return self.panel.lower + self.blocks * (self.panel.upper - self.panel.lower)

    @property
    def size(self):
        return self.blocks * self.panel.size

    @property
    def block_index(self):
        return np.repeat(np.arange(self.blocks), self.panel.size)

    @property
    def local_nodes(self):
        return np.tile(self.panel.nodes, self.blocks)

    @property
    def nodes(self):
        span = self.panel.upper - self.panel.lower
        return self.local_nodes + span * self.block_index

    @property
    def weights(self):
        return np.tile(self.panel.weights, self.blocks)

    def split(self, values):
        """Reshape stacked samples into ``(blocks, panel.size)``."""
        values = np.asarray(values)
        if values.shape[0] != self.size:
            raise InvalidArgumentError(
                f"Expected {self.size} stacked samples, got {values.shape[0]}"
            )
        return values.reshape((self.blocks, self.panel.size) + values.shape[1:])


def make_uniform_grid(lower, upper, segments):
    """Uniform grid with ``segments + 1`` nodes and trapezoidal weights."""
    if isinstance(segments, bool) or not isinstance(segments, (int, np.integer)):
        raise InvalidArgumentError("segments must be a positive integer")
    if segments < 1:
        raise InvalidArgumentError("segments must be a positive integer")
    try:
        lower = float(lower)
        upper = float(upper)
    except (TypeError, ValueError):
        raise InvalidArgumentError("Grid bounds must be real numbers")
    if not (math.isfinite(lower) and math.isfinite(upper)):
        raise InvalidArgumentError("Grid bounds must be finite")
    if upper <= lower:
        raise InvalidArgumentError("Grid upper bound must exceed the lower bound")

    nodes = np.linspace(lower, upper, int(segments) + 1)
    step = (upper - lower) / segments
    weights = np.full(nodes.size, step)
    weights[0] = weights[-1] = step / 2.0
    return Grid(lower=lower, upper=upper, nodes=nodes, weights=weights)


def make_block_grid(blocks, segments):
    """Stacked grid of ``blocks`` unit panels with ``segments`` each."""
    return BlockGrid(panel=make_uniform_grid(0.0, 1.0, segments), blocks=blocks)


def quad(samples, grid):
    """Trapezoidal integral ``Σ weight_i · sample_i`` over the grid."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size != grid.size:
        raise InvalidArgumentError(
            f"Expected {grid.size} samples, got shape {samples.shape}"
        )
    return float(np.dot(grid.weights, samples))


def sample(function, nodes):
    """Evaluate a vectorised function at the nodes; scalars are broadcast."""
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(function(nodes), dtype=float)
    values = np.broadcast_to(values, nodes.shape).copy()
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("Function produced non-finite values on the grid")
    return values


def sample_kernel(kernel, rows, cols, mask=None):
    """Kernel table ``K[i, j] = kernel(rows[i], cols[j])``.

    Entries outside ``mask`` are zeroed before the finiteness check, so a
    kernel only needs to be defined where it is used.
    """
    t, h = np.meshgrid(np.asarray(rows, float), np.asarray(cols, float), indexing="ij")
    with np.errstate(all="ignore"):
        values = np.asarray(kernel(t, h), dtype=float)
    values = np.broadcast_to(values, t.shape).copy()
    if mask is not None:
        values = np.where(mask, values, 0.0)
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("Kernel produced non-finite values on the grid")
    return values


def as_matrix(matrix, name="matrix"):
    """Validate a square, finite, real matrix."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise InvalidArgumentError(f"{name} must be a non-empty square matrix")
    if not np.all(np.isfinite(matrix)):
        raise InvalidArgumentError(f"{name} entries must be finite")
    return matrix


def as_vector(values, size, name="vector"):
    values = np.asarray(values, dtype=float)
    if values.shape != (size,):
        raise InvalidArgumentError(f"{name} must have length {size}, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError(f"{name} entries must be finite")
    return values


def inf_norm(matrix):
    """Maximum absolute row sum."""
    return float(np.linalg.norm(as_matrix(matrix), np.inf))


@dataclass(frozen=True)
class Factorization:
    """LU factors of a square matrix plus its reciprocal condition estimate."""

    lu: np.ndarray = field(repr=False)
    piv: np.ndarray = field(repr=False)
    rcond: float
    min_pivot: float

    @property
    def condition(self):
        return math.inf if self.rcond <= 0.0 else 1.0 / self.rcond

    def solve(self, rhs):
        return scipy.linalg.lu_solve((self.lu, self.piv), np.asarray(rhs, dtype=float))


def factorize(matrix):
    """LU-factorise with partial pivoting, rejecting numerically singular input.

    Raises:
        SingularMatrixError: if a pivot falls below ``1e-14 · ‖M‖∞``.
    """
    matrix = as_matrix(matrix)
    threshold = PIVOT_RTOL * float(np.linalg.norm(matrix, np.inf))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(matrix, check_finite=False)
    min_pivot = float(np.min(np.abs(np.diag(lu))))
    if min_pivot <= threshold:
        raise SingularMatrixError(
            f"Matrix is numerically singular (pivot {min_pivot:.3e} <= {threshold:.3e})",
            pivot=min_pivot,
            threshold=threshold,
        )
    (gecon,) = lapack.get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, float(np.linalg.norm(matrix, 1)), norm="1")
    if info != 0:
        rcond = 0.0
    return Factorization(lu=lu, piv=piv, rcond=float(rcond), min_pivot=min_pivot)


def solve_dense(matrix, rhs):
    """Solve ``M x = rhs`` by pivoted LU."""
    matrix = as_matrix(matrix)
    rhs = as_vector(rhs, matrix.shape[0], name="rhs")
    return factorize(matrix).solve(rhs)


def eigenvalues(matrix):
    """All eigenvalues of a square matrix, sorted by real then imaginary part."""
    matrix = as_matrix(matrix)
    try:
        values = np.linalg.eigvals(matrix)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(f"Eigenvalue iteration failed: {exc}")
    return np.sort_complex(values.astype(complex))


def fixed_point_iterate(
    update: Callable[[np.ndarray], np.ndarray],
    initial,
    tol: float,
    max_iter: int,
    strict: bool = True,
    label: str = "iteration",
    residual: Optional[Callable[[np.ndarray], float]] = None,
) -> Tuple[np.ndarray, SolverReport]:
    """Run ``x_{s+1} = update(x_s)`` until the convergence metric drops to ``tol``.

    The metric is the max-norm of successive differences, or ``residual(x)``
    when given. In non-strict mode an exhausted budget returns the last
    iterate with ``converged = False`` instead of raising.
    """
    if not (tol > 0):
        raise InvalidArgumentError("tol must be positive")
    if isinstance(max_iter, bool) or not isinstance(max_iter, (int, np.integer)) or max_iter < 1:
        raise InvalidArgumentError("max_iter must be a positive integer")

    current = np.array(initial, dtype=float)
    history = []
    notes = []
    converged = False
    metric = math.inf
    iteration = 0
    for iteration in range(1, int(max_iter) + 1):
        candidate = update(current)
        step = float(np.max(np.abs(candidate - current))) if candidate.size else 0.0
        metric = step if residual is None else float(residual(candidate))
        current = candidate
        history.append(metric)
        logger.debug("%s %d: residual %.3e", label, iteration, metric)
        if not math.isfinite(metric):
            notes.append(f"{label} diverged at iteration {iteration}")
            break
        if metric <= tol:
            converged = True
            break

    report = SolverReport(
        iterations=iteration,
        final_residual=metric,
        converged=converged,
        tolerance=tol,
        warnings=notes,
        residual_history=tuple(history),
    )
    if converged:
        logger.info(
            "%s converged in %d iterations (residual %.3e)", label, iteration, metric
        )
        return current, report

    message = (
        f"{label} did not converge after {iteration} iterations "
        f"(residual {metric:.3e}, tol {tol:.1e})"
    )
    if strict:
        raise NoConvergenceError(message, report=report, result=current)
    report.warnings.append(message)
    logger.warning(message)
    return current, report
