"""
Fredholm integral equations of the second kind,

    Φ(t) = λ ∫_lower^upper K(t, h) Φ(h) dh + Q(t),

solved by the Nyström method on trapezoidal grids. The module also
computes characteristic numbers of the discrete operator, builds the
discrete resolvent for repeated solves against varying free terms, and
fuses an n-component system on the unit square into one equation on
``[0, n]``.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    CharacteristicLambdaError,
    InvalidArgumentError,
    NotContractiveError,
    SingularMatrixError,
)
from .models import SolverReport
from .numcore import (
    BlockGrid,
    Grid,
    eigenvalues,
    factorize,
    fixed_point_iterate,
    make_block_grid,
    make_uniform_grid,
    sample,
    sample_kernel,
)

logger = logging.getLogger("econodyn")

EIGEN_FILTER_RTOL = 1e-10
RESIDUAL_TOL = 1e-10


class DiagonalRule(str, Enum):
    """Value used for a kernel that jumps across ``h = t`` at coincident nodes.

    LOWER takes ``K(t, t⁻)``. MEAN averages ``K(t, t⁻)`` and ``K(t, t⁺)`` at
    interior nodes; it needs a :class:`PiecewiseKernel` and otherwise falls
    back to the plain kernel value.
    """

    LOWER = "lower"
    MEAN = "mean"


class PiecewiseKernel:
    """Kernel given by separate branches below (``h <= t``) and above the diagonal.

    Calling it evaluates the lower branch on the diagonal itself, i.e. the
    one-sided limit ``K(t, t⁻)``.
    """

    def __init__(self, below, above):
        self.below = below
        self.above = above

    def __call__(self, t, h):
        t = np.asarray(t, dtype=float)
        h = np.asarray(h, dtype=float)
        return np.where(h <= t, self.below(t, h), self.above(t, h))

    def lower_limit(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.below(t, t), t.shape) * 1.0

    def upper_limit(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.above(t, t), t.shape) * 1.0

    def __repr__(self):
        return f"PiecewiseKernel(below={self.below!r}, above={self.above!r})"


def _kernel_table(kernel, rows, cols, diagonal):
    # MEAN: trapezoid sums over [lower, t] and [t, upper] taken separately,
    # so an end node only sees the limit from inside the interval.
    rule = DiagonalRule(diagonal)
    table = sample_kernel(kernel, rows, cols)
    if rule is DiagonalRule.MEAN and isinstance(kernel, PiecewiseKernel):
        t, h = np.meshgrid(rows, cols, indexing="ij")
        coincide = t == h
        if coincide.any():
            above = sample_kernel(kernel.above, rows, cols, mask=coincide)
            share = np.where(t <= cols[0], 0.0, np.where(t >= cols[-1], 1.0, 0.5))
            table = np.where(coincide, share * table + (1.0 - share) * above, table)
    return table


@dataclass(frozen=True)
class FredholmProblem:
    lower: float
    upper: float
    kernel: Callable
    free_term: Callable
    lam: float = 1.0

    def __post_init__(self):
        if not self.upper > self.lower:
            raise InvalidArgumentError("Fredholm interval needs upper > lower")

    def make_grid(self, segments):
        return make_uniform_grid(self.lower, self.upper, segments)

    def _check(self, grid):
        if not isinstance(grid, Grid):
            raise InvalidArgumentError("A scalar Fredholm problem is discretised on a Grid")
        if grid.lower != self.lower or grid.upper != self.upper:
            raise InvalidArgumentError(
                f"Grid spans [{grid.lower}, {grid.upper}], "
                f"problem spans [{self.lower}, {self.upper}]"
            )

    def kernel_table(self, grid, diagonal=DiagonalRule.LOWER):
        self._check(grid)
        return _kernel_table(self.kernel, grid.nodes, grid.nodes, diagonal)

    def free_samples(self, grid):
        self._check(grid)
        return sample(self.free_term, grid.nodes)


@dataclass(frozen=True)
class StackedFredholmProblem:
    """An n-component system on the unit square viewed as one equation on [0, n].

    Block ``(i, j)`` of the stacked kernel is ``k_ij`` shifted by the block
    offsets: ``K(t, h) = k_ij(t - i, h - j)`` with zero-based ``i, j``.
    """

    blocks: Sequence[Sequence[Callable]]
    block_free_terms: Sequence[Callable]
    lam: float = 1.0

    def __post_init__(self):
        size = len(self.block_free_terms)
        if size == 0:
            raise InvalidArgumentError("A stacked system needs at least one component")
        if len(self.blocks) != size or any(len(row) != size for row in self.blocks):
            raise InvalidArgumentError(
                f"Kernel table must be {size}x{size} to match the free terms"
            )

    @property
    def size(self):
        return len(self.block_free_terms)

    @property
    def lower(self):
        return 0.0

    @property
    def upper(self):
        return float(self.size)

    def _block_of(self, x):
        return np.clip(np.floor(x), 0, self.size - 1).astype(int)

    def kernel(self, t, h):
        t, h = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(h, dtype=float))
        rows, cols = self._block_of(t), self._block_of(h)
        values = np.zeros(t.shape)
        for i in range(self.size):
            for j in range(self.size):
                where = (rows == i) & (cols == j)
                if where.any():
                    local = self.blocks[i][j](t[where] - i, h[where] - j)
                    values[where] = np.broadcast_to(local, t[where].shape)
        return values

    def free_term(self, t):
        t = np.asarray(t, dtype=float)
        rows = self._block_of(t)
        values = np.zeros(t.shape)
        for i in range(self.size):
            where = rows == i
            if where.any():
                local = self.block_free_terms[i](t[where] - i)
                values[where] = np.broadcast_to(local, t[where].shape)
        return values

    def make_grid(self, segments):
        return make_block_grid(self.size, segments)

    def _check(self, grid):
        if not isinstance(grid, BlockGrid) or grid.blocks != self.size:
            raise InvalidArgumentError(
                f"A stacked problem of {self.size} components needs a BlockGrid "
                f"with {self.size} blocks"
            )
        if grid.panel.lower != 0.0 or grid.panel.upper != 1.0:
            raise InvalidArgumentError("Stacked block panels must span [0, 1]")

    def kernel_table(self, grid, diagonal=DiagonalRule.LOWER):
        self._check(grid)
        nodes = grid.panel.nodes
        return np.block(
            [[_kernel_table(k, nodes, nodes, diagonal) for k in row] for row in self.blocks]
        )

    def free_samples(self, grid):
        self._check(grid)
        return np.concatenate([sample(q, grid.panel.nodes) for q in self.block_free_terms])


def stack_system(blocks, free_terms, lam):
    """Fuse kernels ``k_ij`` and free terms ``q_i`` on the unit square into one
    problem on ``[0, n]``."""
    return StackedFredholmProblem(
        blocks=tuple(tuple(row) for row in blocks),
        block_free_terms=tuple(free_terms),
        lam=float(lam),
    )


def unstack(samples, grid):
    """Per-component samples ``(n, panel.size)`` of a stacked solution."""
    return grid.split(samples)


def _weighted(kernel, grid, diagonal):
    if isinstance(kernel, (FredholmProblem, StackedFredholmProblem)):
        table = kernel.kernel_table(grid, diagonal)
    else:
        if not isinstance(grid, Grid):
            raise InvalidArgumentError("A bare kernel is discretised on a Grid")
        table = _kernel_table(kernel, grid.nodes, grid.nodes, diagonal)
    return table, table * grid.weights[None, :]


def _characteristic_from(weighted):
    values = eigenvalues(weighted)
    scale = max(1.0, float(np.linalg.norm(weighted, np.inf)))
    values = values[np.abs(values) > EIGEN_FILTER_RTOL * scale]
    numbers = 1.0 / values
    order = np.lexsort((numbers.imag, numbers.real, np.abs(numbers)))
    return numbers[order]


def _relative_gap(lam, numbers):
    if numbers.size == 0:
        return math.inf
    return float(np.min(np.abs(lam - numbers) / np.abs(numbers)))


def _factorize_operator(weighted, lam, cond_limit, gap_rtol):
    operator = np.eye(weighted.shape[0]) - lam * weighted
    try:
        factors = factorize(operator)
    except SingularMatrixError as exc:
        raise CharacteristicLambdaError(
            f"λ = {lam:g} is a characteristic number of the discrete kernel ({exc})",
            condition=math.inf,
        )
    condition = factors.condition
    if condition > cond_limit:
        raise CharacteristicLambdaError(
            f"λ = {lam:g} is numerically characteristic "
            f"(condition {condition:.3e} > {cond_limit:.1e})",
            condition=condition,
        )
    gap = None
    if gap_rtol > 0:
        gap = _relative_gap(lam, _characteristic_from(weighted))
        if gap < gap_rtol:
            raise CharacteristicLambdaError(
                f"λ = {lam:g} lies within relative {gap:.3e} of a characteristic number",
                condition=condition,
                gap=gap,
            )
    return operator, factors, condition, gap


def nystrom_solve(
    problem,
    grid,
    diagonal=DiagonalRule.LOWER,
    cond_limit=1e10,
    gap_rtol=1e-4,
):
    """Solve ``(I - λ K W) Φ = Q`` at the grid nodes.

    ``problem`` is a :class:`FredholmProblem` on a :class:`Grid` or a
    :class:`StackedFredholmProblem` on a matching :class:`BlockGrid`.

    Raises:
        CharacteristicLambdaError: if the discrete operator is singular, its
            condition estimate exceeds ``cond_limit``, or λ lies within
            relative ``gap_rtol`` of a discrete characteristic number.
    """
    _, weighted = _weighted(problem, grid, diagonal)
    free = problem.free_samples(grid)
    operator, factors, condition, gap = _factorize_operator(
        weighted, problem.lam, cond_limit, gap_rtol
    )
    values = factors.solve(free)
    residual = float(np.max(np.abs(operator @ values - free))) / max(
        float(np.max(np.abs(free))), np.finfo(float).tiny
    )
    notes = []
    if residual > RESIDUAL_TOL:
        notes.append(f"Relative discrete residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}")
    report = SolverReport(
        iterations=1,
        final_residual=residual,
        converged=True,
        warnings=notes,
        metadata={
            "condition": condition,
            "gap": gap,
            "unknowns": int(free.size),
            "diagonal": DiagonalRule(diagonal).value,
        },
    )
    logger.debug("nystrom solve: %d unknowns, condition %.3e", free.size, condition)
    return values, report


def characteristic_numbers(kernel, grid, count=None, diagonal=DiagonalRule.LOWER):
    """Characteristic numbers ``1/μ`` of the discrete operator, smallest magnitude first.

    ``kernel`` is a callable on a :class:`Grid` or a Fredholm problem (scalar
    or stacked). Eigenvalues ``μ`` below ``1e-10 · max(1, ‖KW‖∞)`` in
    magnitude count as zero and are dropped, so a zero kernel gives an
    empty array.
    """
    if count is not None and (isinstance(count, bool) or int(count) != count or count < 1):
        raise InvalidArgumentError("count must be a positive integer")
    _, weighted = _weighted(kernel, grid, diagonal)
    numbers = _characteristic_from(weighted)
    if count is not None:
        numbers = numbers[: int(count)]
    return np.real_if_close(numbers)


@dataclass(frozen=True)
class DiscreteResolvent:
    """Resolvent table ``R(t_i, h_j, λ)``; ``Φ = Q + λ ∫ R Q``."""

    grid: object
    lam: float
    table: np.ndarray = field(repr=False)
    condition: Optional[float] = None
    report: Optional[SolverReport] = field(default=None, repr=False)

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if not np.all(np.isfinite(table)):
            raise InvalidArgumentError("Resolvent table must be finite")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def apply(self, free):
        """Solution for free term samples ``Q`` (or a callable sampled on the grid)."""
        if callable(free):
            free = sample(free, self.grid.nodes)
        free = np.asarray(free, dtype=float)
        if free.shape != (self.grid.size,):
            raise InvalidArgumentError(
                f"Expected {self.grid.size} free-term samples, got shape {free.shape}"
            )
        return free + self.lam * (self.table @ (self.grid.weights * free))


def build_resolvent(
    kernel,
    lam,
    grid,
    diagonal=DiagonalRule.LOWER,
    cond_limit=1e10,
    gap_rtol=1e-4,
):
    """Discrete resolvent ``R = (I - λ K W)⁻¹ K`` from one factorisation.

    Raises:
        CharacteristicLambdaError: under the same conditions as
            :func:`nystrom_solve`.
    """
    table, weighted = _weighted(kernel, grid, diagonal)
    _, factors, condition, gap = _factorize_operator(weighted, lam, cond_limit, gap_rtol)
    resolvent = factors.solve(table)
    report = SolverReport(
        iterations=1,
        final_residual=0.0,
        converged=True,
        metadata={"condition": condition, "gap": gap, "unknowns": int(table.shape[0])},
    )
    logger.info(
        "Built resolvent on %d nodes at λ = %g (condition %.3e)",
        table.shape[0],
        lam,
        condition,
    )
    return DiscreteResolvent(
        grid=grid, lam=float(lam), table=resolvent, condition=condition, report=report
    )


def neumann_resolvent(
    kernel,
    lam,
    grid,
    diagonal=DiagonalRule.LOWER,
    tol=1e-12,
    max_iter=500,
    strict=True,
):
    """Resolvent from the Neumann series ``R = Σ_m λ^m (KW)^m K``.

    Summed as the fixed point ``R = K + λ KW R``; requires
    ``|λ| · ‖KW‖∞ < 1``.

    Raises:
        NotContractiveError: if ``|λ| · ‖KW‖∞ >= 1``.
    """
    table, weighted = _weighted(kernel, grid, diagonal)
    norm = abs(lam) * float(np.linalg.norm(weighted, np.inf))
    if norm >= 1.0:
        raise NotContractiveError(
            f"Neumann series needs |λ|·‖KW‖∞ < 1, got {norm:.6g}", norm=norm
        )
    resolvent, report = fixed_point_iterate(
        lambda current: table + lam * (weighted @ current),
        np.zeros_like(table),
        tol=tol,
        max_iter=max_iter,
        strict=strict,
        label="neumann series",
    )
    report.metadata["contraction"] = norm
    return DiscreteResolvent(grid=grid, lam=float(lam), table=resolvent, report=report)
