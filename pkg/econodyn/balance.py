"""
Price-balance dynamics of n interacting participants.

The static balance ``x = A x + c`` is solved by successive approximations
(contractive or relaxed normal-equation form). The dynamic balance

    x'' + 2x' + 2x = 2 A(t) x + 2 c(t)

is posed either as a Cauchy problem (prices and rates at t = 0), reduced
to a coupled Volterra system, or as a forecasting problem (prices at
t = 0 and t = 1), reduced to a Fredholm system stacked on ``[0, n]``.
Both reductions carry the spectral parameter λ = 2.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidArgumentError, NotContractiveError
from .fredholm import (
    DiagonalRule,
    PiecewiseKernel,
    build_resolvent,
    characteristic_numbers,
    nystrom_solve,
    stack_system,
)
from .models import CriticalityEntry, CriticalityReport, SolverReport, Trajectory
from .numcore import (
    BlockGrid,
    as_matrix,
    as_vector,
    eigenvalues,
    fixed_point_iterate,
    inf_norm,
    sample,
    solve_dense,
)
from .volterra import VolterraSystem, double_integral, solve_system_picard

logger = logging.getLogger("econodyn")

TAYLOR_LAMBDA = 2.0


class Constant:
    """Time-constant coefficient."""

    def __init__(self, value):
        self.value = float(value)

    def __call__(self, t):
        return np.full(np.shape(t), self.value)

    def __repr__(self):
        return f"Constant({self.value!r})"


class PiecewiseLinear:
    """Coefficient interpolated linearly between ``(t, value)`` breakpoints,
    held constant outside them."""

    def __init__(self, points):
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] == 0:
            raise InvalidArgumentError("Breakpoints must be a non-empty list of (t, value) pairs")
        if np.any(np.diff(points[:, 0]) <= 0):
            raise InvalidArgumentError("Breakpoint times must be strictly increasing")
        self.times = points[:, 0]
        self.values = points[:, 1]

    def __call__(self, t):
        return np.interp(t, self.times, self.values)

    def __repr__(self):
        return f"PiecewiseLinear({list(zip(self.times.tolist(), self.values.tolist()))!r})"


def coefficient_function(value):
    """Callable for a number, a breakpoint sequence or an existing callable."""
    if callable(value):
        return value
    if isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool):
        return Constant(value)
    return PiecewiseLinear(value)


@dataclass(frozen=True)
class BalanceSystem:
    """Coefficients ``a_ij(t)`` and costs ``c_i(t)`` on dimensionless ``t ∈ [0, 1]``.

    ``step_length`` is the physical duration represented by one
    dimensionless time unit; it only scales reported times.
    """

    coefficients: Tuple[Tuple[Callable, ...], ...]
    costs: Tuple[Callable, ...]
    step_length: float = 1.0

    def __post_init__(self):
        size = len(self.costs)
        if size == 0:
            raise InvalidArgumentError("A balance system needs at least one participant")
        if len(self.coefficients) != size or any(len(row) != size for row in self.coefficients):
            raise InvalidArgumentError(
                f"Coefficient table must be {size}x{size} to match the costs"
            )
        if not self.step_length > 0:
            raise InvalidArgumentError("step_length must be positive")

    @classmethod
    def constant(cls, A, c, step_length=1.0):
        A = as_matrix(A, name="A")
        c = as_vector(c, A.shape[0], name="c")
        return cls(
            coefficients=tuple(tuple(Constant(v) for v in row) for row in A),
            costs=tuple(Constant(v) for v in c),
            step_length=step_length,
        )

    @property
    def n(self):
        return len(self.costs)

    def matrices(self, nodes):
        """``A(t_k)`` stacked as shape ``(len(nodes), n, n)``."""
        nodes = np.asarray(nodes, dtype=float)
        table = np.array(
            [[sample(a, nodes) for a in row] for row in self.coefficients]
        )
        return np.moveaxis(table, -1, 0)

    def matrix_at(self, t):
        return self.matrices(np.array([float(t)]))[0]

    def costs_at(self, nodes):
        """``c_i(t_k)`` as shape ``(n, len(nodes))``."""
        nodes = np.asarray(nodes, dtype=float)
        return np.array([sample(c, nodes) for c in self.costs])

    def mean_matrix(self, grid):
        """Time average ``∫₀¹ A(t) dt`` by the grid's quadrature."""
        return np.tensordot(grid.weights, self.matrices(grid.nodes), axes=1) / (
            grid.upper - grid.lower
        )

    def with_costs(self, costs):
        return BalanceSystem(
            coefficients=self.coefficients, costs=tuple(costs), step_length=self.step_length
        )


@dataclass(frozen=True)
class CauchyData:
    """Initial prices ``p = x(0)`` and rates ``pp = x'(0)``."""

    p: np.ndarray
    pp: np.ndarray

    def checked(self, size):
        return as_vector(self.p, size, name="p"), as_vector(self.pp, size, name="pp")


@dataclass(frozen=True)
class ForecastData:
    """Initial prices ``p = x(0)`` and terminal prices ``r = x(1)``."""

    p: np.ndarray
    r: np.ndarray

    def checked(self, size):
        return as_vector(self.p, size, name="p"), as_vector(self.r, size, name="r")


@dataclass(frozen=True)
class Variant:
    """Perturbation of a forecast: cost shifts ``Δc_i(t)`` and terminal shifts ``Δr_i``."""

    name: str
    cost_shift: Sequence[Callable] = ()
    result_shift: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# Static balance
# ---------------------------------------------------------------------------

def static_solve_contractive(A, c, tol=1e-10, max_iter=10000, strict=True):
    """Successive approximations ``x_{s+1} = A x_s + c`` from ``x_0 = 0``.

    Raises:
        NotContractiveError: if ``‖A‖∞ >= 1``.
        NoConvergenceError: if the budget runs out (strict mode).
    """
    A = as_matrix(A, name="A")
    c = as_vector(c, A.shape[0], name="c")
    norm = inf_norm(A)
    if norm >= 1.0:
        raise NotContractiveError(
            f"Static iteration needs ‖A‖∞ < 1, got {norm:.6g}", norm=norm
        )
    values, report = fixed_point_iterate(
        lambda x: A @ x + c,
        np.zeros_like(c),
        tol=tol,
        max_iter=max_iter,
        strict=strict,
        label="static balance",
    )
    report.metadata["contraction"] = norm
    return values, report


def static_solve_general(A, c, tol=1e-10, max_iter=100000, relaxation=None, strict=True):
    """Relaxed normal-equation iteration ``x_{s+1} = x_s - α B'(B x_s - c)``, ``B = I - A``.

    Works for any invertible ``B``, including non-contractive ``A``. The
    default relaxation is ``α = 1/‖B'B‖∞``; the stopping metric is
    ``‖B x - c‖∞ / max(1, ‖c‖∞)``.

    Raises:
        NoConvergenceError: if the budget runs out, e.g. for singular B
            (strict mode).
    """
    A = as_matrix(A, name="A")
    c = as_vector(c, A.shape[0], name="c")
    B = np.eye(A.shape[0]) - A
    normal = B.T @ B
    bound = float(np.linalg.norm(normal, np.inf))
    if bound == 0.0:
        raise InvalidArgumentError("B = I - A vanishes; the balance is undetermined")
    alpha = 1.0 / bound if relaxation is None else float(relaxation)
    if not 0.0 < alpha < 2.0 / bound:
        raise InvalidArgumentError(
            f"relaxation must lie in (0, {2.0 / bound:.6g}), got {alpha:.6g}"
        )
    scale = max(1.0, float(np.max(np.abs(c))))
    values, report = fixed_point_iterate(
        lambda x: x - alpha * (B.T @ (B @ x - c)),
        np.zeros_like(c),
        tol=tol,
        max_iter=max_iter,
        strict=strict,
        label="relaxed balance",
        residual=lambda x: float(np.max(np.abs(B @ x - c))) / scale,
    )
    report.metadata["relaxation"] = alpha
    return values, report


def static_equilibrium(A, c):
    """Dense solve of ``(I - A) x = c``."""
    A = as_matrix(A, name="A")
    return solve_dense(np.eye(A.shape[0]) - A, c)


# ---------------------------------------------------------------------------
# Cauchy problem
# ---------------------------------------------------------------------------

def _check_unit_grid(grid):
    if grid.lower != 0.0 or grid.upper != 1.0:
        raise InvalidArgumentError("Balance dynamics are posed on the unit interval [0, 1]")


def _cauchy_kernel(a, diagonal):
    if diagonal:
        return lambda t, h: (a(t) - 1.0) * (t - h) - 1.0
    return lambda t, h: a(t) * (t - h)


def _cauchy_free_term(row, cost, p, pp, i):
    def free_term(t):
        total = sum(a(t) * (pp[j] * t + p[j]) for j, a in enumerate(row))
        return 2.0 * (total + cost(t) - pp[i] * (1.0 + t) - p[i])

    return free_term


def build_cauchy_volterra(system, cauchy):
    """Coupled Volterra system on [0, 1] with λ = 2 whose solution is ``φ = x''``.

    ``k_ij = a_ij(t)(t - h)`` off the diagonal, ``(a_ii(t) - 1)(t - h) - 1``
    on it.
    """
    p, pp = cauchy.checked(system.n)
    kernels = tuple(
        tuple(_cauchy_kernel(a, i == j) for j, a in enumerate(row))
        for i, row in enumerate(system.coefficients)
    )
    free_terms = tuple(
        _cauchy_free_term(row, system.costs[i], p, pp, i)
        for i, row in enumerate(system.coefficients)
    )
    return VolterraSystem(lower=0.0, kernels=kernels, free_terms=free_terms, lam=TAYLOR_LAMBDA)


def _series(values):
    return {f"x_{i + 1}": row for i, row in enumerate(values)}


def simulate_cauchy(system, cauchy, grid, tol=1e-10, max_iter=500, strict=True):
    """Price trajectories from initial prices and rates.

    Reconstructs ``x_i(t) = ∫₀ᵗ (t - h) φ_i(h) dh + pp_i t + p_i``.
    """
    _check_unit_grid(grid)
    p, pp = cauchy.checked(system.n)
    second, report = solve_system_picard(
        build_cauchy_volterra(system, cauchy), grid, tol=tol, max_iter=max_iter, strict=strict
    )
    values = double_integral(second, grid) + pp[:, None] * grid.nodes + p[:, None]
    report.metadata["lambda"] = TAYLOR_LAMBDA
    return Trajectory(
        times=grid.nodes.copy(),
        series=_series(values),
        report=report,
        metadata={"step_length": system.step_length},
    )


def equation_residual(system, grid, values):
    """Centered-difference residual ``x'' + 2x' + 2x - 2Ax - 2c`` at interior nodes.

    Returns an array of shape ``(n, grid.size - 2)``.
    """
    if not grid.is_uniform():
        raise InvalidArgumentError("Finite-difference residuals need a uniform grid")
    values = np.asarray(values, dtype=float)
    if values.shape != (system.n, grid.size):
        raise InvalidArgumentError(
            f"Expected values of shape {(system.n, grid.size)}, got {values.shape}"
        )
    step = grid.nodes[1] - grid.nodes[0]
    inner = grid.nodes[1:-1]
    middle = values[:, 1:-1]
    second = (values[:, 2:] - 2.0 * middle + values[:, :-2]) / step**2
    first = (values[:, 2:] - values[:, :-2]) / (2.0 * step)
    coupled = np.einsum("kij,jk->ik", system.matrices(inner), middle)
    return second + 2.0 * first + 2.0 * middle - 2.0 * coupled - 2.0 * system.costs_at(inner)


cauchy_residual = equation_residual
forecast_residual = equation_residual


# ---------------------------------------------------------------------------
# Forecasting problem
# ---------------------------------------------------------------------------

def green(t, h):
    """Dirichlet Green kernel of ``d²/dt²`` on [0, 1]."""
    return np.where(h <= t, h * (t - 1.0), t * (h - 1.0))


def _forecast_kernel(a, diagonal):
    if diagonal:
        return PiecewiseKernel(
            below=lambda t, h: (a(t) - 1.0) * h * (t - 1.0) - h,
            above=lambda t, h: (a(t) - 1.0) * t * (h - 1.0) - (h - 1.0),
        )
    return PiecewiseKernel(
        below=lambda t, h: a(t) * h * (t - 1.0),
        above=lambda t, h: a(t) * t * (h - 1.0),
    )


def _forecast_free_term(row, cost, p, r, i):
    def free_term(t):
        total = sum(a(t) * ((r[j] - p[j]) * t + p[j]) for j, a in enumerate(row))
        return 2.0 * (total + cost(t) - (r[i] - p[i]) * (1.0 + t) - p[i])

    return free_term


def build_forecast_fredholm(system, data):
    """Stacked Fredholm problem on ``[0, n]`` with λ = 2 whose solution is ``φ = x''``.

    ``k_ij = a_ij(t) G(t, h)`` off the diagonal and
    ``(a_ii(t) - 1) G(t, h) - H(t, h)`` on it, with ``G`` the Green kernel
    and ``H = ∂G/∂t``.
    """
    p, r = data.checked(system.n)
    blocks = [
        [_forecast_kernel(a, i == j) for j, a in enumerate(row)]
        for i, row in enumerate(system.coefficients)
    ]
    free_terms = [
        _forecast_free_term(row, system.costs[i], p, r, i)
        for i, row in enumerate(system.coefficients)
    ]
    return stack_system(blocks, free_terms, TAYLOR_LAMBDA)


def _block_grid(system, grid):
    _check_unit_grid(grid)
    return BlockGrid(panel=grid, blocks=system.n)


def _reconstruct(second, data, grid, size):
    p, r = data.checked(size)
    nodes = grid.nodes
    propagator = green(nodes[:, None], nodes[None, :]) * grid.weights[None, :]
    return (
        second @ propagator.T
        + (1.0 - nodes)[None, :] * p[:, None]
        + nodes[None, :] * r[:, None]
    )


def forecast(
    system,
    data,
    grid,
    diagonal=DiagonalRule.MEAN,
    cond_limit=1e10,
    gap_rtol=1e-4,
):
    """Price trajectories between known initial and terminal prices.

    ``grid`` is the per-participant grid on [0, 1]. The reconstruction
    ``x = ∫G φ + (1 - t) p + t r`` makes ``x(0) = p`` and ``x(1) = r`` exact.

    Raises:
        CharacteristicLambdaError: if λ = 2 is numerically characteristic
            for the stacked kernel.
    """
    blocks = _block_grid(system, grid)
    problem = build_forecast_fredholm(system, data)
    stacked, report = nystrom_solve(
        problem, blocks, diagonal=diagonal, cond_limit=cond_limit, gap_rtol=gap_rtol
    )
    values = _reconstruct(blocks.split(stacked), data, grid, system.n)
    report.metadata["lambda"] = TAYLOR_LAMBDA
    return Trajectory(
        times=grid.nodes.copy(),
        series=_series(values),
        report=report,
        metadata={"step_length": system.step_length},
    )


def _shifted(base, shift):
    return lambda t: base(t) + shift(t)


def _apply_variant(system, data, variant):
    size = system.n
    costs = system.costs
    if variant.cost_shift:
        if len(variant.cost_shift) != size:
            raise InvalidArgumentError(
                f"Variant '{variant.name}' shifts {len(variant.cost_shift)} costs, expected {size}"
            )
        costs = tuple(
            _shifted(c, coefficient_function(d)) for c, d in zip(costs, variant.cost_shift)
        )
    p, r = data.checked(size)
    if variant.result_shift is not None:
        r = r + as_vector(variant.result_shift, size, name=f"{variant.name}.r_shift")
    return system.with_costs(costs), ForecastData(p=p, r=r)


def variational_sweep(
    system,
    data,
    variants,
    grid,
    diagonal=DiagonalRule.MEAN,
    cond_limit=1e10,
    gap_rtol=1e-4,
    workers=None,
):
    """Forecasts for perturbed costs and terminal prices from one resolvent.

    The kernel depends on ``A`` only, so one resolvent serves every
    variant; variants are independent and run on a thread pool when
    ``workers > 1``.

    Returns:
        Mapping of variant name to :class:`Trajectory`, in input order.
    """
    variants = list(variants)
    if not variants:
        return {}
    names = [variant.name for variant in variants]
    if len(set(names)) != len(names):
        raise InvalidArgumentError("Variant names must be unique")

    blocks = _block_grid(system, grid)
    resolvent = build_resolvent(
        build_forecast_fredholm(system, data),
        TAYLOR_LAMBDA,
        blocks,
        diagonal=diagonal,
        cond_limit=cond_limit,
        gap_rtol=gap_rtol,
    )

    def run(variant):
        shifted_system, shifted_data = _apply_variant(system, data, variant)
        free = build_forecast_fredholm(shifted_system, shifted_data).free_samples(blocks)
        stacked = resolvent.apply(free)
        values = _reconstruct(blocks.split(stacked), shifted_data, grid, system.n)
        report = SolverReport(
            iterations=1,
            final_residual=0.0,
            converged=True,
            metadata={"condition": resolvent.condition, "lambda": TAYLOR_LAMBDA},
        )
        return Trajectory(
            times=grid.nodes.copy(),
            series=_series(values),
            report=report,
            metadata={"variant": variant.name},
        )

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, variants))
    else:
        results = [run(variant) for variant in variants]
    logger.info("Swept %d variants against one resolvent", len(results))
    return dict(zip(names, results))


def criticality_check(
    system,
    grid,
    count=6,
    lam=TAYLOR_LAMBDA,
    warning_gap=0.05,
    diagonal=DiagonalRule.MEAN,
):
    """Characteristic numbers of the stacked forecast kernel nearest λ.

    Each entry carries the relative gap ``|λ_h - λ| / |λ|``; the warning
    flag is set when the smallest gap falls below ``warning_gap``. The
    eigenvalues of the time-averaged coefficient matrix are listed
    alongside.
    """
    if isinstance(count, bool) or not isinstance(count, (int, np.integer)) or count < 1:
        raise InvalidArgumentError("count must be a positive integer")
    zeros = np.zeros(system.n)
    problem = build_forecast_fredholm(system, ForecastData(p=zeros, r=zeros))
    numbers = np.asarray(
        characteristic_numbers(problem, _block_grid(system, grid), diagonal=diagonal),
        dtype=complex,
    )
    gaps = np.abs(numbers - lam) / abs(lam)
    order = np.lexsort((numbers.imag, numbers.real, gaps))[: int(count)]
    entries = [
        CriticalityEntry(
            characteristic_number=np.real_if_close(numbers[k]).item(), gap=float(gaps[k])
        )
        for k in order
    ]
    min_gap = min((entry.gap for entry in entries), default=np.inf)
    warning = bool(min_gap < warning_gap)
    messages = []
    if warning:
        message = (
            f"λ = {lam:g} lies within relative {min_gap:.3e} of a characteristic number "
            f"(threshold {warning_gap:g}); the forecast is in a critical regime"
        )
        messages.append(message)
        logger.warning(message)
    return CriticalityReport(
        lam=float(lam),
        entries=entries,
        warning=warning,
        warning_gap=float(warning_gap),
        matrix_eigenvalues=[
            np.real_if_close(v).item() for v in eigenvalues(system.mean_matrix(grid))
        ],
        messages=messages,
    )
