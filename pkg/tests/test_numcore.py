"""Tests for grids, quadrature and dense linear algebra."""

import numpy as np
import pytest

from econodyn.errors import InvalidArgumentError, NoConvergenceError, SingularMatrixError
from econodyn.numcore import (
    Grid,
    eigenvalues,
    factorize,
    fixed_point_iterate,
    inf_norm,
    make_block_grid,
    make_uniform_grid,
    quad,
    sample,
    sample_kernel,
    solve_dense,
)


class TestGrid:
    """Tests for grid construction and invariants."""

    def test_uniform_nodes(self):
        """Test four segments on [0, 1] give quarter steps."""
        grid = make_uniform_grid(0, 1, 4)
        np.testing.assert_allclose(grid.nodes, [0, 0.25, 0.5, 0.75, 1])

    def test_uniform_weights(self):
        """Test trapezoid weights on [1, 3] with two segments."""
        grid = make_uniform_grid(1, 3, 2)
        np.testing.assert_allclose(grid.nodes, [1, 2, 3])
        np.testing.assert_allclose(grid.weights, [0.5, 1, 0.5])

    def test_zero_segments_rejected(self):
        """Test that zero segments is an invalid argument."""
        with pytest.raises(InvalidArgumentError):
            make_uniform_grid(0, 1, 0)

    @pytest.mark.parametrize("lower,upper", [(1, 1), (2, 1), (0, float("inf")), (float("nan"), 1)])
    def test_bad_bounds_rejected(self, lower, upper):
        """Test degenerate or non-finite bounds."""
        with pytest.raises(InvalidArgumentError):
            make_uniform_grid(lower, upper, 4)

    def test_invalid_argument_is_value_error(self):
        """Test InvalidArgumentError can be caught as ValueError."""
        with pytest.raises(ValueError):
            make_uniform_grid(0, 1, 0)

    def test_custom_grid_validation(self):
        """Test a grid whose weights do not sum to the length is rejected."""
        with pytest.raises(InvalidArgumentError):
            Grid(lower=0.0, upper=1.0, nodes=np.array([0.0, 0.5, 1.0]), weights=np.ones(3))

    def test_non_increasing_nodes_rejected(self):
        """Test that nodes must be strictly increasing."""
        with pytest.raises(InvalidArgumentError):
            Grid(
                lower=0.0,
                upper=1.0,
                nodes=np.array([0.0, 0.6, 0.5, 1.0]),
                weights=np.array([0.3, 0.2, 0.2, 0.3]),
            )

    def test_nodes_are_read_only(self):
        """Test grid arrays cannot be mutated after construction."""
        grid = make_uniform_grid(0, 1, 4)
        with pytest.raises(ValueError):
            grid.nodes[0] = 5.0

    def test_running_weights(self):
        """Test running weights integrate t over [0, t_i] exactly."""
        grid = make_uniform_grid(0, 1, 10)
        W = grid.running_weights()
        np.testing.assert_allclose(W @ grid.nodes, grid.nodes**2 / 2, atol=1e-15)
        np.testing.assert_allclose(W[-1], grid.weights)
        assert np.all(W[0] == 0)
        assert np.all(np.triu(W, 1) == 0)

    def test_block_grid(self):
        """Test block grids duplicate the join nodes."""
        grid = make_block_grid(2, 4)
        assert grid.size == 10
        assert grid.upper == 2.0
        np.testing.assert_allclose(grid.nodes[4:6], [1.0, 1.0])
        assert grid.split(np.arange(10)).shape == (2, 5)


class TestQuad:
    """Tests for trapezoidal quadrature."""

    def test_constant(self):
        """Test the integral of 1 is the interval length."""
        grid = make_uniform_grid(0, 1, 7)
        assert quad(np.ones(grid.size), grid) == pytest.approx(1.0, rel=1e-14)

    def test_linear_exact(self):
        """Test the trapezoid rule is exact on t."""
        grid = make_uniform_grid(0, 1, 100)
        assert quad(grid.nodes, grid) == pytest.approx(0.5, abs=1e-14)

    def test_quadratic_error_bound(self):
        """Test t^2 on 100 segments is within the trapezoid error bound."""
        grid = make_uniform_grid(0, 1, 100)
        assert abs(quad(grid.nodes**2, grid) - 1 / 3) < 2e-5

    def test_length_mismatch(self):
        """Test sample count must match node count."""
        grid = make_uniform_grid(0, 1, 4)
        with pytest.raises(InvalidArgumentError):
            quad(np.ones(3), grid)

    def test_linearity(self, rng):
        """Test quad(αf + βg) = α quad(f) + β quad(g)."""
        grid = make_uniform_grid(0, 2, 50)
        f, g = rng.normal(size=(2, grid.size))
        alpha, beta = 1.7, -0.4
        lhs = quad(alpha * f + beta * g, grid)
        rhs = alpha * quad(f, grid) + beta * quad(g, grid)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_sample_broadcasts_scalars(self):
        """Test a constant function returning a scalar is broadcast."""
        np.testing.assert_allclose(sample(lambda t: 2.0, [0.0, 1.0, 2.0]), [2, 2, 2])

    def test_sample_kernel_mask(self):
        """Test entries outside the mask are zeroed even when non-finite."""
        nodes = np.array([0.0, 1.0])
        t, h = np.meshgrid(nodes, nodes, indexing="ij")
        table = sample_kernel(
            lambda t, h: np.where(h <= t, 1.0, np.inf), nodes, nodes, mask=h <= t
        )
        np.testing.assert_array_equal(table, [[1.0, 0.0], [1.0, 1.0]])


class TestDenseSolve:
    """Tests for solve_dense and factorize."""

    def test_identity(self):
        """Test the identity returns the right-hand side."""
        np.testing.assert_allclose(solve_dense(np.eye(2), [3, 4]), [3, 4])

    def test_diagonal(self):
        """Test a diagonal system."""
        np.testing.assert_allclose(solve_dense(np.diag([2.0, 4.0]), [2, 4]), [1, 1])

    def test_equal_rows_singular(self):
        """Test two equal rows raise SingularMatrixError."""
        with pytest.raises(SingularMatrixError) as exc_info:
            solve_dense([[1.0, 2.0], [1.0, 2.0]], [1, 1])
        assert exc_info.value.error_code == "SINGULAR_MATRIX"
        assert exc_info.value.threshold == pytest.approx(3e-14)

    def test_multiply_back(self, rng):
        """Test solve then multiply recovers rhs on well-conditioned matrices."""
        for _ in range(20):
            M = rng.normal(size=(6, 6)) + 6 * np.eye(6)
            assert np.linalg.cond(M) < 1e8
            rhs = rng.normal(size=6)
            x = solve_dense(M, rhs)
            assert np.max(np.abs(M @ x - rhs)) / np.max(np.abs(rhs)) < 1e-10

    def test_condition_estimate(self):
        """Test the LAPACK estimate matches the 1-norm condition on a diagonal."""
        factors = factorize(np.diag([1.0, 1e-3]))
        assert factors.condition == pytest.approx(1e3, rel=1e-12)

    def test_non_square_rejected(self):
        """Test non-square input is an invalid argument."""
        with pytest.raises(InvalidArgumentError):
            solve_dense(np.ones((2, 3)), [1, 1])

    def test_rhs_length(self):
        """Test rhs length must match."""
        with pytest.raises(InvalidArgumentError):
            solve_dense(np.eye(2), [1, 2, 3])


class TestNormsAndEigenvalues:
    """Tests for inf_norm and eigenvalues."""

    def test_inf_norm_examples(self):
        """Test max absolute row sums."""
        assert inf_norm(np.eye(2)) == 1.0
        assert inf_norm([[0.2, 0.3], [0.1, 0.2]]) == pytest.approx(0.5)
        assert inf_norm(np.zeros((3, 3))) == 0.0

    def test_inf_norm_submultiplicative(self, rng):
        """Test ‖MN‖∞ <= ‖M‖∞‖N‖∞ on random pairs."""
        for _ in range(50):
            M, N = rng.normal(size=(2, 4, 4))
            assert inf_norm(M @ N) <= inf_norm(M) * inf_norm(N) * (1 + 1e-12)

    def test_eigenvalues_diagonal(self):
        """Test diagonal eigenvalues come back sorted."""
        np.testing.assert_allclose(eigenvalues(np.diag([2.0, 1.0])), [1, 2])

    def test_eigenvalues_rotation(self):
        """Test a rotation has eigenvalues ±i."""
        values = eigenvalues([[0.0, -1.0], [1.0, 0.0]])
        np.testing.assert_allclose(np.sort(values.imag), [-1, 1], atol=1e-14)
        np.testing.assert_allclose(values.real, [0, 0], atol=1e-14)

    def test_eigenvalues_scalar(self):
        """Test a 1x1 matrix."""
        np.testing.assert_allclose(eigenvalues([[5.0]]), [5])

    def test_trace(self, rng):
        """Test eigenvalues sum to the trace."""
        M = rng.normal(size=(7, 7))
        assert np.sum(eigenvalues(M)).real == pytest.approx(np.trace(M), rel=1e-8, abs=1e-10)


class TestFixedPointIterate:
    """Tests for the shared successive-approximation loop."""

    def test_converges(self):
        """Test a contraction converges and reports its residual."""
        x, report = fixed_point_iterate(
            lambda x: 0.5 * x + 1.0, np.zeros(1), tol=1e-12, max_iter=100
        )
        assert x[0] == pytest.approx(2.0)
        assert report.converged
        assert report.final_residual <= 1e-12
        assert len(report.residual_history) == report.iterations

    def test_budget_exhausted_strict(self):
        """Test a slow iteration raises NoConvergenceError carrying the report."""
        with pytest.raises(NoConvergenceError) as exc_info:
            fixed_point_iterate(lambda x: 0.99 * x + 1.0, np.zeros(1), tol=1e-12, max_iter=5)
        assert exc_info.value.report.converged is False
        assert exc_info.value.report.iterations == 5
        assert exc_info.value.result is not None

    def test_budget_exhausted_lenient(self):
        """Test non-strict mode returns the last iterate with a warning."""
        x, report = fixed_point_iterate(
            lambda x: 0.99 * x + 1.0, np.zeros(1), tol=1e-12, max_iter=5, strict=False
        )
        assert not report.converged
        assert report.warnings
        assert x[0] > 0

    def test_rejects_bad_tolerance(self):
        """Test tol must be positive."""
        with pytest.raises(InvalidArgumentError):
            fixed_point_iterate(lambda x: x, np.zeros(1), tol=0.0, max_iter=5)
