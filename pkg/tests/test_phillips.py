"""Tests for the Phillips multiplier-accelerator model."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from econodyn import phillips
from econodyn.errors import InvalidArgumentError, InvalidParametersError
from econodyn.models import PhillipsParams
from econodyn.numcore import Grid, make_uniform_grid


def integrate_classical(params, y0, y0p, t):
    a, b = phillips.classical_coeffs(params)
    result = solve_ivp(
        lambda _, y: [y[1], -a * y[1] - b * y[0]],
        (0.0, float(t[-1])),
        [y0, y0p],
        t_eval=t,
        rtol=1e-11,
        atol=1e-12,
    )
    return result.y[0]


def integrate_corrected(params, tau):
    alpha, beta, gamma = params.alpha, params.beta, params.gamma
    result = solve_ivp(
        lambda s, y: [y[1], -(alpha + beta / s) * y[1] - gamma / s * y[0]],
        (1.0, float(tau[-1])),
        [params.Y1, params.Y1p],
        t_eval=tau,
        rtol=1e-11,
        atol=1e-12,
    )
    return result.y[0]


class TestClassical:
    """Tests for the constant-coefficient solution."""

    def test_coefficients(self, phillips_params):
        """Test a = k + ml - nkl and b = mkl."""
        assert phillips.classical_coeffs(phillips_params) == pytest.approx((0.5, 0.5))

    @pytest.mark.parametrize(
        "values",
        [
            {"k": 1.0, "n": 1.0, "m": 0.5, "l": 1.0},
            {"k": 1.0, "n": 0.1, "m": 0.1, "l": 1.0},
            {"k": 1.0, "n": 0.25, "m": 0.25, "l": 1.0},
        ],
        ids=["complex", "distinct", "repeated"],
    )
    def test_matches_ode_integration(self, values):
        """Test each root case against a high-accuracy ODE integration."""
        params = PhillipsParams(**values)
        t = np.linspace(0.0, 5.0, 21)
        exact = phillips.classical_solution(params, 1.0, 0.3, t)
        np.testing.assert_allclose(exact, integrate_classical(params, 1.0, 0.3, t), atol=1e-8)

    def test_initial_data(self, phillips_params):
        """Test Y(0) is reproduced exactly."""
        assert phillips.classical_solution(phillips_params, 2.5, -1.0, 0.0) == pytest.approx(2.5)

    def test_negative_time_rejected(self, phillips_params):
        """Test t must be non-negative."""
        with pytest.raises(InvalidArgumentError):
            phillips.classical_solution(phillips_params, 1.0, 0.0, [-0.5])


class TestCorrectedCoefficients:
    """Tests for the time-varying coefficients."""

    def test_match_classical_at_zero(self, phillips_params):
        """Test a(0), b(0) reduce to the classical coefficients."""
        a0, b0 = phillips.corrected_coeffs(phillips_params, 0.0)
        assert (a0, b0) == pytest.approx(phillips.classical_coeffs(phillips_params))

    def test_decay(self, phillips_params):
        """Test b(t) decays like 1/(1 + kt) and a(t) tends to ml."""
        a, b = phillips.corrected_coeffs(phillips_params, np.array([0.0, 1.0, 1e8]))
        assert b[1] == pytest.approx(b[0] / 2)
        assert a[-1] == pytest.approx(phillips_params.m * phillips_params.l, rel=1e-6)

    def test_dimensionless_constants(self, phillips_params):
        """Test α = ml/k, β = 2 - nl and γ = 2ml/k."""
        assert phillips_params.alpha == pytest.approx(0.5)
        assert phillips_params.beta == pytest.approx(1.0)
        assert phillips_params.gamma == pytest.approx(1.0)


class TestCorrectedIncome:
    """Tests for the Volterra solve of the corrected equation."""

    def test_volterra_problem(self, phillips_params):
        """Test the problem starts at τ = 1 and its kernel and free term."""
        problem = phillips.build_volterra(phillips_params)
        alpha, beta, gamma = phillips_params.alpha, phillips_params.beta, phillips_params.gamma
        assert (problem.lower, problem.lam) == (1.0, 1.0)
        assert problem.kernel(2.0, 2.0) == pytest.approx(-(alpha + beta / 2.0))
        assert problem.kernel(2.0, 1.0) == pytest.approx(-(alpha + beta / 2.0) - gamma / 2.0)
        assert problem.free_term(1.0) == pytest.approx(-(alpha + beta) * 0.5 - gamma)

    def test_initial_data(self, phillips_params):
        """Test Y(1) = Y1 and Y'(1) = Y1p."""
        result = phillips.corrected_income(phillips_params, make_uniform_grid(1.0, 3.0, 50))
        assert result["Y_corrected"][0] == phillips_params.Y1
        assert result["dY_corrected"][0] == phillips_params.Y1p
        assert result.report.converged

    def test_matches_ode_integration(self, phillips_params):
        """Test agreement with solve_ivp on 2000 segments."""
        grid = make_uniform_grid(1.0, 3.0, 2000)
        result = phillips.corrected_income(phillips_params, grid)
        reference = integrate_corrected(phillips_params, grid.nodes)
        np.testing.assert_allclose(result["Y_corrected"], reference, atol=1e-5)

    def test_residual_is_second_order(self, phillips_params):
        """Test the equation residual shrinks by about 4 per grid doubling."""
        peaks = []
        for segments in (100, 200, 400):
            grid = make_uniform_grid(1.0, 3.0, segments)
            values = phillips.corrected_income(phillips_params, grid)["Y_corrected"]
            residual = phillips.corrected_equation_residual(phillips_params, grid, values)
            peaks.append(np.max(np.abs(residual)))
        ratios = np.array(peaks[:-1]) / np.array(peaks[1:])
        assert np.all((ratios >= 3) & (ratios <= 5))

    def test_grid_must_start_at_one(self, phillips_params):
        """Test the solve needs τ to start at 1."""
        with pytest.raises(InvalidArgumentError):
            phillips.corrected_income(phillips_params, make_uniform_grid(0.0, 2.0, 10))

    def test_residual_needs_uniform_grid(self, phillips_params):
        """Test finite-difference residuals reject non-uniform grids."""
        grid = Grid(
            lower=1.0,
            upper=3.0,
            nodes=np.array([1.0, 1.5, 3.0]),
            weights=np.array([0.25, 1.0, 0.75]),
        )
        with pytest.raises(InvalidArgumentError):
            phillips.corrected_equation_residual(phillips_params, grid, np.ones(3))


class TestTrajectory:
    """Tests for the side-by-side trajectory."""

    def test_columns(self, phillips_params):
        """Test both paths are present and start at Y1."""
        result = phillips.trajectory(phillips_params, upper=2.0, segments=40)
        assert result.names == ["Y_corrected", "Y_classical"]
        assert result["Y_classical"][0] == pytest.approx(phillips_params.Y1)
        assert result.report.metadata["equation_residual"] < 5e-2

    def test_classical_uses_scaled_slope(self):
        """Test the classical path starts with dY/dτ = Y1p when k != 1."""
        params = PhillipsParams(k=2.0, n=1.0, m=0.5, l=1.0, Y1=1.0, Y1p=0.4)
        step = 1e-6
        values = phillips.classical_trajectory(params, np.array([1.0, 1.0 + step]))
        assert (values[1] - values[0]) / step == pytest.approx(0.4, rel=1e-4)


class TestParams:
    """Tests for PhillipsParams validation."""

    @pytest.mark.parametrize(
        "values,field",
        [
            ({"k": 0.0, "n": 1.0, "m": 0.5, "l": 1.0}, "k"),
            ({"k": 1.0, "n": 1.0, "m": 1.0, "l": 1.0}, "m"),
            ({"k": 1.0, "n": 1.0, "m": 0.5, "l": -1.0}, "l"),
        ],
    )
    def test_invalid(self, values, field):
        """Test each invariant names its field."""
        with pytest.raises(InvalidParametersError) as exc_info:
            PhillipsParams(**values)
        assert exc_info.value.details["field"] == field
