"""Tests for typed models and scenario parsing."""

import math

import numpy as np
import pytest

from econodyn.errors import ConfigError, InvalidParametersError
from econodyn.models import (
    BalanceSpec,
    CriticalityEntry,
    CriticalityReport,
    HarrodParams,
    HealthReport,
    PhillipsParams,
    Scenario,
    Settings,
    SolverReport,
    Trajectory,
    VariantSpec,
    parse_variants,
    to_jsonable,
)


def scenario(kind, parameters, **extra):
    return {"kind": kind, "parameters": parameters, **extra}


class TestToJsonable:
    """Tests for JSON conversion."""

    def test_numpy_values(self):
        """Test arrays and numpy scalars become plain Python values."""
        payload = to_jsonable({"a": np.arange(3), "b": np.float64(1.5), "c": np.bool_(True)})
        assert payload == {"a": [0, 1, 2], "b": 1.5, "c": True}
        assert type(payload["b"]) is float

    def test_complex_and_non_finite(self):
        """Test complex numbers split into parts and inf becomes a string."""
        assert to_jsonable(1 + 2j) == {"re": 1.0, "im": 2.0}
        assert to_jsonable(math.inf) == "inf"
        assert to_jsonable([np.nan]) == ["nan"]


class TestSettings:
    """Tests for solver settings."""

    def test_defaults(self):
        """Test the documented defaults."""
        settings = Settings.from_dict(None)
        assert settings.tol == 1e-10
        assert settings.max_iter == 500
        assert settings.segments == 200
        assert settings.cond_limit == 1e10
        assert settings.diagonal == "mean"

    def test_overrides(self):
        """Test known keys override defaults."""
        settings = Settings.from_dict({"tol": 1e-8, "max_iter": 50, "diagonal": "lower"})
        assert (settings.tol, settings.max_iter, settings.diagonal) == (1e-8, 50, "lower")

    def test_unknown_key(self):
        """Test an unknown key names its path."""
        with pytest.raises(ConfigError) as exc_info:
            Settings.from_dict({"tolerance": 1e-8})
        assert exc_info.value.field == "solver.tolerance"

    @pytest.mark.parametrize(
        "data,field",
        [
            ({"tol": 0}, "solver.tol"),
            ({"max_iter": 0}, "solver.max_iter"),
            ({"max_iter": 2.5}, "solver.max_iter"),
            ({"segments": 0}, "solver.segments"),
            ({"static_max_iter": 10}, "solver.static_max_iter"),
            ({"diagonal": "upper"}, "solver.diagonal"),
        ],
    )
    def test_invalid_values(self, data, field):
        """Test invalid values name their path."""
        with pytest.raises(ConfigError) as exc_info:
            Settings.from_dict(data)
        assert exc_info.value.field == field


class TestSolverReport:
    """Tests for SolverReport invariants."""

    def test_converged_needs_small_residual(self):
        """Test converged with residual above tolerance is rejected."""
        with pytest.raises(InvalidParametersError):
            SolverReport(iterations=3, final_residual=1e-3, converged=True, tolerance=1e-6)

    def test_unconverged_may_have_any_residual(self):
        """Test unconverged reports accept large residuals."""
        report = SolverReport(iterations=3, final_residual=1.0, converged=False, tolerance=1e-6)
        assert report.to_dict()["converged"] is False

    def test_to_dict(self):
        """Test serialisation keeps metadata and history."""
        report = SolverReport(
            iterations=2,
            final_residual=0.0,
            converged=True,
            residual_history=(1.0, 0.0),
            metadata={"condition": np.float64(2.0)},
        )
        payload = report.to_dict()
        assert payload["residual_history"] == [1.0, 0.0]
        assert payload["metadata"] == {"condition": 2.0}


class TestTrajectory:
    """Tests for Trajectory helpers."""

    def make(self):
        return Trajectory(
            times=np.array([0.0, 0.5, 1.0]),
            series={"x_1": np.array([1.0, 2.0, 3.0]), "x_2": np.array([0.0, 0.0, 1.0])},
            report=SolverReport(iterations=1, final_residual=0.0, converged=True),
        )

    def test_access(self):
        """Test indexing and names."""
        trajectory = self.make()
        assert trajectory.names == ["x_1", "x_2"]
        np.testing.assert_array_equal(trajectory["x_1"], [1.0, 2.0, 3.0])
        assert trajectory.values().shape == (2, 3)

    def test_frame(self):
        """Test the DataFrame has t first."""
        frame = self.make().to_frame()
        assert list(frame.columns) == ["t", "x_1", "x_2"]
        assert frame["x_2"].iloc[-1] == 1.0


class TestReports:
    """Tests for health and criticality reports."""

    def test_health_flags(self):
        """Test flags collect the five booleans."""
        report = HealthReport(contractive=True, irreducible=False)
        assert report.flags["contractive"] is True
        assert report.flags["irreducible"] is False
        assert report.flags["nonnegative"] is None

    def test_criticality_min_gap(self):
        """Test min_gap and serialisation of complex entries."""
        report = CriticalityReport(
            lam=2.0,
            entries=[
                CriticalityEntry(characteristic_number=2 + 6j, gap=3.0),
                CriticalityEntry(characteristic_number=2.1, gap=0.05),
            ],
            warning=False,
            warning_gap=0.01,
        )
        assert report.min_gap == 0.05
        payload = report.to_dict()
        assert payload["entries"][0]["characteristic_number"] == {"re": 2.0, "im": 6.0}
        assert payload["lambda"] == 2.0

    def test_criticality_empty(self):
        """Test no entries gives an infinite min gap."""
        report = CriticalityReport(lam=2.0, entries=[], warning=False, warning_gap=0.05)
        assert report.min_gap == math.inf
        assert report.to_dict()["min_gap"] == "inf"


class TestParams:
    """Tests for model parameter records."""

    def test_harrod_from_dict(self):
        """Test defaults and dict-style access."""
        params = HarrodParams.from_dict({"m": 0.3, "n": 10})
        assert (params.Y0, params.K0) == (1.0, 0.0)
        assert params.s == pytest.approx(0.03)
        assert params["m"] == 0.3
        assert params.get("missing", 7) == 7

    @pytest.mark.parametrize(
        "data,field",
        [
            ({"m": 1.5, "n": 10}, "parameters.m"),
            ({"m": 0.3, "n": 0}, "parameters.n"),
            ({"m": 0.3, "n": 10, "Y0": -1}, "parameters.Y0"),
            ({"m": 0.3}, "parameters.n"),
            ({"m": "0.3", "n": 10}, "parameters.m"),
        ],
    )
    def test_harrod_invalid(self, data, field):
        """Test Harrod validation names the field."""
        with pytest.raises(ConfigError) as exc_info:
            HarrodParams.from_dict(data)
        assert exc_info.value.field == field

    def test_phillips_from_dict(self):
        """Test Phillips defaults and derived constants."""
        params = PhillipsParams.from_dict({"k": 2, "n": 1, "m": 0.5, "l": 1})
        assert (params.Y1, params.Y1p) == (1.0, 0.0)
        assert params.alpha == pytest.approx(0.25)
        assert params.gamma == pytest.approx(0.5)

    def test_phillips_invalid_field(self):
        """Test a bad multiplier names parameters.m."""
        with pytest.raises(ConfigError) as exc_info:
            PhillipsParams.from_dict({"k": 1, "n": 1, "m": 0, "l": 1})
        assert exc_info.value.field == "parameters.m"


class TestBalanceSpec:
    """Tests for balance parameter parsing."""

    def test_breakpoints(self, balance_parameters):
        """Test numbers stay floats and breakpoint lists become pairs."""
        spec = BalanceSpec.from_dict(balance_parameters)
        assert spec.size == 2
        assert spec.A[0] == (0.2, 0.3)
        assert spec.A[1][0] == ((0.0, 0.1), (1.0, 0.2))
        assert spec.c[1] == ((0.0, 2.0), (1.0, 2.5))
        assert spec.pp == (0.0, 0.1)

    def test_to_system(self, balance_parameters):
        """Test coefficients evaluate as given."""
        system = BalanceSpec.from_dict(balance_parameters).to_system()
        np.testing.assert_allclose(system.matrix_at(0.5), [[0.2, 0.3], [0.15, 0.2]])
        np.testing.assert_allclose(system.costs_at([0.5])[:, 0], [1.0, 2.25])

    def test_non_square(self):
        """Test a ragged matrix names the offending row."""
        with pytest.raises(ConfigError) as exc_info:
            BalanceSpec.from_dict({"A": [[0.1, 0.2], [0.3]], "c": [1, 1]})
        assert exc_info.value.field == "parameters.A[1]"

    def test_unsorted_breakpoints(self):
        """Test breakpoint times must increase."""
        with pytest.raises(ConfigError) as exc_info:
            BalanceSpec.from_dict({"A": [[[[0.5, 0.1], [0.2, 0.1]]]]})
        assert exc_info.value.field == "parameters.A[0][0]"

    def test_required_vector(self):
        """Test a vector listed as needed must be present."""
        with pytest.raises(ConfigError) as exc_info:
            BalanceSpec.from_dict({"A": [[0.1]], "p": [1.0]}, need=("p", "r"))
        assert exc_info.value.field == "parameters.r"

    def test_wrong_length(self):
        """Test vector lengths must match the matrix."""
        with pytest.raises(ConfigError) as exc_info:
            BalanceSpec.from_dict({"A": [[0.1]], "p": [1.0, 2.0]})
        assert exc_info.value.field == "parameters.p"


class TestVariants:
    """Tests for variant parsing."""

    def test_defaults(self):
        """Test missing shifts default to zero."""
        spec = VariantSpec.from_dict({"name": "base"}, 2, "variants[0]")
        assert spec.c_shift == (0.0, 0.0)
        assert spec.r_shift == (0.0, 0.0)
        variant = spec.to_variant()
        np.testing.assert_array_equal(variant.result_shift, [0.0, 0.0])

    def test_duplicate_names(self):
        """Test duplicate names are reported at the second occurrence."""
        with pytest.raises(ConfigError) as exc_info:
            parse_variants([{"name": "a"}, {"name": "a"}], 1)
        assert exc_info.value.field == "variants[1].name"

    def test_missing_name(self):
        """Test a variant needs a name."""
        with pytest.raises(ConfigError) as exc_info:
            parse_variants([{"r_shift": [0.1]}], 1)
        assert exc_info.value.field == "variants[0].name"


class TestScenario:
    """Tests for Scenario.from_dict."""

    def test_harrod(self):
        """Test a minimal Harrod scenario picks up defaults."""
        result = Scenario.from_dict(scenario("harrod", {"m": 0.3, "n": 10}))
        assert result.kind == "harrod"
        assert result.grid == 200
        assert result.output == "out"
        assert isinstance(result.parameters, HarrodParams)

    def test_unknown_kind(self):
        """Test an unknown kind names the kind field."""
        with pytest.raises(ConfigError) as exc_info:
            Scenario.from_dict(scenario("solow", {}))
        assert exc_info.value.field == "kind"

    @pytest.mark.parametrize(
        "data,field",
        [
            (scenario("harrod", {"m": 0, "n": 10}), "parameters.m"),
            (scenario("harrod", {"m": 0.5, "n": 0.4}), "parameters.n"),
            (scenario("harrod", {"m": 0.3, "n": 10, "steps": -2}), "parameters.steps"),
            (scenario("harrod", {"m": 0.3, "n": 10, "fraction": 1.0}), "parameters.fraction"),
            (scenario("phillips", {"k": 1, "n": 1, "m": 0.5, "l": 1, "T": 1}), "parameters.T"),
            (scenario("harrod", {"m": 0.3, "n": 10}, grid=0), "grid"),
            (scenario("harrod", {"m": 0.3, "n": 10}, output=""), "output"),
            ({"kind": "harrod"}, "parameters"),
            (scenario("balance-cauchy", {"A": [[0.1]], "p": [1]}), "parameters.pp"),
            (scenario("balance-forecast", {"A": [[0.1]], "p": [1]}), "parameters.r"),
        ],
    )
    def test_invalid(self, data, field):
        """Test each validation failure names its field."""
        with pytest.raises(ConfigError) as exc_info:
            Scenario.from_dict(data)
        assert exc_info.value.field == field

    def test_sweep_variants(self, balance_parameters):
        """Test a sweep parses its variants with the matrix size."""
        data = scenario(
            "balance-sweep",
            balance_parameters,
            variants=[{"name": "shock", "r_shift": [0.1, 0.0]}],
        )
        result = Scenario.from_dict(data)
        assert [variant.name for variant in result.variants] == ["shock"]

    def test_diagnose_needs_only_matrix(self):
        """Test diagnose accepts A alone."""
        result = Scenario.from_dict(scenario("diagnose", {"A": [[0.1, 0.2], [0.3, 0.1]]}))
        assert result.parameters.size == 2

    def test_solver_segments_fall_back_for_grid(self):
        """Test solver.segments sets the grid when the file has no top-level grid."""
        data = scenario("harrod", {"m": 0.3, "n": 10}, solver={"segments": 20})
        result = Scenario.from_dict(data)
        assert result.settings.segments == 20
        assert result.grid == 20

    def test_top_level_grid_wins(self):
        """Test an explicit grid overrides solver.segments."""
        data = scenario("harrod", {"m": 0.3, "n": 10}, grid=50, solver={"segments": 20})
        assert Scenario.from_dict(data).grid == 50

    def test_default_grid(self):
        """Test the grid defaults to 200 segments."""
        assert Scenario.from_dict(scenario("harrod", {"m": 0.3, "n": 10})).grid == 200
