"""Typed models for econodyn: settings, solver reports, trajectories,
health reports and the scenario configuration records.

Configuration records are built with ``from_dict`` and keep the source
mapping as ``raw``; they support dict-style access through ``[]`` so that
scenario code can read optional keys without extra plumbing. Validation
failures raise :class:`~econodyn.errors.ConfigError` naming the dotted
field path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, InvalidParametersError

SCENARIO_KINDS = (
    "harrod",
    "phillips",
    "balance-cauchy",
    "balance-forecast",
    "balance-sweep",
    "diagnose",
)


class _DictAccessMixin:
    """Enables dict-style access on dataclass instances.

    Delegates [] lookups and .get() to the `raw` mapping the record was
    parsed from.
    """

    raw: Dict[str, Any]

    def __getitem__(self, key):
        return self.raw[key]

    def __contains__(self, key):
        return key in self.raw

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def keys(self):
        return self.raw.keys()

    def values(self):
        return self.raw.values()

    def items(self):
        return self.raw.items()


def to_jsonable(value):
    """Convert numpy values, complex numbers and non-finite floats for JSON."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": to_jsonable(float(value.real)), "im": to_jsonable(float(value.imag))}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return str(value)
    return value


# ---------------------------------------------------------------------------
# Settings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Settings:
    """Numerical defaults shared by the solvers and the scenario runner."""

    tol: float = 1e-10
    max_iter: int = 500
    segments: int = 200
    cond_limit: float = 1e10
    gap_rtol: float = 1e-4
    warning_gap: float = 0.05
    cond_threshold: float = 1e8
    characteristic_count: int = 6
    diagonal: str = "mean"

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]], path: str = "solver") -> "Settings":
        if data is None:
            return cls()
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must be an object", field=path)
        known = {name for name in cls.__dataclass_fields__}
        unknown = sorted(set(data) - known)
        if unknown:
            name = unknown[0]
            raise ConfigError(f"Unknown solver setting '{name}'", field=f"{path}.{name}")
        values = {}
        for name in ("tol", "cond_limit", "gap_rtol", "warning_gap", "cond_threshold"):
            if name in data:
                values[name] = _positive(data, name, path)
        for name in ("max_iter", "segments", "characteristic_count"):
            if name in data:
                values[name] = _positive_int(data, name, path)
        if "diagonal" in data:
            if data["diagonal"] not in ("lower", "mean"):
                raise ConfigError(
                    "diagonal must be 'lower' or 'mean'", field=f"{path}.diagonal"
                )
            values["diagonal"] = data["diagonal"]
        return cls(**values)


# ---------------------------------------------------------------------------
# Solver output
# ---------------------------------------------------------------------------

@dataclass
class SolverReport:
    """Outcome of a solve: iteration count, final residual and warnings."""

    iterations: int
    final_residual: float
    converged: bool
    tolerance: Optional[float] = None
    warnings: List[str] = field(default_factory=list)
    residual_history: Tuple[float, ...] = field(default=(), repr=False)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if (
            self.converged
            and self.tolerance is not None
            and not self.final_residual <= self.tolerance
        ):
            raise InvalidParametersError(
                "A converged report must have final_residual <= tolerance"
            )

    def to_dict(self) -> Dict[str, Any]:
        return to_jsonable(
            {
                "iterations": self.iterations,
                "final_residual": self.final_residual,
                "converged": self.converged,
                "tolerance": self.tolerance,
                "warnings": list(self.warnings),
                "residual_history": list(self.residual_history),
                "metadata": self.metadata,
            }
        )


@dataclass
class Trajectory:
    """Sampled series on a common time axis plus the solver report."""

    times: np.ndarray
    series: Dict[str, np.ndarray]
    report: SolverReport
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, name):
        return self.series[name]

    @property
    def names(self) -> List[str]:
        return list(self.series)

    def values(self) -> np.ndarray:
        """Series stacked as a ``(len(series), len(times))`` array."""
        return np.vstack([self.series[name] for name in self.series])

    def to_frame(self):
        """Trajectory table with the time column first."""
        import pandas as pd

        columns = {"t": np.asarray(self.times, dtype=float)}
        columns.update({name: np.asarray(v, dtype=float) for name, v in self.series.items()})
        return pd.DataFrame(columns)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

@dataclass
class NodeRecord:
    """Matrix health figures of A(t) at one grid node."""

    t: float
    inf_norm: Optional[float] = None
    det: Optional[float] = None
    condition_estimate: Optional[float] = None

    def to_dict(self):
        return to_jsonable(
            {
                "t": self.t,
                "inf_norm": self.inf_norm,
                "det": self.det,
                "condition_estimate": self.condition_estimate,
            }
        )


@dataclass
class HealthReport:
    """Per-node records and the aggregated health flags of A(t)."""

    records: List[NodeRecord] = field(default_factory=list)
    contractive: Optional[bool] = None
    invertible_everywhere: Optional[bool] = None
    well_conditioned: Optional[bool] = None
    nonnegative: Optional[bool] = None
    irreducible: Optional[bool] = None
    messages: List[str] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def flags(self) -> Dict[str, Optional[bool]]:
        return {
            "contractive": self.contractive,
            "invertible_everywhere": self.invertible_everywhere,
            "well_conditioned": self.well_conditioned,
            "nonnegative": self.nonnegative,
            "irreducible": self.irreducible,
        }

    def to_dict(self):
        return to_jsonable(
            {
                "flags": self.flags,
                "messages": list(self.messages),
                "metadata": self.metadata,
                "records": [record.to_dict() for record in self.records],
            }
        )


@dataclass
class CriticalityEntry:
    characteristic_number: complex
    gap: float

    def to_dict(self):
        return to_jsonable({"characteristic_number": self.characteristic_number, "gap": self.gap})


@dataclass
class CriticalityReport:
    """Characteristic numbers of the stacked forecast kernel nearest λ."""

    lam: float
    entries: List[CriticalityEntry]
    warning: bool
    warning_gap: float
    matrix_eigenvalues: List[complex] = field(default_factory=list)
    messages: List[str] = field(default_factory=list)

    @property
    def min_gap(self) -> float:
        return min((entry.gap for entry in self.entries), default=math.inf)

    def to_dict(self):
        return to_jsonable(
            {
                "lambda": self.lam,
                "warning": self.warning,
                "warning_gap": self.warning_gap,
                "min_gap": self.min_gap,
                "entries": [entry.to_dict() for entry in self.entries],
                "matrix_eigenvalues": list(self.matrix_eigenvalues),
                "messages": list(self.messages),
            }
        )


# ---------------------------------------------------------------------------
# Model parameters
# ---------------------------------------------------------------------------

def _field_error(exc, path):
    name = exc.details.get("field")
    return ConfigError(str(exc), field=f"{path}.{name}" if name else path)


def _invalid(message, name):
    return InvalidParametersError(message, details={"field": name})


@dataclass(frozen=True)
class HarrodParams(_DictAccessMixin):
    """Harrod model inputs: saving share m, capital/income ratio n, Y0, K0."""

    m: float
    n: float
    Y0: float = 1.0
    K0: float = 0.0
    raw: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not (0.0 <= self.m <= 1.0):
            raise _invalid("m must satisfy 0 <= m <= 1", "m")
        if not (self.n > 0.0 and math.isfinite(self.n)):
            raise _invalid("n must be positive", "n")
        if not (self.Y0 > 0.0 and math.isfinite(self.Y0)):
            raise _invalid("Y0 must be positive", "Y0")
        if not (self.K0 >= 0.0 and math.isfinite(self.K0)):
            raise _invalid("K0 must be non-negative", "K0")

    @property
    def s(self) -> float:
        return self.m / self.n

    @property
    def a(self) -> float:
        return self.m / self.n

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str = "parameters") -> "HarrodParams":
        _require_mapping(data, path)
        try:
            return cls(
                m=_number(data, "m", path),
                n=_number(data, "n", path),
                Y0=_number(data, "Y0", path, default=1.0),
                K0=_number(data, "K0", path, default=0.0),
                raw=data,
            )
        except InvalidParametersError as exc:
            raise _field_error(exc, path)


@dataclass(frozen=True)
class PhillipsParams(_DictAccessMixin):
    """Phillips model inputs (rates k, l; accelerator n; multiplier m) and
    the Cauchy data Y(1), Y'(1) in dimensionless time τ = 1 + k·t."""

    k: float
    n: float
    m: float
    l: float  # noqa: E741
    Y1: float = 1.0
    Y1p: float = 0.0
    raw: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in ("k", "n", "l"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise _invalid(f"{name} must be positive", name)
        if not (0.0 < self.m < 1.0):
            raise _invalid("m must satisfy 0 < m < 1", "m")
        for name in ("Y1", "Y1p"):
            if not math.isfinite(getattr(self, name)):
                raise _invalid(f"{name} must be finite", name)

    @property
    def alpha(self) -> float:
        return self.m * self.l / self.k

    @property
    def beta(self) -> float:
        return 2.0 - self.n * self.l

    @property
    def gamma(self) -> float:
        return 2.0 * self.m * self.l / self.k

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str = "parameters") -> "PhillipsParams":
        _require_mapping(data, path)
        try:
            return cls(
                k=_number(data, "k", path),
                n=_number(data, "n", path),
                m=_number(data, "m", path),
                l=_number(data, "l", path),
                Y1=_number(data, "Y1", path, default=1.0),
                Y1p=_number(data, "Y1p", path, default=0.0),
                raw=data,
            )
        except InvalidParametersError as exc:
            raise _field_error(exc, path)


# ---------------------------------------------------------------------------
# Scenario configuration
# ---------------------------------------------------------------------------

def _require_mapping(data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must be an object", field=path)


def _number(data, key, path, default=None):
    if key not in data:
        if default is None:
            raise ConfigError(f"Missing required field '{key}'", field=f"{path}.{key}")
        return float(default)
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' must be a number", field=f"{path}.{key}")
    if not math.isfinite(value):
        raise ConfigError(f"'{key}' must be finite", field=f"{path}.{key}")
    return float(value)


def _positive(data, key, path):
    value = _number(data, key, path)
    if value <= 0:
        raise ConfigError(f"'{key}' must be positive", field=f"{path}.{key}")
    return value


def _positive_int(data, key, path):
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"'{key}' must be a positive integer", field=f"{path}.{key}")
    return value


def _vector(data, key, size, path):
    if key not in data:
        raise ConfigError(f"Missing required field '{key}'", field=f"{path}.{key}")
    values = data[key]
    if not isinstance(values, list) or len(values) != size:
        raise ConfigError(
            f"'{key}' must be a list of {size} numbers", field=f"{path}.{key}"
        )
    return tuple(
        _number({"value": v}, "value", f"{path}.{key}[{i}]") for i, v in enumerate(values)
    )


def _coefficient(value, path):
    """A number or a breakpoint list ``[[t, value], ...]`` with increasing t."""
    if isinstance(value, bool):
        raise ConfigError("Coefficient must be a number or breakpoint list", field=path)
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise ConfigError("Coefficient must be finite", field=path)
        return float(value)
    if not isinstance(value, list) or not value:
        raise ConfigError("Coefficient must be a number or breakpoint list", field=path)
    points = []
    for index, pair in enumerate(value):
        where = f"{path}[{index}]"
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError("Breakpoints must be [t, value] pairs", field=where)
        points.append(
            (
                _number({"t": pair[0]}, "t", where),
                _number({"value": pair[1]}, "value", where),
            )
        )
    times = [point[0] for point in points]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError("Breakpoint times must be strictly increasing", field=path)
    return tuple(points)


def _coefficient_vector(data, key, size, path, default=None):
    if key not in data:
        if default is None:
            raise ConfigError(f"Missing required field '{key}'", field=f"{path}.{key}")
        return tuple(default for _ in range(size))
    values = data[key]
    if not isinstance(values, list) or len(values) != size:
        raise ConfigError(f"'{key}' must be a list of {size} entries", field=f"{path}.{key}")
    return tuple(_coefficient(v, f"{path}.{key}[{i}]") for i, v in enumerate(values))


@dataclass(frozen=True)
class BalanceSpec(_DictAccessMixin):
    """Price-balance system as written in a scenario file.

    Coefficients are numbers or breakpoint tuples; :meth:`to_system`
    turns them into the callables used by :mod:`econodyn.balance`.
    """

    A: Tuple[Tuple[Any, ...], ...]
    c: Tuple[Any, ...]
    p: Tuple[float, ...]
    pp: Optional[Tuple[float, ...]] = None
    r: Optional[Tuple[float, ...]] = None
    step_length: float = 1.0
    raw: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.A)

    @classmethod
    def from_dict(
        cls, data: Dict[str, Any], path: str = "parameters", need: Sequence[str] = ()
    ) -> "BalanceSpec":
        _require_mapping(data, path)
        if "A" not in data:
            raise ConfigError("Missing required field 'A'", field=f"{path}.A")
        rows = data["A"]
        if not isinstance(rows, list) or not rows:
            raise ConfigError("'A' must be a non-empty list of rows", field=f"{path}.A")
        size = len(rows)
        matrix = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != size:
                raise ConfigError(
                    f"Row {i} of 'A' must have {size} entries (matrix must be square)",
                    field=f"{path}.A[{i}]",
                )
            matrix.append(tuple(_coefficient(v, f"{path}.A[{i}][{j}]") for j, v in enumerate(row)))

        step_length = _number(data, "step_length", path, default=1.0)
        if step_length <= 0:
            raise ConfigError("'step_length' must be positive", field=f"{path}.step_length")
        return cls(
            A=tuple(matrix),
            c=_coefficient_vector(data, "c", size, path, default=0.0),
            p=_vector(data, "p", size, path) if "p" in need or "p" in data else (0.0,) * size,
            pp=_vector(data, "pp", size, path) if "pp" in need or "pp" in data else None,
            r=_vector(data, "r", size, path) if "r" in need or "r" in data else None,
            step_length=step_length,
            raw=data,
        )

    def to_system(self):
        from .balance import BalanceSystem, coefficient_function

        return BalanceSystem(
            coefficients=tuple(tuple(coefficient_function(v) for v in row) for row in self.A),
            costs=tuple(coefficient_function(v) for v in self.c),
            step_length=self.step_length,
        )


@dataclass(frozen=True)
class VariantSpec(_DictAccessMixin):
    """One perturbation of a forecast: cost shifts Δc_i(t) and result shifts Δr_i."""

    name: str
    c_shift: Tuple[Any, ...]
    r_shift: Tuple[float, ...]
    raw: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], size: int, path: str) -> "VariantSpec":
        _require_mapping(data, path)
        name = data.get("name")
        if not isinstance(name, str) or not name:
            raise ConfigError("Variant needs a non-empty 'name'", field=f"{path}.name")
        return cls(
            name=name,
            c_shift=_coefficient_vector(data, "c_shift", size, path, default=0.0),
            r_shift=_vector(data, "r_shift", size, path) if "r_shift" in data else (0.0,) * size,
            raw=data,
        )

    def to_variant(self):
        from .balance import Variant, coefficient_function

        return Variant(
            name=self.name,
            cost_shift=tuple(coefficient_function(v) for v in self.c_shift),
            result_shift=np.asarray(self.r_shift, dtype=float),
        )


_REQUIRED_VECTORS = {
    "balance-cauchy": ("p", "pp"),
    "balance-forecast": ("p", "r"),
    "balance-sweep": ("p", "r"),
    "diagnose": (),
}


@dataclass(frozen=True)
class Scenario(_DictAccessMixin):
    """A validated scenario file."""

    kind: str
    parameters: Any
    grid: int = 200
    output: str = "out"
    settings: Settings = field(default_factory=Settings)
    variants: Tuple[VariantSpec, ...] = ()
    raw: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Scenario":
        _require_mapping(data, "<root>")
        kind = data.get("kind")
        if kind not in SCENARIO_KINDS:
            raise ConfigError(
                f"'kind' must be one of: {', '.join(SCENARIO_KINDS)}", field="kind"
            )
        settings = Settings.from_dict(data.get("solver"))
        grid = data.get("grid", settings.segments)
        if isinstance(grid, bool) or not isinstance(grid, int) or grid < 1:
            raise ConfigError("'grid' must be a positive integer", field="grid")
        output = data.get("output", "out")
        if not isinstance(output, str) or not output:
            raise ConfigError("'output' must be a non-empty path", field="output")
        if "parameters" not in data:
            raise ConfigError("Missing required field 'parameters'", field="parameters")
        raw_params = data["parameters"]

        if kind == "harrod":
            parameters = HarrodParams.from_dict(raw_params)
            if parameters.m <= 0:
                raise ConfigError("m must satisfy 0 < m <= 1", field="parameters.m")
            if parameters.a >= 1:
                raise ConfigError("m/n must be below 1", field="parameters.n")
            _check_harrod_extras(raw_params)
        elif kind == "phillips":
            parameters = PhillipsParams.from_dict(raw_params)
            span = _number(raw_params, "T", "parameters", default=3.0)
            if span <= 1.0:
                raise ConfigError("'T' must exceed 1", field="parameters.T")
        else:
            parameters = BalanceSpec.from_dict(raw_params, need=_REQUIRED_VECTORS[kind])

        variants = ()
        if kind == "balance-sweep":
            variants = parse_variants(data.get("variants", []), parameters.size, "variants")
        return cls(
            kind=kind,
            parameters=parameters,
            grid=grid,
            output=output,
            settings=settings,
            variants=variants,
            raw=data,
        )


def _check_harrod_extras(data):
    if "steps" in data:
        value = data["steps"]
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise ConfigError("'steps' must be a non-negative integer", field="parameters.steps")
    if "fraction" in data:
        value = _number(data, "fraction", "parameters")
        if not 0.0 < value < 1.0:
            raise ConfigError("'fraction' must lie in (0, 1)", field="parameters.fraction")


def parse_variants(items, size, path="variants") -> Tuple[VariantSpec, ...]:
    if not isinstance(items, list):
        raise ConfigError("Variants must be a list", field=path)
    specs = tuple(
        VariantSpec.from_dict(item, size, f"{path}[{index}]") for index, item in enumerate(items)
    )
    names = [spec.name for spec in specs]
    for index, name in enumerate(names):
        if name in names[:index]:
            raise ConfigError(f"Duplicate variant name '{name}'", field=f"{path}[{index}].name")
    return specs
