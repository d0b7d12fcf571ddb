"""
Scenario execution: load a JSON scenario, dispatch to the model modules and
write ``trajectory.csv`` plus ``report.json`` into the output directory.

Outputs are deterministic: floats are written with 17 significant digits
and report keys are sorted.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from . import balance, diagnostics, harrod, phillips
from .errors import ConfigError, ConfigNotFoundError, EconodynError
from .models import Scenario, parse_variants, to_jsonable
from .numcore import make_uniform_grid

logger = logging.getLogger("econodyn")

TRAJECTORY_FILE = "trajectory.csv"
REPORT_FILE = "report.json"
FLOAT_FORMAT = "%.16e"


@dataclass
class RunResult:
    """What a scenario run produced."""

    scenario: Scenario
    frame: pd.DataFrame
    report: Dict[str, Any]
    output_dir: Path
    warnings: List[str] = field(default_factory=list)

    @property
    def trajectory_path(self):
        return self.output_dir / TRAJECTORY_FILE

    @property
    def report_path(self):
        return self.output_dir / REPORT_FILE


def _read_json(path, what):
    path = Path(path)
    if not path.is_file():
        raise ConfigNotFoundError(f"{what} file not found: {path}", path=str(path))
    try:
        with path.open(encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file is not valid JSON: {exc}", field="<root>")


def load_config(path):
    """Parse and validate a scenario file.

    Raises:
        ConfigNotFoundError: if the file does not exist.
        ConfigError: if it is not valid JSON or fails validation.
    """
    return Scenario.from_dict(_read_json(path, "Config"))


def load_variants(path, size):
    """Variants from a file holding a list or ``{"variants": [...]}``."""
    data = _read_json(path, "Variants")
    if isinstance(data, dict):
        data = data.get("variants", [])
    return parse_variants(data, size, "variants")


def write_trajectory(frame, path):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def read_trajectory(path):
    return pd.read_csv(path, float_precision="round_trip")


def write_report(report, path):
    text = json.dumps(to_jsonable(report), indent=2, sort_keys=True, ensure_ascii=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _base_report(scenario, grid):
    return {
        "kind": scenario.kind,
        "grid": grid,
        "parameters": scenario.parameters.raw,
        "settings": {
            name: getattr(scenario.settings, name)
            for name in scenario.settings.__dataclass_fields__
        },
        "warnings": [],
    }


def _run_harrod(scenario, grid, report):
    params = scenario.parameters
    steps = params.get("steps", 20)
    fraction = params.get("fraction", 0.99)
    path = harrod.trajectory(params, segments=grid, fraction=fraction)
    horizon = path.metadata["horizon"]
    half = horizon / 2.0
    listing = harrod.discrete_path(params, steps)
    results = {
        "horizon": horizon,
        "s": params.s,
        "half_horizon_ratio": harrod.income_corrected(params, half)
        / harrod.income_exponential(params, half),
        "discrete": {
            "steps": steps,
            "income": harrod.income_discrete(params, steps),
            "exponential_discrepancy": harrod.exponential_discrepancy(params, steps),
            "listing": {"step": listing.times, **listing.series},
        },
    }
    if not math.isclose(params.Y0, params.K0 / params.n, rel_tol=1e-12):
        report["warnings"].append(
            f"Discrete model uses Y_c0 = K0/n = {params.K0 / params.n:.6g} instead of Y0"
        )
    report["results"] = results
    return path


def _run_phillips(scenario, grid, report):
    params = scenario.parameters
    settings = scenario.settings
    path = phillips.trajectory(
        params,
        upper=params.get("T", 3.0),
        segments=grid,
        tol=settings.tol,
        max_iter=settings.max_iter,
    )
    report["results"] = {
        "alpha": params.alpha,
        "beta": params.beta,
        "gamma": params.gamma,
        "classical_coeffs": list(phillips.classical_coeffs(params)),
        "equation_residual": path.report.metadata["equation_residual"],
    }
    return path


def _run_cauchy(scenario, grid, report):
    spec = scenario.parameters
    settings = scenario.settings
    system = spec.to_system()
    mesh = make_uniform_grid(0.0, 1.0, grid)
    path = balance.simulate_cauchy(
        system,
        balance.CauchyData(p=np.asarray(spec.p), pp=np.asarray(spec.pp)),
        mesh,
        tol=settings.tol,
        max_iter=settings.max_iter,
    )
    residual = balance.cauchy_residual(system, mesh, path.values())
    report["results"] = {
        "terminal": path.values()[:, -1],
        "equation_residual": float(np.max(np.abs(residual))) if residual.size else 0.0,
    }
    return path


def _criticality(system, mesh, settings, report):
    check = balance.criticality_check(
        system,
        mesh,
        count=settings.characteristic_count,
        warning_gap=settings.warning_gap,
        diagonal=settings.diagonal,
    )
    report["criticality"] = check.to_dict()
    report["warnings"].extend(check.messages)


def _run_forecast(scenario, grid, report):
    spec = scenario.parameters
    settings = scenario.settings
    system = spec.to_system()
    mesh = make_uniform_grid(0.0, 1.0, grid)
    _criticality(system, mesh, settings, report)
    return balance.forecast(
        system,
        balance.ForecastData(p=np.asarray(spec.p), r=np.asarray(spec.r)),
        mesh,
        diagonal=settings.diagonal,
        cond_limit=settings.cond_limit,
        gap_rtol=settings.gap_rtol,
    )


def _run_sweep(scenario, grid, report, variants):
    spec = scenario.parameters
    settings = scenario.settings
    system = spec.to_system()
    mesh = make_uniform_grid(0.0, 1.0, grid)
    _criticality(system, mesh, settings, report)
    results = balance.variational_sweep(
        system,
        balance.ForecastData(p=np.asarray(spec.p), r=np.asarray(spec.r)),
        [variant.to_variant() for variant in variants],
        mesh,
        diagonal=settings.diagonal,
        cond_limit=settings.cond_limit,
        gap_rtol=settings.gap_rtol,
    )
    series = {}
    for name, path in results.items():
        for column, values in path.series.items():
            series[f"{name}.{column}"] = values
    report["results"] = {"variants": list(results)}
    report["solver"] = {name: path.report.to_dict() for name, path in results.items()}
    return pd.DataFrame({"t": mesh.nodes, **series})


def _health_frame(health):
    return pd.DataFrame(
        {
            "t": [record.t for record in health.records],
            "inf_norm": [record.inf_norm for record in health.records],
            "det": [record.det for record in health.records],
            "condition_estimate": [record.condition_estimate for record in health.records],
        }
    )


def _run_diagnose(scenario, grid, report):
    system = scenario.parameters.to_system()
    health = diagnostics.diagnose(
        system,
        make_uniform_grid(0.0, 1.0, grid),
        cond_threshold=scenario.settings.cond_threshold,
    )
    report["health"] = health.to_dict()
    report["warnings"].extend(health.messages)
    return health


def _output_dir(scenario, out):
    directory = Path(out) if out is not None else Path(scenario.output)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def run_scenario(config_path, grid=None, out=None, variants_path=None):
    """Run one scenario file and write its artifacts.

    ``grid``, ``out`` and ``variants_path`` override the file's values. On
    a solver failure the report is still written, with ``status = "error"``,
    before the error propagates.

    Returns:
        RunResult
    """
    scenario = load_config(config_path)
    segments = scenario.grid if grid is None else grid
    if isinstance(segments, bool) or not isinstance(segments, int) or segments < 1:
        raise ConfigError("grid must be a positive integer", field="grid")
    variants = scenario.variants
    if variants_path is not None:
        if scenario.kind != "balance-sweep":
            raise ConfigError("--variants applies to balance-sweep scenarios only", field="kind")
        variants = load_variants(variants_path, scenario.parameters.size)

    directory = _output_dir(scenario, out)
    report = _base_report(scenario, segments)
    logger.info("Running %s scenario from %s", scenario.kind, config_path)
    try:
        if scenario.kind == "harrod":
            path = _run_harrod(scenario, segments, report)
        elif scenario.kind == "phillips":
            path = _run_phillips(scenario, segments, report)
        elif scenario.kind == "balance-cauchy":
            path = _run_cauchy(scenario, segments, report)
        elif scenario.kind == "balance-forecast":
            path = _run_forecast(scenario, segments, report)
        elif scenario.kind == "balance-sweep":
            path = _run_sweep(scenario, segments, report, variants)
        else:
            path = _run_diagnose(scenario, segments, report)
    except EconodynError as exc:
        report["status"] = "error"
        report["error"] = exc.to_dict()
        write_report(report, directory / REPORT_FILE)
        logger.error("%s scenario failed: %s", scenario.kind, exc)
        raise

    if isinstance(path, pd.DataFrame):
        frame = path
    elif scenario.kind == "diagnose":
        frame = _health_frame(path)
    else:
        frame = path.to_frame()
        report["solver"] = path.report.to_dict()
        report["warnings"].extend(path.report.warnings)
    report["status"] = "ok"

    write_trajectory(frame, directory / TRAJECTORY_FILE)
    write_report(report, directory / REPORT_FILE)
    logger.info("Wrote %s and %s to %s", TRAJECTORY_FILE, REPORT_FILE, directory)
    return RunResult(
        scenario=scenario,
        frame=frame,
        report=report,
        output_dir=directory,
        warnings=list(report["warnings"]),
    )


def diagnose(config_path, grid=None, out=None):
    """Health report for the balance system of any balance or diagnose scenario."""
    scenario = load_config(config_path)
    if scenario.kind in ("harrod", "phillips"):
        raise ConfigError(
            f"'{scenario.kind}' scenarios have no coefficient matrix to diagnose", field="kind"
        )
    segments = scenario.grid if grid is None else grid
    directory = _output_dir(scenario, out)
    report = _base_report(scenario, segments)
    report["kind"] = "diagnose"
    health = _run_diagnose(scenario, segments, report)
    report["status"] = "ok"
    write_trajectory(_health_frame(health), directory / TRAJECTORY_FILE)
    write_report(report, directory / REPORT_FILE)
    return health
