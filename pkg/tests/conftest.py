"""Pytest fixtures and configuration."""

import json

import numpy as np
import pytest

from econodyn import BalanceSystem, HarrodParams, PhillipsParams, make_uniform_grid


@pytest.fixture
def rng():
    """Seeded generator so randomised checks are reproducible."""
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_grid():
    """200-segment grid on [0, 1]."""
    return make_uniform_grid(0.0, 1.0, 200)


@pytest.fixture
def harrod_params():
    """Harrod inputs used throughout (horizon n/m = 33.33...)."""
    return HarrodParams(m=0.3, n=10.0, Y0=1.0, K0=10.0)


@pytest.fixture
def phillips_params():
    """Phillips inputs with a = 0.5, b = 0.5 in the classical form."""
    return PhillipsParams(k=1.0, n=1.0, m=0.5, l=1.0, Y1=1.0, Y1p=0.5)


@pytest.fixture
def two_sector_system():
    """Constant, contractive, irreducible 2x2 balance system."""
    return BalanceSystem.constant([[0.2, 0.3], [0.1, 0.2]], [1.0, 2.0])


@pytest.fixture
def write_config(tmp_path):
    """Write a scenario dict to a JSON file and return its path."""

    def _write(data, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def harrod_config(tmp_path):
    """Harrod scenario writing into tmp_path/out."""
    return {
        "kind": "harrod",
        "grid": 50,
        "output": str(tmp_path / "out"),
        "parameters": {"m": 0.3, "n": 10, "Y0": 1, "K0": 10},
    }


@pytest.fixture
def balance_parameters():
    """Two-participant balance system with forecast and Cauchy data."""
    return {
        "A": [[0.2, 0.3], [[[0.0, 0.1], [1.0, 0.2]], 0.2]],
        "c": [1.0, [[0.0, 2.0], [1.0, 2.5]]],
        "p": [1.0, 1.5],
        "pp": [0.0, 0.1],
        "r": [1.2, 1.8],
    }
