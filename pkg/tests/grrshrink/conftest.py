"""Fixtures for testing."""

import json
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from grrshrink.const import HALDPORT_RESPONSE
from grrshrink.design import Analysis, RawDataset, analyze, load_csv

HALDPORT = Path(__file__).parents[2] / "grrshrink" / "data" / "haldport.csv"


@pytest.fixture
def haldport_path() -> Path:
    """Path of the bundled cement heat data"""
    return HALDPORT


@pytest.fixture
def haldport() -> RawDataset:
    return load_csv(HALDPORT, HALDPORT_RESPONSE)


@pytest.fixture
def haldport_analysis(haldport) -> Analysis:
    return analyze(haldport)


@pytest.fixture
def create_dataset() -> Callable[..., RawDataset]:
    """Creates a function used to draw random, well conditioned datasets"""

    def creator(n: int = 40, p: int = 4, seed: int = 0, noise: float = 1.0) -> RawDataset:
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, p)) @ np.triu(np.ones((p, p))) + 3.0
        beta = rng.uniform(-2.0, 2.0, p)
        y = X @ beta + 5.0 + noise * rng.standard_normal(n)
        return RawDataset.from_arrays(X, y)

    return creator


@pytest.fixture
def create_analysis(create_dataset) -> Callable[..., Analysis]:
    """Creates a function used to analyze random datasets"""

    def creator(standardize_y: bool = True, **kwargs) -> Analysis:
        return analyze(create_dataset(**kwargs), standardize_y)

    return creator


@pytest.fixture
def write_csv(tmp_path) -> Callable[[str], Path]:
    """Creates a function that writes CSV text to a temporary file"""

    def writer(text: str, name: str = "data.csv") -> Path:
        target = tmp_path / name
        target.write_text(text)
        return target

    return writer


@pytest.fixture
def scenario_file(tmp_path) -> Callable[..., Path]:
    """Creates a function that writes a scenario JSON file"""

    def writer(**overrides) -> Path:
        data = {
            "name": "small",
            "p": 3,
            "n": 25,
            "spectrum": [2.0, 0.8, 0.2],
            "sigma2": 1.0,
            "target_r2": 0.6,
            "replications": 20,
            "seed": 11,
        }
        data.update(overrides)
        target = tmp_path / "scenario.json"
        target.write_text(json.dumps(data))
        return target

    return writer
