"""
Shared pytest fixtures for the test suites

This module provides reusable pytest fixtures for:
- Seeded random generators
- Paired samples on the circle, the sphere and the line
- Study files and application config files on disk
- A clean DIRDEP_* environment

These fixtures are re-exported by the conftest.py files of the shared
and dirdep test suites. Importing this module also registers the
hypothesis profile used by every property test.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pytest
from hypothesis import settings

from shared.models import DirectionalSample, PairedSample, SampleKind

logger = logging.getLogger(__name__)


settings.register_profile("dirdep", max_examples=100, deadline=None)
settings.load_profile("dirdep")


def _circle(angles: np.ndarray) -> DirectionalSample:
    return DirectionalSample(np.column_stack((np.cos(angles), np.sin(angles))), SampleKind.SPHERE)


def _sphere(rng: np.random.Generator, n: int, m: int) -> DirectionalSample:
    g = rng.standard_normal((n, m))
    return DirectionalSample(g / np.linalg.norm(g, axis=1, keepdims=True), SampleKind.SPHERE)


@pytest.fixture
def rng() -> np.random.Generator:
    """Generator with a fixed seed, fresh for every test"""
    return np.random.default_rng(12345)


@pytest.fixture
def circular_pair(rng) -> PairedSample:
    """Independent uniform angles, n = 15"""
    theta = rng.uniform(0.0, 2.0 * np.pi, 15)
    phi = rng.uniform(0.0, 2.0 * np.pi, 15)
    return PairedSample(_circle(theta), _circle(phi))


@pytest.fixture
def dependent_circular_pair(rng) -> PairedSample:
    """Y is X rotated by a small perturbation, n = 30"""
    theta = rng.uniform(0.0, 2.0 * np.pi, 30)
    phi = theta + 0.5 + rng.normal(0.0, 0.1, 30)
    return PairedSample(_circle(theta), _circle(phi))


@pytest.fixture
def sphere_pair(rng) -> PairedSample:
    """Independent uniform points on S^2, n = 12"""
    return PairedSample(_sphere(rng, 12, 3), _sphere(rng, 12, 3))


@pytest.fixture
def sphere_linear_pair(rng) -> PairedSample:
    """Points on S^2 with a linear response driven by the first coordinate, n = 20"""
    x = _sphere(rng, 20, 3)
    z = 2.0 * x.points[:, 0] + rng.normal(0.0, 0.1, 20)
    return PairedSample(x, DirectionalSample(z.reshape(-1, 1), SampleKind.LINEAR))


@pytest.fixture
def study_dict() -> Dict[str, Any]:
    """A small valid study document"""
    return {
        "study": {
            "name": "tiny",
            "n": 10,
            "alpha": 0.05,
            "replicates": 20,
            "bootstrap": 19,
            "mode": "full_bootstrap",
            "seed": 7,
            "statistics": ["dcor:energy:1", "dcor:ratio"]
        },
        "scenarios": [
            {"model": "VM(0,1) x VM(pi,0.1)"},
            {"model": "BvM(2)", "label": "dependent"}
        ]
    }


@pytest.fixture
def study_file(tmp_path, study_dict) -> Path:
    """The small study written as JSON with the .cfg extension"""
    path = tmp_path / "tiny.cfg"
    path.write_text(json.dumps(study_dict, indent=2), encoding="utf-8")
    return path


@pytest.fixture
def app_config_file(tmp_path) -> Path:
    """An application config with non-default values"""
    path = tmp_path / "dirdep.yaml"
    path.write_text(
        "defaults:\n"
        "  bootstrap: 99\n"
        "  seed: 42\n"
        "  jobs: 2\n"
        "  kernel: \"energy:0.5\"\n"
        "logging:\n"
        "  level: \"debug\"\n",
        encoding="utf-8"
    )
    return path


@pytest.fixture
def clean_env(monkeypatch):
    """Remove DIRDEP_* overrides so tests see file and built-in values only"""
    monkeypatch.delenv("DIRDEP_JOBS", raising=False)
    monkeypatch.delenv("DIRDEP_LOG_LEVEL", raising=False)
    yield
