"""Shared fixtures.

The figure presets and the two sweeps are expensive (minutes each), so
they are built once per session and shared between the acceptance tests
and whatever unit tests want to poke at real trajectories.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import pytest

from optosync.experiments import (
    SWEEP_AXES,
    SweepResult,
    _worker_count,
    get_preset,
    run_preset,
    sweep_axis,
    sweep_thermal,
)

_ACCEPTANCE_LINES: list[str] = []


def record_criterion(line: str) -> None:
    """Collect one pass/fail line; echoed in the terminal summary."""
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter) -> None:
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@dataclass(frozen=True)
class TimedSweep:
    result: SweepResult
    wall_seconds: float
    workers: int


@pytest.fixture(scope="session")
def fig2_run():
    return run_preset(get_preset("fig2_linear"))


@pytest.fixture(scope="session")
def fig3_run():
    return run_preset(get_preset("fig3_quadratic"))


@pytest.fixture(scope="session")
def thermal_sweep():
    axis, values = SWEEP_AXES["fig4a_thermal"]
    preset = get_preset("fig4a_thermal")
    t0 = time.perf_counter()
    result = sweep_thermal(preset, values)
    return TimedSweep(result, time.perf_counter() - t0, _worker_count(len(values)))


@pytest.fixture(scope="session")
def detuning_sweep():
    axis, values = SWEEP_AXES["fig4b_detuning"]
    preset = get_preset("fig4b_detuning")
    t0 = time.perf_counter()
    result = sweep_axis(preset, axis, values)
    return TimedSweep(result, time.perf_counter() - t0, _worker_count(len(values)))


@pytest.fixture
def physical_cov():
    """Factory for random physical covariance matrices.

    vacuum + W Wᵀ dominates the vacuum state, so V + (i/2)Ω stays
    positive semidefinite for any W.
    """

    def make(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        w = rng.standard_normal((8, 8)) * scale
        return 0.5 * np.eye(8) + w @ w.T / 8.0

    return make
