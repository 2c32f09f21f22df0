"""Shared synthetic-data helpers for the test suite."""

import numpy as np
import pytest

from fracrheo.dataio import ExperimentRecord, TimeSeries
from fracrheo.l1solver import (
    UniformGrid,
    forward_solve,
    paper_protocol,
    rasterize_protocol,
)

PAPER_DT_S = 0.495
PAPER_DURATION_S = 12600.0


def paper_grid(dt: float = PAPER_DT_S) -> UniformGrid:
    return UniformGrid(dt=dt, n_steps=int(round(PAPER_DURATION_S / dt)))


def synthetic_record(params, sample_id: str, dt: float = PAPER_DT_S,
                     proto=None, noise_rel: float = 0.0,
                     rng=None) -> ExperimentRecord:
    """Forward-solve `params` under the five-step protocol (or `proto`)
    and package the result as an experiment record."""
    if proto is None:
        proto = paper_protocol(ramp_s=dt)
    grid = paper_grid(dt)
    strain, _ = rasterize_protocol(proto, grid)
    sigma = forward_solve(params, strain, grid)
    if noise_rel > 0.0:
        rng = rng or np.random.default_rng(0)
        sigma = sigma + noise_rel * np.max(np.abs(sigma)) * rng.standard_normal(len(sigma))
    t = grid.times()
    return ExperimentRecord(
        sample_id=sample_id,
        stress=TimeSeries(t, sigma, unit="Pa"),
        strain=TimeSeries(t, strain),
        protocol=proto,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
