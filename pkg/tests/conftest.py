"""Shared fixtures: the desk-scale sweep and section sets reused across tests.

The heavy session fixtures are computed once; acceptance criteria 7/8/9
and several property tests read from them.
"""

from __future__ import annotations

import time

import pytest
from hypothesis import HealthCheck, settings

from duffinglab import (
    DESK_GAMMAS,
    IntegratorConfig,
    ModelKind,
    ModelSpec,
    desk_config,
    desk_grid,
    integrate,
    poincare_section,
    run_sweep,
    seed_for,
    write_records,
)

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def desk_sc_sweep(tmp_path_factory):
    """Full desk-preset SC sweep (12 gammas x 9 betas x 2 replicates).

    Returns (records, csv_path, elapsed_seconds); the CSV + manifest are
    also on disk so round-trip and detection tests can reuse them.
    """
    grid = desk_grid(models=(ModelKind.SC,), replicates=2)
    config = desk_config(seed=0)
    t0 = time.perf_counter()
    records = run_sweep(grid, config)
    elapsed = time.perf_counter() - t0
    path = tmp_path_factory.mktemp("desk") / "desk_sc.csv"
    write_records(records, path, grid, config)
    return records, path, elapsed


def _section_for(kind: ModelKind, gamma: float, gamma_index: int, beta: float,
                 root_seed: int, measure_periods: int = 2000):
    if kind is ModelKind.CNC:
        spec = ModelSpec.cnc_at(gamma, beta)
    else:
        spec = ModelSpec(kind=kind, gamma=gamma, beta=beta)
    seed = seed_for(root_seed, kind, gamma_index, 0, 0)
    config = IntegratorConfig(transient_periods=200,
                              measure_periods=measure_periods, seed=seed)
    return poincare_section(integrate(spec, config=config))


@pytest.fixture(scope="session")
def sc_sections_by_beta():
    """SC sections over the desk gamma grid at two length scales."""
    out = {}
    for beta in (1.0e-3, 0.0341):
        out[beta] = {
            gamma: _section_for(ModelKind.SC, gamma, gi, beta, root_seed=1000)
            for gi, gamma in enumerate(DESK_GAMMAS)
        }
    return out


@pytest.fixture(scope="session")
def cross_model_sections():
    """SC / noisy-classical sections over the desk gamma grid at beta=0.02."""
    beta = 0.02
    out = {}
    for kind in (ModelKind.SC, ModelKind.CNR, ModelKind.CNC):
        out[kind] = {
            gamma: _section_for(kind, gamma, gi, beta, root_seed=2000)
            for gi, gamma in enumerate(DESK_GAMMAS)
        }
    return out
