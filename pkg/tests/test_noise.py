"""Noise-stream contracts: moments, determinism, independence."""

from __future__ import annotations

import numpy as np
import pytest

from duffinglab.noise import (
    ComplexNoiseIncrement,
    NoiseStats,
    make_rng,
    sample_complex_increment,
    sample_unit_normals,
)


class TestSampleComplexIncrement:
    def test_zero_dt_gives_zero_increment(self):
        inc = sample_complex_increment(make_rng(0), 0.0)
        assert inc == ComplexNoiseIncrement(0.0, 0.0)

    def test_negative_dt_rejected(self):
        with pytest.raises(ValueError):
            sample_complex_increment(make_rng(0), -0.01)

    def test_component_variances_are_half_dt(self):
        rng = make_rng(12)
        dt = 0.04
        draws = np.array([(lambda inc: (inc.xi_r, inc.xi_i))(
            sample_complex_increment(rng, dt)) for _ in range(20000)])
        assert draws[:, 0].var() == pytest.approx(dt / 2, rel=0.05)
        assert draws[:, 1].var() == pytest.approx(dt / 2, rel=0.05)
        assert abs(np.mean(draws[:, 0] * draws[:, 1])) < 4 * dt / np.sqrt(20000)

    def test_moment_contract_medium_ensemble(self):
        rng = make_rng(5)
        dt = 0.01
        z = sample_unit_normals(rng, 100_000)
        stats = NoiseStats.from_complex_draws(z, dt)
        scale = np.sqrt(dt / 100_000)
        assert abs(stats.mean) < 4 * scale
        assert abs(stats.mean_sq) < 4 * np.sqrt(2) * dt / np.sqrt(100_000)
        assert stats.mean_abs_sq == pytest.approx(dt, abs=10 * dt / np.sqrt(100_000))


class TestDeterminism:
    def test_same_seed_same_stream(self):
        a = sample_unit_normals(make_rng(99), 64)
        b = sample_unit_normals(make_rng(99), 64)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        a = sample_unit_normals(make_rng(1), 64)
        b = sample_unit_normals(make_rng(2), 64)
        assert not np.array_equal(a, b)

    def test_spawn_key_partitions_stream(self):
        base = sample_unit_normals(make_rng(7), 64)
        child0 = sample_unit_normals(make_rng(7, spawn_key=(0,)), 64)
        child1 = sample_unit_normals(make_rng(7, spawn_key=(1,)), 64)
        assert not np.array_equal(base, child0)
        assert not np.array_equal(child0, child1)

    def test_unit_normals_shape(self):
        z = sample_unit_normals(make_rng(0), 10)
        assert z.shape == (10, 2)
        assert z.dtype == np.float64


class TestNoiseStats:
    def test_empty_stream(self):
        stats = NoiseStats.from_complex_draws(np.empty((0, 2)), 0.01)
        assert stats.count == 0 and stats.mean == 0j

    def test_real_flavor_has_no_imaginary_part(self):
        z = sample_unit_normals(make_rng(3), 1000)
        stats = NoiseStats.from_real_draws(z, 0.01)
        assert stats.flavor == "real"
        assert stats.mean.imag == 0.0
        assert stats.mean_abs_sq == pytest.approx(0.01, rel=0.2)

    def test_complex_counts_draws(self):
        z = sample_unit_normals(make_rng(3), 1234)
        stats = NoiseStats.from_complex_draws(z, 0.02)
        assert stats.count == 1234
        assert stats.flavor == "complex"
