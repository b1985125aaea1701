"""Integrator contracts: determinism, strobe alignment, schemes, export."""

from __future__ import annotations

import math

import numpy as np
import pytest

from duffinglab.integrate import (
    TRAJECTORY_CSV_HEADER,
    IntegratorConfig,
    SamplingPlan,
    Scheme,
    integrate,
    step,
)
from duffinglab.models import (
    ModelKind,
    ModelSpec,
    NumericOverflowError,
    SpreadCollapseError,
    StateSC,
    StateXP,
    default_initial_state,
    observable_energy,
)
from duffinglab.noise import ComplexNoiseIncrement

T = 2.0 * math.pi


def spec(kind=ModelKind.C, gamma=0.1, beta=0.01, g=0.3):
    if kind is ModelKind.CNC:
        return ModelSpec.cnc_at(gamma, beta, g=g)
    return ModelSpec(kind=kind, gamma=gamma, beta=beta, g=g)


class TestConfig:
    def test_default_dt_is_thousandth_period(self):
        cfg = IntegratorConfig()
        assert cfg.steps_per_period(spec()) == 1000
        assert cfg.resolved_dt(spec()) == pytest.approx(T / 1000)

    def test_misaligned_dt_rejected(self):
        cfg = IntegratorConfig(dt=0.01)     # does not divide 2*pi
        with pytest.raises(ValueError, match="divide"):
            cfg.steps_per_period(spec())

    def test_nonpositive_lengths_rejected(self):
        with pytest.raises(ValueError):
            IntegratorConfig(measure_periods=0)
        with pytest.raises(ValueError):
            IntegratorConfig(transient_periods=-1)
        with pytest.raises(ValueError):
            IntegratorConfig(dt=-0.1)

    def test_dense_stride_must_divide_period_steps(self):
        with pytest.raises(ValueError):
            integrate(spec(), config=IntegratorConfig(measure_periods=1),
                      observers=SamplingPlan(dense_stride=3))


class TestStep:
    def test_fixed_point_is_stationary(self):
        s = spec(gamma=0.0, g=0.0)
        init = StateXP(1.0 / s.beta, 0.0)
        for dt in (0.1, 0.01, 1.0):
            out = step(s, init, 0.0, dt)
            assert out.x == init.x and out.p == pytest.approx(0.0, abs=1e-12)

    def test_euler_maruyama_matches_hand_step(self):
        s = spec(kind=ModelKind.CNR, gamma=0.25)
        init = StateXP(10.0, 3.0)
        out = step(s, init, 0.0, 0.01, noise=0.02)
        # dx = p dt + 2 sqrt(G) dxi = 3*0.01 + 1.0*0.02
        assert out.x == pytest.approx(10.0 + 0.03 + 0.02)

    def test_step_honors_time_argument(self):
        s = spec(gamma=0.0, g=0.3)
        out0 = step(s, StateXP(0.0, 0.0), 0.0, 0.001)
        out_half = step(s, StateXP(0.0, 0.0), math.pi, 0.001)
        assert out0.p == pytest.approx(+0.3 / s.beta * 0.001)
        assert out_half.p == pytest.approx(-0.3 / s.beta * 0.001)

    def test_deterministic_step_ignores_missing_noise(self):
        s = spec(kind=ModelKind.SC, gamma=0.1)
        init = default_initial_state(s)
        a = step(s, init, 0.0, 0.001)
        b = step(s, init, 0.0, 0.001, noise=ComplexNoiseIncrement(0.0, 0.0))
        assert a == b


class TestIntegrate:
    def test_strobe_count_matches_measure_periods(self):
        traj = integrate(spec(), config=IntegratorConfig(
            transient_periods=1, measure_periods=100))
        assert len(traj.strobe_indices) == 100

    def test_same_seed_bit_identical(self):
        cfg = IntegratorConfig(transient_periods=2, measure_periods=20, seed=42)
        s = spec(kind=ModelKind.SC, gamma=0.15, beta=0.02)
        t1 = integrate(s, config=cfg)
        t2 = integrate(s, config=cfg)
        assert np.array_equal(t1.states, t2.states)
        assert np.array_equal(t1.times, t2.times)

    def test_different_seed_differs_for_stochastic(self):
        s = spec(kind=ModelKind.SC, gamma=0.15, beta=0.02)
        t1 = integrate(s, config=IntegratorConfig(
            transient_periods=2, measure_periods=20, seed=1))
        t2 = integrate(s, config=IntegratorConfig(
            transient_periods=2, measure_periods=20, seed=2))
        assert not np.array_equal(t1.states, t2.states)

    def test_strobe_alignment(self):
        traj = integrate(spec(), config=IntegratorConfig(
            transient_periods=3, measure_periods=50))
        phases = np.mod(traj.strobe_times, T)
        err = np.minimum(phases, T - phases)
        assert err.max() < 1e-9 * T
        assert np.diff(traj.strobe_times) == pytest.approx(T, rel=1e-12)

    def test_times_strictly_increasing(self):
        traj = integrate(spec(), config=IntegratorConfig(
            transient_periods=1, measure_periods=10),
            observers=SamplingPlan(dense_stride=100))
        assert (np.diff(traj.times) > 0).all()

    def test_dense_stride_row_count(self):
        traj = integrate(spec(), config=IntegratorConfig(
            transient_periods=1, measure_periods=4),
            observers=SamplingPlan(dense_stride=250))
        assert len(traj.times) == 4 * (1000 // 250)
        assert len(traj.strobe_indices) == 4

    def test_init_type_checked(self):
        with pytest.raises(ValueError):
            integrate(spec(kind=ModelKind.SC), init=StateXP(1.0, 0.0),
                      config=IntegratorConfig(transient_periods=1,
                                              measure_periods=1))

    def test_spread_collapse_reports_time(self):
        s = spec(kind=ModelKind.SC, gamma=0.138)
        cfg = IntegratorConfig(dt=T / 2, transient_periods=1, measure_periods=1)
        with pytest.raises(SpreadCollapseError, match="t ="):
            integrate(s, config=cfg)

    def test_overflow_reports_time(self):
        s = spec(kind=ModelKind.C, gamma=0.0, g=0.0)
        cfg = IntegratorConfig(dt=T / 4, transient_periods=5, measure_periods=1)
        with pytest.raises(NumericOverflowError, match="t ="):
            integrate(s, init=StateXP(5.0 / s.beta, 0.0), config=cfg)

    def test_noise_stats_recorded_for_stochastic(self):
        s = spec(kind=ModelKind.SC, gamma=0.15, beta=0.02)
        traj = integrate(s, config=IntegratorConfig(
            transient_periods=5, measure_periods=50, seed=0))
        assert traj.noise_stats is not None
        assert traj.noise_stats.count == 55 * 1000
        dt = T / 1000
        assert traj.noise_stats.mean_abs_sq == pytest.approx(dt, rel=0.02)
        assert traj.noise_stats.flavor == "complex"

    def test_deterministic_run_has_no_noise_stats(self):
        traj = integrate(spec(), config=IntegratorConfig(
            transient_periods=1, measure_periods=5))
        assert traj.noise_stats is None
        assert traj.n_noise_draws == 0

    def test_cnr_stats_are_real_flavored(self):
        s = spec(kind=ModelKind.CNR, gamma=0.15)
        traj = integrate(s, config=IntegratorConfig(
            transient_periods=1, measure_periods=5, seed=0))
        assert traj.noise_stats.flavor == "real"


class TestSchemeConvergence:
    def _final_scaled_x(self, scheme: Scheme, spp: int) -> float:
        s = spec(kind=ModelKind.C, gamma=0.3, beta=0.01)
        cfg = IntegratorConfig(dt=T / spp, transient_periods=0,
                               measure_periods=5, scheme=scheme)
        traj = integrate(s, config=cfg)
        return traj.states[traj.strobe_indices[-1], 0] * s.beta

    @pytest.mark.parametrize("scheme,expected_order", [
        (Scheme.EULER_MARUYAMA, 1.0),
        (Scheme.STOCHASTIC_HEUN, 2.0),
    ])
    def test_deterministic_convergence_order(self, scheme, expected_order):
        x1 = self._final_scaled_x(scheme, 250)
        x2 = self._final_scaled_x(scheme, 500)
        x3 = self._final_scaled_x(scheme, 1000)
        order = math.log2(abs(x1 - x2) / abs(x2 - x3))
        assert order == pytest.approx(expected_order, abs=0.3)

    def test_schemes_agree_in_dt_limit(self):
        a = self._final_scaled_x(Scheme.EULER_MARUYAMA, 32000)
        b = self._final_scaled_x(Scheme.STOCHASTIC_HEUN, 32000)
        assert a == pytest.approx(b, abs=5e-4)


class TestTrajectoryExport:
    def test_csv_layout_classical(self, tmp_path):
        s = spec()
        traj = integrate(s, config=IntegratorConfig(
            transient_periods=1, measure_periods=3))
        path = tmp_path / "t.csv"
        traj.to_csv(path, header_comment="case: layout\nseed=0")
        lines = path.read_text().splitlines()
        assert lines[0] == "# case: layout"
        assert lines[1] == "# seed=0"
        assert lines[2] == TRAJECTORY_CSV_HEADER
        cells = lines[3].split(",")
        assert len(cells) == 9
        assert cells[3] == "" and cells[7] == ""      # no spread fields
        # energy column is consistent with the state columns
        e = observable_energy(StateXP(float(cells[1]), float(cells[2])), s)
        assert float(cells[8]) == pytest.approx(e, rel=1e-12)

    def test_csv_layout_spread_models(self, tmp_path):
        s = spec(kind=ModelKind.SC, gamma=0.15, beta=0.02)
        traj = integrate(s, config=IntegratorConfig(
            transient_periods=1, measure_periods=2, seed=3))
        path = tmp_path / "t.csv"
        traj.to_csv(path)
        row = path.read_text().splitlines()[1].split(",")
        assert row[3] != "" and row[4] != ""          # rho, pi present
        assert row[5] == "" and row[6] == "" and row[7] == ""

    def test_csv_has_17_digit_precision(self, tmp_path):
        traj = integrate(spec(), config=IntegratorConfig(
            transient_periods=1, measure_periods=1))
        path = tmp_path / "t.csv"
        traj.to_csv(path)
        row = path.read_text().splitlines()[1].split(",")
        assert float(row[1]) == traj.states[0, 0]     # lossless round trip

    def test_final_state_round_trip(self):
        s = spec(kind=ModelKind.SC, gamma=0.15, beta=0.02)
        traj = integrate(s, config=IntegratorConfig(
            transient_periods=1, measure_periods=2, seed=3))
        final = traj.final_state()
        assert isinstance(final, StateSC)
        assert final.as_vector()[2] == traj.states[-1, 2]


class TestClassicalOverlapAtTinyBeta:
    def test_sc_matches_classical_cloud(self):
        gamma = 0.138
        cfg = IntegratorConfig(transient_periods=100, measure_periods=1000, seed=5)
        t_sc = integrate(spec(kind=ModelKind.SC, gamma=gamma, beta=1e-5),
                         config=cfg)
        t_c = integrate(spec(kind=ModelKind.C, gamma=gamma, beta=1e-5),
                        config=cfg)
        xy_sc = t_sc.scaled_xp()
        xy_c = t_c.scaled_xp()
        for col in range(2):
            assert xy_sc[:, col].mean() == pytest.approx(
                xy_c[:, col].mean(), abs=0.2)
            assert xy_sc[:, col].std() == pytest.approx(
                xy_c[:, col].std(), abs=0.2)
