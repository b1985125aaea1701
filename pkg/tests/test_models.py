"""Model-layer oracles and invariants."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from duffinglab.models import (
    BETA_FIXED,
    DuffingError,
    ModelKind,
    ModelSpec,
    NumericOverflowError,
    OffManifoldError,
    SpreadCollapseError,
    StateSC,
    StateSC5,
    StateXP,
    classical_rhs,
    default_initial_state,
    lift_4to5,
    noisy_classical_diffusion,
    observable_energy,
    potential_surface,
    reduce_5to4,
    sc5_diffusion,
    sc5_drift,
    sc_diffusion,
    sc_drift,
    state_from_vector,
    uncertainty_defect,
)

ROOT2INV = 2.0 ** -0.5


def spec(kind=ModelKind.C, gamma=0.1, beta=0.01, g=0.3, omega=1.0):
    if kind is ModelKind.CNC:
        return ModelSpec.cnc_at(gamma, beta, g=g, omega=omega)
    return ModelSpec(kind=kind, gamma=gamma, beta=beta, g=g, omega=omega)


# ---------------------------------------------------------------- ModelSpec

class TestModelSpec:
    def test_rejects_nonpositive_beta(self):
        with pytest.raises(ValueError):
            ModelSpec(kind=ModelKind.C, gamma=0.1, beta=0.0)

    def test_rejects_negative_gamma(self):
        with pytest.raises(ValueError):
            ModelSpec(kind=ModelKind.C, gamma=-0.1, beta=0.01)

    def test_cnc_is_pinned_at_fixed_beta(self):
        s = ModelSpec.cnc_at(0.12, 0.02)
        assert s.kind is ModelKind.CNC
        assert s.beta == BETA_FIXED
        assert s.noise_mult == pytest.approx(0.02 / BETA_FIXED)

    def test_cnc_kind_requires_constructor(self):
        with pytest.raises(ValueError):
            ModelSpec(kind=ModelKind.CNC, gamma=0.1, beta=0.02)

    def test_period(self):
        assert spec(omega=1.0).period == pytest.approx(2.0 * math.pi)
        assert spec(omega=2.0).period == pytest.approx(math.pi)

    def test_with_gamma(self):
        s = spec(gamma=0.1).with_gamma(0.2)
        assert s.gamma == 0.2 and s.beta == 0.01


# ------------------------------------------------------------------- states

class TestStates:
    def test_sc_requires_positive_rho(self):
        with pytest.raises(ValueError):
            StateSC(0.0, 0.0, 0.0, 0.0)

    def test_sc5_requires_physical_covariance(self):
        with pytest.raises(ValueError):
            StateSC5(0.0, 0.0, 1.0, 1.0, 1.5)   # mu*kappa - r^2 < 0
        with pytest.raises(ValueError):
            StateSC5(0.0, 0.0, -1.0, 1.0, 0.0)

    def test_states_require_finite_fields(self):
        with pytest.raises(ValueError):
            StateXP(math.nan, 0.0)
        with pytest.raises(ValueError):
            StateSC(0.0, math.inf, 1.0, 0.0)

    def test_vector_round_trip(self):
        s = StateSC5(1.0, -2.0, 0.5, 0.7, 0.25)
        v = s.as_vector()
        assert state_from_vector(ModelKind.SC5, v) == s
        xp = StateXP(3.0, 4.0)
        assert state_from_vector(ModelKind.C, xp.as_vector()) == xp


# ----------------------------------------------------------- classical_rhs

class TestClassicalRhs:
    def test_origin_drive_only(self):
        d = classical_rhs(StateXP(0.0, 0.0), 0.0, spec(gamma=0.1, beta=0.01))
        assert (d.x, d.p) == (0.0, 30.0)

    def test_well_fixed_point(self):
        s = spec(g=0.0)
        d = classical_rhs(StateXP(1.0 / s.beta, 0.0), 0.0, s)
        assert d.x == 0.0 and d.p == pytest.approx(0.0, abs=1e-12)

    def test_damping_only(self):
        s = spec(gamma=0.1, g=0.0)
        d = classical_rhs(StateXP(1.0 / s.beta, 1.0), 0.0, s)
        assert d.x == 1.0 and d.p == pytest.approx(-0.2)

    @given(st.floats(-5.0, 5.0), st.floats(-5.0, 5.0), st.floats(0.0, 50.0))
    def test_drive_phase_symmetry(self, x, p, t):
        s = spec(gamma=0.15, beta=0.02)
        st1 = StateXP(x / s.beta, p / s.beta)
        d_plus = classical_rhs(st1, t, s)
        d_minus = classical_rhs(st1, -t, s)
        assert d_plus.x == d_minus.x and d_plus.p == d_minus.p

    def test_nonfinite_state_rejected(self):
        with pytest.raises(ValueError):
            classical_rhs(StateXP(1.0, math.nan), 0.0, spec())


# ---------------------------------------------------------------- sc_drift

class TestScDrift:
    def test_coherent_point_undriven(self):
        s = spec(kind=ModelKind.SC, gamma=0.0, g=0.0)
        d = sc_drift(StateSC(0.0, 0.0, ROOT2INV, 0.0), 0.0, s)
        assert d.x == 0.0 and d.p == pytest.approx(0.0, abs=1e-12)
        assert d.rho == pytest.approx(0.0, abs=1e-15)
        assert d.pi == pytest.approx(math.sqrt(2.0))

    def test_damped_coherent_rho_rate(self):
        s = spec(kind=ModelKind.SC, gamma=0.2, g=0.0)
        d = sc_drift(StateSC(3.0, 1.0, ROOT2INV, 0.0), 0.0, s)
        assert d.rho == pytest.approx(0.2 * ROOT2INV)

    @given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(0.0, 20.0))
    def test_classical_limit_matches_classical_rhs(self, xs, ps, t):
        beta = 1.0e-8
        s_sc = spec(kind=ModelKind.SC, gamma=0.13, beta=beta)
        s_c = spec(kind=ModelKind.C, gamma=0.13, beta=beta)
        x, p = xs / beta, ps / beta
        d_sc = sc_drift(StateSC(x, p, ROOT2INV, 0.0), t, s_sc)
        d_c = classical_rhs(StateXP(x, p), t, s_c)
        scale = max(abs(d_c.x), abs(d_c.p), 1.0)
        assert abs(d_sc.x - d_c.x) <= 1e-12 * scale
        assert abs(d_sc.p - d_c.p) <= 1e-12 * scale


# ------------------------------------------------------------ sc_diffusion

class TestScDiffusion:
    def test_coherent_point_is_noiseless(self):
        coeff = sc_diffusion(StateSC(0.0, 0.0, ROOT2INV, 0.0),
                             spec(kind=ModelKind.SC, gamma=0.1))
        for pair in coeff.pairs.values():
            assert pair[0] == pytest.approx(0.0, abs=1e-15)
            assert pair[1] == pytest.approx(0.0, abs=1e-15)

    def test_hand_case(self):
        coeff = sc_diffusion(StateSC(0.0, 0.0, 1.0, 0.0),
                             spec(kind=ModelKind.SC, gamma=0.25))
        assert coeff.pairs["x"] == pytest.approx((0.5, 0.0))
        assert coeff.pairs["p"] == pytest.approx((0.0, -0.25))
        assert coeff.pairs["rho"] == (0.0, 0.0)
        assert coeff.pairs["pi"] == (0.0, 0.0)

    def test_zero_damping_is_deterministic(self):
        coeff = sc_diffusion(StateSC(1.0, 2.0, 0.9, 0.3),
                             spec(kind=ModelKind.SC, gamma=0.0))
        assert all(pair == (0.0, 0.0) for pair in coeff.pairs.values())

    def test_cnc_multiplier_scales_all_coefficients(self):
        base = sc_diffusion(StateSC(0.0, 0.0, 1.0, 0.2),
                            spec(kind=ModelKind.SC, gamma=0.25, beta=BETA_FIXED))
        amp = sc_diffusion(StateSC(0.0, 0.0, 1.0, 0.2),
                           ModelSpec.cnc_at(0.25, 0.02))
        mult = 0.02 / BETA_FIXED
        for key in base.pairs:
            assert amp.pairs[key][0] == pytest.approx(mult * base.pairs[key][0])
            assert amp.pairs[key][1] == pytest.approx(mult * base.pairs[key][1])


# ------------------------------------------------------------- 5-var model

class TestSc5:
    def test_drift_hand_case(self):
        s = spec(kind=ModelKind.SC5, gamma=0.0, g=0.0)
        d = sc5_drift(StateSC5(0.0, 0.0, 0.5, 0.5, 0.0), 0.0, s)
        assert d.mu == pytest.approx(0.0, abs=1e-15)
        assert d.kappa == pytest.approx(0.0, abs=1e-15)
        assert d.r == pytest.approx(1.0)

    def test_diffusion_vanishes_at_coherent_widths(self):
        coeff = sc5_diffusion(StateSC5(0.0, 0.0, 0.5, 0.5, 0.0),
                              spec(kind=ModelKind.SC5, gamma=0.25))
        assert coeff.pairs["x"] == pytest.approx((0.0, 0.0))
        assert coeff.pairs["p"] == pytest.approx((0.0, 0.0))

    def test_diffusion_x_matches_reduced_model(self):
        # the lift of any 4-var state must see identical x-noise in both
        # formulations: 2 sqrt(G) (mu - 1/2, -R) == 2 sqrt(G) (rho^2 - 1/2, -rho Pi)
        four = StateSC(1.0, -0.5, 0.8, 0.4)
        five = lift_4to5(four)
        s4 = spec(kind=ModelKind.SC, gamma=0.17)
        s5 = spec(kind=ModelKind.SC5, gamma=0.17)
        c4 = sc_diffusion(four, s4).pairs
        c5 = sc5_diffusion(five, s5).pairs
        assert c5["x"] == pytest.approx(c4["x"], rel=1e-12)
        assert c5["p"] == pytest.approx(c4["p"], rel=1e-12)

    def test_on_manifold_defect_drift_is_zero(self):
        # d(mu kappa - r^2)/dt = mu' k + mu k' - 2 r r' vanishes on the
        # constraint manifold for the deterministic part
        four = StateSC(2.0, 1.0, 0.9, -0.3)
        five = lift_4to5(four)
        s5 = spec(kind=ModelKind.SC5, gamma=0.21)
        d = sc5_drift(five, 0.3, s5)
        ddefect = (d.mu * five.kappa + five.mu * d.kappa
                   - 2.0 * five.r * d.r)
        assert ddefect == pytest.approx(0.0, abs=1e-12)


# --------------------------------------------------- noisy classical model

class TestNoisyClassical:
    def test_amplitude(self):
        coeff = noisy_classical_diffusion(spec(kind=ModelKind.CNR, gamma=0.25))
        assert coeff.pairs["x"] == (1.0, 0.0)
        assert coeff.pairs["p"] == (1.0, 0.0)

    def test_zero_damping_is_deterministic(self):
        coeff = noisy_classical_diffusion(spec(kind=ModelKind.CNR, gamma=0.0))
        assert coeff.pairs["x"] == (0.0, 0.0)
        assert coeff.pairs["p"] == (0.0, 0.0)

    def test_shared_increment_structure(self):
        # one real increment drives both components: the second slot
        # (imaginary channel) must be zero on x and p alike
        coeff = noisy_classical_diffusion(spec(kind=ModelKind.CNR, gamma=0.17))
        assert coeff.pairs["x"][1] == 0.0
        assert coeff.pairs["p"][1] == 0.0
        assert coeff.pairs["x"][0] == coeff.pairs["p"][0]


# -------------------------------------------------------------- lift/reduce

valid_sc_states = st.builds(
    StateSC,
    x=st.floats(-1.0e4, 1.0e4),
    p=st.floats(-1.0e4, 1.0e4),
    rho=st.floats(0.05, 20.0),
    pi=st.floats(-20.0, 20.0),
)


class TestLiftReduce:
    def test_reduce_hand_cases(self):
        r = reduce_5to4(StateSC5(1.0, 2.0, 0.5, 0.5, 0.0))
        assert (r.rho, r.pi) == (pytest.approx(ROOT2INV), pytest.approx(0.0))
        r = reduce_5to4(StateSC5(1.0, 2.0, 1.0, 0.5, 0.5))
        assert (r.rho, r.pi) == (pytest.approx(1.0), pytest.approx(0.5))

    def test_lift_hand_cases(self):
        f = lift_4to5(StateSC(1.0, 2.0, ROOT2INV, 0.0))
        assert (f.mu, f.kappa, f.r) == (pytest.approx(0.5), pytest.approx(0.5),
                                        pytest.approx(0.0))
        f = lift_4to5(StateSC(1.0, 2.0, 1.0, 0.5))
        assert (f.mu, f.kappa, f.r) == (pytest.approx(1.0), pytest.approx(0.5),
                                        pytest.approx(0.5))

    def test_reduce_off_manifold_rejected(self):
        with pytest.raises(OffManifoldError):
            reduce_5to4(StateSC5(0.0, 0.0, 1.0, 1.0, 0.0))

    def test_reduce_tolerance_is_configurable(self):
        s = StateSC5(0.0, 0.0, 1.0, 0.2500002, 0.0)   # defect 2e-7
        reduce_5to4(s)                                 # default tol 1e-6 passes
        with pytest.raises(OffManifoldError):
            reduce_5to4(s, tol_constraint=1e-8)

    @given(valid_sc_states)
    def test_round_trip_identity(self, s):
        back = reduce_5to4(lift_4to5(s))
        for name in ("x", "p", "rho", "pi"):
            a, b = getattr(s, name), getattr(back, name)
            assert abs(a - b) <= 1e-12 * max(abs(a), 1.0)

    @given(valid_sc_states)
    def test_lift_lands_on_manifold(self, s):
        defect = uncertainty_defect(lift_4to5(s))
        assert abs(defect) <= 8.0 * np.finfo(float).eps * max(
            lift_4to5(s).mu * lift_4to5(s).kappa, 0.25)


# ------------------------------------------------------------- observables

class TestObservables:
    def test_defect_hand_cases(self):
        assert uncertainty_defect(StateSC5(0, 0, 0.5, 0.5, 0.0)) == 0.0
        assert uncertainty_defect(StateSC5(0, 0, 1.0, 1.0, 0.0)) == 0.75

    def test_energy_hand_cases(self):
        s = spec(beta=0.05)
        assert observable_energy(StateXP(0.0, 0.0), s) == 0.0
        assert observable_energy(StateXP(1 / 0.05, 0.0), s) == pytest.approx(-0.25)
        assert observable_energy(StateXP(0.0, 1 / 0.05), s) == pytest.approx(0.5)

    def test_energy_accepts_larger_states(self):
        s = spec(kind=ModelKind.SC, beta=0.05)
        assert observable_energy(StateSC(0.0, 1 / 0.05, 1.0, 0.0),
                                 s) == pytest.approx(0.5)

    def test_potential_hand_cases(self):
        s = spec(kind=ModelKind.SC, g=0.0)
        assert potential_surface(0.0, ROOT2INV, 0.0, s) == pytest.approx(0.0, abs=1e-14)
        assert potential_surface(0.0, 1.0, 0.0, s) == pytest.approx(-0.375)

    def test_potential_x_symmetry_undriven(self):
        s = spec(kind=ModelKind.SC, g=0.0)
        eps = 1e-6
        left = potential_surface(-eps, 1.0, 0.0, s)
        right = potential_surface(eps, 1.0, 0.0, s)
        assert left == pytest.approx(right, rel=1e-9)

    def test_potential_rejects_nonpositive_rho(self):
        with pytest.raises(SpreadCollapseError):
            potential_surface(0.0, 0.0, 0.0, spec(kind=ModelKind.SC))


# ----------------------------------------------------------- initial state

class TestDefaultInitialState:
    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_starts_in_plus_well_at_minimum_uncertainty(self, kind):
        s = spec(kind=kind, beta=0.02)
        init = default_initial_state(s)
        assert init.x == pytest.approx(1.0 / s.beta)
        assert init.p == 0.0
        if kind in (ModelKind.SC, ModelKind.CNC):
            assert init.rho == pytest.approx(ROOT2INV)
            assert init.pi == 0.0
        if kind is ModelKind.SC5:
            assert abs(uncertainty_defect(init)) < 1e-15

    def test_error_hierarchy(self):
        assert issubclass(SpreadCollapseError, DuffingError)
        assert issubclass(NumericOverflowError, DuffingError)
        assert issubclass(OffManifoldError, DuffingError)
