r"""Fixed-step stochastic integration and stroboscopic sampling.

Two schemes are provided:

``EULER_MARUYAMA``
    :math:`s' = s + f(s,t)\,dt + G(s)\,\Delta W`.

``STOCHASTIC_HEUN``
    Predictor :math:`\bar s = s + f(s,t)\,dt + G(s)\,\Delta W`, then
    corrector :math:`s' = s + \tfrac12(f(s,t) + f(\bar s, t+dt))\,dt +
    G(s)\,\Delta W` — drift-averaged, diffusion kept at the start state
    (the noise is multiplicative only through the spread coordinates, so
    this stays an Ito discretization).

The timestep always divides the drive period exactly
(``dt = T / steps_per_period``), so stroboscopic samples land on integer
periods without accumulating phase error.  Integration is a pure
function of (spec, init, config): identical inputs give bit-identical
trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import _kernels as _k
from .models import (
    ModelKind,
    ModelSpec,
    NumericOverflowError,
    SpreadCollapseError,
    StateSC,
    StateSC5,
    StateXP,
    default_initial_state,
    state_from_vector,
)
from .noise import ComplexNoiseIncrement, NoiseStats, make_rng, sample_unit_normals

__all__ = [
    "Scheme",
    "IntegratorConfig",
    "SamplingPlan",
    "Trajectory",
    "step",
    "integrate",
    "TRAJECTORY_CSV_HEADER",
]


class Scheme(str, Enum):
    EULER_MARUYAMA = "euler_maruyama"
    STOCHASTIC_HEUN = "stochastic_heun"

    @property
    def kernel_id(self) -> int:
        return {Scheme.EULER_MARUYAMA: _k.SCHEME_EM,
                Scheme.STOCHASTIC_HEUN: _k.SCHEME_HEUN}[self]


@dataclass(frozen=True)
class IntegratorConfig:
    """Timestep, run lengths, seed and scheme for one integration.

    ``dt`` defaults to one thousandth of the model's drive period; it
    must divide the period to within 1e-12 relative error so strobes
    stay aligned.
    """

    dt: float | None = None
    transient_periods: int = 200
    measure_periods: int = 2000
    seed: int = 0
    scheme: Scheme = Scheme.EULER_MARUYAMA

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.transient_periods < 0:
            raise ValueError("transient_periods must be >= 0")
        if self.measure_periods < 1:
            raise ValueError("measure_periods must be >= 1")

    def steps_per_period(self, spec: ModelSpec) -> int:
        """Resolve dt against the drive period; error if it misaligns."""
        period = spec.period
        if self.dt is None:
            return 1000
        spp = round(period / self.dt)
        if spp < 1 or abs(spp * self.dt - period) > 1.0e-12 * period:
            raise ValueError(
                f"dt={self.dt} does not divide the drive period {period} "
                "to within 1e-12 relative error")
        return spp

    def resolved_dt(self, spec: ModelSpec) -> float:
        return spec.period / self.steps_per_period(spec)

    def with_seed(self, seed: int) -> "IntegratorConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class SamplingPlan:
    """What to record beyond the mandatory stroboscopic samples.

    ``dense_stride`` > 0 records the full state every ``dense_stride``
    steps during the measurement window (the stride must divide the
    steps per period); 0 records strobe samples only.
    """

    dense_stride: int = 0

    def __post_init__(self) -> None:
        if self.dense_stride < 0:
            raise ValueError("dense_stride must be >= 0")


@dataclass(frozen=True)
class Trajectory:
    """Recorded samples of one integration.

    ``states`` rows follow the 5-slot layout of the kernel module;
    ``strobe_indices`` points at the rows that fall on integer drive
    periods (one per measured period).  ``noise_stats`` summarizes the
    noise stream actually consumed, and is None for the deterministic
    model.
    """

    spec: ModelSpec
    times: np.ndarray
    states: np.ndarray
    strobe_indices: np.ndarray
    scheme: Scheme
    dt: float
    seed: int
    transient_periods: int
    noise_stats: NoiseStats | None = None
    n_noise_draws: int = 0

    @property
    def strobe_states(self) -> np.ndarray:
        return self.states[self.strobe_indices]

    @property
    def strobe_times(self) -> np.ndarray:
        return self.times[self.strobe_indices]

    def scaled_xp(self, strobe_only: bool = True) -> np.ndarray:
        """(n, 2) array of (x*beta, p*beta)."""
        rows = self.strobe_states if strobe_only else self.states
        return rows[:, :2] * self.spec.beta

    def energy(self, strobe_only: bool = False) -> np.ndarray:
        """Scaled centroid energy along the trajectory."""
        rows = self.strobe_states if strobe_only else self.states
        b2 = self.spec.beta ** 2
        x = rows[:, 0]
        p = rows[:, 1]
        return b2 * (p * p / 2.0 + b2 * x ** 4 / 4.0 - x * x / 2.0)

    def defect(self, strobe_only: bool = False) -> np.ndarray:
        """Uncertainty defect mu*kappa - r^2 - 1/4 (5-variable runs only)."""
        if self.spec.kind is not ModelKind.SC5:
            raise ValueError("defect is defined for the 5-variable model only")
        rows = self.strobe_states if strobe_only else self.states
        return rows[:, 2] * rows[:, 3] - rows[:, 4] ** 2 - 0.25

    def final_state(self):
        return state_from_vector(self.spec.kind, self.states[-1])

    def to_csv(self, path, header_comment: str | None = None) -> None:
        write_trajectory_csv(self, path, header_comment=header_comment)


TRAJECTORY_CSV_HEADER = "t,x,p,rho,pi,mu,kappa,r,energy"


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_trajectory_csv(traj: Trajectory, path, header_comment: str | None = None) -> None:
    """CSV export: one row per recorded sample, absent fields left empty."""
    kind = traj.spec.kind
    energy = traj.energy(strobe_only=False)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(TRAJECTORY_CSV_HEADER + "\n")
        for i in range(len(traj.times)):
            row = traj.states[i]
            cells = [_fmt(traj.times[i]), _fmt(row[0]), _fmt(row[1])]
            if kind in (ModelKind.SC, ModelKind.CNC):
                cells += [_fmt(row[2]), _fmt(row[3]), "", "", ""]
            elif kind is ModelKind.SC5:
                cells += ["", "", _fmt(row[2]), _fmt(row[3]), _fmt(row[4])]
            else:
                cells += ["", "", "", "", ""]
            cells.append(_fmt(energy[i]))
            fh.write(",".join(cells) + "\n")


def _raise_for_status(status: int, spec: ModelSpec, t: float):
    if status == _k.STATUS_SPREAD_COLLAPSE:
        raise SpreadCollapseError(
            f"{spec.kind.value} spread collapsed (rho < {_k.RHO_FLOOR}) at t = {t:.6g}")
    if status == _k.STATUS_OVERFLOW:
        raise NumericOverflowError(
            f"{spec.kind.value} state left the trust region (|component| > "
            f"{_k.COMPONENT_CEIL:g}) at t = {t:.6g}")


def _init_vector(spec: ModelSpec, init) -> np.ndarray:
    state = default_initial_state(spec) if init is None else init
    expected = {ModelKind.C: StateXP, ModelKind.CNR: StateXP,
                ModelKind.CNC: StateSC, ModelKind.SC: StateSC,
                ModelKind.SC5: StateSC5}[spec.kind]
    if not isinstance(state, expected):
        raise ValueError(f"kind {spec.kind.value} needs a {expected.__name__} "
                         f"initial state, got {type(state).__name__}")
    return state.as_vector()


def step(spec: ModelSpec, state, t: float, dt: float, noise=None,
         scheme: Scheme = Scheme.EULER_MARUYAMA):
    """Advance a single step and return the new state object.

    ``noise`` is a :class:`ComplexNoiseIncrement` for the complex-noise
    models, a plain float (the shared real increment) for CNR, and
    ignored for the deterministic model.  Delegates to the same compiled
    advancer the bulk integrator uses.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    vec = state.as_vector()
    z = np.zeros((1, 2))
    if spec.kind is ModelKind.CNR:
        w = 0.0 if noise is None else float(noise)
        z[0, 0] = w / math.sqrt(dt)
    elif spec.kind.has_spread:
        if noise is None:
            noise = ComplexNoiseIncrement(0.0, 0.0)
        scale = math.sqrt(dt / 2.0)
        z[0, 0] = noise.xi_r / scale
        z[0, 1] = noise.xi_i / scale
    status, _ = _k.advance(spec.kind.kernel_id, Scheme(scheme).kernel_id, vec,
                           0, 1, dt, t, spec.gamma, spec.g, spec.omega,
                           spec.beta, spec.noise_mult, z, 0)
    _raise_for_status(status, spec, t + dt)
    return state_from_vector(spec.kind, vec)


def integrate(spec: ModelSpec, init=None, config: IntegratorConfig | None = None,
              observers: SamplingPlan | None = None) -> Trajectory:
    """Run transient + measurement and collect samples.

    Discards ``transient_periods`` drive periods, then records one strobe
    sample at the end of each of ``measure_periods`` periods (plus dense
    rows when the sampling plan requests them).  Raises on singularity or
    overflow with the failure time in the message.
    """
    config = config or IntegratorConfig()
    plan = observers or SamplingPlan()
    spp = config.steps_per_period(spec)
    dt = spec.period / spp
    stride = plan.dense_stride
    if stride and spp % stride != 0:
        raise ValueError(f"dense_stride {stride} must divide steps per period {spp}")

    kind_id = spec.kind.kernel_id
    scheme_id = config.scheme.kernel_id
    n_trans_steps = config.transient_periods * spp
    n_meas_steps = config.measure_periods * spp
    total_steps = n_trans_steps + n_meas_steps

    if spec.kind.is_stochastic:
        rng = make_rng(config.seed)
        z = sample_unit_normals(rng, total_steps)
    else:
        z = np.zeros((1, 2))

    vec = _init_vector(spec, init)
    args = (dt, 0.0, spec.gamma, spec.g, spec.omega, spec.beta,
            spec.noise_mult)

    status, done = _k.advance(kind_id, scheme_id, vec, 0, n_trans_steps, *args, z, 0)
    if status != _k.STATUS_OK:
        _raise_for_status(status, spec, done * dt)

    chunk = stride if stride else spp
    n_chunks = n_meas_steps // chunk
    rec_times = np.empty(n_chunks)
    rec_states = np.empty((n_chunks, 5))
    strobe_rows = []
    step_cursor = n_trans_steps
    for ci in range(n_chunks):
        status, done = _k.advance(kind_id, scheme_id, vec, step_cursor, chunk,
                                  *args, z, step_cursor)
        if status != _k.STATUS_OK:
            _raise_for_status(status, spec, (step_cursor + done) * dt)
        step_cursor += chunk
        rec_times[ci] = step_cursor * dt
        rec_states[ci] = vec
        if step_cursor % spp == 0:
            strobe_rows.append(ci)

    if spec.kind.is_stochastic:
        if spec.kind is ModelKind.CNR:
            stats = NoiseStats.from_real_draws(z[:total_steps], dt)
        else:
            stats = NoiseStats.from_complex_draws(z[:total_steps], dt)
        n_draws = total_steps
    else:
        stats = None
        n_draws = 0

    return Trajectory(spec=spec, times=rec_times, states=rec_states,
                      strobe_indices=np.asarray(strobe_rows, dtype=np.int64),
                      scheme=config.scheme, dt=dt, seed=config.seed,
                      transient_periods=config.transient_periods,
                      noise_stats=stats, n_noise_draws=n_draws)
