r"""Largest Lyapunov exponent via the two-trajectory renormalization method.

A fiducial trajectory and a companion displaced by ``d0`` in the scaled
norm are advanced together.  For stochastic models both consume the
*same* noise realization, so the separation measures sensitivity to
initial conditions, not to the noise path.  Once per drive period the
separation :math:`d_i` is logged and the companion is pulled back to
distance ``d0`` along the current separation direction:

.. math:: \lambda = \frac{1}{n\tau} \sum_{i=1}^{n} \ln(d_i / d_0),
          \qquad \tau = T.

The first ``ALIGNMENT_RENORMS`` intervals after the transient are
excluded while the separation vector aligns with the leading direction.
Stochastic estimates average several independent noise realizations and
report the spread as a standard error.

Dynamical complexity is :math:`K = \lambda + \Gamma`; an attractor is
classified chaotic when :math:`K > 0.2` (strict).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels as _k
from .integrate import IntegratorConfig, _init_vector, _raise_for_status
from .models import DegeneratePairError, ModelSpec
from .noise import make_rng, sample_unit_normals

__all__ = [
    "D0_DEFAULT",
    "ALIGNMENT_RENORMS",
    "CHAOS_THRESHOLD",
    "NOISE_REPLICATES",
    "AttractorClass",
    "LyapunovEstimate",
    "ComplexityRecord",
    "lyapunov_wolf",
    "dynamical_complexity",
    "classify_attractor",
    "beta_break",
]

#: Initial and renormalized pair separation in the scaled norm.
D0_DEFAULT = 1.0e-8

#: Renormalization intervals discarded while the separation aligns.
ALIGNMENT_RENORMS = 50

#: K above which an attractor counts as chaotic (strict inequality).
CHAOS_THRESHOLD = 0.2

#: Independent noise realizations averaged for stochastic models.
NOISE_REPLICATES = 4

#: Minimum renormalization intervals in the average.
MIN_RENORMS = 100


class AttractorClass(str, Enum):
    CHAOTIC = "chaotic"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class LyapunovEstimate:
    """Largest-exponent estimate with its bookkeeping.

    ``stderr`` is the run-to-run spread over noise realizations (0 for
    the deterministic model, which admits exactly one realization).
    """

    lam: float
    stderr: float
    n_renorms: int
    d0: float

    def __post_init__(self) -> None:
        if self.n_renorms < MIN_RENORMS:
            raise ValueError(
                f"estimate needs >= {MIN_RENORMS} renormalizations, got {self.n_renorms}")
        if self.stderr < 0.0:
            raise ValueError("stderr must be >= 0")


@dataclass(frozen=True)
class ComplexityRecord:
    """Lyapunov exponent, complexity K = lambda + gamma, and the
    binary classification."""

    lam: float
    k: float
    attractor_class: AttractorClass

    @classmethod
    def from_lambda(cls, lam: float, gamma: float) -> "ComplexityRecord":
        k = dynamical_complexity(lam, gamma)
        return cls(lam=lam, k=k, attractor_class=classify_attractor(k))


def dynamical_complexity(lam: float, gamma: float) -> float:
    """K = lambda + gamma; zero for periodic orbits of this family."""
    return lam + gamma


def classify_attractor(k: float) -> AttractorClass:
    """Chaotic iff K > 0.2; the boundary itself counts as periodic."""
    return AttractorClass.CHAOTIC if k > CHAOS_THRESHOLD else AttractorClass.PERIODIC


def _wolf_single(spec: ModelSpec, config: IntegratorConfig, rep: int,
                 d0: float) -> float:
    """One noise realization of the two-trajectory estimate."""
    spp = config.steps_per_period(spec)
    dt = spec.period / spp
    kind_id = spec.kind.kernel_id
    scheme_id = config.scheme.kernel_id
    args = (dt, 0.0, spec.gamma, spec.g, spec.omega, spec.beta,
            spec.noise_mult)

    n_renorm_total = ALIGNMENT_RENORMS + config.measure_periods
    total_steps = (config.transient_periods + n_renorm_total) * spp
    if spec.kind.is_stochastic:
        rng = make_rng(config.seed, spawn_key=(rep,))
        z = sample_unit_normals(rng, total_steps)
    else:
        z = np.zeros((1, 2))

    fid = _init_vector(spec, None)
    n_trans_steps = config.transient_periods * spp
    status, done = _k.advance(kind_id, scheme_id, fid, 0, n_trans_steps, *args, z, 0)
    if status != _k.STATUS_OK:
        _raise_for_status(status, spec, done * dt)

    comp = fid.copy()
    comp[0] += d0 / spec.beta  # offset of exactly d0 in the scaled norm

    log_sum = 0.0
    step_cursor = n_trans_steps
    # Common-noise contract: both trajectories consume identical rows.
    consumed_fid: tuple[int, int] | None = None
    consumed_comp: tuple[int, int] | None = None
    for interval in range(n_renorm_total):
        status, done = _k.advance(kind_id, scheme_id, fid, step_cursor, spp,
                                  *args, z, step_cursor)
        consumed_fid = (step_cursor, spp)
        if status != _k.STATUS_OK:
            _raise_for_status(status, spec, (step_cursor + done) * dt)
        status, done = _k.advance(kind_id, scheme_id, comp, step_cursor, spp,
                                  *args, z, step_cursor)
        consumed_comp = (step_cursor, spp)
        if status != _k.STATUS_OK:
            _raise_for_status(status, spec, (step_cursor + done) * dt)
        assert consumed_fid == consumed_comp, "noise streams diverged"
        step_cursor += spp

        d = _k.pair_distance(kind_id, fid, comp, spec.beta)
        if d == 0.0:
            raise DegeneratePairError(
                f"companion collapsed onto fiducial at t = {step_cursor * dt:.6g}")
        if interval >= ALIGNMENT_RENORMS:
            log_sum += math.log(d / d0)
        comp = fid + (comp - fid) * (d0 / d)

    return log_sum / (config.measure_periods * spec.period)


def lyapunov_wolf(spec: ModelSpec, config: IntegratorConfig | None = None,
                  d0: float = D0_DEFAULT) -> LyapunovEstimate:
    """Largest Lyapunov exponent of ``spec`` under ``config``.

    Stochastic models average :data:`NOISE_REPLICATES` independent noise
    realizations (standard error from their spread); the deterministic
    model runs once with stderr 0.
    """
    config = config or IntegratorConfig(measure_periods=200)
    if config.measure_periods < MIN_RENORMS:
        raise ValueError(
            f"lyapunov_wolf needs measure_periods >= {MIN_RENORMS}, "
            f"got {config.measure_periods}")
    if d0 <= 0.0:
        raise ValueError("d0 must be > 0")

    n_reps = NOISE_REPLICATES if spec.kind.is_stochastic else 1
    lams = np.array([_wolf_single(spec, config, rep, d0) for rep in range(n_reps)])
    if n_reps > 1:
        stderr = float(lams.std(ddof=1) / math.sqrt(n_reps))
    else:
        stderr = 0.0
    return LyapunovEstimate(lam=float(lams.mean()), stderr=stderr,
                            n_renorms=config.measure_periods, d0=d0)


def beta_break(lambda_curve, lambda_classical: float, epsilon: float | None = None):
    """Smallest beta where the exponent departs from the classical value.

    ``lambda_curve`` maps beta to a :class:`LyapunovEstimate`, an
    (exponent, stderr) pair, or a bare exponent.  The departure threshold
    is ``epsilon`` when given, else 3 * max(stderr, 0.005) per point.
    Returns None when no grid point departs.
    """
    if not lambda_curve:
        raise ValueError("lambda_curve must be non-empty")
    betas = sorted(lambda_curve)
    if betas[0] > 1.0e-4:
        raise ValueError("lambda_curve must reach down to the nearly "
                         "classical scale (smallest beta <= 1e-4)")
    for beta in betas:
        entry = lambda_curve[beta]
        if isinstance(entry, LyapunovEstimate):
            lam, se = entry.lam, entry.stderr
        elif isinstance(entry, (tuple, list)):
            lam, se = float(entry[0]), float(entry[1])
        else:
            lam, se = float(entry), 0.0
        eps = epsilon if epsilon is not None else 3.0 * max(se, 0.005)
        if abs(lam - lambda_classical) > eps:
            return beta
    return None
