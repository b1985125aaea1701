r"""Model definitions for the dissipative Duffing oscillator family.

The laboratory treats five related dynamical models of a driven, damped
particle in the double-well quartic potential, written in dimensionless
units with length-scale parameter :math:`\beta`:

``C``
    Classical deterministic oscillator,

    .. math:: \ddot x + 2\Gamma\dot x + \beta^2 x^3 - x = (g/\beta)\cos\Omega t.

``CNR``
    Classical oscillator with an additive real noise term
    :math:`2\sqrt\Gamma\,d\xi` applied to *both* the position and momentum
    equations, with one shared real Wiener increment per step
    (:math:`\operatorname{Var} d\xi = dt`).

``SC``
    Semiclassical Gaussian-wavepacket model carrying centroid
    :math:`(x, p)` and spread coordinates :math:`(\rho, \Pi)`:

    .. math::

        dx &= p\,dt + 2\sqrt\Gamma\big((\rho^2 - \tfrac12)\,d\xi_R
              - \rho\Pi\,d\xi_I\big),\\
        dp &= \big(-\beta^2 x^3 + (1 - 3\beta^2\rho^2)x - 2\Gamma p
              + (g/\beta)\cos\Omega t\big)dt
              + 2\sqrt\Gamma\big(\rho\Pi\,d\xi_R
              - (\tfrac12 - \Pi^2 - \tfrac{1}{4\rho^2})\,d\xi_I\big),\\
        \dot\rho &= \Pi + \Gamma\big(\rho - \rho^3 - \rho\Pi^2
              + \tfrac{1}{4\rho}\big),\\
        \dot\Pi &= \rho(-3\beta^2 x^2 + 1) + \tfrac{1}{4\rho^3}
              - \Gamma\Pi\big(1 + \Pi^2 + \rho^2 + \tfrac{3}{4\rho^2}\big),

    where :math:`d\xi = d\xi_R + i\,d\xi_I` is a complex Wiener increment
    with :math:`M(d\xi) = M(d\xi^2) = 0`, :math:`M(|d\xi|^2) = dt`.

``SC5``
    The covariance-matrix form of the same wavepacket dynamics in five
    variables :math:`(x, p, \mu, \kappa, R)` with
    :math:`\mu = \sigma_{xx}`, :math:`\kappa = \sigma_{pp}`,
    :math:`R = \sigma_{xp}`:

    .. math::

        \dot\mu &= 2R + 2\Gamma(\mu - \mu^2 - R^2 + \tfrac14),\\
        \dot\kappa &= 2R(-3\beta^2x^2 + 1)
              + 2\Gamma(-\kappa - \kappa^2 - R^2 + \tfrac14),\\
        \dot R &= \mu(-3\beta^2x^2 + 1) + \kappa - 2\Gamma R(\mu+\kappa),

    with the same centroid equations and noise coefficients written in
    covariance variables (see :func:`sc5_diffusion`).  The uncertainty
    defect :math:`X = \mu\kappa - R^2 - \tfrac14` obeys
    :math:`\dot X = -2\Gamma(\mu+\kappa)X`, so trajectories relax onto the
    minimum-uncertainty manifold where SC5 reduces exactly to SC.

``CNC``
    Classical oscillator dressed with the *structure* of the SC noise:
    the SC model pinned at the nearly classical scale
    ``beta = BETA_FIXED`` with its (x, p) noise coefficients multiplied
    by ``beta_n``.  Choosing ``beta_n = beta_target / BETA_FIXED`` gives
    scaled-coordinate noise of the amplitude SC would have at
    ``beta_target`` while keeping the drift classical.

All five share drive amplitude ``g``, drive frequency ``omega`` and
damping ``gamma``.  The natural comparison coordinates across scales are
the scaled pair :math:`(\tilde x, \tilde p) = (x\beta, p\beta)`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import _kernels as _k

__all__ = [
    "BETA_FIXED",
    "DRIVE_PERIOD_FACTOR",
    "ModelKind",
    "ModelSpec",
    "StateXP",
    "StateSC",
    "StateSC5",
    "DiffusionCoeffs",
    "DuffingError",
    "SpreadCollapseError",
    "NumericOverflowError",
    "OffManifoldError",
    "DegeneratePairError",
    "classical_rhs",
    "sc_drift",
    "sc_diffusion",
    "sc5_drift",
    "sc5_diffusion",
    "noisy_classical_diffusion",
    "reduce_5to4",
    "lift_4to5",
    "uncertainty_defect",
    "observable_energy",
    "potential_surface",
    "default_initial_state",
]

#: Pinned length scale of the CNC model (nearly classical).
BETA_FIXED = 1.0e-5

#: Drive period is ``DRIVE_PERIOD_FACTOR / omega``.
DRIVE_PERIOD_FACTOR = 2.0 * math.pi


class DuffingError(ValueError):
    """Base class for model/integration failures.

    Subclasses ValueError so state/spec invariant violations surface as
    invalid-value errors; callers that need the numeric-failure
    distinction catch DuffingError first.
    """


class SpreadCollapseError(DuffingError):
    """Spread coordinate hit the 1/rho singularity guard."""


class NumericOverflowError(DuffingError):
    """A state component left the finite trust region."""


class OffManifoldError(DuffingError):
    """5-variable state too far from the minimum-uncertainty manifold."""


class DegeneratePairError(DuffingError):
    """Fiducial and companion trajectories collapsed onto each other."""


class ModelKind(str, Enum):
    C = "c"
    CNR = "cnr"
    CNC = "cnc"
    SC = "sc"
    SC5 = "sc5"

    @property
    def kernel_id(self) -> int:
        return _KERNEL_IDS[self]

    @property
    def n_vars(self) -> int:
        return {ModelKind.C: 2, ModelKind.CNR: 2, ModelKind.CNC: 4,
                ModelKind.SC: 4, ModelKind.SC5: 5}[self]

    @property
    def has_spread(self) -> bool:
        return self in (ModelKind.CNC, ModelKind.SC, ModelKind.SC5)

    @property
    def is_stochastic(self) -> bool:
        return self is not ModelKind.C


_KERNEL_IDS = {
    ModelKind.C: _k.KIND_C,
    ModelKind.CNR: _k.KIND_CNR,
    ModelKind.CNC: _k.KIND_CNC,
    ModelKind.SC: _k.KIND_SC,
    ModelKind.SC5: _k.KIND_SC5,
}


@dataclass(frozen=True)
class ModelSpec:
    """Which model to run, plus its physical parameters.

    ``beta_n`` is meaningful only for kind CNC, where ``beta`` itself is
    pinned to :data:`BETA_FIXED` and ``beta_n`` rescales the noise
    coefficients.  Use :meth:`cnc_at` to build a CNC spec emulating a
    target scale.
    """

    kind: ModelKind
    gamma: float
    beta: float
    g: float = 0.3
    omega: float = 1.0
    beta_n: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if not (0.0 < self.beta <= 1.0):
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.omega <= 0.0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if self.kind is ModelKind.CNC:
            if self.beta != BETA_FIXED:
                raise ValueError(
                    f"CNC pins beta to {BETA_FIXED}; got {self.beta}")
            if self.beta_n is None or self.beta_n <= 0.0:
                raise ValueError("CNC requires beta_n > 0")
        elif self.beta_n is not None:
            raise ValueError(f"beta_n is only meaningful for CNC, got kind {self.kind}")

    @classmethod
    def cnc_at(cls, gamma: float, beta_target: float, *, g: float = 0.3,
               omega: float = 1.0) -> "ModelSpec":
        """CNC spec whose noise amplitude emulates scale ``beta_target``."""
        return cls(kind=ModelKind.CNC, gamma=gamma, beta=BETA_FIXED,
                   g=g, omega=omega, beta_n=beta_target / BETA_FIXED)

    @property
    def period(self) -> float:
        """Drive period T = 2 pi / omega."""
        return DRIVE_PERIOD_FACTOR / self.omega

    @property
    def noise_mult(self) -> float:
        return self.beta_n if self.kind is ModelKind.CNC else 1.0

    def with_gamma(self, gamma: float) -> "ModelSpec":
        return replace(self, gamma=gamma)


@dataclass(frozen=True)
class StateXP:
    """Phase-space point of the classical models."""

    x: float
    p: float

    def __post_init__(self) -> None:
        _require_finite(self, ("x", "p"))

    def as_vector(self) -> np.ndarray:
        return np.array([self.x, self.p, 0.0, 0.0, 0.0])


@dataclass(frozen=True)
class StateSC:
    """Centroid plus spread-oscillator coordinates (4-variable model)."""

    x: float
    p: float
    rho: float
    pi: float

    def __post_init__(self) -> None:
        _require_finite(self, ("x", "p", "rho", "pi"))
        if self.rho <= 0.0:
            raise SpreadCollapseError(f"rho must be > 0, got {self.rho}")

    def as_vector(self) -> np.ndarray:
        return np.array([self.x, self.p, self.rho, self.pi, 0.0])


@dataclass(frozen=True)
class StateSC5:
    """Centroid plus covariance coordinates (5-variable model)."""

    x: float
    p: float
    mu: float
    kappa: float
    r: float

    def __post_init__(self) -> None:
        _require_finite(self, ("x", "p", "mu", "kappa", "r"))
        if self.mu <= 0.0:
            raise SpreadCollapseError(f"mu must be > 0, got {self.mu}")
        if self.kappa <= 0.0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        if self.mu * self.kappa - self.r * self.r <= 0.0:
            raise ValueError("covariance must be positive definite: "
                             f"mu*kappa - r^2 = {self.mu * self.kappa - self.r ** 2}")

    def as_vector(self) -> np.ndarray:
        return np.array([self.x, self.p, self.mu, self.kappa, self.r])


def _require_finite(obj, names) -> None:
    for name in names:
        v = getattr(obj, name)
        if not math.isfinite(v):
            raise NumericOverflowError(f"{type(obj).__name__}.{name} is not finite: {v}")


@dataclass(frozen=True)
class DiffusionCoeffs:
    """Per-component multipliers (c_R, c_I) of the two noise parts.

    ``pairs`` maps state-component name to its coefficient pair.
    Deterministic components carry (0, 0).  For the real-noise model the
    single shared real increment is reported in the c_R slot.
    """

    pairs: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __getitem__(self, name: str) -> tuple[float, float]:
        return self.pairs[name]

    @property
    def all_zero(self) -> bool:
        return all(cr == 0.0 and ci == 0.0 for cr, ci in self.pairs.values())


def _check_spec_kind(spec: ModelSpec, allowed, op: str) -> None:
    if spec.kind not in allowed:
        raise ValueError(f"{op} applies to kinds {[k.value for k in allowed]}, "
                         f"got {spec.kind.value}")


def classical_rhs(state: StateXP, t: float, spec: ModelSpec) -> StateXP:
    """Drift (dx/dt, dp/dt) of the classical oscillator."""
    _check_spec_kind(spec, (ModelKind.C, ModelKind.CNR), "classical_rhs")
    fx, fp = _k.k_classical_rhs(state.x, state.p, t, spec.gamma, spec.g,
                                spec.omega, spec.beta)
    if not (math.isfinite(fx) and math.isfinite(fp)):
        raise NumericOverflowError(f"classical_rhs overflow at state {state}")
    return StateXP(x=fx, p=fp)


def sc_drift(state: StateSC, t: float, spec: ModelSpec) -> StateSC:
    """Deterministic part of the 4-variable model; returned as a StateSC
    whose fields hold the component derivatives."""
    _check_spec_kind(spec, (ModelKind.SC, ModelKind.CNC), "sc_drift")
    if state.rho <= 0.0:
        raise SpreadCollapseError(f"rho must be > 0, got {state.rho}")
    fx, fp, fr, fq = _k.k_sc_drift(state.x, state.p, state.rho, state.pi, t,
                                   spec.gamma, spec.g, spec.omega, spec.beta)
    for v in (fx, fp, fr, fq):
        if not math.isfinite(v):
            raise NumericOverflowError(f"sc_drift overflow at state {state}")
    return _sc_derivative(fx, fp, fr, fq)


def _sc_derivative(fx: float, fp: float, fr: float, fq: float) -> StateSC:
    # Bypass the rho > 0 state invariant: a derivative may have any sign.
    obj = object.__new__(StateSC)
    object.__setattr__(obj, "x", fx)
    object.__setattr__(obj, "p", fp)
    object.__setattr__(obj, "rho", fr)
    object.__setattr__(obj, "pi", fq)
    return obj


def _sc5_derivative(fx, fp, fm, fk, fr) -> StateSC5:
    obj = object.__new__(StateSC5)
    object.__setattr__(obj, "x", fx)
    object.__setattr__(obj, "p", fp)
    object.__setattr__(obj, "mu", fm)
    object.__setattr__(obj, "kappa", fk)
    object.__setattr__(obj, "r", fr)
    return obj


def sc_diffusion(state: StateSC, spec: ModelSpec) -> DiffusionCoeffs:
    """Noise coefficients of the 4-variable model (x and p rows only).

    For kind CNC every coefficient is additionally multiplied by
    ``beta_n``.
    """
    _check_spec_kind(spec, (ModelKind.SC, ModelKind.CNC), "sc_diffusion")
    if state.rho <= 0.0:
        raise SpreadCollapseError(f"rho must be > 0, got {state.rho}")
    gxr, gxi, gpr, gpi = _k.k_sc_diffusion(state.rho, state.pi, spec.gamma,
                                           spec.noise_mult)
    return DiffusionCoeffs(pairs={
        "x": (gxr, gxi),
        "p": (gpr, gpi),
        "rho": (0.0, 0.0),
        "pi": (0.0, 0.0),
    })


def sc5_drift(state: StateSC5, t: float, spec: ModelSpec) -> StateSC5:
    """Deterministic part of the 5-variable model."""
    _check_spec_kind(spec, (ModelKind.SC5,), "sc5_drift")
    fx, fp, fm, fk, fr = _k.k_sc5_drift(state.x, state.p, state.mu, state.kappa,
                                        state.r, t, spec.gamma, spec.g,
                                        spec.omega, spec.beta)
    for v in (fx, fp, fm, fk, fr):
        if not math.isfinite(v):
            raise NumericOverflowError(f"sc5_drift overflow at state {state}")
    return _sc5_derivative(fx, fp, fm, fk, fr)


def sc5_diffusion(state: StateSC5, spec: ModelSpec) -> DiffusionCoeffs:
    """Noise coefficients of the 5-variable model (x and p rows only).

    On the minimum-uncertainty manifold these reduce exactly to
    :func:`sc_diffusion` under mu = rho^2, r = rho*pi,
    kappa = pi^2 + 1/(4 rho^2); pathwise agreement of SC and SC5 under
    common noise requires this consistency.
    """
    _check_spec_kind(spec, (ModelKind.SC5,), "sc5_diffusion")
    gxr, gxi, gpr, gpi = _k.k_sc5_diffusion(state.mu, state.kappa, state.r,
                                            spec.gamma, spec.noise_mult)
    return DiffusionCoeffs(pairs={
        "x": (gxr, gxi),
        "p": (gpr, gpi),
        "mu": (0.0, 0.0),
        "kappa": (0.0, 0.0),
        "r": (0.0, 0.0),
    })


def noisy_classical_diffusion(spec: ModelSpec) -> DiffusionCoeffs:
    """State-independent coefficients of the real-noise classical model.

    A single real Wiener increment (variance dt) multiplies 2 sqrt(gamma)
    and is added to both dx and dp.
    """
    _check_spec_kind(spec, (ModelKind.CNR,), "noisy_classical_diffusion")
    c = 2.0 * math.sqrt(spec.gamma)
    return DiffusionCoeffs(pairs={"x": (c, 0.0), "p": (c, 0.0)})


def reduce_5to4(state: StateSC5, *, tol_constraint: float = 1.0e-6) -> StateSC:
    """Project a minimum-uncertainty 5-variable state to 4 variables.

    Requires |mu*kappa - r^2 - 1/4| <= tol_constraint; the projection is
    rho = sqrt(mu), pi = r / sqrt(mu).
    """
    defect = uncertainty_defect(state)
    if abs(defect) > tol_constraint:
        raise OffManifoldError(
            f"uncertainty defect {defect:.3e} exceeds tolerance {tol_constraint:.1e}")
    if state.mu <= 0.0:
        raise SpreadCollapseError(f"mu must be > 0, got {state.mu}")
    rho = math.sqrt(state.mu)
    return StateSC(x=state.x, p=state.p, rho=rho, pi=state.r / rho)


def lift_4to5(state: StateSC) -> StateSC5:
    """Embed a 4-variable state on the minimum-uncertainty manifold.

    mu = rho^2, r = rho*pi, kappa = (r^2 + 1/4)/mu; the result satisfies
    mu*kappa - r^2 = 1/4 up to rounding.
    """
    if state.rho <= 0.0:
        raise SpreadCollapseError(f"rho must be > 0, got {state.rho}")
    mu = state.rho * state.rho
    r = state.rho * state.pi
    kappa = (r * r + 0.25) / mu
    return StateSC5(x=state.x, p=state.p, mu=mu, kappa=kappa, r=r)


def uncertainty_defect(state: StateSC5) -> float:
    """Signed distance mu*kappa - r^2 - 1/4 from the uncertainty manifold."""
    return state.mu * state.kappa - state.r * state.r - 0.25


def observable_energy(state, spec: ModelSpec) -> float:
    """Scaled mechanical energy of the centroid.

    E = beta^2 (p^2/2 + beta^2 x^4/4 - x^2/2), i.e. the double-well
    energy written so that its value depends only on the scaled
    coordinates (x beta, p beta).  The well bottoms sit at E = -1/4.
    """
    b2 = spec.beta * spec.beta
    return b2 * (state.p ** 2 / 2.0 + b2 * state.x ** 4 / 4.0 - state.x ** 2 / 2.0)


def potential_surface(x: float, rho: float, t: float, spec: ModelSpec) -> float:
    """Two-dimensional effective potential U(x, rho) of the SC dynamics.

    U = -(1 - 3 beta^2 rho^2) x^2/2 + beta^2 (x^2/2)^2
        - (g/beta) cos(omega t) x - rho^2/2 + 1/(8 rho^2).

    Diagnostic/plotting helper only; the dynamics never evaluate it.
    """
    if rho <= 0.0:
        raise SpreadCollapseError(f"rho must be > 0, got {rho}")
    b2 = spec.beta * spec.beta
    return (-(1.0 - 3.0 * b2 * rho * rho) * x * x / 2.0
            + b2 * (x * x / 2.0) ** 2
            - (spec.g / spec.beta) * math.cos(spec.omega * t) * x
            - rho * rho / 2.0 + 1.0 / (8.0 * rho * rho))


def default_initial_state(spec: ModelSpec):
    """Canonical initial condition: scaled position 1 in the +x well,
    at rest, minimum-uncertainty spread.

    x0 = 1/beta (so x0*beta = 1), p0 = 0, rho0 = 2**-0.5, pi0 = 0; the
    5-variable model starts at the lifted image of the same point.
    """
    x0 = 1.0 / spec.beta
    if spec.kind in (ModelKind.C, ModelKind.CNR):
        return StateXP(x=x0, p=0.0)
    base = StateSC(x=x0, p=0.0, rho=2.0 ** -0.5, pi=0.0)
    if spec.kind is ModelKind.SC5:
        return lift_4to5(base)
    return base


def state_from_vector(kind: ModelKind, vec: np.ndarray):
    """Inverse of ``as_vector`` for each model kind."""
    if kind in (ModelKind.C, ModelKind.CNR):
        return StateXP(x=vec[0], p=vec[1])
    if kind is ModelKind.SC5:
        return StateSC5(x=vec[0], p=vec[1], mu=vec[2], kappa=vec[3], r=vec[4])
    return StateSC(x=vec[0], p=vec[1], rho=vec[2], pi=vec[3])
