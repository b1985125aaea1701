"""Compiled numerical core: model right-hand sides and the fixed-step advancer.

Every model is advanced by the single :func:`advance` kernel so that the
trajectory integrator and the two-trajectory Lyapunov estimator share
bit-identical arithmetic.  States are carried in a flat 5-slot vector;
models with fewer variables leave the trailing slots at zero.

Slot layout per model kind::

    C, CNR      x, p, -, -, -
    SC, CNC     x, p, rho, pi, -
    SC5         x, p, mu, kappa, r

Noise columns: ``z`` holds unit normals, two per step.  Complex-noise
models consume both columns as (Re, Im) parts scaled by sqrt(dt/2); the
real-noise model consumes only column 0 scaled by sqrt(dt); the
deterministic model consumes none.
"""

import numpy as np
from numba import njit

# model kinds
KIND_C = 0
KIND_CNR = 1
KIND_CNC = 2
KIND_SC = 3
KIND_SC5 = 4

# integration schemes
SCHEME_EM = 0
SCHEME_HEUN = 1

# advance() status codes
STATUS_OK = 0
STATUS_SPREAD_COLLAPSE = 1
STATUS_OVERFLOW = 2

# singularity guards: abort, never clamp
RHO_FLOOR = 1.0e-4
MU_FLOOR = RHO_FLOOR * RHO_FLOOR
COMPONENT_CEIL = 1.0e10


@njit(cache=True)
def k_classical_rhs(x, p, t, gamma, g, omega, beta):
    """Drift of the classical oscillator (also the CNR drift)."""
    fx = p
    fp = -(beta * beta) * x * x * x + x - 2.0 * gamma * p + (g / beta) * np.cos(omega * t)
    return fx, fp


@njit(cache=True)
def k_sc_drift(x, p, rho, pi, t, gamma, g, omega, beta):
    """Drift of the 4-variable semiclassical model."""
    b2 = beta * beta
    fx = p
    fp = (-b2 * x * x * x + (1.0 - 3.0 * b2 * rho * rho) * x
          - 2.0 * gamma * p + (g / beta) * np.cos(omega * t))
    fr = pi + gamma * (rho - rho ** 3 - rho * pi * pi + 0.25 / rho)
    fq = (rho * (-3.0 * b2 * x * x + 1.0) + 0.25 / rho ** 3
          - gamma * pi * (1.0 + pi * pi + rho * rho + 0.75 / (rho * rho)))
    return fx, fp, fr, fq


@njit(cache=True)
def k_sc_diffusion(rho, pi, gamma, mult):
    """(c_R, c_I) noise coefficients of (x, p) for the 4-variable model.

    ``mult`` is 1 for SC and the noise multiplier beta_n for CNC.
    """
    pref = 2.0 * np.sqrt(gamma) * mult
    gxr = pref * (rho * rho - 0.5)
    gxi = -pref * rho * pi
    gpr = pref * rho * pi
    gpi = -pref * (0.5 - pi * pi - 0.25 / (rho * rho))
    return gxr, gxi, gpr, gpi


@njit(cache=True)
def k_sc5_drift(x, p, mu, ka, r, t, gamma, g, omega, beta):
    """Drift of the 5-variable covariance model."""
    b2 = beta * beta
    a = -3.0 * b2 * x * x + 1.0
    fx = p
    fp = (-b2 * (x * x * x + 3.0 * mu * x) + x
          - 2.0 * gamma * p + (g / beta) * np.cos(omega * t))
    fm = 2.0 * r + 2.0 * gamma * (mu - mu * mu - r * r + 0.25)
    fk = 2.0 * r * a + 2.0 * gamma * (-ka - ka * ka - r * r + 0.25)
    fr = mu * a + ka - 2.0 * gamma * r * (mu + ka)
    return fx, fp, fm, fk, fr


@njit(cache=True)
def k_sc5_diffusion(mu, ka, r, gamma, mult):
    """(c_R, c_I) noise coefficients of (x, p) for the 5-variable model.

    Chosen so that on the minimum-uncertainty manifold (mu = rho^2,
    r = rho*pi, kappa = pi^2 + 1/(4 rho^2)) the coefficients equal
    :func:`k_sc_diffusion` exactly; the two models then agree pathwise
    under common noise.
    """
    pref = 2.0 * np.sqrt(gamma) * mult
    gxr = pref * (mu - 0.5)
    gxi = -pref * r
    gpr = pref * r
    gpi = pref * (ka - 0.5)
    return gxr, gxi, gpr, gpi


@njit(cache=True)
def _drift(kind, s, t, gamma, g, omega, beta, out):
    if kind == KIND_SC or kind == KIND_CNC:
        fx, fp, fr, fq = k_sc_drift(s[0], s[1], s[2], s[3], t, gamma, g, omega, beta)
        out[0] = fx
        out[1] = fp
        out[2] = fr
        out[3] = fq
        out[4] = 0.0
    elif kind == KIND_SC5:
        fx, fp, fm, fk, fr = k_sc5_drift(s[0], s[1], s[2], s[3], s[4], t, gamma, g, omega, beta)
        out[0] = fx
        out[1] = fp
        out[2] = fm
        out[3] = fk
        out[4] = fr
    else:
        fx, fp = k_classical_rhs(s[0], s[1], t, gamma, g, omega, beta)
        out[0] = fx
        out[1] = fp
        out[2] = 0.0
        out[3] = 0.0
        out[4] = 0.0


@njit(cache=True)
def _state_bad(kind, s):
    for j in range(5):
        if not np.isfinite(s[j]) or np.abs(s[j]) > COMPONENT_CEIL:
            return STATUS_OVERFLOW
    if (kind == KIND_SC or kind == KIND_CNC) and s[2] < RHO_FLOOR:
        return STATUS_SPREAD_COLLAPSE
    if kind == KIND_SC5 and s[2] < MU_FLOOR:
        return STATUS_SPREAD_COLLAPSE
    return STATUS_OK


@njit(cache=True)
def advance(kind, scheme, s, step0, nsteps, dt, t0, gamma, g, omega, beta, mult, z, zoff):
    """Advance ``s`` in place by ``nsteps`` fixed steps from t = t0 + step0*dt.

    ``z`` is an (N, 2) array of unit normals; rows zoff .. zoff+nsteps-1
    are consumed in order.  Returns (status, steps_done): on failure,
    steps_done is the index of the failing step.
    """
    sq_r = np.sqrt(dt)
    sq_c = np.sqrt(dt / 2.0)
    f = np.empty(5)
    f2 = np.empty(5)
    sb = np.empty(5)
    gn = np.empty(5)
    for i in range(nsteps):
        t = t0 + (step0 + i) * dt

        # noise contribution for this step
        for j in range(5):
            gn[j] = 0.0
        if kind == KIND_CNR:
            w = z[zoff + i, 0] * sq_r
            pref = 2.0 * np.sqrt(gamma)
            gn[0] = pref * w
            gn[1] = pref * w
        elif kind == KIND_SC or kind == KIND_CNC:
            dxr = z[zoff + i, 0] * sq_c
            dxi = z[zoff + i, 1] * sq_c
            gxr, gxi, gpr, gpi = k_sc_diffusion(s[2], s[3], gamma, mult)
            gn[0] = gxr * dxr + gxi * dxi
            gn[1] = gpr * dxr + gpi * dxi
        elif kind == KIND_SC5:
            dxr = z[zoff + i, 0] * sq_c
            dxi = z[zoff + i, 1] * sq_c
            gxr, gxi, gpr, gpi = k_sc5_diffusion(s[2], s[3], s[4], gamma, mult)
            gn[0] = gxr * dxr + gxi * dxi
            gn[1] = gpr * dxr + gpi * dxi

        _drift(kind, s, t, gamma, g, omega, beta, f)
        if scheme == SCHEME_EM:
            for j in range(5):
                s[j] = s[j] + f[j] * dt + gn[j]
        else:
            for j in range(5):
                sb[j] = s[j] + f[j] * dt + gn[j]
            bad = _state_bad(kind, sb)
            if bad != STATUS_OK:
                return bad, i
            _drift(kind, sb, t + dt, gamma, g, omega, beta, f2)
            for j in range(5):
                s[j] = s[j] + 0.5 * (f[j] + f2[j]) * dt + gn[j]

        bad = _state_bad(kind, s)
        if bad != STATUS_OK:
            return bad, i
    return STATUS_OK, nsteps


@njit(cache=True)
def pair_distance(kind, s1, s2, beta):
    """Separation of two states in the scaled norm.

    (x, p) differences are scaled by beta; for spread-carrying models the
    spread coordinates enter with unit weight, the 5-variable state being
    measured through its (rho, pi) = (sqrt(mu), r/sqrt(mu)) image so all
    spread models share one norm.
    """
    dx = beta * (s1[0] - s2[0])
    dp = beta * (s1[1] - s2[1])
    acc = dx * dx + dp * dp
    if kind == KIND_SC or kind == KIND_CNC:
        dr = s1[2] - s2[2]
        dq = s1[3] - s2[3]
        acc += dr * dr + dq * dq
    elif kind == KIND_SC5:
        r1 = np.sqrt(s1[2])
        r2 = np.sqrt(s2[2])
        q1 = s1[4] / r1
        q2 = s2[4] / r2
        acc += (r1 - r2) * (r1 - r2) + (q1 - q2) * (q1 - q2)
    return np.sqrt(acc)
