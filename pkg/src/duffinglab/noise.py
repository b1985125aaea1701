r"""Noise generation with the complex-increment moment structure.

The stochastic models are driven by complex Wiener increments
:math:`d\xi = d\xi_R + i\,d\xi_I` whose ensemble moments are

.. math:: M(d\xi) = 0, \qquad M(d\xi\,d\xi) = 0, \qquad M(d\xi\,d\xi^*) = dt.

These force :math:`d\xi_R, d\xi_I` to be independent zero-mean Gaussians
of variance :math:`dt/2` each.  The real-noise model uses a single real
increment of variance :math:`dt`.

Reproducibility: all generators are counter-based (Philox) and derived
from explicit (seed, spawn_key) pairs, so any draw is reproducible
independently of execution order or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ComplexNoiseIncrement",
    "NoiseStats",
    "make_rng",
    "sample_complex_increment",
    "sample_unit_normals",
]


def make_rng(seed: int, spawn_key: tuple[int, ...] = ()) -> np.random.Generator:
    """Counter-based generator for (seed, spawn_key).

    Distinct spawn keys give statistically independent streams for the
    same root seed; the mapping is pure, so sweep workers can construct
    their own generators in any order.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.Philox(seed=ss))


@dataclass(frozen=True)
class ComplexNoiseIncrement:
    """One complex Wiener increment (real part, imaginary part)."""

    xi_r: float
    xi_i: float

    @property
    def abs_sq(self) -> float:
        return self.xi_r * self.xi_r + self.xi_i * self.xi_i


def sample_complex_increment(rng: np.random.Generator, dt: float) -> ComplexNoiseIncrement:
    """Draw one increment; components are N(0, dt/2) and independent."""
    if dt < 0.0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if dt == 0.0:
        return ComplexNoiseIncrement(0.0, 0.0)
    scale = np.sqrt(dt / 2.0)
    z = rng.standard_normal(2)
    return ComplexNoiseIncrement(xi_r=float(z[0]) * scale, xi_i=float(z[1]) * scale)


def sample_unit_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    """(n, 2) unit normals; the advancer scales them per scheme and model."""
    return rng.standard_normal((int(n), 2))


@dataclass(frozen=True)
class NoiseStats:
    """Moment bookkeeping of the noise stream consumed by one run.

    For complex streams, ``mean`` and ``mean_sq`` are the complex sample
    means of dxi and dxi^2 and ``mean_abs_sq`` that of |dxi|^2 (should
    approach dt).  For real streams the imaginary parts are zero.
    """

    count: int
    mean: complex
    mean_sq: complex
    mean_abs_sq: float
    flavor: str  # "complex" | "real"

    @classmethod
    def from_complex_draws(cls, z: np.ndarray, dt: float) -> "NoiseStats":
        """Stats of increments reconstructed from (n, 2) unit normals."""
        if len(z) == 0:
            return cls(0, 0j, 0j, 0.0, "complex")
        scale = np.sqrt(dt / 2.0)
        xi = (z[:, 0] + 1j * z[:, 1]) * scale
        return cls(count=len(xi), mean=complex(xi.mean()),
                   mean_sq=complex((xi * xi).mean()),
                   mean_abs_sq=float((xi.real ** 2 + xi.imag ** 2).mean()),
                   flavor="complex")

    @classmethod
    def from_real_draws(cls, z: np.ndarray, dt: float) -> "NoiseStats":
        """Stats of real increments z[:, 0] * sqrt(dt)."""
        if len(z) == 0:
            return cls(0, 0j, 0j, 0.0, "real")
        w = z[:, 0] * np.sqrt(dt)
        return cls(count=len(w), mean=complex(w.mean()),
                   mean_sq=complex((w * w).mean()),
                   mean_abs_sq=float((w * w).mean()), flavor="real")
