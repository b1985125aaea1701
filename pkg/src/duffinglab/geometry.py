r"""Poincare sections, coarse-grained histograms, and attractor distances.

Spatial similarity of two attractors is measured on their stroboscopic
sections in scaled coordinates :math:`(\tilde x, \tilde p) = (x\beta,
p\beta)`.  Each coordinate is histogrammed on a fixed grid and compared
through the correlation-style divergence

.. math:: l(f_1, f_2) = -\ln\frac{\big(\sum_b f_1(b) f_2(b)\big)^2}
                               {\sum_b f_1(b)^2 \; \sum_b f_2(b)^2},

which is zero exactly for identical (or proportional) histograms,
symmetric, invariant under positive rescaling of either argument, and
non-negative by Cauchy-Schwarz.  Orthogonal histograms (disjoint
support) give the +infinity sentinel.  The phase-space distance combines
the coordinate divergences Euclidean-style:

.. math:: d = \sqrt{l_x^2 + l_p^2}.

Distances between near-periodic sections are ill-conditioned: a handful
of occupied bins means slight offsets produce huge values.  Comparisons
where either histogram occupies fewer than
:data:`RELIABLE_MIN_OCCUPANCY` bins are therefore flagged unreliable,
and grid aggregates exclude unreliable or sentinel pairs, reporting how
many were dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .integrate import Trajectory
from .models import ModelKind, ModelSpec

__all__ = [
    "BINS_DEFAULT",
    "PHASE_RANGE_DEFAULT",
    "ENERGY_BINS_DEFAULT",
    "ENERGY_RANGE_DEFAULT",
    "RELIABLE_MIN_OCCUPANCY",
    "MIN_SECTION_POINTS",
    "EXCLUSION_FLAG_FRACTION",
    "Coordinate",
    "PoincareSection",
    "Histogram",
    "DistanceResult",
    "GridDistanceSummary",
    "poincare_section",
    "scaled_histogram",
    "skl_distance",
    "phase_distance",
    "mean_intra_model_distance",
    "mean_cross_model_distance",
    "mean_lambda_gap",
    "energy_spectrum",
    "spectrum_distance",
    "write_section_csv",
    "write_histogram_csv",
    "write_distance_matrix_csv",
]

BINS_DEFAULT = 256
PHASE_RANGE_DEFAULT = (-2.5, 2.5)
ENERGY_BINS_DEFAULT = 128
ENERGY_RANGE_DEFAULT = (-0.3, 0.7)

#: Histograms occupying fewer bins than this make a comparison unreliable.
RELIABLE_MIN_OCCUPANCY = 10

#: Minimum section size admitted to any distance computation.
MIN_SECTION_POINTS = 500

#: Aggregates dropping more than this fraction of pairs get flagged.
EXCLUSION_FLAG_FRACTION = 0.2

#: Out-of-range fraction above which a histogram is flagged.
OUT_OF_RANGE_FLAG_FRACTION = 0.01


class Coordinate(str, Enum):
    X = "x"
    P = "p"
    ENERGY = "energy"


@dataclass(frozen=True)
class PoincareSection:
    """Stroboscopic samples in scaled coordinates, with provenance."""

    points: np.ndarray  # (n, 2) columns (x*beta, p*beta)
    gamma: float
    beta: float
    kind: ModelKind

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must be (n, 2), got shape {pts.shape}")
        if len(pts) == 0:
            raise ValueError("section has no strobe samples")
        if not np.isfinite(pts).all():
            raise ValueError("section contains non-finite points")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def p(self) -> np.ndarray:
        return self.points[:, 1]


@dataclass(frozen=True)
class Histogram:
    """Uniform-grid counts of one coordinate.

    ``flagged_out_of_range`` marks histograms that dropped more than 1%
    of their points outside the grid.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    coordinate: Coordinate
    n_total: int
    n_out_of_range: int

    @property
    def occupancy(self) -> int:
        return int((self.counts > 0).sum())

    @property
    def flagged_out_of_range(self) -> bool:
        return self.n_out_of_range > OUT_OF_RANGE_FLAG_FRACTION * self.n_total

    def same_grid(self, other: "Histogram") -> bool:
        return (self.coordinate == other.coordinate
                and len(self.bin_edges) == len(other.bin_edges)
                and bool(np.array_equal(self.bin_edges, other.bin_edges)))


@dataclass(frozen=True)
class DistanceResult:
    """A divergence value plus its reliability flag.

    ``value`` is +inf when the supports are disjoint; ``reliable`` is
    False when either input occupied too few bins for the comparison to
    mean anything.
    """

    value: float
    reliable: bool

    def __post_init__(self) -> None:
        if not math.isinf(self.value) and self.value < 0.0:
            raise ValueError(f"distance must be >= 0, got {self.value}")

    @property
    def is_sentinel(self) -> bool:
        return math.isinf(self.value)

    @property
    def usable(self) -> bool:
        return self.reliable and not self.is_sentinel


def poincare_section(traj: Trajectory, spec: ModelSpec | None = None) -> PoincareSection:
    """Scaled stroboscopic section of a trajectory past its transient."""
    spec = spec or traj.spec
    if spec != traj.spec:
        raise ValueError("spec disagrees with the trajectory provenance")
    pts = traj.scaled_xp(strobe_only=True)
    if len(pts) == 0:
        raise ValueError("trajectory has no strobe samples")
    return PoincareSection(points=pts, gamma=spec.gamma, beta=spec.beta,
                           kind=spec.kind)


def scaled_histogram(section: PoincareSection, coordinate: Coordinate | str,
                     bins: int = BINS_DEFAULT,
                     value_range: tuple[float, float] = PHASE_RANGE_DEFAULT) -> Histogram:
    """Histogram one coordinate of a section on a fixed uniform grid."""
    coordinate = Coordinate(coordinate)
    if coordinate is Coordinate.ENERGY:
        raise ValueError("energy histograms come from energy_spectrum")
    values = section.x if coordinate is Coordinate.X else section.p
    return _histogram_values(values, coordinate, bins, value_range)


def _histogram_values(values: np.ndarray, coordinate: Coordinate, bins: int,
                      value_range: tuple[float, float]) -> Histogram:
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    lo, hi = value_range
    if not lo < hi:
        raise ValueError(f"empty range {value_range}")
    inside = (values >= lo) & (values <= hi)
    n_in = int(inside.sum())
    if n_in == 0:
        raise ValueError(f"all {len(values)} points fall outside {value_range}")
    counts, edges = np.histogram(values[inside], bins=bins, range=value_range)
    return Histogram(bin_edges=edges, counts=counts.astype(np.int64),
                     coordinate=coordinate, n_total=len(values),
                     n_out_of_range=len(values) - n_in)


def skl_distance(f1: Histogram, f2: Histogram) -> DistanceResult:
    """Correlation divergence l between two histograms on one grid."""
    if not f1.same_grid(f2):
        raise ValueError("histograms live on different bin grids")
    c1 = f1.counts.astype(float)
    c2 = f2.counts.astype(float)
    s11 = float(np.dot(c1, c1))
    s22 = float(np.dot(c2, c2))
    if s11 == 0.0 or s22 == 0.0:
        raise ValueError("empty histogram")
    reliable = (f1.occupancy >= RELIABLE_MIN_OCCUPANCY
                and f2.occupancy >= RELIABLE_MIN_OCCUPANCY)
    s12 = float(np.dot(c1, c2))
    if s12 == 0.0:
        return DistanceResult(value=math.inf, reliable=reliable)
    ratio = (s12 * s12) / (s11 * s22)
    # Cauchy-Schwarz bounds ratio <= 1; clip floating-point dust so that
    # identical inputs give exactly 0 and the result is never negative.
    value = 0.0 if ratio >= 1.0 else -math.log(ratio)
    return DistanceResult(value=value, reliable=reliable)


def phase_distance(section1: PoincareSection, section2: PoincareSection,
                   bins: int = BINS_DEFAULT,
                   value_range: tuple[float, float] = PHASE_RANGE_DEFAULT) -> DistanceResult:
    """Euclidean combination d = sqrt(l_x^2 + l_p^2) of the coordinate
    divergences of two sections."""
    for s in (section1, section2):
        if len(s) < MIN_SECTION_POINTS:
            raise ValueError(
                f"sections need >= {MIN_SECTION_POINTS} points for distances, "
                f"got {len(s)}")
    lx = skl_distance(scaled_histogram(section1, Coordinate.X, bins, value_range),
                      scaled_histogram(section2, Coordinate.X, bins, value_range))
    lp = skl_distance(scaled_histogram(section1, Coordinate.P, bins, value_range),
                      scaled_histogram(section2, Coordinate.P, bins, value_range))
    reliable = lx.reliable and lp.reliable
    if lx.is_sentinel or lp.is_sentinel:
        return DistanceResult(value=math.inf, reliable=reliable)
    return DistanceResult(value=math.hypot(lx.value, lp.value), reliable=reliable)


@dataclass(frozen=True)
class GridDistanceSummary:
    """Aggregate of pairwise distances over a parameter grid.

    ``per_gamma`` holds the per-point means (NaN where every partner was
    excluded); ``value`` is the grand mean over all included pairs.
    ``flagged`` is set when more than 20% of pairs had to be excluded
    (sentinels or unreliable comparisons).
    """

    value: float
    per_gamma: dict[float, float]
    n_pairs: int
    n_excluded: int

    @property
    def flagged(self) -> bool:
        return self.n_excluded > EXCLUSION_FLAG_FRACTION * self.n_pairs


def _check_same_provenance(sections) -> None:
    kinds = {s.kind for s in sections}
    betas = {s.beta for s in sections}
    if len(kinds) > 1:
        raise ValueError(f"sections mix model kinds {sorted(k.value for k in kinds)}")
    if len(betas) > 1:
        raise ValueError(f"sections mix beta values {sorted(betas)}")


def mean_intra_model_distance(sections: dict[float, PoincareSection],
                              bins: int = BINS_DEFAULT,
                              value_range: tuple[float, float] = PHASE_RANGE_DEFAULT,
                              ) -> GridDistanceSummary:
    """How far each attractor sits from its siblings across the grid.

    ``sections`` maps gamma to the section of one model at one beta.
    For each gamma the mean distance to all other gammas is reported;
    unreliable and sentinel pairs are excluded and counted.
    """
    if len(sections) < 2:
        raise ValueError("need at least two grid points")
    _check_same_provenance(sections.values())
    gammas = sorted(sections)
    cache: dict[tuple[float, float], DistanceResult] = {}
    for i, g1 in enumerate(gammas):
        for g2 in gammas[i + 1:]:
            cache[(g1, g2)] = phase_distance(sections[g1], sections[g2],
                                             bins, value_range)
    per_gamma: dict[float, float] = {}
    included: list[float] = []
    n_excluded = 0
    for g1 in gammas:
        vals = []
        for g2 in gammas:
            if g2 == g1:
                continue
            res = cache[(min(g1, g2), max(g1, g2))]
            if res.usable:
                vals.append(res.value)
            else:
                n_excluded += 1
        per_gamma[g1] = float(np.mean(vals)) if vals else math.nan
        included.extend(vals)
    n_pairs = len(gammas) * (len(gammas) - 1)
    value = float(np.mean(included)) if included else math.nan
    return GridDistanceSummary(value=value, per_gamma=per_gamma,
                               n_pairs=n_pairs, n_excluded=n_excluded)


def mean_cross_model_distance(sections1: dict[float, PoincareSection],
                              sections2: dict[float, PoincareSection],
                              bins: int = BINS_DEFAULT,
                              value_range: tuple[float, float] = PHASE_RANGE_DEFAULT,
                              ) -> GridDistanceSummary:
    """Mean distance between two models compared point-by-point in gamma."""
    common = sorted(set(sections1) & set(sections2))
    if not common:
        raise ValueError("no common gamma values between the two models")
    missing = (set(sections1) | set(sections2)) - set(common)
    if missing:
        raise ValueError(f"records missing for gamma values {sorted(missing)}")
    _check_same_provenance(sections1.values())
    _check_same_provenance(sections2.values())
    per_gamma: dict[float, float] = {}
    included: list[float] = []
    n_excluded = 0
    for g in common:
        res = phase_distance(sections1[g], sections2[g], bins, value_range)
        if res.usable:
            per_gamma[g] = res.value
            included.append(res.value)
        else:
            per_gamma[g] = math.nan
            n_excluded += 1
    value = float(np.mean(included)) if included else math.nan
    return GridDistanceSummary(value=value, per_gamma=per_gamma,
                               n_pairs=len(common), n_excluded=n_excluded)


def mean_lambda_gap(lambdas1: dict[float, float],
                    lambdas2: dict[float, float]) -> float:
    """Mean |lambda_1 - lambda_2| over matched gamma values."""
    common = sorted(set(lambdas1) & set(lambdas2))
    if not common:
        raise ValueError("no common gamma values between the two models")
    return float(np.mean([abs(float(lambdas1[g]) - float(lambdas2[g]))
                          for g in common]))


def energy_spectrum(traj: Trajectory, bins: int = ENERGY_BINS_DEFAULT,
                    value_range: tuple[float, float] = ENERGY_RANGE_DEFAULT) -> Histogram:
    """Histogram of the scaled centroid energy at strobe times."""
    energies = traj.energy(strobe_only=True)
    if len(energies) == 0:
        raise ValueError("trajectory has no strobe samples")
    return _histogram_values(energies, Coordinate.ENERGY, bins, value_range)


def spectrum_distance(h1: Histogram, h2: Histogram) -> DistanceResult:
    """Divergence between two energy spectra (same rules as skl_distance)."""
    if h1.coordinate is not Coordinate.ENERGY or h2.coordinate is not Coordinate.ENERGY:
        raise ValueError("spectrum_distance expects energy histograms")
    return skl_distance(h1, h2)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_section_csv(section: PoincareSection, path,
                      header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write("n,x_scaled,p_scaled\n")
        for i, (x, p) in enumerate(section.points):
            fh.write(f"{i},{_fmt(x)},{_fmt(p)}\n")


def write_histogram_csv(hist: Histogram, path,
                        header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write("bin_left,bin_right,count\n")
        for i in range(len(hist.counts)):
            fh.write(f"{_fmt(hist.bin_edges[i])},{_fmt(hist.bin_edges[i + 1])},"
                     f"{int(hist.counts[i])}\n")


def write_distance_matrix_csv(gammas: list[float], matrix: np.ndarray, path,
                              header_comment: str | None = None) -> None:
    """Square distance matrix with gamma row/column headers.

    Infinite entries are serialized as ``inf``.
    """
    matrix = np.asarray(matrix, dtype=float)
    n = len(gammas)
    if matrix.shape != (n, n):
        raise ValueError(f"matrix shape {matrix.shape} does not match {n} gammas")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write("gamma," + ",".join(_fmt(g) for g in gammas) + "\n")
        for i, g in enumerate(gammas):
            cells = [_fmt(g)]
            for j in range(n):
                v = matrix[i, j]
                cells.append("inf" if math.isinf(v) else _fmt(v))
            fh.write(",".join(cells) + "\n")
