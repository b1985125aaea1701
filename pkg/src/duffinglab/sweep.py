r"""Deterministic parallel parameter sweeps over (model, gamma, beta).

Every grid point is an independent job: its seed derives purely from the
root seed and the point's coordinates, so results are identical whatever
the worker count or execution order.  Failed points (spread collapse,
overflow) become records carrying the error cause instead of aborting
the sweep.

Persistence is a canonical CSV (sorted by coordinates, 17-significant-
digit floats, no timestamps — reruns are byte-identical) plus a JSON
manifest carrying the grid hash, integration config and failure list.

Scale detectors:

``detect_beta_chaos``
    smallest grid beta at and above which every gamma in the window
    classifies chaotic (K > 0.2).

``detect_beta_conv``
    smallest grid beta where the spread of K over gamma collapses below
    a fraction (default 25%) of its value at the nearly classical scale
    beta = 1e-5, i.e. where K(gamma) has flattened onto the
    gamma-independent meta-attractor value.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .integrate import IntegratorConfig, SamplingPlan, Scheme, integrate
from .geometry import poincare_section, write_section_csv
from .lyapunov import CHAOS_THRESHOLD, ComplexityRecord, lyapunov_wolf
from .models import DuffingError, ModelKind, ModelSpec

__all__ = [
    "DESK_GAMMAS",
    "DESK_BETAS",
    "LANDMARK_BETAS",
    "INTERMEDIATE_GAMMA_RANGE",
    "SweepGrid",
    "SweepRecord",
    "arithmetic_gamma_grid",
    "default_gamma_grid",
    "default_beta_grid",
    "desk_grid",
    "desk_config",
    "build_grid",
    "seed_for",
    "run_sweep",
    "write_records",
    "read_records",
    "detect_beta_chaos",
    "detect_beta_conv",
]

#: Gamma window of the intermediate regime used by the scale detectors.
INTERMEDIATE_GAMMA_RANGE = (0.088, 0.2)

#: Scales every default beta grid must contain exactly.
LANDMARK_BETAS = (1.0e-5, 0.0068, 0.0341)

#: Desk-scale preset: 12 gammas spanning the intermediate regime.
DESK_GAMMAS = (0.09, 0.1, 0.11, 0.12, 0.125, 0.13, 0.138, 0.149,
               0.16, 0.174, 0.19, 0.2)

#: Desk-scale preset: 9 betas, log-spread over [1e-5, 0.1] with the
#: landmark scales pinned as exact grid points.
DESK_BETAS = (1.0e-5, 1.0e-4, 1.0e-3, 0.0031622776601683794, 0.0068,
              0.01, 0.0341, 0.05623413251903491, 0.1)

_CSV_HEADER = "model,gamma,beta,replicate,seed,lambda,lambda_stderr,k,class,error"


def arithmetic_gamma_grid(lo: float, hi: float, step: float = 0.002) -> tuple[float, ...]:
    """Half-open arithmetic grid (lo, hi] with rounding-stable values."""
    if step <= 0.0 or hi <= lo:
        raise ValueError(f"empty range ({lo}, {hi}] with step {step}")
    k_lo = math.floor(lo / step + 1.0e-9) + 1
    k_hi = math.floor(hi / step + 1.0e-9)
    values = tuple(round(k * step, 12) for k in range(k_lo, k_hi + 1))
    if not values:
        raise ValueError(f"no grid points in ({lo}, {hi}] with step {step}")
    return values


def default_gamma_grid() -> tuple[float, ...]:
    """0.002-spaced grid over the full damping window (0, 0.35]."""
    return arithmetic_gamma_grid(0.0, 0.35, 0.002)


def default_beta_grid(n_points: int = 33) -> tuple[float, ...]:
    """Log-uniform grid over log10(beta) in [-5, -1], landmarks pinned.

    Grid values are snapped to 12 significant digits so the pinned
    landmarks merge with (rather than duplicate) coincident log points.
    """
    base = np.logspace(-5.0, -1.0, n_points)
    merged = sorted({float(f"{b:.12g}") for b in base} | set(LANDMARK_BETAS))
    return tuple(merged)


@dataclass(frozen=True)
class SweepGrid:
    """The cartesian product of sweep coordinates."""

    gamma_values: tuple[float, ...]
    beta_values: tuple[float, ...]
    models: tuple[ModelKind, ...] = (ModelKind.SC,)
    replicates: int = 2
    g: float = 0.3
    omega: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma_values", tuple(float(v) for v in self.gamma_values))
        object.__setattr__(self, "beta_values", tuple(float(v) for v in self.beta_values))
        object.__setattr__(self, "models", tuple(ModelKind(m) for m in self.models))
        for name in ("gamma_values", "beta_values"):
            vals = getattr(self, name)
            if not vals:
                raise ValueError(f"{name} must be non-empty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly increasing, got {vals}")
        if not self.models:
            raise ValueError("models must be non-empty")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")

    def __len__(self) -> int:
        return len(self.gamma_values) * len(self.beta_values) * len(self.models)

    def spec_for(self, model: ModelKind, gamma: float, beta: float) -> ModelSpec:
        """Model spec at a grid point; CNC emulates the grid beta."""
        if model is ModelKind.CNC:
            return ModelSpec.cnc_at(gamma, beta, g=self.g, omega=self.omega)
        return ModelSpec(kind=model, gamma=gamma, beta=beta, g=self.g,
                         omega=self.omega)

    def to_jsonable(self) -> dict:
        return {
            "gamma_values": list(self.gamma_values),
            "beta_values": list(self.beta_values),
            "models": [m.value for m in self.models],
            "replicates": self.replicates,
            "g": self.g,
            "omega": self.omega,
        }

    def content_hash(self) -> str:
        payload = json.dumps(self.to_jsonable(), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class SweepRecord:
    """One grid point result (or failure) of a sweep."""

    model: ModelKind
    gamma: float
    beta: float
    replicate: int
    seed: int
    lam: float = math.nan
    lambda_stderr: float = math.nan
    k: float = math.nan
    attractor_class: str = ""
    error: str = ""
    runtime: float = 0.0          # informational; not part of the canonical CSV
    section_file: str = ""        # reference to an exported section, if any

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", ModelKind(self.model))
        if not self.error and not math.isnan(self.k):
            if abs(self.k - (self.lam + self.gamma)) > 1.0e-12:
                raise ValueError("k must equal lambda + gamma")

    @property
    def ok(self) -> bool:
        return self.error == ""

    def sort_key(self):
        return (self.model.value, self.gamma, self.beta, self.replicate)


def desk_grid(models=(ModelKind.SC,), replicates: int = 2) -> SweepGrid:
    """12 gammas x 9 betas laptop-scale preset."""
    return SweepGrid(gamma_values=DESK_GAMMAS, beta_values=DESK_BETAS,
                     models=tuple(models), replicates=replicates)


def desk_config(seed: int = 0) -> IntegratorConfig:
    """200 transient + 200 measured periods at dt = T/1000."""
    return IntegratorConfig(transient_periods=200, measure_periods=200, seed=seed)


def build_grid(config_path) -> tuple[SweepGrid, IntegratorConfig]:
    """Materialize a sweep from a JSON config file.

    Recognized keys: ``preset`` ("desk"), ``gamma_values`` or
    ``gamma_range``+``gamma_step``, ``beta_values`` or ``beta_points``,
    ``models``, ``replicates``, ``g``, ``omega``, and the integrator
    fields ``steps_per_period``, ``transient_periods``,
    ``measure_periods``, ``seed``, ``scheme``.
    """
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed sweep config {config_path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError("sweep config must be a JSON object")

    if raw.get("preset") == "desk":
        grid = desk_grid(models=tuple(ModelKind(m) for m in raw.get("models", ["sc"])),
                         replicates=int(raw.get("replicates", 2)))
    elif raw.get("preset") is not None:
        raise ValueError(f"unknown preset {raw['preset']!r}")
    else:
        if "gamma_values" in raw:
            gammas = tuple(float(v) for v in raw["gamma_values"])
        elif "gamma_range" in raw:
            lo, hi = raw["gamma_range"]
            gammas = arithmetic_gamma_grid(float(lo), float(hi),
                                           float(raw.get("gamma_step", 0.002)))
        else:
            gammas = default_gamma_grid()
        if "beta_values" in raw:
            betas = tuple(sorted(float(v) for v in raw["beta_values"]))
        else:
            betas = default_beta_grid(int(raw.get("beta_points", 33)))
        grid = SweepGrid(gamma_values=gammas, beta_values=betas,
                         models=tuple(ModelKind(m) for m in raw.get("models", ["sc"])),
                         replicates=int(raw.get("replicates", 2)),
                         g=float(raw.get("g", 0.3)),
                         omega=float(raw.get("omega", 1.0)))

    spp = int(raw.get("steps_per_period", 1000))
    if spp < 1:
        raise ValueError("steps_per_period must be >= 1")
    dt = (2.0 * math.pi / grid.omega) / spp
    config = IntegratorConfig(
        dt=dt,
        transient_periods=int(raw.get("transient_periods", 200)),
        measure_periods=int(raw.get("measure_periods", 200)),
        seed=int(raw.get("seed", 0)),
        scheme=Scheme(raw.get("scheme", "euler_maruyama")),
    )
    return grid, config


_MODEL_IDS = {k: i for i, k in enumerate(ModelKind)}


def seed_for(root_seed: int, model: ModelKind, gamma_index: int,
             beta_index: int, replicate: int) -> int:
    """Unique, order-independent seed for one grid point."""
    ss = np.random.SeedSequence(entropy=int(root_seed),
                                spawn_key=(_MODEL_IDS[ModelKind(model)],
                                           int(gamma_index), int(beta_index),
                                           int(replicate)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _sweep_point(payload: dict) -> dict:
    """Worker entry: one (model, gamma, beta, replicate) Lyapunov job."""
    import time

    grid = SweepGrid(**payload["grid"])
    model = ModelKind(payload["model"])
    gamma = payload["gamma"]
    beta = payload["beta"]
    spec = grid.spec_for(model, gamma, beta)
    config = IntegratorConfig(**payload["config"]).with_seed(payload["seed"])
    t0 = time.perf_counter()
    out = {"model": model.value, "gamma": gamma, "beta": beta,
           "replicate": payload["replicate"], "seed": payload["seed"]}
    try:
        est = lyapunov_wolf(spec, config)
        rec = ComplexityRecord.from_lambda(est.lam, gamma)
        out.update(lam=est.lam, lambda_stderr=est.stderr, k=rec.k,
                   attractor_class=rec.attractor_class.value, error="")
    except (DuffingError, ValueError) as exc:
        out.update(lam=math.nan, lambda_stderr=math.nan, k=math.nan,
                   attractor_class="", error=f"{type(exc).__name__}: {exc}")
    out["runtime"] = time.perf_counter() - t0
    if payload.get("section_dir") and payload["replicate"] == 0:
        out["section_file"] = _write_point_section(spec, config, payload)
    return out


def _write_point_section(spec: ModelSpec, config: IntegratorConfig,
                         payload: dict) -> str:
    """Export one section per grid cell (its own seed stream, >= 500 points)."""
    sec_seed = seed_for(payload["root_seed"], ModelKind(payload["model"]),
                        payload["gamma_index"], payload["beta_index"],
                        payload["n_replicates"])
    periods = max(500, config.measure_periods)
    sec_cfg = IntegratorConfig(dt=config.dt, transient_periods=config.transient_periods,
                               measure_periods=periods, seed=sec_seed,
                               scheme=config.scheme)
    name = (f"section_{payload['model']}_g{payload['gamma']:.6g}_"
            f"b{payload['beta']:.6g}.csv")
    path = os.path.join(payload["section_dir"], name)
    try:
        traj = integrate(spec, config=sec_cfg, observers=SamplingPlan())
        write_section_csv(poincare_section(traj), path,
                          header_comment=f"model={payload['model']} gamma={payload['gamma']} "
                                         f"beta={payload['beta']} seed={sec_seed}")
        return name
    except DuffingError:
        return ""


def _config_jsonable(config: IntegratorConfig) -> dict:
    return {"dt": config.dt, "transient_periods": config.transient_periods,
            "measure_periods": config.measure_periods, "seed": config.seed,
            "scheme": config.scheme.value}


def max_worker_count() -> int:
    """Worker cap: DUFFING_THREADS if set, else the CPU count."""
    env = os.environ.get("DUFFING_THREADS", "").strip()
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"DUFFING_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def run_sweep(grid: SweepGrid, config: IntegratorConfig | None = None, *,
              max_workers: int | None = None,
              section_dir: str | None = None) -> list[SweepRecord]:
    """Run the full grid and return records sorted canonically.

    ``section_dir``, when given, also exports one Poincare section CSV
    per grid cell (written by the replicate-0 job under its own derived
    seed).  Results are independent of ``max_workers``.
    """
    config = config or desk_config()
    if section_dir:
        os.makedirs(section_dir, exist_ok=True)
    grid_payload = grid.to_jsonable()
    config_payload = _config_jsonable(config)
    tasks = []
    for model in grid.models:
        for gi, gamma in enumerate(grid.gamma_values):
            for bi, beta in enumerate(grid.beta_values):
                for rep in range(grid.replicates):
                    tasks.append({
                        "grid": grid_payload, "config": config_payload,
                        "model": model.value, "gamma": gamma, "beta": beta,
                        "gamma_index": gi, "beta_index": bi, "replicate": rep,
                        "n_replicates": grid.replicates,
                        "root_seed": config.seed,
                        "seed": seed_for(config.seed, model, gi, bi, rep),
                        "section_dir": section_dir,
                    })

    workers = min(max_workers or max_worker_count(), len(tasks))
    if workers <= 1:
        raw = [_sweep_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_sweep_point, tasks, chunksize=4))
    records = [SweepRecord(model=ModelKind(r["model"]), gamma=r["gamma"],
                           beta=r["beta"], replicate=r["replicate"],
                           seed=r["seed"], lam=r["lam"],
                           lambda_stderr=r["lambda_stderr"], k=r["k"],
                           attractor_class=r["attractor_class"],
                           error=r["error"], runtime=r["runtime"],
                           section_file=r.get("section_file", ""))
               for r in raw]
    records.sort(key=SweepRecord.sort_key)
    return records


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _record_row(rec: SweepRecord) -> str:
    if rec.ok:
        lam, se, k = _fmt(rec.lam), _fmt(rec.lambda_stderr), _fmt(rec.k)
    else:
        lam = se = k = ""
    err = rec.error.replace(",", ";").replace("\n", " ")
    return (f"{rec.model.value},{_fmt(rec.gamma)},{_fmt(rec.beta)},"
            f"{rec.replicate},{rec.seed},{lam},{se},{k},"
            f"{rec.attractor_class},{err}")


def _manifest_path(path: str) -> str:
    return str(path) + ".manifest.json"


def write_records(records: list[SweepRecord], path, grid: SweepGrid,
                  config: IntegratorConfig) -> None:
    """Write the canonical CSV + manifest; merges with an existing file.

    Re-running an identical sweep rewrites byte-identical output.  A
    partial sweep appended later merges keyed by coordinates (new rows
    win); mixing grids is rejected via the manifest hash.
    """
    path = str(path)
    merged: dict[tuple, SweepRecord] = {}
    if os.path.exists(path):
        old_records = read_records(path)
        old_manifest = read_manifest(path)
        if old_manifest["grid_hash"] != grid.content_hash():
            raise ValueError("existing records belong to a different grid "
                             "(manifest grid-hash mismatch)")
        for rec in old_records:
            merged[rec.sort_key()] = rec
    for rec in records:
        merged[rec.sort_key()] = rec
    final = sorted(merged.values(), key=SweepRecord.sort_key)

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_CSV_HEADER + "\n")
        for rec in final:
            fh.write(_record_row(rec) + "\n")

    failures = [{"model": r.model.value, "gamma": r.gamma, "beta": r.beta,
                 "replicate": r.replicate, "error": r.error}
                for r in final if not r.ok]
    sections = {f"{r.model.value},{_fmt(r.gamma)},{_fmt(r.beta)}": r.section_file
                for r in final if r.section_file}
    manifest = {
        "format": 1,
        "code_version": __version__,
        "grid": grid.to_jsonable(),
        "grid_hash": grid.content_hash(),
        "config": _config_jsonable(config),
        "n_records": len(final),
        "failures": failures,
        "sections": sections,
    }
    with open(_manifest_path(path), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_manifest(path) -> dict:
    mpath = _manifest_path(str(path))
    if not os.path.exists(mpath):
        raise FileNotFoundError(f"missing manifest {mpath}")
    with open(mpath, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    recomputed = hashlib.sha256(
        json.dumps(manifest["grid"], sort_keys=True).encode("utf-8")).hexdigest()
    if recomputed != manifest["grid_hash"]:
        raise ValueError("manifest grid-hash mismatch: file corrupt or edited")
    return manifest


def read_records(path) -> list[SweepRecord]:
    """Parse a canonical records CSV back into SweepRecord objects."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != _CSV_HEADER:
            raise ValueError(f"unexpected records header {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != 10:
                raise ValueError(f"corrupt record at line {line_no}: {line!r}")
            (model, gamma, beta, rep, seed, lam, se, k, cls, err) = cells
            records.append(SweepRecord(
                model=ModelKind(model), gamma=float(gamma), beta=float(beta),
                replicate=int(rep), seed=int(seed),
                lam=float(lam) if lam else math.nan,
                lambda_stderr=float(se) if se else math.nan,
                k=float(k) if k else math.nan,
                attractor_class=cls, error=err))
    return records


def _mean_k_by_point(records: list[SweepRecord], model: ModelKind | None,
                     gamma_range: tuple[float, float]):
    """(betas, gammas, K matrix with NaN for missing/failed points)."""
    kinds = {r.model for r in records}
    if model is None:
        if len(kinds) > 1:
            raise ValueError("records mix models; pass model= explicitly")
        model = next(iter(kinds))
    rows = [r for r in records
            if r.model is model and gamma_range[0] < r.gamma <= gamma_range[1]]
    if not rows:
        raise ValueError(f"no records for model {model.value} with gamma in "
                         f"({gamma_range[0]}, {gamma_range[1]}]")
    gammas = sorted({r.gamma for r in rows})
    betas = sorted({r.beta for r in rows})
    acc: dict[tuple, list[float]] = {}
    for r in rows:
        if r.ok:
            acc.setdefault((r.gamma, r.beta), []).append(r.k)
    kmat = np.full((len(gammas), len(betas)), math.nan)
    for i, g in enumerate(gammas):
        for j, b in enumerate(betas):
            vals = acc.get((g, b))
            if vals:
                kmat[i, j] = float(np.mean(vals))
    return betas, gammas, kmat


def detect_beta_chaos(records: list[SweepRecord],
                      gamma_range: tuple[float, float] = INTERMEDIATE_GAMMA_RANGE,
                      model: ModelKind | None = None):
    """Smallest grid beta at and above which every gamma is chaotic.

    A beta column with missing or failed gammas never qualifies.
    Returns None when no suffix of the beta grid is all-chaotic.
    """
    betas, _, kmat = _mean_k_by_point(records, model, gamma_range)
    col_ok = [bool(np.all(np.isfinite(kmat[:, j]))
                   and np.all(kmat[:, j] > CHAOS_THRESHOLD))
              for j in range(len(betas))]
    answer = None
    for j in range(len(betas) - 1, -1, -1):
        if not col_ok[j]:
            break
        answer = betas[j]
    return answer


def detect_beta_conv(records: list[SweepRecord],
                     gamma_range: tuple[float, float] = INTERMEDIATE_GAMMA_RANGE,
                     model: ModelKind | None = None, theta: float = 0.25,
                     reference_beta: float = 1.0e-5):
    """Smallest grid beta where std over gamma of K flattens.

    The threshold is ``theta`` times the K spread at ``reference_beta``
    (the nearly classical scale, which must be a grid point).  Returns
    None when the spread never drops that far.
    """
    betas, _, kmat = _mean_k_by_point(records, model, gamma_range)
    if reference_beta not in betas:
        raise ValueError(f"reference beta {reference_beta} is not a grid point")
    stds = []
    for j in range(len(betas)):
        col = kmat[:, j]
        stds.append(float(np.std(col)) if np.all(np.isfinite(col)) else math.nan)
    ref = stds[betas.index(reference_beta)]
    if math.isnan(ref):
        raise ValueError("K spread at the reference beta is unavailable")
    for j, beta in enumerate(betas):
        if not math.isnan(stds[j]) and stds[j] <= theta * ref:
            return beta
    return None
