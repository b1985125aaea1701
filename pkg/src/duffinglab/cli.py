r"""Command-line front end.

Subcommands::

    simulate   trajectory CSV (t, state, energy) for one model run
    lyapunov   one-line largest-exponent record to stdout
    poincare   stroboscopic section CSV in scaled coordinates
    distance   gamma-grid distance matrix CSV (one model or two)
    spectra    strobe-sampled energy histogram CSV
    sweep      (model, gamma, beta) grid -> records CSV + manifest
    detect     characteristic scales from a records CSV

Exit codes: 0 success, 2 usage, 3 invalid parameter values, 4 I/O
failure, 5 numeric failure (spread collapse / overflow / degenerate
pair).  Errors print a single machine-parsable line on stderr.  All
files are written under ``--out``; every output embeds a header comment
with the full invocation and the seed that produced it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from ._version import __version__
from .integrate import IntegratorConfig, SamplingPlan, Scheme, integrate
from .geometry import (
    ENERGY_BINS_DEFAULT,
    ENERGY_RANGE_DEFAULT,
    BINS_DEFAULT,
    PHASE_RANGE_DEFAULT,
    energy_spectrum,
    mean_cross_model_distance,
    mean_intra_model_distance,
    phase_distance,
    poincare_section,
    write_distance_matrix_csv,
    write_histogram_csv,
    write_section_csv,
)
from .lyapunov import ComplexityRecord, beta_break, lyapunov_wolf
from .models import BETA_FIXED, DuffingError, ModelKind, ModelSpec
from .sweep import (
    build_grid,
    desk_config,
    desk_grid,
    detect_beta_chaos,
    detect_beta_conv,
    read_records,
    run_sweep,
    seed_for,
    write_records,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_IO = 4
EXIT_NUMERIC = 5


def _spec_from_args(args) -> ModelSpec:
    kind = ModelKind(args.model)
    if kind is ModelKind.CNC:
        return ModelSpec.cnc_at(args.gamma, args.beta, g=args.g, omega=args.omega)
    return ModelSpec(kind=kind, gamma=args.gamma, beta=args.beta,
                     g=args.g, omega=args.omega)


def _config_from_args(args, default_measure: int) -> IntegratorConfig:
    period = 2.0 * math.pi / args.omega
    dt = args.dt if args.dt is not None else period / args.steps_per_period
    return IntegratorConfig(dt=dt,
                            transient_periods=args.transient,
                            measure_periods=args.periods or default_measure,
                            seed=args.seed,
                            scheme=Scheme(args.scheme))


_ARGV: list | None = None


def _invocation() -> str:
    argv = _ARGV if _ARGV is not None else sys.argv[1:]
    return "duffing-lab " + " ".join(str(a) for a in argv)


def _header(args, seed: int) -> str:
    return f"{_invocation()}\nversion={__version__} seed={seed}"


def _outpath(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _add_model_flags(p: argparse.ArgumentParser, gamma_required: bool = True) -> None:
    p.add_argument("--model", required=True,
                   choices=[k.value for k in ModelKind],
                   help="which dynamical model to run")
    p.add_argument("--gamma", type=float, required=gamma_required,
                   help="damping")
    p.add_argument("--beta", type=float, default=1.0e-2,
                   help="length scale (for cnc: the emulated scale; the "
                        f"model itself is pinned at {BETA_FIXED})")
    p.add_argument("--g", type=float, default=0.3, help="drive amplitude")
    p.add_argument("--omega", type=float, default=1.0, help="drive frequency")


def _add_integrator_flags(p: argparse.ArgumentParser, periods_default: int) -> None:
    p.add_argument("--dt", type=float, default=None,
                   help="timestep; must divide the drive period")
    p.add_argument("--steps-per-period", type=int, default=1000,
                   help="timestep as a divisor of the period (default 1000)")
    p.add_argument("--transient", type=int, default=200,
                   help="discarded drive periods")
    p.add_argument("--periods", type=int, default=periods_default,
                   help="measured drive periods")
    p.add_argument("--seed", type=int, default=0, help="root seed")
    p.add_argument("--scheme", default="euler_maruyama",
                   choices=[s.value for s in Scheme])


def _add_common_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--gnuplot-script", action="store_true",
                   help="also emit a gnuplot rendering script")


def _tag(args) -> str:
    return f"{args.model}_g{args.gamma:g}_b{args.beta:g}"


def _write_gnuplot(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(["# generated by " + _invocation()] + lines) + "\n")


def _cmd_simulate(args) -> int:
    spec = _spec_from_args(args)
    config = _config_from_args(args, default_measure=200)
    plan = SamplingPlan(dense_stride=args.dense_stride)
    traj = integrate(spec, config=config, observers=plan)
    path = _outpath(args, f"trajectory_{_tag(args)}.csv")
    traj.to_csv(path, header_comment=_header(args, config.seed))
    print(f"wrote {path} rows={len(traj.times)} strobes={len(traj.strobe_indices)}")
    if args.gnuplot_script:
        gp = path + ".gp"
        _write_gnuplot(gp, [
            "set datafile separator ','",
            "set xlabel 't'", "set ylabel 'x'",
            f"plot '{os.path.basename(path)}' using 1:2 with lines title 'x(t)'",
        ])
        print(f"wrote {gp}")
    return EXIT_OK


def _cmd_lyapunov(args) -> int:
    spec = _spec_from_args(args)
    config = _config_from_args(args, default_measure=200)
    est = lyapunov_wolf(spec, config, d0=args.d0)
    rec = ComplexityRecord.from_lambda(est.lam, spec.gamma)
    print(f"model={args.model} gamma={spec.gamma:.17g} beta={args.beta:.17g} "
          f"lambda={est.lam:.17g} stderr={est.stderr:.17g} k={rec.k:.17g} "
          f"class={rec.attractor_class.value} n_renorms={est.n_renorms} "
          f"d0={est.d0:.17g} seed={config.seed}")
    return EXIT_OK


def _cmd_poincare(args) -> int:
    spec = _spec_from_args(args)
    config = _config_from_args(args, default_measure=1000)
    traj = integrate(spec, config=config)
    section = poincare_section(traj)
    path = _outpath(args, f"section_{_tag(args)}.csv")
    write_section_csv(section, path, header_comment=_header(args, config.seed))
    print(f"wrote {path} points={len(section)}")
    if args.gnuplot_script:
        gp = path + ".gp"
        _write_gnuplot(gp, [
            "set datafile separator ','",
            "set xlabel 'x*beta'", "set ylabel 'p*beta'",
            "set size square",
            f"plot '{os.path.basename(path)}' using 2:3 with dots notitle",
        ])
        print(f"wrote {gp}")
    return EXIT_OK


def _parse_gamma_grid(args) -> list[float]:
    if args.gamma_grid:
        values = sorted(float(v) for v in args.gamma_grid.split(","))
        if not values:
            raise ValueError("empty --gamma-grid")
        return values
    from .sweep import DESK_GAMMAS
    return list(DESK_GAMMAS)


def _sections_for(args, model: str, gammas: list[float], config: IntegratorConfig):
    sections = {}
    model_kind = ModelKind(model)
    for gi, gamma in enumerate(gammas):
        seed = seed_for(config.seed, model_kind, gi, 0, 0)
        ns = argparse.Namespace(**vars(args))
        ns.model = model
        ns.gamma = gamma
        spec = _spec_from_args(ns)
        traj = integrate(spec, config=config.with_seed(seed))
        sections[gamma] = poincare_section(traj)
    return sections


def _cmd_distance(args) -> int:
    gammas = _parse_gamma_grid(args)
    config = _config_from_args(args, default_measure=2000)
    sections1 = _sections_for(args, args.model, gammas, config)
    value_range = (args.range_min, args.range_max)
    if args.model2:
        sections2 = _sections_for(args, args.model2, gammas, config)
        summary = mean_cross_model_distance(sections1, sections2,
                                            bins=args.bins, value_range=value_range)
        other = sections2
        label = f"cross model {args.model} vs {args.model2}"
    else:
        summary = mean_intra_model_distance(sections1,
                                            bins=args.bins, value_range=value_range)
        other = sections1
        label = f"intra model {args.model}"
    n = len(gammas)
    matrix = np.zeros((n, n))
    for i, g1 in enumerate(gammas):
        for j, g2 in enumerate(gammas):
            if args.model2 is None and i == j:
                continue
            res = phase_distance(sections1[g1], other[g2], bins=args.bins,
                                 value_range=value_range)
            matrix[i, j] = res.value
    path = _outpath(args, f"distance_{args.model}"
                          + (f"_vs_{args.model2}" if args.model2 else "")
                          + f"_b{args.beta:g}.csv")
    write_distance_matrix_csv(gammas, matrix, path,
                              header_comment=_header(args, config.seed))
    print(f"wrote {path}")
    print(f"{label} beta={args.beta:g}: mean={summary.value:.6g} "
          f"excluded={summary.n_excluded}/{summary.n_pairs} "
          f"flagged={summary.flagged}")
    if args.gnuplot_script:
        gp = path + ".gp"
        _write_gnuplot(gp, [
            "set datafile separator ','",
            "set view map",
            f"splot '{os.path.basename(path)}' matrix rowheaders columnheaders with image",
        ])
        print(f"wrote {gp}")
    return EXIT_OK


def _cmd_spectra(args) -> int:
    spec = _spec_from_args(args)
    config = _config_from_args(args, default_measure=2000)
    traj = integrate(spec, config=config)
    hist = energy_spectrum(traj, bins=args.bins,
                           value_range=(args.energy_min, args.energy_max))
    path = _outpath(args, f"spectrum_{_tag(args)}.csv")
    write_histogram_csv(hist, path, header_comment=_header(args, config.seed))
    print(f"wrote {path} occupancy={hist.occupancy} "
          f"out_of_range={hist.n_out_of_range}")
    if args.gnuplot_script:
        gp = path + ".gp"
        _write_gnuplot(gp, [
            "set datafile separator ','",
            "set style fill solid", "set xlabel 'scaled energy'",
            f"plot '{os.path.basename(path)}' using 1:3 with boxes notitle",
        ])
        print(f"wrote {gp}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if args.config:
        grid, config = build_grid(args.config)
    else:
        grid = desk_grid(models=tuple(args.models.split(",")),
                         replicates=args.replicates)
        config = desk_config(seed=args.seed)
    section_dir = _outpath(args, "sections") if args.sections else None
    records = run_sweep(grid, config, max_workers=args.workers,
                        section_dir=section_dir)
    path = _outpath(args, args.records)
    write_records(records, path, grid, config)
    n_fail = sum(1 for r in records if not r.ok)
    print(f"wrote {path} records={len(records)} failures={n_fail}")
    return EXIT_OK


def _cmd_detect(args) -> int:
    records = read_records(args.records)
    models = sorted({r.model for r in records}, key=lambda k: k.value)
    report: dict = {"records": args.records, "models": {}}
    for model in models:
        b_chaos = detect_beta_chaos(records, model=model)
        b_conv = detect_beta_conv(records, model=model)
        entry = {"beta_chaos": b_chaos, "beta_conv": b_conv, "beta_break": {}}
        rows = [r for r in records if r.model is model and r.ok]
        gammas = sorted({r.gamma for r in rows})
        for gamma in gammas:
            curve = {}
            for r in rows:
                if r.gamma == gamma:
                    curve.setdefault(r.beta, []).append((r.lam, r.lambda_stderr))
            curve_mean = {b: (float(np.mean([v[0] for v in vs])),
                              float(np.mean([v[1] for v in vs])))
                          for b, vs in curve.items()}
            if min(curve_mean) > 1.0e-4:
                continue
            lam_classical = curve_mean[min(curve_mean)][0]
            bb = beta_break(curve_mean, lam_classical)
            entry["beta_break"][f"{gamma:.17g}"] = bb
        report["models"][model.value] = entry
        print(f"model={model.value} beta_chaos={b_chaos} beta_conv={b_conv}")
        for gkey, bb in entry["beta_break"].items():
            print(f"model={model.value} gamma={gkey} beta_break={bb}")
    path = _outpath(args, "detect_report.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duffing-lab",
        description="Duffing oscillator laboratory across the "
                    "quantum-classical transition")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    _add_model_flags(p)
    _add_integrator_flags(p, periods_default=200)
    _add_common_output_flags(p)
    p.add_argument("--dense-stride", type=int, default=0,
                   help="record every Nth step (0: strobe samples only)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("lyapunov", help="largest Lyapunov exponent")
    _add_model_flags(p)
    _add_integrator_flags(p, periods_default=200)
    p.add_argument("--d0", type=float, default=1.0e-8,
                   help="pair separation in the scaled norm")
    p.set_defaults(func=_cmd_lyapunov)

    p = sub.add_parser("poincare", help="stroboscopic section CSV")
    _add_model_flags(p)
    _add_integrator_flags(p, periods_default=1000)
    _add_common_output_flags(p)
    p.set_defaults(func=_cmd_poincare)

    p = sub.add_parser("distance", help="gamma-grid attractor distances")
    _add_model_flags(p, gamma_required=False)
    _add_integrator_flags(p, periods_default=2000)
    _add_common_output_flags(p)
    p.add_argument("--model2", default=None,
                   choices=[k.value for k in ModelKind],
                   help="second model for cross-model distances")
    p.add_argument("--gamma-grid", default=None,
                   help="comma-separated gammas (default: desk preset)")
    p.add_argument("--bins", type=int, default=BINS_DEFAULT)
    p.add_argument("--range-min", type=float, default=PHASE_RANGE_DEFAULT[0])
    p.add_argument("--range-max", type=float, default=PHASE_RANGE_DEFAULT[1])
    p.set_defaults(func=_cmd_distance)

    p = sub.add_parser("spectra", help="strobe-sampled energy histogram")
    _add_model_flags(p)
    _add_integrator_flags(p, periods_default=2000)
    _add_common_output_flags(p)
    p.add_argument("--bins", type=int, default=ENERGY_BINS_DEFAULT)
    p.add_argument("--energy-min", type=float, default=ENERGY_RANGE_DEFAULT[0])
    p.add_argument("--energy-max", type=float, default=ENERGY_RANGE_DEFAULT[1])
    p.set_defaults(func=_cmd_spectra)

    p = sub.add_parser("sweep", help="run a (model, gamma, beta) grid")
    p.add_argument("--config", default=None, help="JSON sweep config")
    p.add_argument("--models", default="sc",
                   help="comma-separated model kinds (no --config)")
    p.add_argument("--replicates", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--records", default="records.csv",
                   help="records CSV name under --out")
    p.add_argument("--sections", action="store_true",
                   help="also export one section CSV per grid cell")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: DUFFING_THREADS or CPUs)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("detect", help="characteristic scales from records")
    p.add_argument("--records", required=True, help="records CSV path")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=_cmd_detect)

    return parser


def main(argv=None) -> int:
    global _ARGV
    _ARGV = list(sys.argv[1:]) if argv is None else [str(a) for a in argv]
    parser = build_parser()
    args = parser.parse_args(_ARGV)
    try:
        return args.func(args)
    except DuffingError as exc:
        print(f'error code={EXIT_NUMERIC} kind=numeric message="{exc}"',
              file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError) as exc:
        print(f'error code={EXIT_INVALID} kind=invalid message="{exc}"',
              file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f'error code={EXIT_IO} kind=io message="{exc}"', file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
