#!/usr/bin/env python3
"""Desk-scale complexity sweep plus characteristic-scale detection.

Runs the preset (model, gamma, beta) grid, writes the canonical records
CSV + manifest, then reports per-model beta_chaos / beta_conv and the
per-damping departure scale beta_break.  Rerunning with the same seed
rewrites byte-identical output.

Usage:
    python3 scripts/run_desk_sweep.py --out results/desk --models sc
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from duffinglab import (
    ModelKind,
    beta_break,
    desk_config,
    desk_grid,
    detect_beta_chaos,
    detect_beta_conv,
    run_sweep,
    write_records,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--models", default="sc",
                    help="comma-separated model kinds")
    ap.add_argument("--replicates", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--sections", action="store_true",
                    help="also export one section CSV per grid cell")
    ap.add_argument("--out", default="results/desk")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    grid = desk_grid(models=tuple(ModelKind(m) for m in args.models.split(",")),
                     replicates=args.replicates)
    config = desk_config(seed=args.seed)
    section_dir = os.path.join(args.out, "sections") if args.sections else None

    t0 = time.perf_counter()
    records = run_sweep(grid, config, max_workers=args.workers,
                        section_dir=section_dir)
    elapsed = time.perf_counter() - t0
    path = os.path.join(args.out, "records.csv")
    write_records(records, path, grid, config)
    failures = [r for r in records if not r.ok]
    print(f"wrote {path}: {len(records)} records, {len(failures)} failures, "
          f"{elapsed:.0f}s")

    for model in grid.models:
        b_chaos = detect_beta_chaos(records, model=model)
        b_conv = detect_beta_conv(records, model=model)
        print(f"model={model.value} beta_chaos={b_chaos} beta_conv={b_conv}")
        rows = [r for r in records if r.model is model and r.ok]
        for gamma in grid.gamma_values:
            curve = {}
            for r in rows:
                if r.gamma == gamma:
                    curve.setdefault(r.beta, []).append(r)
            curve_mean = {
                b: (float(np.mean([r.lam for r in v])),
                    float(np.mean([r.lambda_stderr for r in v])))
                for b, v in curve.items()
            }
            if not curve_mean or min(curve_mean) > 1e-4:
                continue
            lam_classical = curve_mean[min(curve_mean)][0]
            bb = beta_break(curve_mean, lam_classical)
            print(f"model={model.value} gamma={gamma:g} "
                  f"lambda_classical={lam_classical:+.4f} beta_break={bb}")


if __name__ == "__main__":
    main()
