#!/usr/bin/env python3
"""Stroboscopic section gallery across the damping window.

Integrates the semiclassical model at a fixed length scale for several
dampings and exports one section CSV (plus a gnuplot script) per value,
showing the attractor family from periodic windows to the two-well
chaotic sheet.

Usage:
    python3 scripts/poincare_gallery.py --beta 0.01 --out results/gallery
"""

from __future__ import annotations

import argparse
import os

from duffinglab import (
    IntegratorConfig,
    ModelKind,
    ModelSpec,
    integrate,
    poincare_section,
    write_section_csv,
)

GALLERY_GAMMAS = (0.09, 0.11, 0.125, 0.138, 0.149, 0.174, 0.2, 0.3)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default="sc", choices=[k.value for k in ModelKind])
    ap.add_argument("--beta", type=float, default=0.01)
    ap.add_argument("--periods", type=int, default=2000)
    ap.add_argument("--transient", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/gallery")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    kind = ModelKind(args.model)
    config = IntegratorConfig(transient_periods=args.transient,
                              measure_periods=args.periods, seed=args.seed)
    names = []
    for gamma in GALLERY_GAMMAS:
        if kind is ModelKind.CNC:
            spec = ModelSpec.cnc_at(gamma, args.beta)
        else:
            spec = ModelSpec(kind=kind, gamma=gamma, beta=args.beta)
        section = poincare_section(integrate(spec, config=config))
        name = f"section_{args.model}_g{gamma:g}_b{args.beta:g}.csv"
        write_section_csv(section, os.path.join(args.out, name),
                          header_comment=f"gallery gamma={gamma} "
                                         f"beta={args.beta} seed={args.seed}")
        names.append(name)
        print(f"gamma={gamma:<6g} points={len(section)} -> {name}")

    gp = os.path.join(args.out, "gallery.gp")
    rows = (len(GALLERY_GAMMAS) + 3) // 4
    with open(gp, "w", encoding="utf-8") as fh:
        fh.write("set datafile separator ','\n"
                 f"set multiplot layout {rows},4\n"
                 "set size square\nunset key\n")
        for gamma, name in zip(GALLERY_GAMMAS, names):
            fh.write(f"set title 'gamma={gamma:g}'\n"
                     f"plot '{name}' using 2:3 with dots\n")
        fh.write("unset multiplot\n")
    print(f"wrote {gp} (run: gnuplot -p {gp})")


if __name__ == "__main__":
    main()
