#!/usr/bin/env python3
"""
Generate a synthetic C70 slit-width dataset for the fit command.

Widths are computed from the partially coherent model at the C70 experiment
parameters (t = 6.65 ms, D = 12 um Gaussian detector) with a chosen
delta_kx. The smallest slit carries the van der Waals flag (b -> b/3).
Optional multiplicative noise is drawn from a seeded generator.

Usage:
    python scripts/generate_synthetic_dataset.py --out data/synthetic_c70.csv
"""

import argparse
import os
import sys

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.app.core.experiment import DataPoint, ExperimentConfig, predict_fwhm_curve  # noqa: E402
from src.config.defaults import DELTA_KX  # noqa: E402
from src.utils.curve_files import write_dataset  # noqa: E402

SLIT_WIDTHS = (
    7e-08, 1e-07, 1.5e-07, 2e-07, 3e-07, 5e-07,
    7e-07, 1e-06, 1.5e-06, 2e-06, 3e-06, 5e-06,
)


def synthetic_points(delta_kx: float, noise: float = 0.0, seed: int = 0):
    cfg = ExperimentConfig()
    flags = [i == 0 for i in range(len(SLIT_WIDTHS))]
    curve = predict_fwhm_curve(SLIT_WIDTHS, delta_kx, cfg, flags)
    rng = np.random.default_rng(seed)
    factors = 1.0 + noise * rng.standard_normal(len(curve)) if noise else np.ones(len(curve))
    return [
        DataPoint(slit_width=p.a, measured_fwhm=p.value * float(f), vdw_flag=flag)
        for p, f, flag in zip(curve, factors, flags)
    ]


def main():
    parser = argparse.ArgumentParser(description="Generate a synthetic width dataset")
    parser.add_argument("--out", default="data/synthetic_c70.csv", help="Output CSV path")
    parser.add_argument("--dkx", type=float, default=DELTA_KX, help="Generating delta_kx (1/m)")
    parser.add_argument("--noise", type=float, default=0.0, help="Relative noise level")
    parser.add_argument("--seed", type=int, default=0, help="Noise seed")
    args = parser.parse_args()

    points = synthetic_points(args.dkx, args.noise, args.seed)
    comments = [
        "synthetic C70 widths: t=0.00665 s, Gaussian detector D=1.2e-05 m, slit factor 1",
        f"generating delta_kx={args.dkx!r} 1/m, noise={args.noise!r}, seed={args.seed}",
        "vdw_flag=1 marks b -> b/3 on the smallest slit",
    ]
    path = write_dataset(args.out, points, comments)
    print(f"Wrote {len(points)} points to {path}")


if __name__ == "__main__":
    main()
