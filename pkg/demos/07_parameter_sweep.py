#!/usr/bin/env python3
"""Sweeps: one attack per grid cell, three-way outcome coding to CSV.

Oracle predictors make the full grid run in seconds while exercising
exactly the machinery a training sweep would use.  Swap the factory for
None to train per cell instead.
"""
import dataclasses
import sys
import tempfile
from pathlib import Path

from lwe_attack import ExactOracle, NoisyOracle
from lwe_attack.harness import ExperimentConfig, load_sweep_csv, run_sweep
from lwe_attack.data import LweParams
import numpy as np

cfg = dataclasses.replace(
    ExperimentConfig(lwe=LweParams(n=16, q=251, sigma=3.0, hamming=2),
                     test_size=2000, seed=9),
    sweep={"n": (10, 30, 64), "hamming": (1, 3, 5)})


def factory(cell_cfg):
    # an imperfect oracle: cells with more secret bits get a weaker
    # predictor, so the grid shows all three outcome colours
    h = cell_cfg.lwe.hamming_weight
    hit = {1: 0.95, 3: 0.5, 5: 0.22}[h]
    rng = np.random.default_rng(cell_cfg.seed)
    return lambda secret: NoisyOracle(secret, hit, 0.1, rng)


out = Path(tempfile.mkdtemp()) / "sweep.csv"
rows = run_sweep(cfg, out_csv=out, predictor_factory=factory)

print(f"{'n':>4} {'h':>3}  {'outcome':16} {'bits':>5}")
for row in load_sweep_csv(out):
    frac = "-" if row["bit_fraction"] is None else f"{row['bit_fraction']:.2f}"
    print(f"{row['n']:>4} {row['hamming']:>3}  {row['outcome']:16} {frac:>5}")
print(f"\nCSV written to {out}")
