#!/usr/bin/env python3
"""The full loop: train, guess, verify, iterate.

By default this injects an exact oracle in place of the model, which
exercises every pipeline stage in seconds (data generation, the probe
schedule, binarization, the distinguisher, verification, reporting).
Run with --train for the real thing: a model trained from scratch on
n=16, q=251, Hamming-weight-2 data until a candidate verifies.  That
takes on the order of an hour or two on a couple of CPU cores.
"""
import argparse
import json

from lwe_attack import ExactOracle
from lwe_attack.harness import run_attack
from lwe_attack.presets import desk_attack_config

parser = argparse.ArgumentParser()
parser.add_argument("--train", action="store_true",
                    help="train a real model instead of injecting an oracle")
parser.add_argument("--seed", type=int, default=0)
args = parser.parse_args()

cfg = desk_attack_config(seed=args.seed)
print(f"instance: n={cfg.lwe.n}, q={cfg.lwe.q}, h={cfg.lwe.hamming_weight}, "
      f"sigma={cfg.lwe.sigma}")

if args.train:
    print("training mode: this will run until recovery or budget exhaustion\n")
    report = run_attack(cfg, log=print)
else:
    print("oracle mode: injecting an exact predictor (use --train for real)\n")
    report = run_attack(cfg, predictor=ExactOracle, log=print)

print()
print(json.dumps({k: v for k, v in report.to_dict().items()
                  if k not in ("acc_curve", "loss_curve")}, indent=2))
