#!/usr/bin/env python3
"""Train a model on 1-D modular multiplication: b = a*s mod 251.

The model sees only (a, b) token pairs in base 81 and must internalize
the fixed secret multiplier.  On 2 CPU cores this reaches 95%+ exact
accuracy in about a minute.
"""
import torch

from lwe_attack.harness import run_task
from lwe_attack.presets import desk_1d_config

torch.set_num_threads(torch.get_num_threads())

cfg = desk_1d_config(seed=0)
print(f"q={cfg.lwe.q}, base {cfg.base_in}, model "
      f"{cfg.model.enc_dim}/{cfg.model.dec_dim} dims, "
      f"{cfg.model.epoch_size} examples/epoch\n")

report = run_task("1d-modmul", cfg, log=print)

print(f"\nsuccess: {report.success}")
print(f"best exact accuracy: {report.best_accuracy:.4f}")
if report.log2_examples:
    print(f"examples consumed: 2^{report.log2_examples:.2f} "
          f"in {report.wall_clock_s:.0f}s")
