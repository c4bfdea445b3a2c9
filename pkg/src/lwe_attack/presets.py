"""Reference configurations sized for a single commodity machine.

Two calibrated presets: learning 1-D modular multiplication at q=251,
and a full end-to-end attack at n=16, q=251, Hamming weight 2.  Both
shrink the model far below the full-size architecture while keeping the
family (gated universal transformer, asymmetric encoder/decoder); both
finish on CPUs in minutes to a couple of hours.
"""

from __future__ import annotations

from .data import LweParams
from .harness import ExperimentConfig
from .model import ModelConfig
from .recovery import RecoveryConfig

DESK_MODEL = ModelConfig(
    enc_dim=128, dec_dim=64,
    enc_heads=4, dec_heads=4,
    enc_layers=2, dec_layers=2,
    enc_loops=2, dec_loops=2,
    ffn_mult=2,
    batch_size=64,
    lr=1e-3, warmup_steps=500,
    epoch_size=65536,
)


def desk_1d_config(seed: int = 0) -> ExperimentConfig:
    """1-D modular multiplication, q=251, base 81: reaches 95% exact
    accuracy within one 2^16-example epoch on 2 CPU cores (~1 minute)."""
    return ExperimentConfig(
        lwe=LweParams(n=1, q=251, sigma=0.0, secret_dist="uniform"),
        model=DESK_MODEL,
        seed=seed,
        max_epochs=32,            # 32 * 2^16 = 2^21 examples total
        max_samples=2**21,
        wall_clock_s=2 * 3600,
        test_size=10_000,
    )


def desk_attack_config(seed: int = 0) -> ExperimentConfig:
    """End-to-end attack on n=16, q=251, Hamming-weight-2 binary secrets
    with sigma=3 noise, sized to recover within a few million examples."""
    return ExperimentConfig(
        lwe=LweParams(n=16, q=251, sigma=3.0, hamming=2),
        model=ModelConfig(
            enc_dim=128, dec_dim=64,
            enc_heads=4, dec_heads=4,
            enc_loops=2, dec_loops=2,
            ffn_mult=2,
            batch_size=64,
            lr=1e-3, warmup_steps=500,
            epoch_size=32768,
        ),
        recovery=RecoveryConfig(acc_sample_count=2000),
        seed=seed,
        max_epochs=128,
        max_samples=2**22,
        wall_clock_s=4 * 3600,
        test_size=10_000,
    )
