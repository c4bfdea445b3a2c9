"""Learning-based secret recovery for LWE instances with sparse binary secrets.

The pipeline: generate LWE data (`data`), tokenize residues in base B
(`codec`), train a gated universal sequence-to-sequence model to predict
b from a (`model`), then read the secret out of the half-trained model
with the direct and distinguisher recovery algorithms and verify it
statistically (`recovery`).  `harness` wires the loop end to end and
runs parameter sweeps; `cli` exposes it all as subcommands.
"""

from .modq import (
    ErrorSampler,
    Modulus,
    ZqVector,
    centered_lift,
    mod_dot,
    sample_error,
    wrap_distance,
    zq_vector,
)
from .data import (
    LweParams,
    SampleSet,
    SecretKey,
    combination_capacity,
    combine_samples,
    gen_plain_samples,
    gen_rlwe_samples,
    gen_secret,
    load_samples,
    save_samples,
)
from .codec import TokenSequence, Vocab, decode_int, encode_int, encode_vector
from .predictors import (
    ExactOracle,
    NoisyOracle,
    Predictor,
    UniformPredictor,
    acc_tau,
    exact_accuracy,
)
from .recovery import (
    RecoveryConfig,
    SecretGuess,
    VerificationReport,
    binarize,
    direct_recover,
    distinguisher_recover,
    verify_secret,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
