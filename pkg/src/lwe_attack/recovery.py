"""Secret recovery from a predictor, plus statistical verification.

Two recovery routes, both written against the Predictor interface and
never against the concrete model:

* direct recovery probes the predictor with K*e_i for each unit
  direction i and binarizes the resulting score vector six ways
  (mean / softmax-mean / mode thresholds, each in both polarities);

* distinguisher recovery shifts one input column at a time by uniform
  noise and compares how often predictions stay near the recorded b
  against a uniform baseline.  A shifted column leaves the instance
  distribution intact exactly when the corresponding secret bit is 0,
  so a per-coordinate count gap reads off the bit.

Verification accepts a candidate when the centered residuals
b - a.candidate mod q have the small standard deviation of the error
distribution instead of the ~q/sqrt(12) of uniform noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import SampleSet
from .modq import centered_lift_array, wrap_distance_array
from .predictors import PREDICTION_FAILED, Predictor

DIRECT_METHODS = ("mean-01", "mean-10", "softmax-mean-01", "softmax-mean-10",
                  "mode-01", "mode-10")


@dataclass(frozen=True)
class RecoveryConfig:
    """Knobs for both recovery routes.

    The fixed probe constants are reduced mod q at use (a zero reduction
    is replaced by q-1); the random probes are drawn from (q, 10q).
    distinguisher_trigger is the accuracy level at which the attack loop
    starts running the distinguisher; the algorithm itself only needs
    acc > 2*tau.
    """

    tau: float = 0.1
    fixed_k: tuple = (239145, 42899, "q-1", "3q+7", 42900)
    random_k_count: int = 5
    random_k_span: tuple = (1, 10)  # probes drawn from (lo*q, hi*q)
    distinguisher_trigger: float = 0.30
    distinguisher_t: int | None = None  # None: min(50, ceil(2/advantage^2))
    verify_count: int = 10_000
    acc_sample_count: int = 10_000

    def __post_init__(self):
        if not 0 < self.tau < 0.5:
            raise ValueError("tau must be in (0, 0.5)")
        if self.random_k_count < 0:
            raise ValueError("random_k_count must be >= 0")
        lo, hi = self.random_k_span
        if not 0 < lo < hi:
            raise ValueError("random_k_span must satisfy 0 < lo < hi")

    def k_schedule(self, q: int, rng: np.random.Generator) -> list:
        lo, hi = self.random_k_span
        fixed = [reduce_k(_k_value(k, q), q) for k in self.fixed_k]
        randoms = [int(rng.integers(lo * q + 1, hi * q))
                   for _ in range(self.random_k_count)]
        return fixed + [reduce_k(k, q) for k in randoms]


def _k_value(k, q: int) -> int:
    if k == "q-1":
        return q - 1
    if k == "3q+7":
        return 3 * q + 7
    return int(k)


def reduce_k(k: int, q: int) -> int:
    """Probe constants live in [1, q-1]: reduce mod q, mapping 0 to q-1."""
    k = k % q
    return k if k != 0 else q - 1


@dataclass(frozen=True)
class SecretGuess:
    candidate: np.ndarray  # {0,1}^n
    method: str
    source_k: int | None = None

    def __post_init__(self):
        cand = np.ascontiguousarray(self.candidate, dtype=np.int64)
        if cand.ndim != 1 or not np.isin(cand, (0, 1)).all():
            raise ValueError("candidate must be a flat 0/1 vector")
        object.__setattr__(self, "candidate", cand)

    def __len__(self):
        return self.candidate.size


def direct_recover(M: Predictor, K: int, n: int, q: int):
    """Probe scores p_i = M(K * e_i) for every unit direction.

    Returns (scores, missing): failed predictions are flagged in missing
    and scored as 0.
    """
    if K % q == 0:
        raise ValueError("K must be nonzero mod q")
    A = np.zeros((n, n), dtype=np.int64)
    np.fill_diagonal(A, K % q)
    scores = np.asarray(M.predict_batch(A), dtype=np.int64)
    missing = scores == PREDICTION_FAILED
    scores = np.where(missing, 0, scores)
    return scores, missing


def _threshold_pair(values: np.ndarray, thresh: float, tag: str,
                    source_k) -> list:
    # ties resolve to 0 in both polarities: secrets are mostly zeros
    above = values > thresh
    below = values < thresh
    return [
        SecretGuess(below.astype(np.int64), f"{tag}-01", source_k),
        SecretGuess(above.astype(np.int64), f"{tag}-10", source_k),
    ]


def binarize(scores: np.ndarray, q: int, source_k: int | None = None) -> list:
    """Turn a raw probe-score vector into exactly six 0/1 candidates.

    Scores are first centered-lifted and folded to magnitudes, since a
    probe response for a set bit can wrap to a numerically small residue.
    The mean and mode of the magnitudes (and the mean of their softmax)
    provide three thresholds; each is read in both polarities.
    """
    scores = np.asarray(scores, dtype=np.int64)
    mag = np.abs(centered_lift_array(scores % q, q))

    out = _threshold_pair(mag, float(mag.mean()), "mean", source_k)

    shifted = np.exp(mag - mag.max())  # stable softmax of the magnitudes
    soft = shifted / shifted.sum()
    out += _threshold_pair(soft, float(soft.mean()), "softmax-mean", source_k)

    values, counts = np.unique(mag, return_counts=True)
    top = counts == counts.max()
    if top.sum() == 1:
        mode_thresh = float(values[np.argmax(counts)])
    else:
        mode_thresh = float(mag.mean())  # ambiguous mode: fall back to mean
    out += _threshold_pair(mag, mode_thresh, "mode", source_k)
    return out


def distinguisher_t(advantage: float, cap: int = 50) -> int:
    """Per-coordinate test count min(cap, ceil(2/advantage^2))."""
    return min(cap, math.ceil(2 / advantage**2))


def distinguisher_recover(M: Predictor, n: int, q: int, acc: float, tau: float,
                          lwe: SampleSet, rng: np.random.Generator,
                          t: int | None = None) -> SecretGuess:
    """Read the secret bit-by-bit from a column-shift distinguishing test.

    acc is the predictor's measured accuracy within tolerance tau, so its
    advantage over a uniform predictor is acc - 2*tau; the routine refuses
    to run without a positive advantage.  For each coordinate i, column i
    of t held-out instances is shifted by per-row uniform noise; the count
    of predictions within floor(tau*q) of the recorded b is compared with
    the same count on fresh uniform pairs.  A gap at most advantage*t/2
    declares bit i set.
    """
    advantage = acc - 2 * tau
    if advantage <= 0:
        raise ValueError(
            f"no distinguishing advantage: acc={acc} <= 2*tau={2 * tau}")
    bound = math.floor(tau * q)
    if t is None:
        t = distinguisher_t(advantage)
    if len(lwe) < t:
        raise ValueError(f"need {t} instances, have {len(lwe)}")
    A, B = lwe.a[:t], lwe.b[:t]
    s = np.zeros(n, dtype=np.int64)
    for i in range(n):
        A_unif = rng.integers(0, q, size=(t, n), dtype=np.int64)
        B_unif = rng.integers(0, q, size=t, dtype=np.int64)
        c = rng.integers(0, q, size=t, dtype=np.int64)
        A_shift = A.copy()
        A_shift[:, i] = (A_shift[:, i] + c) % q
        c_lwe = _near_count(M.predict_batch(A_shift), B, q, bound)
        c_unif = _near_count(M.predict_batch(A_unif), B_unif, q, bound)
        if c_lwe - c_unif <= advantage * t / 2:
            s[i] = 1
    return SecretGuess(s, "distinguisher")


def _near_count(preds: np.ndarray, truth: np.ndarray, q: int, bound: int) -> int:
    preds = np.asarray(preds, dtype=np.int64)
    ok = preds != PREDICTION_FAILED
    if not ok.any():
        return 0
    return int((wrap_distance_array(preds[ok], truth[ok], q) < bound).sum())


@dataclass(frozen=True)
class VerificationReport:
    residual_stddev: float
    accepted: bool
    threshold: float


def verify_secret(guess, samples: SampleSet, sigma: float) -> VerificationReport:
    """Residual-spread test of a candidate secret against held-out samples.

    A correct candidate leaves residuals distributed like the error
    (stddev ~ sigma); a wrong one leaves them uniform (stddev ~ q/sqrt(12)).
    Acceptance requires the measured spread to sit both below q/(4*sqrt(12))
    and at most 10*sigma, far from the wrong-secret population for every
    supported (q, sigma) pairing.
    """
    if len(samples) == 0:
        raise ValueError("empty sample set")
    if len(samples) < 100:
        raise ValueError(f"need >= 100 samples to verify, got {len(samples)}")
    cand = guess.candidate if isinstance(guess, SecretGuess) else \
        np.asarray(getattr(guess, "coords", guess), dtype=np.int64)
    sd = float(samples.residuals(cand).std())
    uniform_guard = samples.q / (4 * math.sqrt(12))
    accepted = sd < uniform_guard and sd <= 10 * sigma
    return VerificationReport(sd, accepted, min(uniform_guard, 10 * sigma))


@dataclass
class RecoveryReport:
    """Everything one recovery pass produced, serialization-friendly."""

    candidates: list = field(default_factory=list)  # (SecretGuess, VerificationReport)
    winner: SecretGuess | None = None

    def record(self, guess: SecretGuess, report: VerificationReport):
        self.candidates.append((guess, report))
        if report.accepted and self.winner is None:
            self.winner = guess

    @property
    def accepted(self) -> bool:
        return self.winner is not None

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "winner": None if self.winner is None else {
                "method": self.winner.method,
                "source_k": self.winner.source_k,
                "candidate": self.winner.candidate.tolist(),
            },
            "candidates": [
                {
                    "method": g.method,
                    "source_k": g.source_k,
                    "candidate": g.candidate.tolist(),
                    "residual_stddev": r.residual_stddev,
                    "accepted": r.accepted,
                }
                for g, r in self.candidates
            ],
        }
