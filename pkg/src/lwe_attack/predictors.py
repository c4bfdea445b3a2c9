"""The predictor abstraction and its oracle implementations.

A Predictor is anything mapping an input vector a to a guessed residue
b'.  The trained sequence model is one implementation; the oracles here
decouple the recovery algorithms from training entirely: ExactOracle
answers a.s mod q from a known secret, NoisyOracle models a half-trained
model with a tunable hit rate, UniformPredictor answers noise.

Failures are part of the contract: predict() returns None and batched
predictions carry the sentinel PREDICTION_FAILED; the tolerance metric
counts them as misses.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

from .data import SampleSet
from .modq import matvec_mod, wrap_distance_array

PREDICTION_FAILED = -1


class Predictor(ABC):
    """Maps input vectors to predicted residues in [0, q-1]."""

    q: int

    @abstractmethod
    def predict_batch(self, A: np.ndarray) -> np.ndarray:
        """Row-wise predictions; PREDICTION_FAILED marks undecodable rows."""

    def predict(self, a) -> int | None:
        a = np.asarray(getattr(a, "coords", a), dtype=np.int64)
        out = int(self.predict_batch(a[None, :])[0])
        return None if out == PREDICTION_FAILED else out


class ExactOracle(Predictor):
    """Answers a.s mod q exactly; the ideal end state of training."""

    def __init__(self, secret):
        self.secret = secret
        self.q = secret.q

    def predict_batch(self, A: np.ndarray) -> np.ndarray:
        return matvec_mod(np.asarray(A, dtype=np.int64), self.secret.coords, self.q)


class NoisyOracle(Predictor):
    """With probability hit_rate answers within the tolerance band of the
    true b (uniformly in that band), otherwise uniformly on Z_q.

    Against noiseless data its accuracy at tolerance tau converges to
    hit_rate + (1 - hit_rate) * (2*floor(tau*q) + 1)/q.
    """

    def __init__(self, secret, hit_rate: float, tau: float,
                 rng: np.random.Generator):
        if not 0 <= hit_rate <= 1:
            raise ValueError("hit_rate must be in [0, 1]")
        if not 0 < tau < 0.5:
            raise ValueError("tau must be in (0, 0.5)")
        self.secret = secret
        self.q = secret.q
        self.hit_rate = hit_rate
        self.band = math.floor(tau * self.q)
        self.rng = rng

    def predict_batch(self, A: np.ndarray) -> np.ndarray:
        A = np.asarray(A, dtype=np.int64)
        m = A.shape[0]
        truth = matvec_mod(A, self.secret.coords, self.q)
        hit = self.rng.random(m) < self.hit_rate
        offset = self.rng.integers(-self.band, self.band + 1, size=m)
        noise = self.rng.integers(0, self.q, size=m)
        return np.where(hit, (truth + offset) % self.q, noise)


class UniformPredictor(Predictor):
    """Uniform random residues; the baseline every distinguisher beats."""

    def __init__(self, q: int, rng: np.random.Generator):
        self.q = q
        self.rng = rng

    def predict_batch(self, A: np.ndarray) -> np.ndarray:
        return self.rng.integers(0, self.q, size=np.asarray(A).shape[0])


def acc_tau(predictor: Predictor, test: SampleSet, tau: float) -> float:
    """Fraction of rows whose prediction falls within wrap distance
    floor(tau*q) of the recorded b; failed predictions count as misses."""
    if not 0 < tau < 0.5:
        raise ValueError("tau must be in (0, 0.5)")
    if len(test) == 0:
        raise ValueError("empty test set")
    preds = np.asarray(predictor.predict_batch(test.a), dtype=np.int64)
    ok = preds != PREDICTION_FAILED
    bound = math.floor(tau * test.q)
    hits = np.zeros(len(test), dtype=bool)
    if ok.any():
        d = wrap_distance_array(preds[ok], test.b[ok], test.q)
        hits[ok] = d <= bound
    return float(hits.mean())


def exact_accuracy(predictor: Predictor, test: SampleSet) -> float:
    """Fraction of rows predicted exactly; failures count as misses."""
    if len(test) == 0:
        raise ValueError("empty test set")
    preds = np.asarray(predictor.predict_batch(test.a), dtype=np.int64)
    return float((preds == test.b).mean())
