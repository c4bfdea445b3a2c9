"""Secret and sample generation for LWE with sparse binary secrets.

Covers plain LWE rows (b = a.s + e mod q), the circulant construction
that expands one ring element into n rows, bounded-coordinate variants
(every a_i below a fixed fraction of q), small-coefficient linear
combination of existing rows, and a plain-text on-disk format.
"""

from __future__ import annotations

import gzip
import math
from dataclasses import dataclass, replace

import numpy as np

from .modq import (
    ErrorSampler,
    Modulus,
    ZqVector,
    centered_lift_array,
    matvec_mod,
)

SECRET_BINARY = "binary"
SECRET_UNIFORM = "uniform"
LAYOUT_PLAIN = "plain"
LAYOUT_CIRCULANT = "circulant"


@dataclass(frozen=True)
class LweParams:
    """Instance parameters: dimension, modulus, error width, secret shape.

    Binary secrets are specified either by an exact Hamming weight or by a
    density d, in which case the weight is round(d*n) floored at 2.
    a_max_fraction restricts every coordinate of a to [0, floor(alpha*q)-1];
    the default 1.0 is the full range.
    """

    n: int
    q: int
    sigma: float = 3.0
    secret_dist: str = SECRET_BINARY
    hamming: int | None = None
    density: float | None = None
    a_max_fraction: float = 1.0
    layout: str = LAYOUT_PLAIN

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        Modulus(self.q)  # range check
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.secret_dist not in (SECRET_BINARY, SECRET_UNIFORM):
            raise ValueError(f"unknown secret distribution {self.secret_dist!r}")
        if not 0 < self.a_max_fraction <= 1:
            raise ValueError("a_max_fraction must be in (0, 1]")
        if self.layout not in (LAYOUT_PLAIN, LAYOUT_CIRCULANT):
            raise ValueError(f"unknown layout {self.layout!r}")
        if self.secret_dist == SECRET_BINARY:
            h = self.hamming_weight
            if not 0 <= h <= self.n:
                raise ValueError(f"Hamming weight {h} outside [0, {self.n}]")

    @property
    def hamming_weight(self) -> int:
        if self.secret_dist != SECRET_BINARY:
            raise ValueError("hamming weight only defined for binary secrets")
        if self.hamming is not None:
            return self.hamming
        if self.density is not None:
            return max(2, round(self.density * self.n))
        raise ValueError("binary secret needs either hamming or density")

    @property
    def modulus(self) -> Modulus:
        return Modulus(self.q)

    @property
    def a_bound(self) -> int:
        """Exclusive upper bound on each coordinate of a."""
        return math.floor(self.a_max_fraction * self.q)


@dataclass(frozen=True)
class SecretKey:
    s: ZqVector
    hamming: int

    @property
    def coords(self) -> np.ndarray:
        return self.s.coords

    @property
    def q(self) -> int:
        return self.s.q

    def __len__(self):
        return len(self.s)


PROV_FRESH = "fresh"
PROV_COMBINED = "combined"


@dataclass(frozen=True)
class SampleSet:
    """A batch of LWE instances: row i is (a[i], b[i]).

    effective_sigma is the error width a consumer should assume: the
    generator's sigma for fresh rows, and the sqrt(K)*sigma upper bound
    for K-wise combined rows.
    """

    a: np.ndarray  # (m, n) int64 residues
    b: np.ndarray  # (m,)   int64 residues
    q: int
    sigma: float
    effective_sigma: float
    provenance: str = PROV_FRESH
    layout: str = LAYOUT_PLAIN
    combine_k: int | None = None
    reuse_limit: int | None = None

    def __post_init__(self):
        a = np.ascontiguousarray(self.a, dtype=np.int64)
        b = np.ascontiguousarray(self.b, dtype=np.int64)
        if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.shape[0]:
            raise ValueError(f"inconsistent shapes a{a.shape} b{b.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __len__(self):
        return self.b.shape[0]

    @property
    def n(self) -> int:
        return self.a.shape[1]

    def row(self, i: int):
        return ZqVector(self.a[i], Modulus(self.q)), int(self.b[i])

    def residuals(self, secret) -> np.ndarray:
        """Centered residuals b - a.candidate mod q for any 0/1 or Z_q vector."""
        cand = np.asarray(secret.coords if hasattr(secret, "coords") else secret,
                          dtype=np.int64)
        r = (self.b - matvec_mod(self.a, cand, self.q)) % self.q
        return centered_lift_array(r, self.q)

    def subset(self, idx) -> "SampleSet":
        return replace(self, a=self.a[idx], b=self.b[idx])


def gen_secret(params: LweParams, rng: np.random.Generator) -> SecretKey:
    """Draw a secret: exactly-h random ones for binary, i.i.d. uniform else."""
    if params.secret_dist == SECRET_BINARY:
        h = params.hamming_weight
        if h > params.n:
            raise ValueError(f"Hamming weight {h} exceeds dimension {params.n}")
        s = np.zeros(params.n, dtype=np.int64)
        if h:
            ones = rng.choice(params.n, size=h, replace=False)
            s[ones] = 1
        return SecretKey(ZqVector(s, params.modulus), int(s.sum()))
    s = rng.integers(0, params.q, size=params.n, dtype=np.int64)
    return SecretKey(ZqVector(s, params.modulus), int(np.count_nonzero(s)))


def _finish_rows(A: np.ndarray, params: LweParams, secret: SecretKey,
                 rng: np.random.Generator, layout: str) -> SampleSet:
    sampler = ErrorSampler(params.sigma)
    e = sampler._sample_array(rng, A.shape[0])
    b = (matvec_mod(A, secret.coords, params.q) + e) % params.q
    return SampleSet(A, b, params.q, params.sigma, params.sigma,
                     provenance=PROV_FRESH, layout=layout)


def gen_plain_samples(params: LweParams, secret: SecretKey, count: int,
                      rng: np.random.Generator) -> SampleSet:
    """count independent rows with a uniform on [0, a_bound-1]^n."""
    if count < 1:
        raise ValueError("count must be >= 1")
    A = rng.integers(0, params.a_bound, size=(count, params.n), dtype=np.int64)
    return _finish_rows(A, params, secret, rng, LAYOUT_PLAIN)


def negacyclic_circulant(a: np.ndarray, q: int) -> np.ndarray:
    """The n x n sign-flipped circulant of a: row i is the i-step negacyclic
    rotation of (a_0, -a_{n-1}, ..., -a_1)."""
    a = np.asarray(a, dtype=np.int64)
    n = a.shape[0]
    shift = np.arange(n)[:, None] - np.arange(n)[None, :]
    A = a[shift % n]
    A[shift < 0] = (-A[shift < 0]) % q
    return A


def gen_rlwe_samples(params: LweParams, secret: SecretKey, count: int,
                     rng: np.random.Generator) -> SampleSet:
    """Rows taken from circulants of uniformly drawn ring elements.

    Each initial vector contributes a block of n structured rows; blocks
    are emitted until count rows exist (the last block may be truncated).
    """
    if params.layout != LAYOUT_CIRCULANT:
        raise ValueError("gen_rlwe_samples requires layout='circulant'")
    if count < 1:
        raise ValueError("count must be >= 1")
    blocks = []
    remaining = count
    while remaining > 0:
        a0 = rng.integers(0, params.q, size=params.n, dtype=np.int64)
        block = negacyclic_circulant(a0, params.q)
        blocks.append(block[: min(params.n, remaining)])
        remaining -= params.n
    A = np.concatenate(blocks, axis=0)
    return _finish_rows(A, params, secret, rng, LAYOUT_CIRCULANT)


def combine_rows(samples: SampleSet, indices, coeffs):
    """One linear combination: (sum k_j a_j mod q, sum k_j b_j mod q)."""
    idx = np.asarray(indices)
    k = np.asarray(coeffs, dtype=np.int64)
    a = (samples.a[idx] * k[:, None]).sum(axis=0) % samples.q
    b = (samples.b[idx] * k).sum() % samples.q
    return a, int(b)


def combine_samples(samples: SampleSet, k: int, reuse_limit: int, count: int,
                    rng: np.random.Generator) -> SampleSet:
    """Derive count new rows as {-1,0,1} combinations of k distinct source rows.

    The all-zero coefficient vector is rejected and redrawn, no source row
    appears twice inside one combination, and no source row joins more than
    reuse_limit combinations.  The error of a combined row is a sum of at
    most k source errors, so its standard deviation is at most sqrt(k)*sigma.
    """
    if samples.provenance != PROV_FRESH:
        raise ValueError("combine_samples needs a fresh source set")
    if k < 1:
        raise ValueError("k must be >= 1")
    m = len(samples)
    uses_left = np.full(m, reuse_limit, dtype=np.int64)
    available = list(range(m))
    A_out = np.empty((count, samples.n), dtype=np.int64)
    b_out = np.empty(count, dtype=np.int64)
    for i in range(count):
        if len(available) < k:
            raise ValueError(
                f"insufficient source rows: need {k}, have {len(available)} "
                f"with reuse budget left (limit {reuse_limit})")
        pick = rng.choice(len(available), size=k, replace=False)
        idx = [available[j] for j in pick]
        while True:
            coeffs = rng.integers(-1, 2, size=k)
            if np.any(coeffs):
                break
        A_out[i], b_out[i] = combine_rows(samples, idx, coeffs)
        uses_left[idx] -= 1
        if np.any(uses_left[idx] == 0):
            available = [j for j in available if uses_left[j] > 0]
    return SampleSet(A_out, b_out, samples.q, samples.sigma,
                     math.sqrt(k) * samples.sigma,
                     provenance=PROV_COMBINED, layout=samples.layout,
                     combine_k=k, reuse_limit=reuse_limit)


def combination_capacity(m: int, n_max: int) -> int:
    """Number of nonnegative coefficient vectors over m source rows with
    coordinate sum between 1 and n_max**2, computed exactly."""
    if m < 1 or n_max < 1:
        raise ValueError("m and n_max must be >= 1")
    return sum(math.comb(m + j - 1, j) for j in range(1, n_max**2 + 1))


_HEADER_MAGIC = "lwe-samples-v1"


def save_samples(samples: SampleSet, path) -> None:
    """Line-oriented text format: one header line, then one row per line of
    space-separated decimals a_1 ... a_n b.  '.gz' paths are gzip-compressed."""
    path = str(path)
    opener = gzip.open if path.endswith(".gz") else open
    header = (f"{_HEADER_MAGIC} n={samples.n} q={samples.q} "
              f"sigma={samples.sigma!r} effective_sigma={samples.effective_sigma!r} "
              f"layout={samples.layout} provenance={samples.provenance}")
    if samples.provenance == PROV_COMBINED:
        header += f" k={samples.combine_k} reuse_limit={samples.reuse_limit}"
    with opener(path, "wt") as f:
        f.write(header + "\n")
        for i in range(len(samples)):
            f.write(" ".join(map(str, samples.a[i])) + f" {samples.b[i]}\n")


def load_samples(path, expected: LweParams | None = None) -> SampleSet:
    """Inverse of save_samples.  Raises ValueError on a malformed file or,
    when expected params are given, on any n/q/layout disagreement."""
    path = str(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rt") as f:
        header = f.readline().strip()
        fields = header.split()
        if not fields or fields[0] != _HEADER_MAGIC:
            raise ValueError(f"{path}: not a sample file (bad header {header!r})")
        kv = {}
        for tok in fields[1:]:
            if "=" not in tok:
                raise ValueError(f"{path}: malformed header field {tok!r}")
            key, val = tok.split("=", 1)
            kv[key] = val
        try:
            n = int(kv["n"])
            q = int(kv["q"])
            sigma = float(kv["sigma"])
            eff = float(kv["effective_sigma"])
            layout = kv["layout"]
            prov = kv["provenance"]
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{path}: malformed header: {exc}") from exc
        combine_k = int(kv["k"]) if "k" in kv else None
        reuse_limit = int(kv["reuse_limit"]) if "reuse_limit" in kv else None
        rows = []
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != n + 1:
                raise ValueError(f"{path}:{lineno}: expected {n + 1} values, "
                                 f"got {len(parts)}")
            try:
                rows.append([int(p) for p in parts])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer value") from exc
    data = np.asarray(rows, dtype=np.int64).reshape(-1, n + 1)
    if data.size and (data.min() < 0 or data.max() >= q):
        raise ValueError(f"{path}: residues outside [0, {q - 1}]")
    if expected is not None:
        if (n, q) != (expected.n, expected.q):
            raise ValueError(
                f"{path}: file has (n={n}, q={q}), expected "
                f"(n={expected.n}, q={expected.q})")
        if layout != expected.layout:
            raise ValueError(f"{path}: layout {layout!r} != {expected.layout!r}")
    return SampleSet(data[:, :-1], data[:, -1], q, sigma, eff,
                     provenance=prov, layout=layout,
                     combine_k=combine_k, reuse_limit=reuse_limit)
