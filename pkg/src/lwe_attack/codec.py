"""Reversible base-B tokenization of residues and residue vectors.

An integer is written most-significant digit first as a sequence of digit
tokens in {0, ..., B-1}; 16 becomes [1,0,0,0,0] in base 2 and [2,2] in
base 7.  Zero is the single digit [0], and no other encoding carries a
leading zero.  Vectors are per-coordinate encodings joined by a separator
token.  The digit tokens are shared between the input and output sides of
a model, so the vocabulary holds max(B_in, B_out) digits plus the four
specials SEP, BOS, EOS, PAD.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class DecodeError(ValueError):
    """Raised when a token sequence does not spell a base-B integer."""


@dataclass(frozen=True)
class TokenSequence:
    ids: tuple
    side: str = "input"  # "input" | "output"

    def __len__(self):
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)


def digits_of(x: int, base: int) -> list:
    """Base-B digits of x >= 0, most significant first; 0 -> [0]."""
    if x < 0:
        raise ValueError(f"cannot encode negative value {x}")
    if base < 2:
        raise ValueError(f"base must be >= 2, got {base}")
    if x == 0:
        return [0]
    out = []
    while x > 0:
        x, r = divmod(x, base)
        out.append(r)
    out.reverse()
    return out


def encode_int(x: int, base: int, side: str = "output") -> TokenSequence:
    return TokenSequence(tuple(digits_of(x, base)), side)


def decode_int(tokens, base: int) -> int:
    """Inverse of encode_int.  Raises DecodeError on empty input or any
    token outside {0, ..., base-1}; callers treat that as a wrong
    prediction, never as a crash."""
    ids = tuple(tokens.ids if isinstance(tokens, TokenSequence) else tokens)
    if not ids:
        raise DecodeError("empty token sequence")
    value = 0
    for t in ids:
        t = int(t)
        if not 0 <= t < base:
            raise DecodeError(f"token {t} is not a base-{base} digit")
        value = value * base + t
    return value


def encode_vector(coords, base: int, sep: int, side: str = "input") -> TokenSequence:
    """Per-coordinate encodings joined by the separator token id."""
    ids = []
    for i, x in enumerate(coords):
        if i:
            ids.append(sep)
        ids.extend(digits_of(int(x), base))
    return TokenSequence(tuple(ids), side)


def decode_vector(tokens, base: int, sep: int) -> list:
    """Split on the separator and decode each chunk; DecodeError on any
    malformed chunk (including empty chunks from doubled separators)."""
    ids = list(tokens.ids if isinstance(tokens, TokenSequence) else tokens)
    out, chunk = [], []
    for t in ids + [sep]:
        if t == sep:
            out.append(decode_int(chunk, base))
            chunk = []
        else:
            chunk.append(t)
    return out


@dataclass(frozen=True)
class Vocab:
    """Shared token vocabulary: digits 0..max(B_in,B_out)-1 then specials.

    Token ids are dense and stable: digit d has id d, followed by
    SEP, BOS, EOS, PAD in that order.
    """

    base_in: int = 81
    base_out: int = 81

    def __post_init__(self):
        if self.base_in < 2 or self.base_out < 2:
            raise ValueError("bases must be >= 2")

    @property
    def digit_count(self) -> int:
        return max(self.base_in, self.base_out)

    @property
    def sep(self) -> int:
        return self.digit_count

    @property
    def bos(self) -> int:
        return self.digit_count + 1

    @property
    def eos(self) -> int:
        return self.digit_count + 2

    @property
    def pad(self) -> int:
        return self.digit_count + 3

    @property
    def size(self) -> int:
        return self.digit_count + 4

    def encode_input(self, coords) -> TokenSequence:
        return encode_vector(coords, self.base_in, self.sep, side="input")

    def encode_output(self, x: int) -> TokenSequence:
        return encode_int(x, self.base_out, side="output")

    def decode_output(self, tokens) -> int:
        """Decode a model emission: digit tokens only, read up to the first
        EOS if present.  DecodeError on anything malformed."""
        ids = list(tokens.ids if isinstance(tokens, TokenSequence) else tokens)
        if ids and ids[0] == self.bos:
            ids = ids[1:]
        if self.eos in ids:
            ids = ids[: ids.index(self.eos)]
        return decode_int(ids, self.base_out)

    def in_digits(self, q: int) -> int:
        """Digits needed for the largest input residue q-1."""
        return len(digits_of(q - 1, self.base_in))

    def out_digits(self, q: int) -> int:
        return len(digits_of(q - 1, self.base_out))


@lru_cache(maxsize=16)
def _digit_table(q: int, base: int):
    """Precomputed digit tuples for every residue below q (small q only)."""
    return [tuple(digits_of(x, base)) for x in range(q)]


def encode_rows(A: np.ndarray, b: np.ndarray, q: int, vocab: Vocab):
    """Tokenize a batch of (a, b) rows for model consumption.

    Returns (src, dec_in, tgt) as int64 arrays padded with PAD:
    src is the digit/SEP encoding of each a, dec_in is BOS + digits(b),
    tgt is digits(b) + EOS.  Uses a per-residue digit table, so q must be
    at most 2**20 on this path.
    """
    if q > 2**20:
        raise ValueError("encode_rows digit table only supports q <= 2**20")
    tab_in = _digit_table(q, vocab.base_in)
    tab_out = _digit_table(q, vocab.base_out)
    sep, bos, eos, pad = vocab.sep, vocab.bos, vocab.eos, vocab.pad

    src_seqs = []
    for row in A:
        ids = []
        for j, x in enumerate(row):
            if j:
                ids.append(sep)
            ids.extend(tab_in[x])
        src_seqs.append(ids)
    out_seqs = [tab_out[x] for x in b]

    m = len(src_seqs)
    src_len = max(len(s) for s in src_seqs)
    out_len = max(len(s) for s in out_seqs) + 1  # room for BOS/EOS
    src = np.full((m, src_len), pad, dtype=np.int64)
    dec_in = np.full((m, out_len), pad, dtype=np.int64)
    tgt = np.full((m, out_len), pad, dtype=np.int64)
    for i, s in enumerate(src_seqs):
        src[i, : len(s)] = s
    for i, o in enumerate(out_seqs):
        dec_in[i, 0] = bos
        dec_in[i, 1 : 1 + len(o)] = o
        tgt[i, : len(o)] = o
        tgt[i, len(o)] = eos
    return src, dec_in, tgt
