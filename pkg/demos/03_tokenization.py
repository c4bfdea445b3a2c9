#!/usr/bin/env python3
"""Base-B digit tokenization: the model's entire I/O vocabulary."""
import numpy as np

from lwe_attack import Vocab, decode_int, encode_int
from lwe_attack.codec import decode_vector

print("the pair (a, b) = (16, 3) in different bases:")
for base in (2, 7, 81):
    print(f"  base {base:2d}: a -> {list(encode_int(16, base))}, "
          f"b -> {list(encode_int(3, base))}")

vocab = Vocab(base_in=81, base_out=81)
print(f"\nvocabulary: {vocab.digit_count} digits + SEP/BOS/EOS/PAD "
      f"= {vocab.size} tokens")

a = [16, 0, 250]
seq = vocab.encode_input(a)
print(f"vector {a} -> {list(seq)}  (token {vocab.sep} separates coordinates)")
print("decoded back:", decode_vector(seq, 81, vocab.sep))

print("\nmalformed model output is a prediction failure, not a crash:")
try:
    decode_int([81], 81)
except Exception as exc:
    print(f"  decode([81], base=81) -> {type(exc).__name__}: {exc}")

rng = np.random.default_rng(0)
ok = all(decode_int(encode_int(int(x), b), b) == x
         for b in (2, 3, 7, 24, 81, 128) for x in rng.integers(0, 2**30, 2000))
print(f"\nround-trip over 6 bases x 2000 random values: {ok}")
