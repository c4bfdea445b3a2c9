#!/usr/bin/env python3
"""Residue arithmetic and the integer Gaussian sampler.

Everything in the attack reduces to four primitives: modular dot
products, centered representatives, wrap-around distance, and discrete
Gaussian noise.  This script exercises each one.
"""
import numpy as np

from lwe_attack import (
    ErrorSampler,
    centered_lift,
    mod_dot,
    wrap_distance,
    zq_vector,
)

q = 251
print(f"working mod q = {q}\n")

a = zq_vector([250, 250], q)
s = zq_vector([1, 1], q)
print(f"dot({a.coords}, {s.coords}) mod {q} = {mod_dot(a, s)}   (500 wraps to 249)")

print("\ncentered representatives (-q/2, q/2]:")
for x in (0, 1, 125, 126, 250):
    print(f"  {x:3d} -> {centered_lift(x, q):4d}")

print("\nwrap-around distance is circular:")
print(f"  d(0, 250) = {wrap_distance(0, 250, q)}   (neighbours across the wrap)")
print(f"  d(0, 125) = {wrap_distance(0, 125, q)}   (maximal: floor(q/2))")

print("\ndiscrete Gaussian error, sigma=3:")
rng = np.random.default_rng(0)
sampler = ErrorSampler(3.0)
draws = sampler.sample(rng, 100_000)
print(f"  10^5 draws: mean={draws.mean():+.4f}  std={draws.std():.4f}")
print(f"  largest |draw| = {np.abs(draws).max()}  (tail cut at 6 sigma = 18)")
print(f"  P(x=0) = {sampler.pmf(0):.4f}, P(x=3) = {sampler.pmf(3):.4f}, "
      f"P(x=-3) = {sampler.pmf(-3):.4f}")

print("\nsigma=0 degenerates to the constant 0:",
      set(ErrorSampler(0.0).sample(rng, 10).tolist()))
