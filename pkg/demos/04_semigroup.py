"""Escape words and an expansion certificate for the hat semigroup at lambda0 e^{0.005 i}."""
import math
import random

from treezeros.semigroup import (Word, escape_word, expansion_certificate, word_degrees,
                                 word_derivative)
from treezeros.sphere import ModelParams, unit

alpha = 2 * math.pi / 3 + 0.005
p = ModelParams(2, 2, unit(alpha))

rng = random.Random(1)
for _ in range(3):
    z = rng.uniform(alpha, 2 * math.pi)
    res = escape_word(z, p, 30, restricted=True)
    print(f"start {z:.4f}: word {''.join(map(str, res.word.letters))}")

cert = expansion_certificate(p, kappa=3.0)
print(f"N = {cert.N}, min |derivative| = {cert.min_derivative:.6f} over {cert.states} live states")
print("direct recomputation:", word_derivative(Word(cert.argmin_word), unit(cert.argmin_start), p))

for w in [(2, 2), (3,), (1, 2, 3)]:
    print(w, "degrees (z, lam, lam'):", word_degrees(w))
