"""lambda0 < lambda2 <= lambda1 on the circle, the attracting interval, and the arc K."""
import math

import numpy as np

from treezeros.critical import (attracting_interval, k_arc, lambda0, lambda1, lambda2,
                                trichotomy_classify, trichotomy_sweep)
from treezeros.sphere import ModelParams, unit

for d, b in [(2, 2), (3, "3/2"), (4, "6/5"), (2, "5/2")]:
    a0, a1, a2 = lambda0(d, b), lambda1(d, b), lambda2(d, b)
    print(f"d={d} b={b}: lambda0 {a0:.6f}  lambda2 {a2:.6f}  lambda1 {a1:.6f}")

print("2 pi / 3 =", 2 * math.pi / 3)

# I = Arc(1, lam) exactly at lambda0, strictly inside before, strictly containing after
for a in (1.0, 2 * math.pi / 3, 2.2):
    p = ModelParams(2, 2, unit(a))
    left, R, right = attracting_interval(p).lifted
    print(f"alpha {a:.4f}: I = [{left:+.5f}, {right:.5f}], R at {R:.5f}, {trichotomy_classify(p)}")

labels = trichotomy_sweep(2, 2, np.arange(1e-4, lambda1(2, 2), 1e-4))
print("label changes along the sweep:", int(np.sum(labels[1:] != labels[:-1])))

K = k_arc(ModelParams(2, 2, unit(2 * math.pi / 3 + 0.005)))
print(f"K = [{K.lifted[0]:.6f}, {K.lifted[1]:.6f}], two starts agree to {K.other_start_gap:.1e}")
