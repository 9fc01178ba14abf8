"""Cayley-tree zeros up to depth 9 for d = 2, b = 2, and how they sit on the circle."""
import numpy as np

from treezeros.atlas import circle_zero_angles, coverage_and_gap, enumerate_zero_set
from treezeros.critical import lambda0, lambda1
from treezeros.sphere import CircleArc

zs = enumerate_zero_set(2, 2, 9, "cayley")
print(f"{len(zs)} records in {zs.meta['seconds']} s")
for n in range(10):
    s = zs.select(depth=n)
    on = sum(r.multiplicity for r in s if r.on_circle)
    print(f"depth {n}: {int(s.multiplicities().sum()):4d} zeros, {on:4d} on the unit circle, "
          f"max residual {max(r.residual for r in s):.1e}")

# the arc between lambda0 and its conjugate stays zero-free
a0, a1 = lambda0(2, 2), lambda1(2, 2)
ang = zs.circle_angles()
ang = np.where(ang > np.pi, ang - 2 * np.pi, ang)
print(f"smallest |arg| of a circle zero: {np.min(np.abs(ang)):.4f}  (lambda0 at {a0:.4f})")

# gaps in the middle third of Arc(lambda0, lambda1) shrink slowly with depth
w = (a1 - a0) / 3
mid = CircleArc(a0 + w, a0 + 2 * w, True, True)
for n in range(6, 10):
    cum = np.concatenate([circle_zero_angles((2,) * m, 2, mid) for m in range(n + 1)])
    cov, gap = coverage_and_gap(cum, mid, 2e-3)
    print(f"depths <= {n}: coverage {cov:.3f}, largest gap {gap:.4f} rad")
