"""Partition polynomials of small trees, the subset-sum oracle, and the root ratio."""
import cmath
import math

from treezeros.sphere import ModelParams
from treezeros.trees import (GeneralTree, TreeSpec, brute_force_polynomial, partition_polynomial,
                             partition_recursion, ratio_eval, vertex_count)

b = 2

# degree words read bottom-up: (2,) is a root with two leaves, (2, 2) the depth-2 binary tree
for word in [(), (1,), (2,), (2, 2), (1, 2, 2)]:
    spec = TreeSpec(word, 2)
    poly = partition_polynomial(spec, b)
    brute = brute_force_polynomial(GeneralTree.from_spec(spec), b)
    print(f"{str(word):12s} n={vertex_count(spec):2d}  Z = {poly.to_text()}")
    print(f"{'':12s} matches subset sum: {poly == brute}, palindromic: {poly.is_palindromic()}")

# Z = 0 exactly when the root ratio Z_in / Z_out equals -1
lam = cmath.exp(2j * math.pi / 3)
p = ModelParams(2, b, lam)
pair = partition_recursion(TreeSpec((2, 2)), b)
print("ratio by iteration:", ratio_eval(TreeSpec((2, 2)), p))
print("ratio from polynomials:", complex(pair.z_in(lam) / pair.z_out(lam)))
