"""Partition functions of spherically symmetric trees.

A tree is encoded by a degree word (k_1, ..., k_n) read bottom-up: k_1 is the
down-degree of the vertices just above the leaves and k_n that of the root.
The empty word is a single vertex.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import itertools

import numpy as np

from .polys import LaurentPoly, int_poly_add, int_poly_pow
from .sphere import DomainError, as_fraction, map_eval

BRUTE_FORCE_MAX_VERTICES = 24
COEFF_BIT_BUDGET = 1 << 33


@dataclass(frozen=True)
class TreeSpec:
    degrees: tuple = ()
    d: int = 2

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(k) for k in self.degrees))
        if any(k < 1 or k > self.d for k in self.degrees):
            raise DomainError("invalid-parameter", f"degrees {self.degrees} outside 1..{self.d}")

    @classmethod
    def cayley(cls, d, n):
        return cls((d,) * n, d)

    @property
    def depth(self):
        return len(self.degrees)

    @property
    def is_cayley(self):
        return all(k == self.d for k in self.degrees)

    def __len__(self):
        return len(self.degrees)


def vertex_count(spec):
    degrees = spec.degrees if isinstance(spec, TreeSpec) else tuple(spec)
    n = 1
    for k in degrees:
        n = 1 + k * n
    return n


@dataclass(frozen=True)
class PolyPair:
    z_in: LaurentPoly
    z_out: LaurentPoly

    def total(self):
        return self.z_in + self.z_out


@lru_cache(maxsize=256)
def _scaled_pair(degrees, p, q):
    """Integer numerators of (q^E Z_in, q^E Z_out) for b = p/q, E the edge count."""
    if not degrees:
        return (0, 1), (1,)
    zin, zout = _scaled_pair(degrees[:-1], p, q)
    k = degrees[-1]
    a = int_poly_add([q * x for x in zin], [p * x for x in zout])
    c = int_poly_add([p * x for x in zin], [q * x for x in zout])
    if k * max(max(x.bit_length() for x in a), 1) * len(a) > COEFF_BIT_BUDGET:
        raise DomainError("budget-exceeded", "exact coefficients exceed the memory budget")
    new_in = [0] + int_poly_pow(a, k)
    new_out = int_poly_pow(c, k)
    return tuple(new_in), tuple(new_out)


def scaled_numerators(spec, b):
    """Raw integer numerators and the common denominator q^E."""
    b = as_fraction(b)
    degrees = spec.degrees if isinstance(spec, TreeSpec) else tuple(spec)
    zin, zout = _scaled_pair(degrees, b.numerator, b.denominator)
    den = b.denominator ** (vertex_count(degrees) - 1)
    return list(zin), list(zout), den


def partition_recursion(spec, b):
    """(Z_in, Z_out) at the root, computed exactly."""
    zin, zout, den = scaled_numerators(spec, b)
    return PolyPair(LaurentPoly(zin, den), LaurentPoly(zout, den))


def partition_polynomial(spec, b):
    zin, zout, den = scaled_numerators(spec, b)
    return LaurentPoly(int_poly_add(zin, zout), den)


# general trees and the subset-sum oracle ----------------------------------

@dataclass(frozen=True)
class GeneralTree:
    n: int
    edges: tuple
    root: int = 0

    def __post_init__(self):
        edges = tuple(tuple(sorted((int(u), int(v)))) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.n < 1:
            raise DomainError("invalid-parameter", "a tree needs at least one vertex")
        if len(edges) != self.n - 1:
            raise DomainError("invalid-parameter", "a tree on n vertices has n-1 edges")
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in edges:
            if not (0 <= u < self.n and 0 <= v < self.n) or u == v:
                raise DomainError("invalid-parameter", f"bad edge {(u, v)}")
            ru, rv = find(u), find(v)
            if ru == rv:
                raise DomainError("invalid-parameter", "edge list contains a cycle")
            parent[ru] = rv

    @classmethod
    def from_spec(cls, spec):
        """Explicit rooted tree for a degree word, built top-down with vertex 0 as root."""
        degrees = spec.degrees if isinstance(spec, TreeSpec) else tuple(spec)
        edges = []
        frontier = [0]
        count = 1
        for k in reversed(degrees):
            nxt = []
            for v in frontier:
                for _ in range(k):
                    edges.append((v, count))
                    nxt.append(count)
                    count += 1
            frontier = nxt
        return cls(count, tuple(edges), 0)

    @classmethod
    def parse(cls, text):
        lines = [ln.split("#")[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines:
            raise DomainError("invalid-parameter", "empty tree file")
        n = int(lines[0])
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise DomainError("invalid-parameter", f"bad edge line {ln!r}")
            edges.append((int(parts[0]), int(parts[1])))
        return cls(n, tuple(edges), 0)

    @classmethod
    def read(cls, path):
        with open(path) as fh:
            return cls.parse(fh.read())

    def to_text(self):
        return "\n".join([str(self.n)] + [f"{u} {v}" for u, v in self.edges]) + "\n"


def _cut_counts(tree):
    """Table count[size, cut] over all vertex subsets."""
    n = tree.n
    if n > BRUTE_FORCE_MAX_VERTICES:
        raise DomainError("budget-exceeded", f"{n} vertices exceeds the oracle limit")
    E = len(tree.edges)
    table = np.zeros((n + 1, E + 1), dtype=np.int64)
    chunk = 1 << 16
    for start in range(0, 1 << n, chunk):
        masks = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        size = np.zeros(masks.shape, np.int64)
        for v in range(n):
            size += (masks >> v) & 1
        cut = np.zeros(masks.shape, np.int64)
        for u, v in tree.edges:
            cut += ((masks >> u) ^ (masks >> v)) & 1
        np.add.at(table, (size, cut), 1)
    return table


def brute_force_partition(tree, lam, b):
    """Sum over all subsets U of lam^|U| b^|cut(U)|, evaluated at a number."""
    table = _cut_counts(tree)
    b = as_fraction(b)
    total = 0
    for s, e in zip(*np.nonzero(table)):
        total += int(table[s, e]) * lam ** int(s) * b ** int(e)
    return total


def brute_force_polynomial(tree, b):
    """Symbolic subset sum with exact rational coefficients."""
    table = _cut_counts(tree)
    b = as_fraction(b)
    coeffs = [Fraction(0)] * (tree.n + 1)
    for s, e in zip(*np.nonzero(table)):
        coeffs[int(s)] += int(table[s, e]) * b ** int(e)
    return LaurentPoly.from_fractions(coeffs)


def ratio_eval(spec, p, prec=53):
    """R = f_{k_n} o ... o f_{k_1}(lam), iterated on the sphere."""
    z = p.lam
    for k in spec.degrees:
        z = map_eval(p, k, z, prec=prec)
    return z


def words(d, max_len, min_len=0):
    """All degree words with letters 1..d, shortest first, lexicographic within a length."""
    for n in range(min_len, max_len + 1):
        for w in itertools.product(range(1, d + 1), repeat=n):
            yield w
