import cmath
import itertools
import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from treezeros.polys import LaurentPoly
from treezeros.sphere import DomainError, ModelParams, is_inf
from treezeros.trees import (GeneralTree, TreeSpec, brute_force_partition, brute_force_polynomial,
                             partition_polynomial, partition_recursion, ratio_eval,
                             scaled_numerators, vertex_count, words)

L0 = cmath.exp(2j * math.pi / 3)


def P(*c):
    return LaurentPoly.from_fractions([Fraction(x) for x in c])


def test_recursion_examples():
    r = partition_recursion(TreeSpec(()), 2)
    assert r.z_in == P(0, 1) and r.z_out == P(1)
    r = partition_recursion(TreeSpec((1,)), 2)
    assert r.z_in == P(0, 2, 1) and r.z_out == P(1, 2)
    r = partition_recursion(TreeSpec((2,)), 2)
    assert r.z_in == P(0, 4, 4, 1) and r.z_out == P(1, 4, 4)


def test_polynomial_examples():
    for b in [2, "1/3", "7/2"]:
        assert partition_polynomial(TreeSpec(()), b) == P(1, 1)
    assert partition_polynomial(TreeSpec((1,)), 2) == P(1, 4, 1)
    assert partition_polynomial(TreeSpec((2,)), 2) == P(1, 8, 8, 1)


def test_brute_force_examples():
    assert brute_force_polynomial(GeneralTree(1, ()), 2) == P(1, 1)
    assert brute_force_polynomial(GeneralTree(2, ((0, 1),)), 2) == P(1, 4, 1)
    star = GeneralTree(3, ((0, 1), (0, 2)))
    assert brute_force_polynomial(star, 2) == P(1, 8, 8, 1)
    assert brute_force_partition(star, 1, 2) == 18
    path = GeneralTree(3, ((0, 1), (1, 2)))
    assert brute_force_polynomial(path, 2) == brute_force_polynomial(star, 2)


def test_brute_force_budget():
    with pytest.raises(DomainError) as e:
        brute_force_polynomial(GeneralTree(25, tuple((0, i) for i in range(1, 25))), 2)
    assert e.value.code == "budget-exceeded"


def test_vertex_count():
    assert vertex_count(TreeSpec(())) == 1
    assert vertex_count(TreeSpec((2, 2))) == 7
    for d in (2, 3, 4):
        for n in range(7):
            assert vertex_count(TreeSpec.cayley(d, n)) == (d ** (n + 1) - 1) // (d - 1)
    assert vertex_count(TreeSpec((1, 3), d=3)) == 1 + 3 * (1 + 1)


def test_tree_spec_validation():
    with pytest.raises(DomainError):
        TreeSpec((3,), d=2)
    with pytest.raises(DomainError):
        TreeSpec((0,), d=2)
    assert TreeSpec.cayley(3, 2).is_cayley
    assert not TreeSpec((1, 3), 3).is_cayley


def test_general_tree_validation_and_text():
    with pytest.raises(DomainError):
        GeneralTree(3, ((0, 1),))
    with pytest.raises(DomainError):
        GeneralTree(3, ((0, 1), (1, 0)))
    t = GeneralTree.from_spec(TreeSpec((2, 1), 2))
    assert t.n == 4 and t.edges == ((0, 1), (1, 2), (1, 3))
    assert GeneralTree.parse(t.to_text()) == t
    assert GeneralTree.parse("# star\n3\n0 1\n0 2\n").n == 3


def _small_specs(max_vertices=13):
    for d in (2, 3, 4):
        for w in words(d, 4):
            if vertex_count(w) <= max_vertices:
                yield TreeSpec(w, d)


@pytest.mark.parametrize("b", [2, "3/2", "1/2", "7/3"])
def test_oracle_equivalence(b):
    n = 0
    for spec in _small_specs():
        assert partition_polynomial(spec, b) == brute_force_polynomial(GeneralTree.from_spec(spec), b)
        n += 1
    assert n > 30


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 3), max_size=5), st.fractions(Fraction(1, 9), Fraction(9)))
def test_palindrome(degrees, b):
    poly = partition_polynomial(TreeSpec(degrees, 3), b)
    assert poly.is_palindromic()
    c = poly.coeffs()
    assert c[0] == 1 and c[-1] == 1 and len(c) == vertex_count(degrees) + 1


def test_ratio_examples():
    p = ModelParams(2, 2, L0)
    assert ratio_eval(TreeSpec(()), p) == L0
    assert abs(ratio_eval(TreeSpec((2,)), p) - 1) < 1e-15
    assert abs(ratio_eval(TreeSpec((2, 2)), p) - L0) < 1e-15


def test_ratio_consistency_high_precision():
    rng = random.Random(7)
    with mpmath.workprec(256):
        for _ in range(40):
            d = rng.choice([2, 3])
            degrees = [rng.randint(1, d) for _ in range(rng.randint(0, 8))]
            spec = TreeSpec(degrees, d)
            b = rng.choice([Fraction(2), Fraction(3, 2), Fraction(5, 2)])
            a = mpmath.mpf(rng.random()) * 2 * mpmath.pi
            lam = mpmath.expj(a)
            r = ratio_eval(spec, ModelParams(d, b, lam), prec=256)
            pair = partition_recursion(spec, b)
            # Horner on huge integer coefficients cancels heavily; give it headroom
            extra = max(abs(x).bit_length() for x in pair.z_in.num + pair.z_out.num)
            with mpmath.workprec(256 + extra):
                zi, zo = pair.z_in(lam), pair.z_out(lam)
            if is_inf(r):
                assert abs(zo) < 1e-30
                continue
            assert abs(r - zi / zo) < 1e-9


def _poly_mod(c, q):
    c = [x % q for x in c]
    while c and c[-1] == 0:
        c.pop()
    return c


def _gcd_degree_mod(a, b, q):
    a, b = _poly_mod(a, q), _poly_mod(b, q)
    while b:
        inv = pow(b[-1], -1, q)
        while len(a) >= len(b):
            f = a[-1] * inv % q
            s = len(a) - len(b)
            for i, x in enumerate(b):
                a[s + i] = (a[s + i] - f * x) % q
            a = _poly_mod(a, q)
            if not a:
                break
        a, b = b, a
    return len(a) - 1


@pytest.mark.parametrize("b", [2, "3/2", "1/3"])
def test_non_vanishing_pair(b):
    # gcd(z_in, z_out) = 1 over Q follows from gcd = 1 modulo a prime that keeps both degrees
    q = (1 << 61) - 1
    for spec in itertools.chain(*(words(2, 6),), (w for w in words(3, 4))):
        d = 3 if any(k == 3 for k in spec) else 2
        zin, zout, _ = scaled_numerators(TreeSpec(spec, d), b)
        assert zin[-1] % q and zout[-1] % q
        assert _gcd_degree_mod(zin, zout, q) == 0


def test_scaled_numerators_rational_b():
    zin, zout, den = scaled_numerators(TreeSpec((1,)), "1/2")
    assert den == 2
    assert LaurentPoly(zin, den) == P(0, Fraction(1, 2), 1)
    assert LaurentPoly(zout, den) == P(1, Fraction(1, 2))


def test_words_order():
    w = list(words(2, 2))
    assert w == [(), (1,), (2,), (1, 1), (1, 2), (2, 1), (2, 2)]
    assert sum(1 for _ in words(3, 6, min_len=6)) == 729
