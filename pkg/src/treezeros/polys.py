"""Exact integer polynomials with a common denominator.

Products of large polynomials go through Kronecker substitution: the
coefficients are packed into one big integer, multiplied by GMP, and unpacked.
"""
from fractions import Fraction
from math import gcd

import gmpy2
import mpmath
import numpy as np


def _pack(c, slot_bytes):
    return gmpy2.mpz(int.from_bytes(b"".join(int(x).to_bytes(slot_bytes, "little") for x in c), "little"))


def _unpack(x, slot_bytes, n):
    raw = int(x).to_bytes(slot_bytes * n, "little")
    return [int.from_bytes(raw[i * slot_bytes:(i + 1) * slot_bytes], "little") for i in range(n)]


def _mul_nonneg(a, b):
    if not a or not b:
        return []
    if min(len(a), len(b)) <= 16:
        return _schoolbook(a, b)
    bits = max(x.bit_length() for x in a) + max(x.bit_length() for x in b)
    bits += min(len(a), len(b)).bit_length() + 1
    slot = (bits + 7) // 8
    prod = _pack(a, slot) * _pack(b, slot)
    return _unpack(prod, slot, len(a) + len(b) - 1)


def _schoolbook(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def int_poly_mul(a, b):
    """Product of two ascending integer coefficient lists."""
    if all(x >= 0 for x in a) and all(y >= 0 for y in b):
        return _mul_nonneg(a, b)
    ap = [max(x, 0) for x in a]
    an = [max(-x, 0) for x in a]
    bp = [max(y, 0) for y in b]
    bn = [max(-y, 0) for y in b]
    pos = int_poly_add(_mul_nonneg(ap, bp), _mul_nonneg(an, bn))
    neg = int_poly_add(_mul_nonneg(ap, bn), _mul_nonneg(an, bp))
    return int_poly_add(pos, [-x for x in neg])


def int_poly_add(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def int_poly_pow(a, k):
    """Binary exponentiation."""
    result = [1]
    base = list(a)
    while k:
        if k & 1:
            result = int_poly_mul(result, base)
        k >>= 1
        if k:
            base = int_poly_mul(base, base)
    return result


def _trim(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


class LaurentPoly:
    """Polynomial in lambda with rational coefficients num[i]/den (ascending order)."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        num = _trim(int(x) for x in num) if len(num) else [0]
        den = int(den)
        if den <= 0:
            raise ValueError("denominator must be positive")
        g = den
        for x in num:
            g = gcd(g, x)
            if g == 1:
                break
        if g > 1:
            num = [x // g for x in num]
            den //= g
        self.num = num
        self.den = den

    @classmethod
    def from_fractions(cls, coeffs):
        coeffs = [Fraction(c) for c in coeffs]
        den = 1
        for c in coeffs:
            den = den * c.denominator // gcd(den, c.denominator)
        return cls([c.numerator * (den // c.denominator) for c in coeffs], den)

    @property
    def degree(self):
        if len(self.num) == 1 and self.num[0] == 0:
            return -1
        return len(self.num) - 1

    def coeffs(self):
        return [Fraction(x, self.den) for x in self.num]

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((tuple(self.num), self.den))

    def __add__(self, other):
        den = self.den * other.den // gcd(self.den, other.den)
        a = [x * (den // self.den) for x in self.num]
        b = [x * (den // other.den) for x in other.num]
        return LaurentPoly(int_poly_add(a, b), den)

    def __mul__(self, other):
        return LaurentPoly(int_poly_mul(self.num, other.num), self.den * other.den)

    def __repr__(self):
        return f"LaurentPoly(degree={self.degree}, den={self.den})"

    def is_palindromic(self):
        return self.num == self.num[::-1]

    def __call__(self, lam):
        """Exact evaluation at rationals, mpmath evaluation otherwise."""
        if isinstance(lam, (int, Fraction)):
            acc = Fraction(0)
            for c in reversed(self.num):
                acc = acc * lam + c
            return acc / self.den
        acc = mpmath.mpc(0)
        for c in reversed(self.num):
            acc = acc * lam + c
        return acc / self.den

    def to_text(self, var="λ"):
        terms = []
        for i in range(len(self.num) - 1, -1, -1):
            c = Fraction(self.num[i], self.den)
            if c == 0:
                continue
            mag = abs(c)
            if i == 0:
                body = str(mag)
            else:
                coef = "" if mag == 1 else str(mag)
                body = coef + (var if i == 1 else f"{var}^{i}")
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        if not terms:
            return "0"
        text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            text += f" {sign} {body}"
        return text

    def log_abs_coeffs(self):
        """Natural logs of |coefficients| (``-inf`` for zeros), safe for huge integers."""
        out = np.full(len(self.num), -np.inf)
        for i, x in enumerate(self.num):
            if x:
                out[i] = _ilog(abs(x))
        return out - _ilog(self.den)

    def to_longdouble(self):
        """Numerators as longdouble, all scaled by 2**-shift so the largest is near 2**64.

        Each coefficient keeps its own 64-bit mantissa. Returns (coeffs, shift).
        """
        top = max(abs(x).bit_length() for x in self.num)
        shift = max(top - 64, 0)
        c = np.empty(len(self.num), dtype=np.longdouble)
        for i, x in enumerate(self.num):
            bl = abs(x).bit_length()
            e = max(bl - 64, 0)
            m = x >> e if x >= 0 else -((-x) >> e)
            c[i] = np.ldexp(np.longdouble(m), e - shift)
        return c, shift


def _ilog(x):
    bl = x.bit_length()
    sh = max(bl - 60, 0)
    return float(np.log(float(x >> sh))) + sh * float(np.log(2.0))


def _int_to_ld(x):
    """Round an arbitrary integer to the nearest longdouble without going through float64."""
    x = int(x)
    s = -1 if x < 0 else 1
    x = abs(x)
    bl = x.bit_length()
    if bl <= 63:
        return np.longdouble(s * x)
    sh = bl - 63
    top = x >> sh
    if (x >> (sh - 1)) & 1:
        top += 1
    return np.ldexp(np.longdouble(s * top), sh)
