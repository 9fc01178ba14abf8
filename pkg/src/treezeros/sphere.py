"""Maps on the Riemann sphere: the Moebius map gamma and f_{lam,k} = lam * gamma^k.

Points are Python complex numbers, mpmath ``mpc`` values, or the ``INF`` sentinel.
Precision is given in mantissa bits; anything above 53 switches to mpmath.
"""
from dataclasses import dataclass
from fractions import Fraction
import functools
import math

import numpy as np
import mpmath

TWO_PI = 2.0 * math.pi
CIRCLE_TOL = 1e-9


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation.

    ``code`` is a short machine-readable tag such as ``"wrong-regime"``.
    """

    def __init__(self, code, message=""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("riemann-infinity")

    def __repr__(self):
        return "INF"


INF = _Infinity()


def is_inf(z):
    return z is INF


def as_fraction(b):
    """Parse an edge weight into a Fraction. Floats are rejected unless integral."""
    if isinstance(b, Fraction):
        return b
    if isinstance(b, int):
        return Fraction(b)
    if isinstance(b, str):
        s = b.strip()
        if not s or any(ch in s for ch in ".eE"):
            raise DomainError("invalid-parameter", f"b must be an exact rational, got {b!r}")
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError):
            raise DomainError("invalid-parameter", f"cannot parse b={b!r}")
    if isinstance(b, float) and b.is_integer():
        return Fraction(int(b))
    raise DomainError("invalid-parameter", f"b must be an exact rational, got {b!r}")


@dataclass(frozen=True)
class ModelParams:
    d: int
    b: Fraction
    lam: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "b", as_fraction(self.b))
        if int(self.d) != self.d or self.d < 2:
            raise DomainError("invalid-parameter", f"d must be an integer >= 2, got {self.d}")
        if self.b <= 0 or self.b == 1:
            raise DomainError("invalid-parameter", f"b must be positive and != 1, got {self.b}")

    @property
    def antiferromagnetic(self):
        return self.b > 1

    @property
    def bf(self):
        return float(self.b)

    def with_lambda(self, lam):
        return ModelParams(self.d, self.b, lam)

    def require_af(self):
        if not self.antiferromagnetic:
            raise DomainError("invalid-parameter", "operation requires b > 1")


def normalize_angle(theta):
    """Map an angle (scalar or array) into [0, 2*pi)."""
    t = np.mod(theta, TWO_PI)
    if np.ndim(t) == 0:
        t = float(t)
        return 0.0 if t >= TWO_PI else t
    t[t >= TWO_PI] = 0.0
    return t


def angle_of(z):
    return normalize_angle(math.atan2(float(mpmath.im(z)), float(mpmath.re(z))))


def unit(theta):
    return complex(math.cos(theta), math.sin(theta))


@dataclass(frozen=True)
class CircleArc:
    """Counterclockwise arc from ``start`` to ``end`` (angles in radians)."""

    start: float
    end: float
    includes_start: bool = True
    includes_end: bool = True

    def __post_init__(self):
        object.__setattr__(self, "start", normalize_angle(self.start))
        object.__setattr__(self, "end", normalize_angle(self.end))

    @property
    def width(self):
        w = (self.end - self.start) % TWO_PI
        return w

    def offset(self, theta):
        """Counterclockwise angular offset of ``theta`` from the start, in [0, 2pi)."""
        return np.mod(np.asarray(theta, dtype=float) - self.start, TWO_PI)

    def contains(self, theta, tol=0.0):
        w = self.width
        off = self.offset(theta)
        # recentre offsets on the arc midpoint so points just before start are negative
        off = np.where(off > math.pi + w / 2, off - TWO_PI, off)
        lo = off >= -tol if self.includes_start else off > tol
        hi = off <= w + tol if self.includes_end else off < w - tol
        out = np.asarray(lo & hi)
        return bool(out) if out.ndim == 0 else out

    def samples(self, n):
        """``n`` equispaced angles covering the closed arc."""
        return normalize_angle(self.start + self.width * np.linspace(0.0, 1.0, n))


def _b_val(b, prec):
    b = as_fraction(b)
    if prec > 53:
        return mpmath.mpf(b.numerator) / b.denominator
    return b.numerator / b.denominator


def _num(z, prec):
    if prec > 53:
        return mpmath.mpc(z)
    return complex(z)


def _with_prec(fn):
    # run the body at the requested binary precision when it exceeds binary64
    @functools.wraps(fn)
    def wrapped(*args, prec=53, **kw):
        if prec > 53:
            with mpmath.workprec(prec):
                return fn(*args, prec=prec, **kw)
        return fn(*args, prec=prec, **kw)
    return wrapped


@_with_prec
def moebius_eval(z, b, prec=53):
    """gamma(z) = (z + b)/(b z + 1) on the sphere."""
    bb = _b_val(b, prec)
    if is_inf(z):
        return 1 / bb
    z = _num(z, prec)
    den = bb * z + 1
    if den == 0:
        return INF
    return (z + bb) / den


@_with_prec
def moebius_inverse(w, b, prec=53):
    """gamma^{-1}(w) = (w - b)/(1 - b w)."""
    bb = _b_val(b, prec)
    if is_inf(w):
        return -1 / bb
    w = _num(w, prec)
    den = 1 - bb * w
    if den == 0:
        return INF
    return (w - bb) / den


@_with_prec
def map_eval(p, k, z, prec=53):
    """f_{lam,k}(z) = lam * gamma(z)^k."""
    if not 1 <= k <= p.d:
        raise DomainError("invalid-parameter", f"letter {k} outside 1..{p.d}")
    g = moebius_eval(z, p.b, prec=prec)
    if is_inf(g):
        return INF
    lam = _num(p.lam, prec)
    if lam == 0:
        return _num(0, prec)
    return lam * g ** k


@_with_prec
def map_derivative(p, k, z, prec=53):
    """f'(z) = lam k gamma^{k-1} (1 - b^2)/(b z + 1)^2.

    Raises ``critical-pole`` at z = -1/b.
    """
    if is_inf(z):
        raise DomainError("critical-pole", "derivative requested at infinity")
    bb = _b_val(p.b, prec)
    z = _num(z, prec)
    den = bb * z + 1
    if den == 0:
        raise DomainError("critical-pole", "z = -1/b")
    g = (z + bb) / den
    lam = _num(p.lam, prec)
    return lam * k * g ** (k - 1) * (1 - bb * bb) / (den * den)


def circle_speed(p, k, theta):
    """|f'| on the unit circle for |lam| = 1; works on arrays of angles."""
    b = p.bf
    if b <= 1:
        raise DomainError("invalid-parameter", "circle speed formula needs b > 1")
    return k * (b * b - 1) / (1 + b * b + 2 * b * np.cos(theta))


def chordal(z, w):
    """Chordal distance on the Riemann sphere (diameter 2)."""
    if is_inf(z) and is_inf(w):
        return 0.0
    if is_inf(z):
        z, w = w, z
    z = complex(z)
    if is_inf(w):
        return 2.0 / math.sqrt(1 + abs(z) ** 2)
    w = complex(w)
    return 2 * abs(z - w) / math.sqrt((1 + abs(z) ** 2) * (1 + abs(w) ** 2))


# circle lift ---------------------------------------------------------------

def lift_c(b):
    b = float(as_fraction(b)) if not isinstance(b, float) else b
    return (b - 1) / (b + 1)


def gamma_lift(theta, b):
    """Continuous decreasing lift phi with gamma(e^{i theta}) = e^{i phi(theta)}.

    phi(0) = 0 and phi(theta + 2pi) = phi(theta) - 2pi.
    """
    c = lift_c(b)
    psi = 0.5 * np.asarray(theta, dtype=float)
    a = np.arctan2(c * np.sin(psi), np.cos(psi))
    a = a + TWO_PI * np.round((psi - a) / TWO_PI)
    out = -2.0 * a
    return float(out) if np.ndim(out) == 0 else out


def gamma_lift_derivative(theta, b):
    c = lift_c(b)
    psi = 0.5 * np.asarray(theta, dtype=float)
    return -c / (np.cos(psi) ** 2 + c * c * np.sin(psi) ** 2)


def circle_map_lift(alpha, k, theta, b):
    """Lift of f_{lam,k} on S^1 with lam = e^{i alpha}."""
    return alpha + k * gamma_lift(theta, b)


# polynomial helpers used by fixed points and cycles ------------------------

def _poly_pow(c, k):
    out = np.array([1.0 + 0j])
    for _ in range(k):
        out = np.convolve(out, c)
    return out


def _mp_poly_mul(a, b):
    out = [mpmath.mpc(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _mp_poly_pow(c, k):
    out = [mpmath.mpc(1)]
    for _ in range(k):
        out = _mp_poly_mul(out, c)
    return out


def _fixed_poly(p, k, prec):
    """Ascending coefficients of lam (z+b)^k - z (b z + 1)^k."""
    if prec > 53:
        with mpmath.workprec(prec):
            bb = _b_val(p.b, prec)
            lam = _num(p.lam, prec)
            u = _mp_poly_pow([bb, mpmath.mpf(1)], k)
            v = _mp_poly_pow([mpmath.mpf(1), bb], k)
            out = [mpmath.mpc(0)] * (k + 2)
            for i, x in enumerate(u):
                out[i] += lam * x
            for i, x in enumerate(v):
                out[i + 1] -= x
        return out[: k + 2]
    b = p.bf
    u = _poly_pow(np.array([b, 1.0 + 0j]), k)
    v = _poly_pow(np.array([1.0 + 0j, b]), k)
    out = np.zeros(k + 2, complex)
    out[: k + 1] += complex(p.lam) * u
    out[1:] -= v
    return out


@_with_prec
def fixed_points(p, k, prec=53):
    """All k+1 fixed points of f_{lam,k} with their multipliers f'(z)."""
    from .roots import poly_roots

    coeffs = _fixed_poly(p, k, prec)
    roots = poly_roots(coeffs, precision=max(prec, 64))
    out = []
    for z, m in roots:
        z = _num(z, prec)
        for _ in range(m):
            out.append((z, map_derivative(p, k, z, prec=prec)))
    return out


def _second_iterate_poly(p, k):
    # f^2(z) = z  <=>  lam (lam u^k + b v^k)^k - z (b lam u^k + v^k)^k = 0
    b = p.bf
    lam = complex(p.lam)
    uk = _poly_pow(np.array([b, 1.0 + 0j]), k)
    vk = _poly_pow(np.array([1.0 + 0j, b]), k)
    A = lam * uk + b * vk
    B = b * lam * uk + vk
    left = lam * _poly_pow(A, k)
    right = np.concatenate([[0], _poly_pow(B, k)])
    n = max(len(left), len(right))
    out = np.zeros(n, complex)
    out[: len(left)] += left
    out[: len(right)] -= right
    return out


def two_cycles(p, k, prec=53):
    """Period-2 cycles of f_{lam,k} as ((z, w), f'(z) f'(w)).

    Points are the roots of f^2(z) = z with the fixed-point factor divided out.
    """
    from .roots import poly_roots

    full = _second_iterate_poly(p, k)
    fix = _fixed_poly(p, k, 53)
    # descending order for numpy division
    q, r = np.polydiv(full[::-1], np.asarray(fix, complex)[::-1])
    scale = max(np.abs(full).max(), 1.0)
    if np.abs(r).max() > 1e-8 * scale:
        raise DomainError("precision-exhausted", "fixed-point factor did not divide f^2(z) - z")
    q = q[::-1]
    if len(q) < 2:
        return []
    pts = []
    for z, m in poly_roots(q, precision=max(prec, 64)):
        pts.extend([complex(z)] * m)
    cycles = []
    used = [False] * len(pts)
    for i, z in enumerate(pts):
        if used[i]:
            continue
        used[i] = True
        w = map_eval(p, k, z)
        j_best, dist = None, math.inf
        for j in range(len(pts)):
            if not used[j] and not is_inf(w):
                dd = abs(pts[j] - w)
                if dd < dist:
                    j_best, dist = j, dd
        if j_best is None:
            continue
        used[j_best] = True
        w = pts[j_best]
        mult = map_derivative(p, k, z) * map_derivative(p, k, w)
        cycles.append(((_num(z, prec), _num(w, prec)), mult))
    return cycles


def milnor_invariants(p):
    """Conjugacy invariants X = b^2/(1-b^2), Y = (lam + 1/lam) b^{d-1}/(1-b^2)^d."""
    if p.lam == 0:
        raise DomainError("invalid-parameter", "lambda = 0")
    b = p.b
    X = b * b / (1 - b * b)
    lam = complex(p.lam)
    Y = (lam + 1 / lam) * float(b ** (p.d - 1) / (1 - b * b) ** p.d)
    return complex(float(X)), Y
