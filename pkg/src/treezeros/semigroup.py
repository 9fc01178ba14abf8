"""Words in the semigroups generated by f_1..f_d and by the hat maps.

The hat generators are f_hat_d = f_d and f_hat_k = f_1 o f_k for k < d. Words
are applied left to right: the first letter acts first.
"""
from dataclasses import asdict, dataclass
import json
import math
import random

import numpy as np

from .critical import _interval_lifts, b_threshold, lambda0, lambda1
from .sphere import (DomainError, TWO_PI, as_fraction, gamma_lift,
                     gamma_lift_derivative, map_derivative, map_eval,
                     moebius_inverse, normalize_angle, unit)

BOUNDARY_TOL = 1e-9
PRUNE_MARGIN = 1e-4
MAX_STATES = 20_000_000


@dataclass(frozen=True)
class Word:
    letters: tuple
    hat: bool = True

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(k) for k in self.letters))

    def __len__(self):
        return len(self.letters)

    def plain(self, d):
        """Expand to plain letters (innermost first)."""
        if not self.hat:
            return self.letters
        out = []
        for k in self.letters:
            out.extend([k] if k == d else [k, 1])
        return tuple(out)


def _deriv(p, k, z):
    # poles and infinity have no finite derivative in this chart
    try:
        return complex(map_derivative(p, k, z))
    except (DomainError, TypeError, ZeroDivisionError):
        return complex(math.inf, 0.0)


def hat_orbit(word, start, p):
    """Orbit of ``start`` under the word, with the derivative of each step.

    Returns (points, factors): points[0] is the start, points[j] the image after
    j letters, factors[j-1] the complex derivative of letter j at points[j-1].
    """
    d = p.d
    pts = [start]
    facs = []
    z = start
    for k in word.plain(d) if not word.hat else word.letters:
        if word.hat and k < d:
            w = map_eval(p, k, z)
            z2 = map_eval(p, 1, w)
            fac = _deriv(p, 1, w) * _deriv(p, k, z)
        else:
            z2 = map_eval(p, k, z)
            fac = _deriv(p, k, z)
        pts.append(z2)
        facs.append(fac)
        z = z2
    return pts, facs


def modulolemma_choice(d, m, t, s):
    """Smallest k in 1..d-1 with ((2m - s)/d) k + t in (1, 2) modulo 2."""
    if not (1 <= m <= d - 1) or not (0 < s < t < 1):
        raise DomainError("lemma-violation", f"inputs outside the lemma: d={d} m={m} t={t} s={s}")
    for k in range(1, d):
        A = math.fmod((2 * m - s) / d * k + t, 2.0)
        if 1 < A < 2:
            return k
    raise DomainError("lemma-violation", f"no valid k for d={d} m={m} t={t} s={s}")


# ------------------------------------------------------------- circle helpers

class _CircleSetup:
    """Lifted data for lam = e^{i alpha}: the attracting interval and the hat maps."""

    def __init__(self, p):
        p.require_af()
        lam = complex(p.lam)
        if abs(abs(lam) - 1) > 1e-9:
            raise DomainError("invalid-parameter", "lambda must lie on the unit circle")
        self.p = p
        self.d = p.d
        self.bf = p.bf
        self.alpha = normalize_angle(math.atan2(lam.imag, lam.real))
        self.has_interval = as_fraction(p.b) < b_threshold(p.d)
        if self.has_interval:
            left, right, _, _ = _interval_lifts(self.alpha, p.d, p.bf)
            self.left = float(left[0])
            self.width = float(right[0]) - self.left
        else:
            self.left, self.width = 0.0, 0.0

    def depth_in_I(self, theta):
        """How far inside I each angle sits (<= 0 means outside)."""
        if not self.has_interval:
            return np.full(np.shape(theta), -1.0)
        o = np.mod(np.asarray(theta) - self.left, TWO_PI)
        return np.minimum(o, self.width - o)

    def step(self, k, theta):
        a, bf, d = self.alpha, self.bf, self.d
        if k == d:
            return np.mod(a + d * gamma_lift(theta, bf), TWO_PI), d * np.abs(gamma_lift_derivative(theta, bf))
        u = a + k * gamma_lift(theta, bf)
        fac = k * np.abs(gamma_lift_derivative(theta, bf)) * np.abs(gamma_lift_derivative(u, bf))
        return np.mod(a + gamma_lift(u, bf), TWO_PI), fac


def _in_arc_1_lam(theta, alpha, tol=0.0):
    """Open arc from 1 counter-clockwise to lam, shrunk by tol."""
    t = np.mod(theta, TWO_PI)
    return (t > tol) & (t < alpha - tol)


# ------------------------------------------------------------- escape words

def _decompose(theta, p):
    """gamma(z) = exp(i pi (2m - s)/d) with the branch fixed at angle 0."""
    d = p.d
    psi = np.mod(gamma_lift(theta, p.bf), TWO_PI)
    x = d * psi / math.pi
    m = int(math.ceil(x / 2))
    return m % d, 2 * m - x


@dataclass
class EscapeResult:
    word: Word
    orbit: list
    lookahead_steps: int


def escape_word(z, p, n, restricted=False):
    """A hat word of length n whose orbit of angle z avoids I (or stays in Arc[lam, 1]).

    Greedy per step: take k = d when f_d keeps the constraint, otherwise read off
    (m, s) from gamma(z) and pick the lemma letter. The restricted variant tests
    against the whole of Arc(1, lam), which contains I.
    """
    S = _CircleSetup(p)
    d, alpha = S.d, S.alpha
    a0, a1 = lambda0(d, p.b), lambda1(d, p.b)
    if not (a0 - 1e-12 <= alpha < a1):
        raise DomainError("wrong-regime", "lambda must lie in Arc[lambda0, lambda1)")
    t = alpha / math.pi

    def bad(theta):
        if restricted:
            return bool(_in_arc_1_lam(theta, alpha, 1e-12))
        return bool(S.depth_in_I(theta) > 1e-12)

    theta = normalize_angle(z)
    if bad(theta):
        raise DomainError("invalid-parameter", "start point violates the orbit constraint")
    letters, orbit, looks = [], [theta], 0
    for _ in range(n):
        img, _ = S.step(d, theta)
        if not bad(img):
            k = d
        else:
            m, s = _decompose(theta, p)
            if min(abs(s), abs(s - t)) < BOUNDARY_TOL:
                raise DomainError("boundary-ambiguous", f"s={s:.3g} too close to 0 or t")
            k = None
            if 1 <= m <= d - 1 and 0 < s < t:
                k = modulolemma_choice(d, m, t, s)
                img, _ = S.step(k, theta)
                if bad(img):
                    k = None
            if k is None:
                looks += 1
                for kk in range(d, 0, -1):
                    img, _ = S.step(kk, theta)
                    if not bad(img):
                        k = kk
                        break
                if k is None:
                    raise DomainError("no-admissible-letter", f"no letter keeps the orbit at {theta:.6g}")
            img, _ = S.step(k, theta)
        theta = float(img)
        letters.append(k)
        orbit.append(theta)
    # re-verify each step independently with complex arithmetic
    for j, k in enumerate(letters):
        pts, _ = hat_orbit(Word((k,)), unit(orbit[j]), p)
        w = pts[-1]
        ang = normalize_angle(math.atan2(w.imag, w.real))
        if abs(w - unit(orbit[j + 1])) > 1e-9 or bad(ang):
            raise DomainError("no-admissible-letter", f"step {j} failed re-verification")
    return EscapeResult(Word(letters), orbit, looks)


# ------------------------------------------------------- expansion certificate

@dataclass
class ExpansionCertificate:
    lam_angle: float
    kappa: float
    N: int
    grid_resolution: int
    min_derivative: float
    excluded_margin: float
    argmin_start: float = 0.0
    argmin_word: tuple = ()
    states: int = 0

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        data["argmin_word"] = tuple(data["argmin_word"])
        return cls(**data)


def expansion_certificate(p, kappa=3.0, max_N=40, grid=512, margin=PRUNE_MARGIN):
    """Smallest N with |(f_hat^N_w)'(z)| >= kappa over grid points z outside I
    and every word w whose orbit does not go deeper than ``margin`` into I.

    Above the threshold I is empty and only f_d is used.
    """
    if kappa <= 1:
        raise DomainError("invalid-parameter", "kappa must exceed 1")
    S = _CircleSetup(p)
    d = S.d
    letters = list(range(1, d + 1)) if S.has_interval else [d]
    outside = TWO_PI - S.width
    theta = S.left + S.width + outside * (np.arange(grid) + 0.5) / grid
    theta = np.mod(theta, TWO_PI)
    deriv = np.ones(grid)
    hist = []  # per level: (parent index, letter)
    best = (None, math.inf)
    for N in range(1, max_N + 1):
        nt, nd, par, let = [], [], [], []
        for k in letters:
            img, fac = S.step(k, theta)
            keep = S.depth_in_I(img) <= margin
            idx = np.nonzero(keep)[0]
            nt.append(img[idx])
            nd.append(deriv[idx] * fac[idx])
            par.append(idx)
            let.append(np.full(idx.size, k, np.int8))
        theta = np.concatenate(nt)
        deriv = np.concatenate(nd)
        hist.append((np.concatenate(par), np.concatenate(let)))
        if theta.size == 0:
            raise DomainError("no-certificate", "every word entered I")
        if theta.size > MAX_STATES:
            break
        j = int(np.argmin(deriv))
        if deriv[j] >= kappa:
            word = []
            idx = j
            for par_l, let_l in reversed(hist):
                word.append(int(let_l[idx]))
                idx = int(par_l[idx])
            word.reverse()
            z0 = float(np.mod(S.left + S.width + outside * (idx + 0.5) / grid, TWO_PI))
            return ExpansionCertificate(S.alpha, float(kappa), N, grid, float(deriv[j]), margin,
                                        z0, tuple(word), int(theta.size))
        if best[0] is None or deriv[j] > best[1]:
            best = (N, float(deriv[j]))
    raise DomainError("no-certificate", f"best found: N={best[0]}, min={best[1]:.6g}")


def word_derivative(word, z, p):
    """|(f_hat^N_w)'(z)| by direct complex composition."""
    _, facs = hat_orbit(word, z, p)
    out = 1.0
    for f in facs:
        out *= abs(f)
    return out


# ---------------------------------------------------------- circle preimages

def circle_preimages(target, k, p):
    """Angles z with f_k(z) = e^{i target}."""
    lam = complex(p.lam)
    w = unit(target) / lam
    base = math.atan2(w.imag, w.real) / k
    out = []
    for j in range(k):
        u = unit(base + TWO_PI * j / k)
        z = moebius_inverse(u, p.b)
        out.append(normalize_angle(math.atan2(z.imag, z.real)))
    return sorted(out)


def _preimage_angles(t, k, p):
    """Vectorized circle preimages of angles t under f_k, shape (len(t) * k,)."""
    lam = complex(p.lam)
    bf = p.bf
    base = (np.asarray(t) - math.atan2(lam.imag, lam.real)) / k
    u = (base[:, None] + TWO_PI * np.arange(k)[None, :] / k).ravel()
    w = np.exp(1j * u)
    z = (w - bf) / (1 - bf * w)
    return np.mod(np.angle(z), TWO_PI)


def backward_orbit(target, p, depth, resolution=1e-6):
    """Angles reached from ``target`` by up to ``depth`` hat-letter preimages.

    Each level is de-duplicated on a grid of the given angular resolution, so
    the point count stays bounded by 2 pi / resolution.
    """
    d = p.d
    level = np.array([normalize_angle(target)])
    seen = [level]
    for _ in range(depth):
        parts = [_preimage_angles(level, d, p)]
        for k in range(1, d):
            parts.append(_preimage_angles(_preimage_angles(level, 1, p), k, p))
        nxt = np.concatenate(parts)
        _, keep = np.unique(np.round(nxt / resolution).astype(np.int64), return_index=True)
        level = nxt[np.sort(keep)]
        seen.append(level)
    return np.concatenate(seen)


# ------------------------------------------------------------- word degrees

def word_degrees(word):
    """(deg_z, deg_lam, deg_lam_prime) of a plain word i_1..i_n (i_1 acts first).

    deg_z = i_1...i_n, deg_lam = 1 + i_n + i_n i_{n-1} + ... + i_n...i_1 and
    deg_lam_prime = the same sum stopped at i_n...i_2. deg_lam_prime is the
    lam-degree of the composition at fixed z; deg_lam that of the composition
    evaluated at z = lam.
    """
    letters = word.letters if isinstance(word, Word) else tuple(word)
    if isinstance(word, Word) and word.hat:
        raise DomainError("invalid-parameter", "word_degrees expects a plain word")
    if not letters:
        raise DomainError("invalid-parameter", "empty word")
    deg_z = 1
    for k in letters:
        deg_z *= k
    partial, total = 1, 1
    for k in reversed(letters[1:]):
        partial *= k
        total += partial
    deg_prime = total
    deg_lam = deg_prime + deg_z
    return deg_z, deg_lam, deg_prime


def recover_first_letter(word):
    """i_1 from degrees alone: deg_z(w) / (deg'_lam(w) - deg'_lam(w without i_1))."""
    letters = word.letters if isinstance(word, Word) else tuple(word)
    deg_z, _, prime = word_degrees(letters)
    _, _, prime_tail = word_degrees(letters[1:]) if len(letters) > 1 else (1, 1, 0)
    q, r = divmod(deg_z, prime - prime_tail)
    if r:
        raise DomainError("invalid-parameter", "degrees are inconsistent")
    return q


MERSENNE61 = (1 << 61) - 1


def _pmul(a, b, P):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % P
    return out


def _padd(a, b, P):
    n = max(len(a), len(b))
    return [((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % P for i in range(n)]


def _ptrim(a):
    while len(a) > 1 and a[-1] == 0:
        a = a[:-1]
    return a


def _pgcd(a, b, P):
    a, b = _ptrim(a), _ptrim(b)
    while any(b):
        inv = pow(b[-1], P - 2, P)
        while len(a) >= len(b) and any(a):
            c = a[-1] * inv % P
            sh = len(a) - len(b)
            a = [(x - c * (b[i - sh] if 0 <= i - sh < len(b) else 0)) % P for i, x in enumerate(a)]
            a = _ptrim(a)
            if len(a) < len(b) or (len(a) == 1 and a[0] == 0):
                break
        a, b = b, a
    return a


def _pdeg(a):
    a = _ptrim(a)
    return len(a) - 1 if any(a) else -1


def _compose_pair(letters, b, var, fixed, P, at_lambda=False):
    """Numerator/denominator (in ``var``) of f_{i_n} o ... o f_{i_1}.

    var == "z": lam fixed to ``fixed``; var == "lam": z fixed to ``fixed``
    unless at_lambda, in which case z = lam.
    """
    bp, bq = b.numerator % P, b.denominator % P
    X = [0, 1]
    if var == "z":
        lam_num, lam_den = [fixed % P], [1]
        num, den = X, [1]
    else:
        lam_num, lam_den = X, [1]
        num, den = (X, [1]) if at_lambda else ([fixed % P], [1])
    for k in letters:
        # gamma(num/den) = (q num + p den) / (p num + q den) with b = p/q
        g_num = _padd([bq * x for x in num], [bp * x for x in den], P)
        g_den = _padd([bp * x for x in num], [bq * x for x in den], P)
        pn, pd = [1], [1]
        for _ in range(k):
            pn = _pmul(pn, g_num, P)
            pd = _pmul(pd, g_den, P)
        num = _pmul(lam_num, pn, P)
        den = _pmul(lam_den, pd, P)
        g = _pgcd(num, den, P)
        if _pdeg(g) > 0:
            raise DomainError("precision-exhausted", "unexpected common factor")
    return num, den


def measured_degrees(word, b=2, seed=0):
    """Degrees of the actual composition as rational functions, mod a large prime."""
    letters = word.letters if isinstance(word, Word) else tuple(word)
    b = as_fraction(b)
    rng = random.Random(seed)
    P = MERSENNE61
    lam = rng.randrange(2, P)
    z = rng.randrange(2, P)
    n, dd = _compose_pair(letters, b, "z", lam, P)
    deg_z = max(_pdeg(n), _pdeg(dd))
    n, dd = _compose_pair(letters, b, "lam", z, P)
    deg_prime = max(_pdeg(n), _pdeg(dd))
    n, dd = _compose_pair(letters, b, "lam", 0, P, at_lambda=True)
    deg_lam = max(_pdeg(n), _pdeg(dd))
    return deg_z, deg_lam, deg_prime


def evaluate_word_mod(letters, b, z, lam, P=MERSENNE61):
    """Projective value (num, den) of the composition at integer points mod P."""
    b = as_fraction(b)
    bp, bq = b.numerator % P, b.denominator % P
    num, den = z % P, 1
    for k in letters:
        gn = (bq * num + bp * den) % P
        gd = (bp * num + bq * den) % P
        num = lam * pow(gn, k, P) % P
        den = pow(gd, k, P)
    return num, den


def words_distinct(d, max_len, b=2, points=5, seed=0):
    """Check that all plain words up to max_len give different compositions.

    Each word is fingerprinted by its values at random (z, lam) points mod a
    Mersenne prime; returns (number of words, number of distinct fingerprints).
    """
    import itertools

    rng = random.Random(seed)
    P = MERSENNE61
    pts = [(rng.randrange(2, P), rng.randrange(2, P)) for _ in range(points)]
    seen = set()
    count = 0
    for n in range(1, max_len + 1):
        for w in itertools.product(range(1, d + 1), repeat=n):
            fp = []
            for z, lam in pts:
                num, den = evaluate_word_mod(w, b, z, lam, P)
                fp.append(num * pow(den, P - 2, P) % P)
            seen.add(tuple(fp))
            count += 1
    return count, len(seen)
