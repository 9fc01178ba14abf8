"""Distinguished parameters on the unit circle and the attracting interval.

Everything here works with angles. For lam = e^{i alpha} the map f_{lam,k} acts
on the circle as theta -> alpha + k*phi(theta), with phi the decreasing lift of
gamma (see ``sphere.gamma_lift``). Most helpers accept numpy arrays of alpha so
that sweeps over many parameters stay vectorized.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import math

import mpmath
import numpy as np

from .sphere import (CircleArc, DomainError, ModelParams, TWO_PI, as_fraction, chordal,
                     gamma_lift, gamma_lift_derivative, is_inf, map_eval, moebius_eval,
                     normalize_angle, two_cycles, unit)

BAND = 1e-8
LAMBDA2_MARGIN = 1e-10


def b_threshold(d):
    return Fraction(d + 1, d - 1)


def regime(d, b):
    b = as_fraction(b)
    t = b_threshold(d)
    if b < t:
        return "sub-threshold"
    return "at-threshold" if b == t else "super-threshold"


def _require_sub(d, b):
    b = as_fraction(b)
    if not (1 < b < b_threshold(d)):
        raise DomainError("out-of-range", f"need 1 < b < {b_threshold(d)}, got b={b}")
    return float(b)


def _wrap(x):
    """Wrap into (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), TWO_PI)


# ------------------------------------------------------------- lambda0, lambda1

def lambda0(d, b, scan_step=1e-4):
    """Smallest theta > 0 with e^{i theta} gamma(e^{i theta})^d = 1."""
    bf = _require_sub(d, b)

    def h(t):
        return t + d * gamma_lift(t, bf)

    grid = np.arange(scan_step, math.pi + scan_step / 2, scan_step)
    vals = h(grid)
    idx = np.nonzero(vals <= 0)[0]
    if idx.size == 0 or idx[0] == 0:
        raise DomainError("no-solution", "no sign change of the lift on (0, pi]")
    lo, hi = grid[idx[0] - 1], grid[idx[0]]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    theta = 0.5 * (lo + hi)
    p = ModelParams(d, b, unit(theta))
    if abs(map_eval(p, d, p.lam) - 1) > 1e-12:
        raise DomainError("no-solution", "defining residual too large")
    return theta


@dataclass
class Lambda1:
    theta: float
    z_star: complex
    re_z_star: float


def lambda1_data(d, b, prec=53):
    b = as_fraction(b)
    _require_sub(d, b)
    x = (d * (b * b - 1) - (1 + b * b)) / (2 * b)
    if abs(x) > 1:
        raise DomainError("out-of-range", f"Re z* = {float(x)} is off the circle")
    if prec > 53:
        with mpmath.workprec(prec):
            xr = mpmath.mpf(x.numerator) / x.denominator
            z = mpmath.mpc(xr, mpmath.sqrt(1 - xr * xr))
            bb = mpmath.mpf(b.numerator) / b.denominator
            g = (z + bb) / (bb * z + 1)
            lam = z / g ** d
            theta = float(mpmath.arg(lam)) % TWO_PI
            return Lambda1(theta, complex(z), float(xr))
    xf = float(x)
    z = complex(xf, math.sqrt(1 - xf * xf))
    g = moebius_eval(z, b)
    lam = z / g ** d
    return Lambda1(normalize_angle(math.atan2(lam.imag, lam.real)), z, xf)


def lambda1(d, b):
    """Angle of the parameter where the circle fixed point becomes parabolic."""
    return lambda1_data(d, b).theta


# ---------------------------------------------------- circle fixed points

def circle_fixed_angles(alpha, d, b, k=None):
    """All k+1 circle fixed points of theta -> alpha + k phi(theta).

    ``alpha`` may be an array; returns an array of shape alpha.shape + (k+1,).
    The function alpha + k phi(theta) - theta is strictly decreasing, losing
    2 pi (k+1) per turn, so each level 2 pi m is hit exactly once.
    """
    k = d if k is None else k
    bf = b if isinstance(b, float) else float(as_fraction(b))
    alpha = np.mod(np.asarray(alpha, dtype=float), TWO_PI)
    out = []
    for m in range(-k, 1):
        lo = np.zeros_like(alpha)
        hi = np.full_like(alpha, TWO_PI)
        target = TWO_PI * m
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            g = alpha + k * gamma_lift(mid, bf) - mid - target
            lo = np.where(g > 0, mid, lo)
            hi = np.where(g > 0, hi, mid)
        out.append(0.5 * (lo + hi))
    return np.stack(out, axis=-1)


def _attracting(alpha, d, bf, k=None):
    k = d if k is None else k
    fx = circle_fixed_angles(alpha, d, bf, k)
    speed = k * np.abs(gamma_lift_derivative(fx, bf))
    best = np.argmin(speed, axis=-1)
    theta = np.take_along_axis(fx, best[..., None], axis=-1)[..., 0]
    mult = np.take_along_axis(speed, best[..., None], axis=-1)[..., 0]
    return theta, mult


def attracting_fixed_point(p, k=None):
    """Angle of the attracting circle fixed point R of f_{lam,k} (default k = d)."""
    p.require_af()
    lam = complex(p.lam)
    if abs(abs(lam) - 1) > 1e-9:
        raise DomainError("invalid-parameter", "lambda must lie on the unit circle")
    alpha = math.atan2(lam.imag, lam.real)
    theta, mult = _attracting(alpha, p.d, p.bf, k)
    if not mult < 1:
        raise DomainError("wrong-regime", "no attracting circle fixed point")
    return normalize_angle(float(theta))


# ---------------------------------------------------- attracting interval

@dataclass
class IntervalData:
    r_fixed: float
    arc: CircleArc
    endpoints: tuple
    endpoint_cycle_multiplier: float
    r_multiplier: float
    lifted: tuple = ()
    probe_ok: bool = True
    cycle_residual: float = 0.0
    matches_two_cycles: bool = True


def _F(alpha, d, bf, theta):
    return alpha + d * gamma_lift(theta, bf)


def _interval_lifts(alpha, d, bf, t_min=1e-7, ratio=1.03):
    """Lifted endpoints (left, right) of the attracting interval for each alpha.

    G = F o F normalized to fix theta_R; the endpoints are the nearest zeros of
    G(s) - s on either side of theta_R, bracketed on a geometric grid of offsets
    and then bisected.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    thR, mult = _attracting(alpha, d, bf)
    base = _F(alpha, d, bf, _F(alpha, d, bf, thR))

    def H(s):
        return _F(alpha[:, None] if s.ndim == 2 else alpha, d, bf,
                  _F(alpha[:, None] if s.ndim == 2 else alpha, d, bf, s)) \
            - (base[:, None] if s.ndim == 2 else base) + (thR[:, None] if s.ndim == 2 else thR) - s

    n = int(math.ceil(math.log(TWO_PI / t_min) / math.log(ratio))) + 1
    ts = t_min * ratio ** np.arange(n)
    ts = ts[ts < TWO_PI]
    ends = []
    for sign in (1.0, -1.0):
        s = thR[:, None] + sign * ts[None, :]
        v = sign * H(s)
        # v < 0 inside the basin; the first v >= 0 brackets the endpoint
        hit = v >= 0
        first = np.where(hit.any(axis=1), hit.argmax(axis=1), -1)
        if np.any(first <= 0):
            raise DomainError("endpoint-not-certified", "no bracket for an interval endpoint")
        lo = ts[first - 1]
        hi = ts[first]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            vm = sign * H(thR + sign * mid)
            lo = np.where(vm < 0, mid, lo)
            hi = np.where(vm < 0, hi, mid)
        ends.append(thR + sign * 0.5 * (lo + hi))
    right, left = ends
    return left, right, thR, mult


def attracting_interval(p, probe=True):
    """The arc of circle points attracted to R, bounded by a repelling 2-cycle."""
    p.require_af()
    lam = complex(p.lam)
    alpha = math.atan2(lam.imag, lam.real)
    bf, d = p.bf, p.d
    thR, mult = _attracting(alpha, d, bf)
    if not mult < 1:
        raise DomainError("wrong-regime", "no attracting circle fixed point")
    left, right, thR, mult = _interval_lifts(alpha, d, bf)
    left, right, thR, mult = float(left[0]), float(right[0]), float(thR[0]), float(mult[0])
    cyc = d * d * abs(gamma_lift_derivative(left, bf) * gamma_lift_derivative(right, bf))
    zl, zr = unit(left), unit(right)
    q = ModelParams(d, p.b, lam)
    res = max(abs(map_eval(q, d, map_eval(q, d, zl)) - zl), abs(map_eval(q, d, map_eval(q, d, zr)) - zr))
    if res > 1e-11 or not cyc > 1:
        raise DomainError("endpoint-not-certified", f"cycle residual {res:.3g}, multiplier {cyc:.6g}")
    ok = True
    if probe:
        s = left + (right - left) * (np.arange(1, 65) / 65.0)
        base = _F(alpha, d, bf, _F(alpha, d, bf, thR))
        x = s.copy()
        # contraction near R is mult**2 per double step, slow close to lambda1
        steps = int(min(500 + 20 / max(1 - mult * mult, 1e-12), 200000))
        for _ in range(steps):
            x = _F(alpha, d, bf, _F(alpha, d, bf, x)) - base + thR
        ok = bool(np.all(np.abs(x - thR) < 1e-3 * max(1.0, right - left)))
    # the polished endpoints should be one of the algebraic 2-cycles
    matched = False
    try:
        for (z, w), _ in two_cycles(q, d):
            pts = sorted([complex(z), complex(w)], key=lambda u: abs(u - zl))
            if abs(pts[0] - zl) < 1e-7 and abs(pts[1] - zr) < 1e-7:
                matched = True
    except DomainError:
        pass
    arc = CircleArc(left, right, False, False)
    return IntervalData(normalize_angle(thR), arc, (normalize_angle(left), normalize_angle(right)),
                        float(cyc), mult, (left, thR, right), ok, float(res), matched)


# ---------------------------------------------------------------- trichotomy

def _classify_offsets(left, right, thR, alpha, band):
    o0 = thR + _wrap(0.0 - thR)
    oa = thR + _wrap(alpha - thR)
    inside = (o0 > left + band) & (oa < right - band)
    equal = (np.abs(o0 - left) <= band) & (np.abs(oa - right) <= band)
    contains = (o0 < left - band) & (oa > right + band)
    out = np.full(np.shape(alpha), "indeterminate", dtype=object)
    out[inside] = "inside"
    out[equal] = "equal"
    out[contains] = "contains"
    return out


def trichotomy_classify(p, band=BAND):
    """Compare Arc(1, lam) with the attracting interval: inside, equal or contains."""
    data = attracting_interval(p, probe=False)
    lam = complex(p.lam)
    alpha = math.atan2(lam.imag, lam.real)
    left, thR, right = data.lifted
    label = _classify_offsets(np.array([left]), np.array([right]), np.array([thR]),
                              np.array([alpha]), band)[0]
    if label == "indeterminate":
        raise DomainError("indeterminate", "arc endpoints fall inside the classification band")
    return label


def trichotomy_sweep(d, b, alphas, band=BAND, chunk=2048):
    """Vectorized classification for many parameter angles in (0, pi)."""
    bf = float(as_fraction(b))
    alphas = np.asarray(alphas, dtype=float)
    labels = np.empty(alphas.shape, dtype=object)
    for s in range(0, alphas.size, chunk):
        a = alphas[s:s + chunk]
        left, right, thR, _ = _interval_lifts(a, d, bf)
        labels[s:s + chunk] = _classify_offsets(left, right, thR, a, band)
    return labels


# ---------------------------------------------------------------- lambda2

def _hat_image(alpha, k, d, bf, left, right):
    """Lifted image [lo, hi] of [left, right] under f_1 o f_k (or f_d for k = d)."""
    if k == d:
        a, c = _F_k(alpha, d, bf, right), _F_k(alpha, d, bf, left)
        return a, c
    a1, c1 = _F_k(alpha, k, bf, right), _F_k(alpha, k, bf, left)   # reversed by f_k
    return _F_k(alpha, 1, bf, c1), _F_k(alpha, 1, bf, a1)          # and back again by f_1


def _F_k(alpha, k, bf, theta):
    return alpha + k * gamma_lift(theta, bf)


def _inside(lo, hi, left, right, margin):
    length = hi - lo
    off = np.mod(lo - left, TWO_PI)
    return (length < TWO_PI) & (off >= margin) & (off + length <= (right - left) - margin)


def hat_predicate(d, b, alpha, margin=LAMBDA2_MARGIN):
    """True where f_1 o f_k maps the closed attracting interval into its interior for k < d."""
    bf = float(as_fraction(b))
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    try:
        left, right, _, _ = _interval_lifts(alpha, d, bf)
    except DomainError:
        return np.zeros(alpha.shape, bool)
    ok = np.ones(alpha.shape, bool)
    for k in range(1, d):
        lo, hi = _hat_image(alpha, k, d, bf, left, right)
        ok &= _inside(lo, hi, left, right, margin)
    return ok


@dataclass
class Lambda2:
    theta: float
    transcript: list = field(default_factory=list)
    violations: list = field(default_factory=list)


def lambda2_data(d, b, tol=1e-12, samples=100):
    a0 = lambda0(d, b)
    a1 = lambda1(d, b)
    lo = a0 + 1e-9
    if not hat_predicate(d, b, lo)[0]:
        raise DomainError("no-lambda2", "predicate already fails next to lambda0")
    hi = a1
    transcript = [(float(lo), True), (float(hi), bool(hat_predicate(d, b, hi)[0]))]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ok = bool(hat_predicate(d, b, mid)[0])
        transcript.append((float(mid), ok))
        if ok:
            lo = mid
        else:
            hi = mid
    theta = float(lo)
    grid = a0 + (theta - a0) * np.arange(samples) / samples
    grid[0] = a0
    good = hat_predicate(d, b, grid)
    violations = [float(g) for g, ok in zip(grid, good) if not ok]
    return Lambda2(theta, transcript, violations)


def lambda2(d, b):
    return lambda2_data(d, b).theta


# ---------------------------------------------------------------- K arc

@dataclass
class KArcResult:
    arc: CircleArc
    lifted: tuple
    iterations: int
    other_start_gap: float
    invariance_margin: float


def _hull(alpha, d, bf, J, left, right):
    """Smallest arc (lifted near I) containing the images of J under all hat maps."""
    los, his = [], []
    for k in range(1, d + 1):
        lo, hi = _hat_image(alpha, k, d, bf, J[0], J[1])
        shifted = left + np.mod(lo - left, TWO_PI)
        los.append(shifted)
        his.append(shifted + (hi - lo))
    return float(min(los)), float(max(his))


def _hull_iterate(alpha, d, bf, J, left, right, tol=1e-12, max_iter=100000):
    for it in range(1, max_iter + 1):
        new = _hull(alpha, d, bf, J, left, right)
        move = max(abs(new[0] - J[0]), abs(new[1] - J[1]))
        J = new
        if move < tol:
            return J, it
    raise DomainError("not-converged", "hull iteration did not settle")


def k_arc(p, tol=1e-12):
    """Smallest closed arc inside I that every hat generator maps into itself.

    Computed twice: growing from {R} and shrinking from an arc J with f_hat_k(J)
    strictly inside J. Both limits must agree.
    """
    lam = complex(p.lam)
    alpha = math.atan2(lam.imag, lam.real)
    d, bf = p.d, p.bf
    data = attracting_interval(p, probe=False)
    left, thR, right = data.lifted
    grown, it1 = _hull_iterate(alpha, d, bf, (thR, thR), left, right, tol)
    # start just inside I; the endpoint 2-cycle dictates the left/right ratio
    a = d * abs(gamma_lift_derivative(left, bf))
    c = d * abs(gamma_lift_derivative(right, bf))
    ratio = math.sqrt(a / c)
    delta = 1e-3 * (right - left)
    J0 = (left + delta, right - delta * ratio)
    shrunk, it2 = _hull_iterate(alpha, d, bf, J0, left, right, tol)
    gap = max(abs(grown[0] - shrunk[0]), abs(grown[1] - shrunk[1]))
    if gap > 1e-10:
        raise DomainError("not-converged", f"grown and shrunk limits differ by {gap:.3g}")
    K = grown
    img = _hull(alpha, d, bf, K, left, right)
    margin = min(img[0] - K[0], K[1] - img[1])
    arc = CircleArc(K[0], K[1], True, True)
    return KArcResult(arc, K, it1 + it2, gap, margin)


# ------------------------------------------------------- repelling parameters

def _orbit_of_one(alpha, d, bf, N):
    """Lifted orbit angles Theta_1..Theta_N of 1 and the product of circle speeds."""
    T = np.array(alpha, dtype=float, copy=True)
    speed = d * np.abs(gamma_lift_derivative(np.zeros_like(T), bf))
    for _ in range(N - 1):
        speed = speed * d * np.abs(gamma_lift_derivative(T, bf))
        T = alpha + d * gamma_lift(T, bf)
    return T, speed


def repelling_parameters(d, b, N, arc=None, init=4096, xtol=1e-14):
    """Angles alpha with f^N(1) = 1 and |(f^N)'(1)| > 1."""
    if N < 2:
        raise DomainError("invalid-parameter", "period must be at least 2")
    bf = float(as_fraction(b))
    if arc is None:
        arc = CircleArc(0.0, TWO_PI - 1e-15)
    start, width = arc.start, arc.width if arc.width > 0 else TWO_PI
    a = start + width * np.linspace(0.0, 1.0, init)
    T, _ = _orbit_of_one(a, d, bf, N)
    for _ in range(60):
        big = (np.abs(np.diff(T)) > math.pi / 4) & (np.diff(a) > 1e-13)
        if not big.any():
            break
        mids = 0.5 * (a[:-1][big] + a[1:][big])
        Tm, _ = _orbit_of_one(mids, d, bf, N)
        a = np.concatenate([a, mids])
        T = np.concatenate([T, Tm])
        order = np.argsort(a)
        a, T = a[order], T[order]
    level = np.floor(T / TWO_PI)
    cross = np.nonzero(level[:-1] != level[1:])[0]
    exact = np.nonzero(np.mod(T, TWO_PI) == 0)[0]
    lo, hi = a[cross].copy(), a[cross + 1].copy()
    target = TWO_PI * np.maximum(level[cross], level[cross + 1])
    flo = _orbit_of_one(lo, d, bf, N)[0] - target
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = _orbit_of_one(mid, d, bf, N)[0] - target
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    roots = np.concatenate([0.5 * (lo + hi), a[exact]])
    _, speed = _orbit_of_one(roots, d, bf, N)
    roots = roots[speed > 1]
    roots = np.unique(np.round(normalize_angle(roots), 13))
    return [float(r) for r in roots]


# ------------------------------------------------------------ regime

def regime_classify(p, max_steps=10000, tol=1e-12, max_period=64):
    """Julia regime for |lam| = 1 from where the critical orbit of -1/b settles."""
    p.require_af()
    lam = complex(p.lam)
    if abs(abs(lam) - 1) > 1e-9:
        raise DomainError("invalid-parameter", "lambda must lie on the unit circle")
    d = p.d
    z = -1.0 / p.bf
    hist = []
    for n in range(max_steps):
        z = map_eval(p, d, z)
        hist.append(z)
        if n > 50 and n % 50 == 0:
            for per in range(1, max_period + 1):
                if chordal(hist[-1], hist[-1 - per]) < tol and chordal(hist[-2], hist[-2 - per]) < tol:
                    cyc = hist[-per:]
                    on = [not is_inf(w) and abs(abs(w) - 1) < 1e-6 for w in cyc]
                    if all(on):
                        return "cantor-julia"
                    return "circle-julia"
    raise DomainError("indeterminate", "critical orbit did not settle")


def critical_set(d, b):
    """Summary of the distinguished parameters for (d, b)."""
    out = {"d": d, "b": as_fraction(b), "b_threshold": b_threshold(d), "regime": regime(d, b)}
    if out["regime"] == "sub-threshold" and as_fraction(b) > 1:
        out["lambda0"] = lambda0(d, b)
        out["lambda1"] = lambda1(d, b)
        out["lambda2"] = lambda2(d, b)
    return out
