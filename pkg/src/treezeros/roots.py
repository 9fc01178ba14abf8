"""Polynomial root finding.

Two routes share one certifier:

* ``poly_roots``: Aberth-Ehrlich on the monomial basis for general polynomials.
* ``tree_roots``: Aberth-Ehrlich where Z/Z' comes from the product recursion of a
  tree, which stays well conditioned where the monomial basis does not.

Every returned root is certified by the normalized monomial residual
|p(z)| / sum |c_i| |z|^i evaluated with the exact coefficients. If that fails,
roots are polished with mpmath at 128, 256, 512, 1024 bits before giving up.
"""
from fractions import Fraction
import math

import mpmath
import numpy as np
from scipy.spatial import cKDTree

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

from .polys import LaurentPoly
from .sphere import DomainError, as_fraction
from .trees import partition_polynomial

RESIDUAL_TARGET = 1e-14
MERGE_TOL = 1e-9
ESCALATION = (128, 256, 512, 1024)
LD = np.longdouble
CLD = np.clongdouble


# ---------------------------------------------------------------- helpers

def _as_coeff_list(poly):
    """Ascending coefficients; exact where possible."""
    if isinstance(poly, LaurentPoly):
        return [Fraction(x, poly.den) for x in poly.num]
    out = []
    for c in poly:
        if isinstance(c, (int, Fraction)):
            out.append(Fraction(c))
        elif isinstance(c, (np.integer,)):
            out.append(Fraction(int(c)))
        else:
            out.append(c)
    return out


def _mp(c):
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    return mpmath.mpc(c)


def newton_polygon_guess(logc, rotate=0.4):
    """Starting points on circles whose radii come from the upper convex hull of log|c_i|."""
    logc = np.asarray(logc, dtype=float)
    N = len(logc) - 1
    pts = [i for i in range(N + 1) if np.isfinite(logc[i])]
    hull = []
    for i in pts:
        while len(hull) >= 2:
            i1, i2 = hull[-2], hull[-1]
            if (logc[i2] - logc[i1]) * (i - i1) <= (logc[i] - logc[i1]) * (i2 - i1):
                hull.pop()
            else:
                break
        hull.append(i)
    z = []
    for a, b in zip(hull[:-1], hull[1:]):
        r = math.exp((logc[a] - logc[b]) / (b - a))
        m = b - a
        ang = 2 * np.pi * np.arange(m) / m + 2 * np.pi * a / N + rotate
        z.extend(r * np.exp(1j * ang))
    return np.array(z, dtype=complex)


def _aberth_sums_np(z, idx, block=1024):
    S = np.empty(idx.size, dtype=z.dtype)
    for s in range(0, idx.size, block):
        blk = idx[s:s + block]
        D = z[blk, None] - z[None, :]
        rows = np.arange(blk.size)
        D[rows, blk] = 1
        inv = 1 / D
        inv[rows, blk] = 0
        S[s:s + block] = inv.sum(axis=1)
    return S


if numba is not None:
    @numba.njit(cache=True)
    def _aberth_sums_jit(z, idx):
        n = z.size
        out = np.empty(idx.size, np.complex128)
        for a in range(idx.size):
            i = idx[a]
            xr = z[i].real
            xi = z[i].imag
            sr = 0.0
            si = 0.0
            for j in range(n):
                if j != i:
                    dx = xr - z[j].real
                    dy = xi - z[j].imag
                    r = 1.0 / (dx * dx + dy * dy)
                    sr += dx * r
                    si -= dy * r
            out[a] = complex(sr, si)
        return out


def _aberth_sums(z, idx):
    """sum_{j != i} 1/(z_i - z_j) for the rows in idx."""
    if numba is not None and z.dtype == np.complex128:
        return _aberth_sums_jit(z, idx.astype(np.int64))
    return _aberth_sums_np(z, idx)


def aberth(ratio, z0, tol=None, maxit=500, active=None):
    """Generic Aberth-Ehrlich driver.

    ``ratio(z)`` returns p(z)/p'(z) for an array of points. Iterates each root until
    its correction falls below ``tol`` relative size or stops shrinking.
    Returns (roots, iterations).
    """
    z = np.array(z0, copy=True)
    if tol is None:
        tol = 8 * np.finfo(z.real.dtype).eps
    N = z.size
    active = np.ones(N, bool) if active is None else np.array(active, bool)
    last = np.full(N, np.inf)
    it = 0
    for it in range(1, maxit + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        r = ratio(z[idx])
        S = _aberth_sums(z, idx)
        w = r / (1 - r * S)
        bad = ~np.isfinite(w)
        w[bad] = 0
        z[idx] -= w
        step = np.abs(w) / np.maximum(1, np.abs(z[idx]))
        done = (step <= tol) | ((step < 1e-9) & (step >= last[idx]))
        last[idx] = step
        active[idx[done & ~bad]] = False
    return z, it


# ----------------------------------------------------- monomial evaluation

def _horner(c, z):
    acc = np.zeros_like(z) + c[-1]
    for a in c[-2::-1]:
        acc = acc * z + a
    return acc


def monomial_ratio_fn(c):
    """p/p' on the monomial basis, switching to the reversed polynomial for |z| > 1."""
    c = np.asarray(c)
    N = len(c) - 1
    dc = c[1:] * np.arange(1, N + 1)
    cr = c[::-1].copy()
    dcr = cr[1:] * np.arange(1, N + 1)

    def ratio(z):
        out = np.empty_like(z)
        inside = np.abs(z) <= 1
        zi = z[inside]
        if zi.size:
            out[inside] = _horner(c, zi) / _horner(dc, zi)
        zo = z[~inside]
        if zo.size:
            w = 1 / zo
            q = _horner(cr, w)
            dq = _horner(dcr, w)
            out[~inside] = zo * q / (N * q - w * dq)
        return out

    return ratio


def normalized_residual_ld(c, z):
    """|p(z)| / sum |c_i| |z|^i in longdouble, with c scaled arbitrarily."""
    c = np.asarray(c, dtype=CLD)
    z = np.asarray(z, dtype=CLD)
    ac = np.abs(c).astype(CLD)
    out = np.empty(z.shape, LD)
    inside = np.abs(z) <= 1
    if inside.any():
        zi = z[inside]
        out[inside] = np.abs(_horner(c, zi)) / _horner(ac, np.abs(zi).astype(CLD)).real
    if (~inside).any():
        w = 1 / z[~inside]
        out[~inside] = np.abs(_horner(c[::-1], w)) / _horner(ac[::-1], np.abs(w).astype(CLD)).real
    return out


def normalized_residual_mp(coeffs, z):
    """Same quantity at the current mpmath precision from exact coefficients."""
    z = mpmath.mpc(z)
    if abs(z) > 1:
        coeffs = coeffs[::-1]
        z = 1 / z
    az = abs(z)
    acc = mpmath.mpc(0)
    tot = mpmath.mpf(0)
    for c in reversed(coeffs):
        cm = _mp(c)
        acc = acc * z + cm
        tot = tot * az + abs(cm)
    if tot == 0:
        return mpmath.mpf(0)
    return abs(acc) / tot


def _mp_newton_aberth(coeffs, roots, prec, steps=40):
    """Aberth iterations in mpmath on the monomial basis."""
    N = len(coeffs) - 1
    with mpmath.workprec(prec):
        cm = [_mp(c) for c in coeffs]
        dcm = [cm[i] * i for i in range(1, N + 1)]
        z = [mpmath.mpc(r) for r in roots]
        tol = mpmath.mpf(2) ** (-prec + 8)
        for _ in range(steps):
            moved = mpmath.mpf(0)
            for i in range(N):
                p = mpmath.polyval(cm[::-1], z[i])
                dp = mpmath.polyval(dcm[::-1], z[i])
                if dp == 0:
                    continue
                r = p / dp
                s = mpmath.fsum(1 / (z[i] - z[j]) for j in range(N) if j != i and z[i] != z[j])
                w = r / (1 - r * s)
                z[i] -= w
                moved = max(moved, abs(w) / max(1, abs(z[i])))
            if moved < tol:
                break
        return z


def cluster_roots(z, tol=MERGE_TOL):
    """Group approximations closer than tol*max(1,|z|). Returns list of index lists."""
    z = np.asarray(z, dtype=complex)
    n = z.size
    if n == 0:
        return []
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    pts = np.column_stack([z.real, z.imag])
    rmax = tol * max(1.0, float(np.abs(z).max()))
    tree = cKDTree(pts)
    for i, j in tree.query_pairs(rmax):
        if abs(z[i] - z[j]) < tol * max(1.0, abs(z[i])):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


# ------------------------------------------------------------- poly_roots

def poly_roots(poly, precision=64):
    """All roots of a polynomial with multiplicities.

    ``poly`` is a LaurentPoly or ascending coefficients. Returns a list of
    (root, multiplicity) where root is complex, or mpc when precision > 64.
    """
    coeffs = _as_coeff_list(poly)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) < 2:
        raise DomainError("invalid-parameter", "degree must be at least 1")
    zero_mult = 0
    while coeffs[0] == 0:
        coeffs.pop(0)
        zero_mult += 1
    out = []
    if zero_mult:
        out.append((0j, zero_mult))
    if len(coeffs) == 1:
        return out
    N = len(coeffs) - 1

    with mpmath.workprec(max(precision, 64) + 32):
        mags = [abs(_mp(c)) for c in coeffs]
        logc = np.array([float(mpmath.log(m)) if m != 0 else -np.inf for m in mags])
    top = np.max(logc)
    scale = mpmath.exp(-top)
    c_ld = np.array([complex(_mp(c) * scale) for c in coeffs], dtype=CLD)
    if N == 1:
        z = np.array([-c_ld[0] / c_ld[1]], dtype=CLD)
    else:
        z0 = newton_polygon_guess(logc).astype(CLD)
        z, _ = aberth(monomial_ratio_fn(c_ld), z0)

    roots = [mpmath.mpc(complex(x)) for x in z]
    roots = _certify_general(coeffs, roots, precision)

    # near-coincident roots get refined before clustering; a binary64 m-fold root
    # spreads to about eps**(1/m), so 1e-3 catches multiplicity up to 5
    zc = np.array([complex(r) for r in roots])
    close = cluster_roots(zc, tol=1e-3)
    if any(len(g) > 1 for g in close):
        roots = _mp_newton_aberth(coeffs, roots, 256, steps=200)
        zc = np.array([complex(r) for r in roots])
    for g in cluster_roots(zc):
        if precision > 64:
            with mpmath.workprec(precision):
                r = mpmath.fsum(roots[i] for i in g) / len(g)
        else:
            r = complex(np.mean(zc[g]))
        out.append((r, len(g)))
    return out


def _certify_general(coeffs, roots, precision):
    prec = max(precision, 64)
    with mpmath.workprec(prec + 16):
        res = [normalized_residual_mp(coeffs, r) for r in roots]
    if precision <= 64 and max(res) < RESIDUAL_TARGET:
        return roots
    ladder = [p for p in ESCALATION if p >= prec] or [prec]
    for p in ladder:
        roots = _mp_newton_aberth(coeffs, roots, p)
        with mpmath.workprec(p + 16):
            res = [normalized_residual_mp(coeffs, r) for r in roots]
        if max(res) < RESIDUAL_TARGET:
            return roots
    raise DomainError("precision-exhausted", f"residual {float(max(res)):.3g} after {ladder[-1]} bits")


# ------------------------------------------------------------- tree route

def tree_ratio(word, b, z):
    """Z/Z' at points z via the in/out recursion, rescaled at every level.

    Works in the dtype of z (complex128 or clongdouble).
    """
    one = np.ones_like(z)
    A, B = z.copy(), one.copy()
    dA, dB = one.copy(), np.zeros_like(z)
    for k in word:
        u = A + b * B
        v = b * A + B
        du = dA + b * dB
        dv = b * dA + dB
        uk1 = one if k == 1 else u ** (k - 1)
        vk1 = one if k == 1 else v ** (k - 1)
        A, dA = z * uk1 * u, uk1 * u + z * k * uk1 * du
        B, dB = vk1 * v, k * vk1 * dv
        s = np.maximum(np.abs(A), np.abs(B))
        A, B, dA, dB = A / s, B / s, dA / s, dB / s
    return (A + B) / (dA + dB)


def _mp_tree_newton(word, b, z, prec, steps=60):
    """Newton on Z via the recursion in mpmath."""
    with mpmath.workprec(prec):
        bb = mpmath.mpf(b.numerator) / b.denominator
        z = mpmath.mpc(z)
        tol = mpmath.mpf(2) ** (-prec + 6)
        for _ in range(steps):
            A, B, dA, dB = z, mpmath.mpc(1), mpmath.mpc(1), mpmath.mpc(0)
            for k in word:
                u, v = A + bb * B, bb * A + B
                du, dv = dA + bb * dB, bb * dA + dB
                A, dA = z * u ** k, u ** k + z * k * u ** (k - 1) * du
                B, dB = v ** k, k * v ** (k - 1) * dv
                s = max(abs(A), abs(B))
                A, B, dA, dB = A / s, B / s, dA / s, dB / s
            den = dA + dB
            if den == 0:
                break
            w = (A + B) / den
            z -= w
            if abs(w) <= tol * max(1, abs(z)):
                break
        return z


def seeds_from_parent(parent_roots, k, N):
    """Starting points for a word from the roots of the word with its top letter removed."""
    parent_roots = np.asarray(parent_roots, dtype=complex)
    parts = []
    for j in range(k):
        ang = 0.01 * (j + 1) * (-1) ** j
        rad = 1 + 0.003 * (j + 1) * (-1) ** j
        parts.append(parent_roots * rad * np.exp(1j * ang))
    z = np.concatenate(parts) if parts else np.array([], complex)
    extra = N - z.size
    if extra > 0:
        z = np.concatenate([z, -1 + 0.05j * np.exp(0.7j * np.arange(extra))])
    return z[:N]


class TreeRoots:
    """Roots of one tree polynomial with their certified residuals."""

    def __init__(self, word, b, roots, residuals, multiplicities, poly, iterations, precision):
        self.word = tuple(word)
        self.b = b
        self.roots = roots
        self.residuals = residuals
        self.multiplicities = multiplicities
        self.poly = poly
        self.iterations = iterations
        self.precision = precision

    def __len__(self):
        return len(self.roots)


def tree_roots(word, b, seeds=None, precision=64, poly=None):
    """Certified roots of the partition polynomial of the tree with degree word ``word``."""
    b = as_fraction(b)
    word = tuple(word)
    if poly is None:
        poly = partition_polynomial(word, b)
    N = poly.degree
    if N == 1:
        z = np.array([-poly.num[0] / poly.num[1]], dtype=complex)
        return TreeRoots(word, b, z, np.zeros(1), np.ones(1, int), poly, 0, precision)
    if seeds is None or len(seeds) != N:
        seeds = newton_polygon_guess(poly.log_abs_coeffs())
    bf = float(b)
    ratio = lambda x: tree_ratio(word, bf, x)
    z, its = aberth(ratio, np.asarray(seeds, dtype=complex), tol=2e-15)
    z = _separate_duplicates(ratio, z)
    # one longdouble Newton pass through the recursion tightens each root
    zl = z.astype(CLD)
    bl = LD(b.numerator) / LD(b.denominator)
    for _ in range(2):
        r = tree_ratio(word, bl, zl)
        r[~np.isfinite(r)] = 0
        zl = zl - r
    c_ld, _ = poly.to_longdouble()
    res = normalized_residual_ld(c_ld, zl).astype(float)
    roots = zl
    if precision > 64 or (res >= RESIDUAL_TARGET).any():
        roots, res = _escalate_tree(word, b, poly, zl, res, precision)
    zc = np.asarray(roots, dtype=complex)
    groups = cluster_roots(zc)
    mult = np.ones(len(zc), int)
    keep = np.zeros(len(zc), bool)
    newton = None
    for g in groups:
        if len(g) > 1:
            # represent a cluster by the member closest to a root in Newton terms
            if newton is None:
                newton = np.abs(tree_ratio(word, bl, np.asarray(zc, dtype=CLD))).astype(float)
            g = sorted(g, key=lambda i: newton[i])
        keep[g[0]] = True
        mult[g[0]] = len(g)
    if precision > 64:
        roots = [roots[i] for i in np.nonzero(keep)[0]]
    else:
        roots = zc[keep]
    return TreeRoots(word, b, roots, res[keep], mult[keep], poly, its, precision)


def _separate_duplicates(ratio, z, rounds=5):
    """Kick apart approximations that converged onto the same root and iterate again.

    Tree polynomials are squarefree in practice, so a collision usually means a
    missed root. A genuine multiple root pulls the pair back together and is kept.
    """
    rng = np.random.default_rng(12345)
    for _ in range(rounds):
        groups = [g for g in cluster_roots(z, tol=1e-7) if len(g) > 1]
        if not groups:
            break
        active = np.zeros(z.size, bool)
        for g in groups:
            for i in g[1:]:
                kick = 1e-3 * max(1.0, abs(z[i])) * np.exp(2j * np.pi * rng.random())
                z[i] += kick
                active[i] = True
        z, _ = aberth(ratio, z, tol=2e-15, active=active)
    return z


def _escalate_tree(word, b, poly, z, res, precision):
    coeffs = [Fraction(x, poly.den) for x in poly.num]
    roots = [complex(x) for x in z]
    res = np.array(res, dtype=float)
    todo = list(range(len(roots))) if precision > 64 else list(np.nonzero(res >= RESIDUAL_TARGET)[0])
    ladder = [p for p in ESCALATION if p >= max(precision, 128)] or [precision]
    out = list(roots)
    for i in todo:
        ok = False
        for p in ladder:
            r = _mp_tree_newton(word, b, out[i], p)
            with mpmath.workprec(p + 16):
                rr = normalized_residual_mp(coeffs, r)
            out[i] = r
            if rr < RESIDUAL_TARGET:
                res[i] = float(rr)
                ok = True
                break
        if not ok:
            raise DomainError("precision-exhausted",
                              f"word {word}: residual {float(rr):.3g} after {ladder[-1]} bits")
    if precision <= 64:
        out = np.array([complex(x) for x in out])
    return out, res
