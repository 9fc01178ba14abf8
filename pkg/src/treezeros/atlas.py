"""Zero sets of Cayley and spherically symmetric trees.

Roots come from ``roots.tree_roots``; each one is then re-checked against the
orbit of lambda under the tree's maps, which must pass close to -1.
"""
from dataclasses import dataclass, field
import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor

import mpmath
import numpy as np

from .roots import seeds_from_parent, tree_roots
from .sphere import (CIRCLE_TOL, DomainError, ModelParams, CircleArc, TWO_PI, as_fraction,
                     gamma_lift, gamma_lift_derivative, is_inf, map_eval,
                     normalize_angle)
from .trees import vertex_count

DYN_TOL = 1e-6
MAX_DEGREE = 5000
MAX_TOTAL_DEGREE = 1_000_000
CLASSES = ("cayley", "spherical")


@dataclass(slots=True)
class ZeroRecord:
    lam: complex
    tree_class: str
    word: tuple
    depth: int
    residual: float
    on_circle: bool
    multiplicity: int = 1
    dyn_residual: float = 0.0
    flagged: bool = False

    @property
    def angle(self):
        return normalize_angle(math.atan2(self.lam.imag, self.lam.real))

    def sort_key(self):
        return (self.angle, abs(self.lam), self.depth, self.word)


@dataclass
class ZeroSet:
    records: list
    d: int
    b: object
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.b = as_fraction(self.b)
        self.records.sort(key=ZeroRecord.sort_key)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def lambdas(self):
        return np.array([r.lam for r in self.records], dtype=complex)

    def multiplicities(self):
        return np.array([r.multiplicity for r in self.records], dtype=int)

    def circle_angles(self):
        return np.array([r.angle for r in self.records if r.on_circle], dtype=float)

    def select(self, depth=None, word=None):
        recs = [r for r in self.records
                if (depth is None or r.depth == depth) and (word is None or r.word == tuple(word))]
        return ZeroSet(recs, self.d, self.b, dict(self.meta))


def _snap(z):
    z = complex(z)
    if abs(z.imag) < 1e-13 * max(1.0, abs(z)):
        z = complex(z.real, 0.0)
    return z


def on_circle(z, tol=CIRCLE_TOL):
    return abs(abs(z) - 1) < tol


# ------------------------------------------------------------ verification

@dataclass
class VerifyReport:
    residual: float
    m: int
    values: list


def verify_zero(lam, word, p, prec=64):
    """min over 0 <= m <= n of |f^m(lam) + 1| along the word's orbit of lam.

    ``p`` supplies d and b; its own lambda is ignored.
    """
    word = tuple(word)
    use_prec = max(prec, 54)
    with mpmath.workprec(use_prec):
        lam = mpmath.mpc(lam)
        params = ModelParams(p.d, p.b, lam)
        z = lam
        vals = [abs(z + 1)]
        for k in word:
            z = map_eval(params, k, z, prec=use_prec)
            vals.append(mpmath.inf if is_inf(z) else abs(z + 1))
        m = int(np.argmin([float(v) for v in vals]))
        return VerifyReport(float(vals[m]), m, [float(v) for v in vals])


def dynamic_residuals(lams, word, b):
    """Vectorized verify_zero in longdouble for many parameters sharing one word."""
    lams = np.asarray(lams, dtype=np.clongdouble)
    bl = np.longdouble(as_fraction(b).numerator) / np.longdouble(as_fraction(b).denominator)
    z = lams.copy()
    best = np.abs(z + 1).astype(float)
    with np.errstate(all="ignore"):
        for k in word:
            g = (z + bl) / (bl * z + 1)
            z = lams * g ** k
            v = np.abs(z + 1).astype(float)
            v[~np.isfinite(v)] = np.inf
            best = np.minimum(best, v)
    return best


def refine_zero(lambda0, word, p, target_residual=1e-14, prec=128, max_steps=64):
    """Newton on F(lam) = f^n(lam) + 1 with the orbit-derivative recurrence."""
    word = tuple(word)
    with mpmath.workprec(prec):
        b = mpmath.mpf(as_fraction(p.b).numerator) / as_fraction(p.b).denominator
        lam = mpmath.mpc(lambda0)
        for _ in range(max_steps):
            z, dz = lam, mpmath.mpc(1)
            for k in word:
                den = b * z + 1
                if den == 0:
                    raise DomainError("singular-newton", "orbit hit the pole -1/b")
                g = (z + b) / den
                dg = (1 - b * b) / (den * den)
                z, dz = lam * g ** k, g ** k + lam * k * g ** (k - 1) * dg * dz
            F = z + 1
            if abs(F) < target_residual:
                return complex(lam) if prec <= 64 else lam
            if dz == 0 or not mpmath.isfinite(abs(dz)):
                raise DomainError("singular-newton", "derivative vanished")
            lam = lam - F / dz
        raise DomainError("no-convergence", f"|F| = {float(abs(F)):.3g} after {max_steps} steps")


# ------------------------------------------------------------ enumeration

def _word_records(tr, tree_class, precision):
    recs = []
    lams = np.asarray([complex(x) for x in tr.roots], dtype=complex)
    dyn = dynamic_residuals(np.asarray(tr.roots, dtype=np.clongdouble) if precision <= 64 else lams,
                            tr.word, tr.b)
    for z, res, m, dr in zip(lams, tr.residuals, tr.multiplicities, dyn):
        z = _snap(z)
        recs.append(ZeroRecord(z, tree_class, tr.word, len(tr.word), float(res), on_circle(z),
                               int(m), float(dr), bool(dr > DYN_TOL)))
    return recs


def check_budget(d, max_depth, tree_class):
    top = vertex_count((d,) * max_depth)
    if top > MAX_DEGREE:
        raise DomainError("budget-exceeded", f"degree {top} exceeds {MAX_DEGREE}")
    if tree_class == "spherical":
        total = sum(vertex_count(w) for w in _all_words(d, max_depth))
    else:
        total = sum(vertex_count((d,) * n) for n in range(max_depth + 1))
    if total > MAX_TOTAL_DEGREE:
        raise DomainError("budget-exceeded", f"total degree {total} exceeds {MAX_TOTAL_DEGREE}")
    return total


def _all_words(d, max_depth):
    import itertools
    for n in range(max_depth + 1):
        yield from itertools.product(range(1, d + 1), repeat=n)


def _roots_from_parent(word, b, parent_roots, precision):
    N = vertex_count(word)
    seeds = None
    if parent_roots is not None:
        seeds = seeds_from_parent(np.asarray(parent_roots, dtype=complex), word[-1], N)
    return tree_roots(word, b, seeds=seeds, precision=precision)


def _subtree_records(prefix, d, b, max_depth, min_depth, precision, parent_roots=None):
    """Depth-first walk of all words extending ``prefix`` (prefix included)."""
    out = []
    stack = [(tuple(prefix), parent_roots)]
    while stack:
        word, proots = stack.pop()
        tr = _roots_from_parent(word, b, proots, precision) if word else tree_roots((), b)
        if len(word) >= min_depth:
            out.extend(_word_records(tr, "spherical", precision))
        if len(word) < max_depth:
            for k in range(d, 0, -1):
                stack.append((word + (k,), tr.roots))
    return out


def enumerate_zero_set(d, b, max_depth, tree_class="cayley", min_depth=0, precision=64,
                       workers=1):
    """Zeros of the tree polynomials at depths min_depth..max_depth.

    cayley: the constant word (d,...,d) at each depth.
    spherical: every word over 1..d of each length.
    """
    b = as_fraction(b)
    if tree_class not in CLASSES:
        raise DomainError("invalid-parameter", f"unknown tree class {tree_class!r}")
    if max_depth < 0 or min_depth < 0 or min_depth > max_depth:
        raise DomainError("invalid-parameter", "need 0 <= min_depth <= max_depth")
    ModelParams(d, b)
    check_budget(d, max_depth, tree_class)
    t0 = time.time()
    records = []
    if tree_class == "cayley":
        prev = None
        for n in range(max_depth + 1):
            word = (d,) * n
            tr = _roots_from_parent(word, b, prev, precision) if n else tree_roots((), b)
            prev = tr.roots
            if n >= min_depth:
                records.extend(_word_records(tr, "cayley", precision))
    else:
        if workers > 1 and max_depth >= 2:
            # words of length <= 1 here, then one task per two-letter prefix
            records = _subtree_records((), d, b, 1, min_depth, precision)
            # seed each task exactly as the serial walk would, so output is identical
            root0 = tree_roots((), b).roots
            parents = {k: _roots_from_parent((k,), b, root0, precision).roots
                       for k in range(1, d + 1)}
            tasks = [(k1, k2) for k1 in range(1, d + 1) for k2 in range(1, d + 1)]
            with ProcessPoolExecutor(max_workers=workers) as ex:
                futs = [ex.submit(_subtree_records, t, d, b, max_depth, min_depth, precision,
                                  parents[t[0]])
                        for t in tasks]
                for f in futs:
                    records.extend(f.result())
        else:
            records = _subtree_records((), d, b, max_depth, min_depth, precision)
    meta = {"depth": max_depth, "min_depth": min_depth, "precision": precision,
            "class": tree_class, "seconds": round(time.time() - t0, 3)}
    return ZeroSet(records, d, b, meta)


# ------------------------------------------------------------ measures

def _angles_of(zeros):
    if isinstance(zeros, ZeroSet):
        return zeros.circle_angles()
    arr = np.asarray(zeros)
    if arr.size == 0:
        return np.array([], float)
    if np.iscomplexobj(arr):
        arr = arr[np.abs(np.abs(arr) - 1) < CIRCLE_TOL]
        return normalize_angle(np.angle(arr))
    return normalize_angle(arr.astype(float))


def coverage_and_gap(zeros, arc, eps, samples=1000):
    """Fraction of arc samples within chordal eps of an on-circle zero, and the widest empty sub-arc."""
    if eps <= 0:
        raise DomainError("invalid-parameter", "eps must be positive")
    ang = np.sort(_angles_of(zeros))
    width = arc.width
    if ang.size == 0:
        return 0.0, width
    pts = arc.samples(samples)
    # chordal distance between unit points is 2 sin(|dtheta|/2)
    idx = np.searchsorted(ang, pts)
    left = ang[(idx - 1) % ang.size]
    right = ang[idx % ang.size]
    dl = np.abs(np.angle(np.exp(1j * (pts - left))))
    dr = np.abs(np.angle(np.exp(1j * (pts - right))))
    dist = 2 * np.sin(np.minimum(dl, dr) / 2)
    cov = float(np.mean(dist < eps))
    off = arc.offset(ang)
    inside = np.sort(off[off <= width])
    edges = np.concatenate([[0.0], inside, [width]])
    gap = float(np.max(np.diff(edges)))
    return cov, gap


# ---------------------------------------------------- circle zeros by lift

def _orbit_lift(theta, word, b):
    """Lift Theta_n(theta) of the ratio's angle and its theta-derivative."""
    T = np.array(theta, dtype=float, copy=True)
    dT = np.ones_like(T)
    for k in word:
        dT = 1 + k * gamma_lift_derivative(T, b) * dT
        T = theta + k * gamma_lift(T, b)
    return T, dT


def circle_zero_angles(word, b, arc, init=256, max_rounds=60, xtol=1e-14):
    """Angles in ``arc`` where the tree polynomial vanishes on the unit circle.

    On |lam| = 1 every map preserves the circle, so Z = 0 exactly when the lifted
    angle of the root ratio crosses pi mod 2pi. Intervals are refined until the lift
    moves by less than pi/4 across each and is monotone at both ends, then every
    crossing is bisected.
    """
    b = float(as_fraction(b))
    word = tuple(word)
    a0 = arc.start
    w = arc.width
    th = a0 + w * np.linspace(0.0, 1.0, init)
    T, dT = _orbit_lift(th, word, b)
    for _ in range(max_rounds):
        dTh = np.diff(th)
        jump = np.abs(np.diff(T))
        wiggle = np.sign(dT[:-1]) != np.sign(dT[1:])
        need = ((jump > math.pi / 4) | wiggle) & (dTh > 1e-13)
        if not need.any():
            break
        mids = 0.5 * (th[:-1][need] + th[1:][need])
        Tm, dTm = _orbit_lift(mids, word, b)
        th = np.concatenate([th, mids])
        T = np.concatenate([T, Tm])
        dT = np.concatenate([dT, dTm])
        order = np.argsort(th)
        th, T, dT = th[order], T[order], dT[order]
    level = np.floor((T - math.pi) / TWO_PI)
    cross = np.nonzero(level[:-1] != level[1:])[0]
    lo, hi = th[cross].copy(), th[cross + 1].copy()
    target = math.pi + TWO_PI * np.maximum(level[cross], level[cross + 1])
    flo = _orbit_lift(lo, word, b)[0] - target
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = _orbit_lift(mid, word, b)[0] - target
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
        if np.all(hi - lo < xtol):
            break
    return normalize_angle(0.5 * (lo + hi))


def spherical_circle_angles(d, b, max_depth, arc, min_depth=0, pad=0.0):
    """On-circle zero angles of all words of length min_depth..max_depth inside ``arc``."""
    grown = CircleArc(arc.start - pad, arc.end + pad) if pad else arc
    out = [circle_zero_angles(w, b, grown) for w in _all_words(d, max_depth) if len(w) >= min_depth]
    return np.concatenate(out) if out else np.array([], float)


# ------------------------------------------------------------ storage

JSONL_FIELDS = ("lambda_re", "lambda_im", "class", "word", "depth", "residual", "on_circle",
                "multiplicity", "d", "b")
CSV_FIELDS = ("lambda_re", "lambda_im", "class", "depth", "residual", "on_circle", "multiplicity")


def _b_text(b):
    b = as_fraction(b)
    return f"{b.numerator}/{b.denominator}"


def _fmt(x):
    return float(f"{x:.17g}")


def record_dict(r, d, b):
    return {"lambda_re": _fmt(r.lam.real), "lambda_im": _fmt(r.lam.imag), "class": r.tree_class,
            "word": list(r.word), "depth": r.depth, "residual": _fmt(r.residual),
            "on_circle": bool(r.on_circle), "multiplicity": int(r.multiplicity), "d": d,
            "b": _b_text(b)}


def dumps_jsonl(zs):
    return "".join(json.dumps(record_dict(r, zs.d, zs.b), separators=(",", ":")) + "\n"
                   for r in zs.records)


def dumps_csv(zs):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in zs.records:
        w.writerow([repr(_fmt(r.lam.real)), repr(_fmt(r.lam.imag)), r.tree_class, r.depth,
                    repr(_fmt(r.residual)), "true" if r.on_circle else "false", r.multiplicity])
    return buf.getvalue()


def loads_jsonl(text, d=None, b=None):
    recs = []
    for line in text.splitlines():
        if not line.strip():
            continue
        o = json.loads(line)
        d = o["d"] if d is None else d
        b = o["b"] if b is None else b
        recs.append(ZeroRecord(complex(o["lambda_re"], o["lambda_im"]), o["class"],
                               tuple(o["word"]), int(o["depth"]), float(o["residual"]),
                               bool(o["on_circle"]), int(o["multiplicity"])))
    return ZeroSet(recs, d if d is not None else 2, b if b is not None else 2)


def write_zero_set(zs, path, fmt="jsonl"):
    text = dumps_jsonl(zs) if fmt == "jsonl" else dumps_csv(zs)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def read_zero_set(path):
    with open(path) as fh:
        return loads_jsonl(fh.read())


def cache_dir():
    return os.environ.get("TREEZEROS_CACHE_DIR",
                          os.path.join(os.path.expanduser("~"), ".cache", "treezeros"))
