"""Command-line front end: ``treezeros <subcommand> ...``.

Exit status is 0 on success, 1 on a domain error and 2 on a usage error. Every
run writes a one-line reproducibility header (version, config hash, precision)
to stderr; files written with ``--out`` also get a ``.meta.json`` sidecar.
"""
import argparse
import hashlib
import json
import math
import os
import re
import sys

import numpy as np

from . import __version__
from .atlas import (cache_dir, circle_zero_angles, coverage_and_gap, dumps_csv, dumps_jsonl,
                    enumerate_zero_set, loads_jsonl, spherical_circle_angles)
from .critical import b_threshold, lambda0, lambda1, lambda2, regime
from .figure import critical_markers, render_svg
from .semigroup import expansion_certificate
from .sphere import CircleArc, DomainError, ModelParams, as_fraction, unit
from .trees import GeneralTree, TreeSpec, brute_force_polynomial, partition_polynomial

_ANGLE_RE = re.compile(r"^\s*(lambda[012])?\s*([+-]\s*[0-9.eE+-]+)?\s*$")


def parse_b(text):
    try:
        return as_fraction(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def resolve_angle(text, d, b):
    """'lambda0', 'lambda1+0.01', '2.1' -> angle in radians."""
    text = str(text).strip()
    try:
        return float(text)
    except ValueError:
        pass
    m = _ANGLE_RE.match(text)
    if not m or not m.group(1):
        raise DomainError("invalid-parameter", f"cannot read angle {text!r}")
    base = {"lambda0": lambda0, "lambda1": lambda1, "lambda2": lambda2}[m.group(1)](d, b)
    shift = float(m.group(2).replace(" ", "")) if m.group(2) else 0.0
    return base + shift


def resolve_arc(text, d, b):
    """'START:END' with symbolic or numeric endpoints, or 'middle-third'."""
    if text == "middle-third":
        a0, a1 = lambda0(d, b), lambda1(d, b)
        w = (a1 - a0) / 3
        return CircleArc(a0 + w, a0 + 2 * w, True, True)
    if ":" not in text:
        raise DomainError("invalid-parameter", f"arc must be START:END, got {text!r}")
    s, e = text.split(":", 1)
    return CircleArc(resolve_angle(s, d, b), resolve_angle(e, d, b), True, True)


def config_hash(cfg):
    blob = json.dumps({"version": __version__, **cfg}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _config(args):
    skip = {"func", "out", "out_dir", "no_cache", "workers"}
    return {k: (str(v) if not isinstance(v, (int, float, str, bool, type(None))) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def _header(args):
    cfg = _config(args)
    return f"# treezeros {__version__} config={config_hash(cfg)} precision={getattr(args, 'precision', 64)}"


def _emit(args, text, path=None):
    path = path if path is not None else getattr(args, "out", None)
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
        meta = {"version": __version__, "config": _config(args), "config_hash": config_hash(_config(args)),
                "precision": getattr(args, "precision", 64)}
        with open(path + ".meta.json", "w") as fh:
            fh.write(json.dumps(meta, sort_keys=True, indent=1) + "\n")
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ commands

def _zero_set(args, d, b, depth, min_depth, cls):
    key = {"d": d, "b": str(b), "class": cls, "depth": depth, "min_depth": min_depth,
           "precision": args.precision}
    path = os.path.join(cache_dir(), f"zeros-{config_hash(key)}.jsonl")
    if not args.no_cache and os.path.exists(path):
        with open(path) as fh:
            return loads_jsonl(fh.read(), d, b)
    zs = enumerate_zero_set(d, b, depth, cls, min_depth=min_depth, precision=args.precision,
                            workers=args.workers)
    if not args.no_cache:
        try:
            os.makedirs(cache_dir(), exist_ok=True)
            tmp = path + f".{os.getpid()}.tmp"
            with open(tmp, "w") as fh:
                fh.write(dumps_jsonl(zs))
            os.replace(tmp, path)
        except OSError:
            pass
    return zs


def cmd_zeros(args):
    ModelParams(args.d, args.b)
    min_depth = args.depth if args.min_depth is None else args.min_depth
    zs = _zero_set(args, args.d, args.b, args.depth, min_depth, args.cls)
    flagged = sum(r.flagged for r in zs.records)
    if flagged:
        print(f"warning: {flagged} records disagree with the orbit test", file=sys.stderr)
    _emit(args, dumps_jsonl(zs) if args.format == "jsonl" else dumps_csv(zs))
    return 0


def _fmt_angle(a):
    return "n/a" if a is None else f"{a:.15g}"


def lambda3_proxy(d, b, depth, eps=2e-3, threshold=0.9, steps=200):
    """Largest w such that spherical zeros at the given depth cover Arc[lam0, lam0 + w]
    to more than ``threshold`` at chordal eps; None if no such arc."""
    a0 = lambda0(d, b)
    full = CircleArc(a0, math.pi, True, True)
    ang = spherical_circle_angles(d, b, depth, full)
    best = None
    for w in full.width * np.arange(1, steps + 1) / steps:
        cov, _ = coverage_and_gap(ang, CircleArc(a0, a0 + w, True, True), eps)
        if cov > threshold:
            best = float(w)
    return best


def cmd_params(args):
    d, b = args.d, args.b
    ModelParams(d, b)
    rows = [("d", str(d)), ("b", str(b)), ("b_threshold", str(b_threshold(d))),
            ("regime", regime(d, b))]
    if regime(d, b) == "sub-threshold" and b > 1:
        a0, a1, a2 = lambda0(d, b), lambda1(d, b), lambda2(d, b)
        rows += [("lambda0_angle", _fmt_angle(a0)), ("lambda1_angle", _fmt_angle(a1)),
                 ("lambda2_angle", _fmt_angle(a2))]
        if args.lambda3_depth:
            w = lambda3_proxy(d, b, args.lambda3_depth)
            rows.append(("lambda3_proxy_width", _fmt_angle(w)))
    if args.format == "json":
        text = json.dumps(dict(rows), indent=1) + "\n"
    else:
        width = max(len(k) for k, _ in rows)
        text = "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)
    _emit(args, text)
    return 0


def cmd_certify(args):
    d, b = args.d, args.b
    alpha = resolve_angle(args.lam, d, b)
    cert = expansion_certificate(ModelParams(d, b, unit(alpha)), args.kappa, args.max_n, args.grid)
    _emit(args, cert.to_json() + "\n")
    return 0


def cmd_density(args):
    d, b = args.d, args.b
    ModelParams(d, b)
    arc = resolve_arc(args.arc, d, b)
    lo = args.depth if args.min_depth is None else args.min_depth
    rows = []
    for n in range(lo, args.depth + 1):
        if args.cls == "cayley":
            ang = np.concatenate([circle_zero_angles((d,) * m, b, arc) for m in range(n + 1)])
        else:
            ang = spherical_circle_angles(d, b, n, arc)
        cov, gap = coverage_and_gap(ang, arc, args.eps)
        rows.append({"depth": n, "coverage": cov, "gap": gap, "zeros_in_arc": int(ang.size)})
    out = {"class": args.cls, "d": d, "b": str(b), "arc": [arc.start, arc.end], "eps": args.eps,
           "rows": rows}
    _emit(args, json.dumps(out, indent=1) + "\n")
    return 0


def _levels_word(tree):
    """Degree word (bottom-up) if the rooted tree is spherically symmetric, else None."""
    adj = {v: [] for v in range(tree.n)}
    for u, v in tree.edges:
        adj[u].append(v)
        adj[v].append(u)
    level, seen, degrees = [tree.root], {tree.root}, []
    while level:
        counts = set()
        nxt = []
        for v in level:
            kids = [w for w in adj[v] if w not in seen]
            counts.add(len(kids))
            seen.update(kids)
            nxt.extend(kids)
        if len(counts) != 1:
            return None
        k = counts.pop()
        if k == 0:
            break
        degrees.append(k)
        level = nxt
    return tuple(reversed(degrees))


def cmd_oracle(args):
    tree = GeneralTree.read(args.tree)
    brute = brute_force_polynomial(tree, args.b)
    lines = [brute.to_text()]
    status = 0
    word = _levels_word(tree)
    if word is None:
        lines.append("recursion n/a (tree is not spherically symmetric)")
    else:
        rec = partition_polynomial(TreeSpec(word, max(word) if word else 1), args.b)
        if rec == brute:
            lines.append("MATCH recursion")
        else:
            lines.append("MISMATCH recursion: " + rec.to_text())
            status = 1
    _emit(args, "\n".join(lines) + "\n")
    return status


def cmd_figure(args):
    d, b = args.d, args.b
    ModelParams(d, b)
    os.makedirs(args.out_dir, exist_ok=True)
    markers = critical_markers(d, b)
    sph_depth = min(args.spherical_depth, args.depth)
    for cls, depth in (("cayley", args.depth), ("spherical", sph_depth)):
        zs = _zero_set(args, d, b, depth, 0, cls)
        title = f"{cls} trees, d={d}, b={b}, depth 0..{depth}"
        path = os.path.join(args.out_dir, f"{cls}.svg")
        _emit(args, render_svg(zs, markers, title), path)
        print(f"{path}: {sum(r.multiplicity for r in zs.records)} zero markers", file=sys.stderr)
    return 0


# ------------------------------------------------------------------ parser

def build_parser():
    ap = argparse.ArgumentParser(prog="treezeros", description="Zeros of tree partition functions.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, precision=True):
        p.add_argument("--d", type=int, default=2, help="branching number (default 2)")
        p.add_argument("--b", type=parse_b, default=as_fraction(2), help='edge weight as "p/q"')
        if precision:
            p.add_argument("--precision", type=int, default=64, help="bits (default 64)")
        p.add_argument("--out", default=None, help="output file (default stdout)")

    p = sub.add_parser("zeros", help="enumerate tree polynomial zeros")
    common(p)
    p.add_argument("--class", dest="cls", choices=("cayley", "spherical"), default="cayley")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--min-depth", type=int, default=None, help="default: same as --depth")
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("params", help="critical parameters")
    common(p, precision=False)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--lambda3-depth", type=int, default=0,
                   help="also report the empirical coverage width from lambda0 at this depth")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("certify", help="expansion certificate for the hat semigroup")
    common(p, precision=False)
    p.add_argument("--lambda", dest="lam", default="lambda0+0.005", help="angle or symbolic")
    p.add_argument("--kappa", type=float, default=3.0)
    p.add_argument("--max-n", type=int, default=40)
    p.add_argument("--grid", type=int, default=512)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("density", help="coverage and gap of circle zeros on an arc")
    common(p, precision=False)
    p.add_argument("--class", dest="cls", choices=("cayley", "spherical"), default="spherical")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--min-depth", type=int, default=None)
    p.add_argument("--arc", default="lambda0:lambda0+0.1")
    p.add_argument("--eps", type=float, default=2e-3)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("oracle", help="brute-force subset sum for a tree file")
    p.add_argument("--tree", required=True)
    p.add_argument("--b", type=parse_b, default=as_fraction(2))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("figure", help="SVG scatter plots of Cayley and spherical zeros")
    common(p)
    p.add_argument("--depth", type=int, default=11)
    p.add_argument("--spherical-depth", type=int, default=8)
    p.add_argument("--out-dir", default="figure")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_figure)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    print(_header(args), file=sys.stderr)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
