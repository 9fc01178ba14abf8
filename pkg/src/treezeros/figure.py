"""SVG scatter of zero sets in the lam-plane, with the critical parameters in red."""
import math

from .critical import lambda0, lambda1
from .sphere import DomainError

VIEW = 1.3
SIZE = 600


def _xy(z):
    # SVG's y axis points down
    return f"{z.real:.6f}", f"{-z.imag:.6f}"


def critical_markers(d, b):
    """lam0, its conjugate, lam1 and its conjugate, when 1 < b < (d+1)/(d-1)."""
    try:
        a0, a1 = lambda0(d, b), lambda1(d, b)
    except DomainError:
        return []
    out = []
    for name, a in (("lambda0", a0), ("lambda1", a1)):
        z = complex(math.cos(a), math.sin(a))
        out.append((name, z))
        out.append((name + "_bar", z.conjugate()))
    return out


def render_svg(zero_set=None, markers=(), title=""):
    """Unit circle, zeros (each repeated by multiplicity) and red markers.

    On-circle zeros are drawn as filled dots, off-circle ones as hollow rings.
    The output depends only on the inputs.
    """
    v = VIEW
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
        f'viewBox="{-v} {-v} {2 * v} {2 * v}">',
    ]
    if title:
        lines.append(f"<title>{title}</title>")
    lines.append('<rect x="-1.3" y="-1.3" width="2.6" height="2.6" fill="white"/>')
    lines.append('<line x1="-1.3" y1="0" x2="1.3" y2="0" stroke="#ccc" stroke-width="0.003"/>')
    lines.append('<line x1="0" y1="-1.3" x2="0" y2="1.3" stroke="#ccc" stroke-width="0.003"/>')
    lines.append('<circle cx="0" cy="0" r="1" fill="none" stroke="#888" stroke-width="0.004"/>')
    if zero_set is not None:
        lines.append('<g id="zeros">')
        for r in zero_set.records:
            x, y = _xy(r.lam)
            if r.on_circle:
                el = f'<circle class="zero on" cx="{x}" cy="{y}" r="0.006" fill="#1f4e9c"/>'
            else:
                el = (f'<circle class="zero off" cx="{x}" cy="{y}" r="0.006" fill="none" '
                      f'stroke="#2a8c3a" stroke-width="0.003"/>')
            lines.extend([el] * r.multiplicity)
        lines.append("</g>")
    if markers:
        lines.append('<g id="critical">')
        for name, z in markers:
            x, y = _xy(z)
            lines.append(f'<circle class="critical" data-name="{name}" cx="{x}" cy="{y}" r="0.02" fill="red"/>')
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def count_markers(svg_text, cls="zero"):
    """Number of marker elements whose class list contains ``cls``."""
    n = 0
    for line in svg_text.splitlines():
        start = line.find('class="')
        if start < 0:
            continue
        end = line.index('"', start + 7)
        if cls in line[start + 7:end].split():
            n += 1
    return n
