"""Both SVG panels at a moderate depth, written to a temporary directory."""
import os
import sys
import tempfile

from treezeros.cli import main
from treezeros.figure import count_markers

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="treezeros-")
main(["figure", "--d", "2", "--b", "2", "--depth", "9", "--spherical-depth", "6", "--out-dir", out])
for name in ("cayley.svg", "spherical.svg"):
    text = open(os.path.join(out, name)).read()
    print(f"{name}: {count_markers(text)} zeros, {count_markers(text, 'critical')} red markers")
