import json
import math
import subprocess
import sys

import pytest

from treezeros.atlas import ZeroSet, dumps_csv, loads_jsonl, dumps_jsonl
from treezeros.cli import config_hash, main, resolve_angle, resolve_arc
from treezeros.figure import count_markers, critical_markers, render_svg
from treezeros.sphere import DomainError
from treezeros.trees import vertex_count, words


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_zeros_jsonl(capsys):
    code, out, err = run(capsys, "zeros", "--class", "cayley", "--d", "2", "--b", "2", "--depth", "3")
    assert code == 0
    lines = out.strip().split("\n")
    assert len(lines) == 15
    rec = json.loads(lines[0])
    assert set(rec) == {"lambda_re", "lambda_im", "class", "word", "depth", "residual",
                        "on_circle", "multiplicity", "d", "b"}
    assert rec["b"] == "2/1" and rec["word"] == [2, 2, 2]
    assert err.startswith("# treezeros ") and "config=" in err and "precision=64" in err


def test_zeros_csv_depth1(capsys):
    code, out, _ = run(capsys, "zeros", "--depth", "1", "--format", "csv")
    rows = out.strip().split("\n")
    assert rows[0] == "lambda_re,lambda_im,class,depth,residual,on_circle,multiplicity"
    assert len(rows) == 4
    minus_one = [r.split(",") for r in rows[1:] if r.startswith("-1.0,")]
    assert len(minus_one) == 1
    re_, im, cls, depth, res, on, mult = minus_one[0]
    assert (float(im), cls, depth, on, mult) == (0.0, "cayley", "1", "true", "1")
    assert float(res) < 1e-12


def test_empty_csv_is_header_only():
    assert dumps_csv(ZeroSet([], 2, 2)) == "lambda_re,lambda_im,class,depth,residual,on_circle,multiplicity\n"


def test_zeros_round_trip_and_cache(capsys, tmp_path):
    out1 = tmp_path / "a.jsonl"
    out2 = tmp_path / "b.jsonl"
    argv = ["zeros", "--class", "spherical", "--depth", "4", "--min-depth", "0", "--b", "5/2"]
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2), "--no-cache"]) == 0
    capsys.readouterr()
    t1, t2 = out1.read_text(), out2.read_text()
    assert t1 == t2
    assert dumps_jsonl(loads_jsonl(t1)) == t1
    meta = json.loads((tmp_path / "a.jsonl.meta.json").read_text())
    assert meta["precision"] == 64 and len(meta["config_hash"]) == 16
    # 17 significant digits survive the text round trip
    for line in t1.splitlines()[:50]:
        o = json.loads(line)
        assert repr(float(o["lambda_re"])) == repr(o["lambda_re"])


def test_params_table(capsys):
    code, out, _ = run(capsys, "params", "--d", "2", "--b", "2")
    assert code == 0
    rows = dict(line.split(None, 1) for line in out.strip().split("\n"))
    assert rows["b_threshold"] == "3"
    assert rows["lambda0_angle"].startswith("2.0943951")
    assert abs(float(rows["lambda1_angle"]) - 2.329) < 1e-3
    assert abs(float(rows["lambda2_angle"]) - 2.30635109358082) < 1e-11


def test_params_json_super_threshold(capsys):
    code, out, _ = run(capsys, "params", "--b", "4", "--format", "json")
    data = json.loads(out)
    assert data["regime"] == "super-threshold" and "lambda0_angle" not in data


def test_certify(capsys):
    code, out, _ = run(capsys, "certify", "--lambda", "lambda0+0.005")
    assert code == 0
    cert = json.loads(out)
    assert cert["N"] == 13 and cert["min_derivative"] >= 3
    code, out, err = run(capsys, "certify", "--b", "3")
    assert code == 1 and "out-of-range" in err


def test_density(capsys):
    code, out, _ = run(capsys, "density", "--class", "cayley", "--depth", "9", "--min-depth", "8",
                       "--arc", "middle-third")
    rows = json.loads(out)["rows"]
    assert [r["depth"] for r in rows] == [8, 9]
    assert all(r["gap"] > 0.01 for r in rows)


def test_oracle(capsys, tmp_path):
    star = tmp_path / "star.txt"
    star.write_text("3\n0 1\n0 2\n")
    code, out, _ = run(capsys, "oracle", "--tree", str(star), "--b", "2")
    assert code == 0
    assert out.split("\n")[:2] == ["λ^3 + 8λ^2 + 8λ + 1", "MATCH recursion"]
    path = tmp_path / "path4.txt"
    path.write_text("4\n0 1\n1 2\n1 3\n")
    code, out, _ = run(capsys, "oracle", "--tree", str(path))
    assert code == 0 and "MATCH recursion" in out
    odd = tmp_path / "odd.txt"
    odd.write_text("4\n0 1\n0 2\n1 3\n")
    code, out, _ = run(capsys, "oracle", "--tree", str(odd))
    assert code == 0 and "recursion n/a" in out


def test_usage_and_domain_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["zeros", "--depth", "1", "--b", "2.5"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["nonsense"])
    assert e.value.code == 2
    code, _, err = run(capsys, "zeros", "--depth", "2", "--b", "1")
    assert code == 1 and "error:" in err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "treezeros", "params"], capture_output=True, text=True)
    assert r.returncode == 0 and "lambda0_angle" in r.stdout
    r = subprocess.run([sys.executable, "-m", "treezeros", "zeros"], capture_output=True, text=True)
    assert r.returncode == 2


def test_resolve_helpers():
    assert abs(resolve_angle("lambda0", 2, 2) - 2 * math.pi / 3) < 1e-12
    assert abs(resolve_angle("lambda0+0.005", 2, 2) - (2 * math.pi / 3 + 0.005)) < 1e-12
    assert resolve_angle("1.5", 2, 2) == 1.5
    with pytest.raises(DomainError):
        resolve_angle("lambda9", 2, 2)
    arc = resolve_arc("middle-third", 2, 2)
    assert abs(arc.width - (2.3288370922211326 - 2 * math.pi / 3) / 3) < 1e-12
    assert config_hash({"a": 1}) == config_hash({"a": 1}) != config_hash({"a": 2})


def test_figure_small(capsys, tmp_path):
    out = tmp_path / "fig"
    code, _, err = run(capsys, "figure", "--depth", "5", "--spherical-depth", "3", "--out-dir", str(out))
    assert code == 0
    cay = (out / "cayley.svg").read_text()
    sph = (out / "spherical.svg").read_text()
    assert count_markers(cay) == sum(2 ** (n + 1) - 1 for n in range(6))
    assert count_markers(sph) == sum(vertex_count(w) for w in words(2, 3))
    assert count_markers(cay, "critical") == 4
    # deterministic bytes
    run(capsys, "figure", "--depth", "5", "--spherical-depth", "3", "--out-dir", str(tmp_path / "again"))
    assert (tmp_path / "again" / "cayley.svg").read_text() == cay


def test_render_svg_basics():
    empty = render_svg()
    assert "<circle" in empty and count_markers(empty) == 0 and count_markers(empty, "critical") == 0
    m = dict(critical_markers(2, 2))
    assert abs(m["lambda0"] - complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))) < 1e-12
    assert abs(m["lambda0_bar"] - m["lambda0"].conjugate()) == 0
    assert critical_markers(2, 4) == []
