import json
import subprocess
import sys
from pathlib import Path

import pytest

from replicator_lab import __version__
from replicator_lab.cli import parse_real, run

FAST = {
    "orbit": ["--n", "200", "--burn-in", "50"],
    "periodic": ["--max-period", "3"],
    "bifurcation": ["--a-min", "8", "--a-max", "10", "--a-steps", "9", "--samples", "8", "--burn-in", "500"],
    "certify": ["--depth", "6", "--samples", "50"],
    "find-a0": ["--a-min", "20", "--a-max", "35", "--depth", "4"],
    "symbolic": ["--max-n", "12"],
    "shiftlab": ["--max-period", "4", "--degree", "6", "--grid", "200"],
    "conjugacy-check": ["--grid", "1000"],
    "mean-law": ["--a", "12", "--b", "1/3", "--max-period", "6"],
}


def files_of(d: Path):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


@pytest.mark.parametrize("cmd", sorted(FAST))
def test_every_command_runs_and_is_deterministic(tmp_path, cmd):
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    assert run([cmd, "--out", str(d1), *FAST[cmd]]) == 0
    assert run([cmd, "--out", str(d2), *FAST[cmd]]) == 0
    f1, f2 = files_of(d1), files_of(d2)
    assert f1.keys() == f2.keys()
    manifest = json.loads(f1.pop("manifest.json"))
    f2.pop("manifest.json")
    assert f1 == f2
    h = manifest["config_hash"]
    assert set(manifest["outputs"]) == set(f1)
    assert "timings" in manifest and "versions" in manifest
    for name, data in f1.items():
        assert h.encode() in data, name


def test_certify_output(tmp_path):
    assert run(["certify", "--a", "30", "--b", "0.3333333333", "--depth", "10", "--out", str(tmp_path),
                "--require-pass"]) == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["pass"] is True
    lines = (tmp_path / "k_approximation.csv").read_text().splitlines()
    assert lines[1] == "label,left,right"
    assert len(lines) == 2 + 233


def test_certify_require_pass_fails(tmp_path):
    assert run(["certify", "--a", "10", "--b", "0.49", "--out", str(tmp_path), "--require-pass"]) == 1
    assert run(["certify", "--a", "10", "--b", "0.49", "--out", str(tmp_path)]) == 0


def test_symbolic_table(tmp_path):
    run(["symbolic", "--max-n", "12", "--out", str(tmp_path)])
    table = json.loads((tmp_path / "counts.json").read_text())["table"]
    B = {row["n"]: row["B_n"] for row in table}
    assert B[3] == 4 and B[10] == 123
    words = (tmp_path / "words.txt").read_text().splitlines()
    assert words[0].startswith("# config_hash=")
    assert words[1] == "0"


def test_mean_law_output(tmp_path):
    assert run(["mean-law", "--a", "12", "--b", "0.3333333333", "--max-period", "6", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "mean_law.json").read_text())
    assert rep["worst_deviation"] <= 1e-8 and rep["passed"]


def test_mean_law_failure_exit(tmp_path):
    # a zero tolerance cannot be met by rounded cycle means
    assert run(["mean-law", "--a", "30", "--b", "1/4", "--max-period", "5", "--tol", "0",
                "--out", str(tmp_path)]) == 1


def test_fraction_b(tmp_path):
    run(["conjugacy-check", "--b", "1/3", "--grid", "100", "--out", str(tmp_path)])
    d = json.loads((tmp_path / "conjugacy.json").read_text())
    assert d["b"] == 1 / 3
    assert parse_real("2/3") == 2 / 3
    assert parse_real("0.25") == 0.25


def test_float_format(tmp_path):
    run(["conjugacy-check", "--b", "1/3", "--grid", "100", "--out", str(tmp_path)])
    assert "0.33333333333333331" in (tmp_path / "conjugacy.json").read_text()


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "symbolic", "max_n": 5}))
    assert run(["--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    table = json.loads((tmp_path / "o" / "counts.json").read_text())["table"]
    assert len(table) == 5
    # the same options on the command line give the same hash
    run(["symbolic", "--max-n", "5", "--out", str(tmp_path / "p")])
    h1 = json.loads((tmp_path / "o" / "manifest.json").read_text())["config_hash"]
    h2 = json.loads((tmp_path / "p" / "manifest.json").read_text())["config_hash"]
    assert h1 == h2


def test_config_errors(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"command": "symbolic", "bogus": 1}))
    assert run(["--config", str(cfg), "--out", str(tmp_path)]) == 2
    cfg.write_text("not json")
    assert run(["symbolic", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert run(["certify", "--a", "-1", "--out", str(tmp_path)]) == 2
    assert run(["certify", "--a", "3", "--out", str(tmp_path)]) == 2
    assert run(["certify", "--b", "1/0", "--out", str(tmp_path)]) == 2
    assert run(["orbit", "--x0", "2", "--out", str(tmp_path)]) == 2
    assert run(["bifurcation", "--a-min", "3", "--out", str(tmp_path)]) == 2
    assert run(["symbolic", "--jobs", "0", "--out", str(tmp_path)]) == 2
    assert run([]) == 2
    assert run(["nonsense"]) == 2


def test_parallel_bifurcation_matches(tmp_path):
    args = ["bifurcation", *FAST["bifurcation"]]
    run([*args, "--out", str(tmp_path / "s")])
    run([*args, "--jobs", "2", "--out", str(tmp_path / "p")])
    assert (tmp_path / "s" / "bifurcation.csv").read_bytes() == (tmp_path / "p" / "bifurcation.csv").read_bytes()


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "replicator_lab", "--version"], capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.strip() == __version__
