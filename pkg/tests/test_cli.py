import json
import subprocess
import sys

import pytest

from loopsoup.cli import main
from loopsoup.loops import read_soup


def run_cli(*argv):
    return main(list(argv))


def test_kappa_prints_reference_values(capsys):
    assert run_cli("kappa", "--kappa", "3") == 0
    assert capsys.readouterr().out.strip() == "lambda = 0.25"
    assert run_cli("kappa", "--kappa", "4") == 0
    assert capsys.readouterr().out.strip() == "lambda = 0.5"
    assert run_cli("kappa", "--lambda", "0.25") == 0
    assert capsys.readouterr().out.strip() == "kappa = 3"


def test_kappa_out_of_range_is_runtime_error(capsys):
    assert run_cli("kappa", "--kappa", "5") == 1
    assert "error:" in capsys.readouterr().err


def test_sample_lambda_zero_writes_valid_header(tmp_path, capsys):
    out = tmp_path / "empty.jsonl"
    assert run_cli("sample", "--lambda", "0", "--n", "8", "--t0", "0.05",
                   "--seed", "1", "--out", str(out)) == 0
    soup = read_soup(out)
    assert len(soup) == 0
    header = json.loads(out.read_text().splitlines()[0])
    assert header["kind"] == "lattice" and header["count"] == 0
    assert "tail_mass" in header and "regime" in header


def test_sample_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    args = ["sample", "--lambda", "0.8", "--n", "16", "--t0", "0.02", "--seed", "9"]
    assert run_cli(*args, "--out", str(a)) == 0
    assert run_cli(*args, "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sample_continuum_roundtrip(tmp_path):
    out = tmp_path / "bl.jsonl"
    assert run_cli("sample", "--kind", "continuum", "--lambda", "0.5", "--t0", "0.05",
                   "--m", "16", "--seed", "3", "--out", str(out)) == 0
    soup = read_soup(out)
    assert soup.kind == "continuum"
    for loop in soup.loops:
        assert loop.m == 16


def test_clusters_gap_match_render_pipeline(tmp_path, capsys):
    soup_path = tmp_path / "soup.jsonl"
    assert run_cli("sample", "--lambda", "1.0", "--n", "20", "--t0", "0.01",
                   "--seed", "4", "--out", str(soup_path)) == 0
    report = tmp_path / "clusters.json"
    svg = tmp_path / "clusters.svg"
    assert run_cli("clusters", "--in", str(soup_path), "--out", str(report),
                   "--svg", str(svg)) == 0
    data = json.loads(report.read_text())
    assert data["clusters"]
    for row in data["clusters"]:
        assert row["outermost"] == (row["parent"] is None)
    assert svg.read_text().startswith("<svg")

    gap_out = tmp_path / "gap.json"
    assert run_cli("gap", "--in", str(soup_path), "--out", str(gap_out)) == 0
    gap = json.loads(gap_out.read_text())
    assert gap["loops"] > 1 and (gap["min_gap"] > 0 or gap["all_intersecting"])

    match_out = tmp_path / "match.json"
    assert run_cli("match", "--a", str(soup_path), "--b", str(soup_path),
                   "--eps", "0.001", "--out", str(match_out)) == 0
    rep = json.loads(match_out.read_text())
    assert rep["perfect"] and rep["max_pair_distance"] == 0.0

    for layer in ("loops", "hulls", "boundaries", "carpet"):
        target = tmp_path / f"{layer}.svg"
        assert run_cli("render", "--in", str(soup_path), "--svg", str(target),
                       "--layer", layer) == 0
        assert target.read_text().startswith("<svg")


def test_converge_insufficient_replicas_exit_2(tmp_path, capsys):
    code = run_cli("converge", "--lambda", "0.5", "--n", "64,128", "--t0", "0.01",
                   "--replicas", "2", "--seed", "1", "--out", str(tmp_path / "c"))
    assert code == 2
    assert "insufficient" in capsys.readouterr().err


def test_converge_writes_all_declared_outputs(tmp_path):
    out = tmp_path / "conv"
    assert run_cli("converge", "--lambda", "0.4", "--n", "10,14", "--t0", "0.03",
                   "--replicas", "30", "--seed", "6", "--threads", "1",
                   "--out", str(out)) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    for name in manifest["outputs"]:
        target = out / name
        assert target.exists() and target.stat().st_size > 0


def test_unknown_flag_exits_2():
    proc = subprocess.run([sys.executable, "-m", "loopsoup.cli", "sample",
                           "--bogus", "1"], capture_output=True)
    assert proc.returncode == 2


def test_missing_input_is_runtime_error(tmp_path, capsys):
    assert run_cli("gap", "--in", str(tmp_path / "nope.jsonl"),
                   "--out", str(tmp_path / "g.json")) == 1
    assert "error:" in capsys.readouterr().err
