"""Test the command-line interface."""

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from hdx_verifier.cli import app

DATA = Path(__file__).resolve().parent.parent / 'examples_data'

runner = CliRunner()


def _pairs(output):
    return dict(line.rsplit("=", 1) for line in output.splitlines() if "=" in line)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    monkeypatch.delenv("HDX_TOLERANCE", raising=False)
    monkeypatch.delenv("HDX_CONFIG", raising=False)
    monkeypatch.chdir(tmp_path)


def test_generate_complete():
    result = runner.invoke(app, ["generate", "--family", "complete", "--N", "6", "--n", "2"])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "dim 2"
    assert len(lines) == 21


def test_generate_tetrahedron_count():
    result = runner.invoke(app, ["generate", "--family", "complete", "--N", "4", "--n", "2"])
    assert result.exit_code == 0
    assert len(result.output.splitlines()) == 5


def test_generate_to_file(tmp_path):
    out = tmp_path / "octahedron.cx"
    result = runner.invoke(app, ["generate", "--family", "complete-partite", "--sides", "2,2,2",
                                 "--out", str(out)])
    assert result.exit_code == 0
    assert out.read_text().count("\n") == 9


def test_generate_rejects_bad_parameters():
    result = runner.invoke(app, ["generate", "--family", "complete", "--N", "2", "--n", "2"])
    assert result.exit_code == 2
    result = runner.invoke(app, ["generate", "--family", "complete-partite", "--sides", "a,b"])
    assert result.exit_code == 2


def test_spectra_machine():
    """K6 has two-sided lambda 1/4."""
    result = runner.invoke(app, ["--machine", "spectra", "--complex", str(DATA / "k6.cx")])
    assert result.exit_code == 0
    pairs = _pairs(result.output)
    assert pairs["PASSED"] == "true"
    assert pairs["LAMBDA_TWO_SIDED"] == "0.25"
    assert pairs["MU_0"] == "-0.2"
    assert pairs["LINK_empty_MIN"] == "-0.2"
    assert pairs["LINK_5_MAX"] == "-0.25"


def test_spectra_json():
    result = runner.invoke(app, ["--format", "json", "spectra", "--complex",
                                 str(DATA / "triangle.cx")])
    assert result.exit_code == 0
    assert json.loads(result.output)["n"] == 2


def test_descent_with_target():
    result = runner.invoke(app, ["--machine", "descent", "--complex", str(DATA / "k6.cx"),
                                 "--lambda", "0.5"])
    assert result.exit_code == 0
    assert _pairs(result.output)["EXPLICIT.PASSED"] == "true"


def test_mixing_on_sets():
    result = runner.invoke(app, ["--machine", "mixing", "--complex", str(DATA / "k6.cx"),
                                 "--sets", str(DATA / "k6_sets.txt")])
    assert result.exit_code == 0
    pairs = _pairs(result.output)
    assert pairs["HOLDS"] == "true"
    assert pairs["RHS"] == "25"
    assert pairs["LAMBDA_SOURCE"] == "measured"


def test_partite_mixing():
    result = runner.invoke(app, ["--machine", "mixing", "--partite", "--complex",
                                 str(DATA / "k222.cx"), "--sets", str(DATA / "k222_sets.txt")])
    assert result.exit_code == 0
    assert _pairs(result.output)["CONSTANT"] == "62"


def test_mixing_random_families():
    result = runner.invoke(app, ["--machine", "mixing", "--complex", str(DATA / "k6.cx"),
                                 "--seeds", "3", "--seed", "2", "--from-top-links"])
    assert result.exit_code == 0
    pairs = _pairs(result.output)
    assert pairs["FAMILY_2.LAMBDA_SOURCE"] == "derived"


def test_mixing_input_errors():
    k6 = str(DATA / "k6.cx")
    assert runner.invoke(app, ["mixing", "--complex", k6]).exit_code == 2
    assert runner.invoke(app, ["mixing", "--complex", k6, "--seeds", "1",
                               "--lambda", "-1"]).exit_code == 2
    assert runner.invoke(app, ["mixing", "--complex", "missing.cx", "--seeds", "1"]).exit_code == 2
    partite = runner.invoke(app, ["mixing", "--partite", "--complex", k6, "--seeds", "1"])
    assert partite.exit_code == 2


def test_overlap_requires_pach():
    result = runner.invoke(app, ["overlap", "--complex", str(DATA / "tetrahedron.cx"),
                                 "--points", str(DATA / "tetrahedron_points.txt")])
    assert result.exit_code == 2


def test_overlap_exact():
    result = runner.invoke(app, ["--machine", "overlap", "--complex", str(DATA / "tetrahedron.cx"),
                                 "--points", str(DATA / "tetrahedron_points.txt"), "--pach", "1"])
    assert result.exit_code == 0
    pairs = _pairs(result.output)
    assert pairs["DEPTH"] == "2"
    assert pairs["OVERLAP"] == "0.5"


def test_verify_suite(tmp_path):
    result = runner.invoke(app, ["--machine", "verify", "suite", "--complex",
                                 str(DATA / "tetrahedron.cx"), "--trials", "2",
                                 "--dump-dir", str(tmp_path / "ops")])
    assert result.exit_code == 0
    pairs = _pairs(result.output)
    assert pairs["WEIGHTS.PASSED"] == "true"
    assert pairs["GARLAND.PASSED"] == "true"
    assert (tmp_path / "ops" / "Mplus_0.txt").exists()


def test_verify_garland_single_level():
    result = runner.invoke(app, ["--machine", "verify", "garland", "--complex",
                                 str(DATA / "k6.cx"), "--level", "1", "--trials", "5",
                                 "--seed", "3"])
    assert result.exit_code == 0
    assert _pairs(result.output)["PASSED"] == "true"


def test_verify_exchange_single_level():
    result = runner.invoke(app, ["--machine", "verify", "exchange", "--complex",
                                 str(DATA / "k6.cx"), "--sets", str(DATA / "k6_sets.txt"),
                                 "--level", "0"])
    assert result.exit_code == 0
    assert _pairs(result.output)["pairing[k=0]"] == "PASS"


def test_verify_exchange():
    result = runner.invoke(app, ["--machine", "verify", "exchange", "--complex",
                                 str(DATA / "k6.cx"), "--sets", str(DATA / "k6_sets.txt")])
    assert result.exit_code == 0
    assert _pairs(result.output)["pairing[k=0]"] == "PASS"


def test_negative_tolerance():
    result = runner.invoke(app, ["--tolerance", "-1", "spectra", "--complex",
                                 str(DATA / "k6.cx")])
    assert result.exit_code == 2


def test_save_report(tmp_path):
    result = runner.invoke(app, ["--save", "spectra", "--complex", str(DATA / "k6.cx")])
    assert result.exit_code == 0
    assert list((tmp_path / "reports").glob("hdx_report_*.md"))
