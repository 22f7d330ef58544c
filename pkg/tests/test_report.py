"""Test report models and formatting."""

import json

import numpy as np
import pytest

from hdx_verifier.core.report import (
    Check,
    IdentityReport,
    ReportGenerator,
    format_value,
    mixed_residual,
)


@pytest.fixture
def sample_report():
    report = IdentityReport(title="Sample")
    report.add(Check.identity("sum", 1.0, 1.0 + 1e-13, 1e-10))
    report.add(Check.inequality("bound", 0.5, 0.25, 1e-9))
    report.add(Check.diagnostic("ratio", 0.125, note="for reference"))
    report.add(Check.skipped("level", "needs n >= 2"))
    return report


def test_format_value():
    """Booleans, integers, floats and missing values print stably."""
    assert format_value(True) == "true"
    assert format_value(np.bool_(False)) == "false"
    assert format_value(np.int64(3)) == "3"
    assert format_value(0.1 + 0.2) == "0.3"
    assert format_value(float("inf")) == "inf"
    assert format_value(None) == "none"
    assert format_value([1, 0.5]) == "1,0.5"


def test_mixed_residual():
    assert mixed_residual([], []) == 0.0
    assert mixed_residual(1.0, 1.0) == 0.0
    assert mixed_residual([0.0, 2.0], [0.0, 3.0]) == pytest.approx(1 / 6)


def test_checks(sample_report):
    assert sample_report.check("sum").passed
    assert not sample_report.check("bound").passed
    assert sample_report.check("bound").residual == pytest.approx(0.25)
    assert sample_report.check("ratio").passed
    assert not sample_report.passed
    assert [c.name for c in sample_report.failures] == ["bound"]
    with pytest.raises(KeyError):
        sample_report.check("missing")


def test_merge_prefixes(sample_report):
    combined = IdentityReport(title="All")
    combined.merge(sample_report, prefix="inner")
    assert combined.check("inner.sum").passed
    assert sample_report.check("sum").name == "sum"


def test_machine_report(sample_report):
    """Sorted KEY=VALUE lines with a residual per verified check."""
    text = ReportGenerator().generate_report(sample_report, "machine")
    lines = text.splitlines()
    assert lines == sorted(lines)
    pairs = dict(line.split("=", 1) for line in lines)
    assert pairs["PASSED"] == "false"
    assert pairs["FAILURES"] == "1"
    assert pairs["bound"] == "FAIL"
    assert pairs["level"] == "SKIPPED"
    assert pairs["ratio"] == "0.125"
    assert "sum.residual" in pairs


def test_markdown_report(sample_report):
    text = ReportGenerator().generate_report(sample_report, "markdown")
    assert text.startswith("# Sample")
    assert "- [FAIL] bound" in text
    assert "(for reference)" in text


def test_json_report(sample_report):
    payload = json.loads(ReportGenerator().generate_report(sample_report, "json"))
    assert payload["passed"] is False
    assert len(payload["checks"]) == 4


def test_unsupported_format(sample_report):
    with pytest.raises(ValueError):
        ReportGenerator().generate_report(sample_report, "xml")


def test_save_report(tmp_path):
    generator = ReportGenerator(str(tmp_path / "out"))
    path = generator.save_report("PASSED=true", "machine")
    assert path.suffix == ".txt"
    assert path.read_text() == "PASSED=true"
