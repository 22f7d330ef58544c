"""Report models and formatting for verification results."""

import json
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field


def format_value(value: Any) -> str:
    """Stable text form used by every output mode."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.12g}"
    if value is None:
        return "none"
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def mixed_residual(lhs: Any, rhs: Any) -> float:
    """max |a-b| / (1+|a|+|b|) over entries; 0 for empty inputs."""
    a = np.asarray(lhs, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if a.size == 0 and b.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b) / (1.0 + np.abs(a) + np.abs(b))))


def _scalar(value: Any) -> float:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


class Check(BaseModel):
    """One verified identity, inequality or diagnostic value."""

    name: str
    kind: str = "identity"
    lhs: float = 0.0
    rhs: float = 0.0
    residual: float = 0.0
    tolerance: float = 0.0
    passed: bool = True
    note: Optional[str] = None

    @classmethod
    def identity(cls, name: str, lhs: Any, rhs: Any, tolerance: float,
                 note: Optional[str] = None) -> "Check":
        """Entrywise equality under |a-b| <= tol*(1+|a|+|b|)."""
        residual = mixed_residual(lhs, rhs)
        return cls(name=name, kind="identity", lhs=_scalar(lhs), rhs=_scalar(rhs),
                   residual=residual, tolerance=tolerance, passed=residual <= tolerance,
                   note=note)

    @classmethod
    def inequality(cls, name: str, lhs: float, rhs: float, tolerance: float,
                   note: Optional[str] = None) -> "Check":
        """lhs <= rhs + tol; residual is lhs - rhs (negative means slack)."""
        lhs, rhs = float(lhs), float(rhs)
        return cls(name=name, kind="inequality", lhs=lhs, rhs=rhs, residual=lhs - rhs,
                   tolerance=tolerance, passed=lhs <= rhs + tolerance, note=note)

    @classmethod
    def diagnostic(cls, name: str, value: float, note: Optional[str] = None) -> "Check":
        return cls(name=name, kind="diagnostic", lhs=float(value), rhs=float(value), note=note)

    @classmethod
    def skipped(cls, name: str, note: str) -> "Check":
        return cls(name=name, kind="skipped", note=note)


class IdentityReport(BaseModel):
    """A titled collection of checks."""

    title: str
    checks: List[Check] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    @property
    def max_residual(self) -> float:
        residuals = [c.residual for c in self.checks if c.kind == "identity"]
        return max(residuals, default=0.0)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def merge(self, other: "IdentityReport", prefix: Optional[str] = None) -> None:
        for check in other.checks:
            name = f"{prefix}.{check.name}" if prefix else check.name
            self.checks.append(check.model_copy(update={"name": name}))

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def items(self) -> Dict[str, Any]:
        """Headline values for the machine-readable form."""
        return {"PASSED": self.passed, "MAX_RESIDUAL": self.max_residual,
                "FAILURES": len(self.failures)}


class ReportGenerator:
    """Generates formatted reports from verification results."""

    def __init__(self, output_dir: Optional[str] = None):
        """Initialize report generator."""
        self.output_dir = Path(output_dir) if output_dir else Path.cwd() / "reports"

    def generate_report(self, report: BaseModel, format: str = "markdown") -> str:
        """Generate a formatted report from a report model."""
        if format == "markdown":
            return self._generate_markdown_report(report)
        elif format == "machine":
            return self._generate_machine_report(report)
        elif format == "json":
            return self._generate_json_report(report)
        else:
            raise ValueError(f"Unsupported format: {format}")

    def save_report(self, report: str, format: str = "markdown") -> Path:
        """Save the report to a file."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        suffix = {"markdown": "md", "machine": "txt"}.get(format, format)
        report_path = self.output_dir / f"hdx_report_{timestamp}.{suffix}"
        report_path.write_text(report)
        return report_path

    @staticmethod
    def machine_items(report: BaseModel, prefix: str = "") -> Dict[str, str]:
        """KEY=VALUE pairs for one report, keys optionally prefixed."""
        pairs: Dict[str, str] = {}
        items = report.items() if hasattr(report, "items") else {}
        for key, value in items.items():
            pairs[f"{prefix}{key}"] = format_value(value)
        extras = getattr(report, "machine_extras", None)
        if callable(extras):
            for key, value in extras().items():
                pairs[f"{prefix}{key}"] = format_value(value)
        for check in getattr(report, "checks", []):
            base = f"{prefix}{check.name}"
            if check.kind == "diagnostic":
                pairs[base] = format_value(check.lhs)
            elif check.kind == "skipped":
                pairs[base] = "SKIPPED"
            else:
                pairs[base] = "PASS" if check.passed else "FAIL"
                pairs[f"{base}.residual"] = format_value(check.residual)
        return pairs

    def _generate_machine_report(self, report: BaseModel) -> str:
        """One sorted KEY=VALUE line per result."""
        pairs = self.machine_items(report)
        return "\n".join(f"{key}={pairs[key]}" for key in sorted(pairs))

    def _generate_markdown_report(self, report: BaseModel) -> str:
        """Generate a markdown format report."""
        title = getattr(report, "title", type(report).__name__)
        lines = [f"# {title}\n"]

        items = report.items() if hasattr(report, "items") else {}
        if items:
            lines.append("## Summary\n")
            lines.append("```")
            for key, value in items.items():
                lines.append(f"{key}: {format_value(value)}")
            lines.append("```\n")

        checks = getattr(report, "checks", [])
        if checks:
            lines.append("## Checks\n")
            for check in checks:
                if check.kind == "diagnostic":
                    status = "info"
                elif check.kind == "skipped":
                    status = "skip"
                else:
                    status = "ok" if check.passed else "FAIL"
                line = (f"- [{status}] {check.name}: lhs={format_value(check.lhs)} "
                        f"rhs={format_value(check.rhs)} residual={format_value(check.residual)}")
                if check.note:
                    line += f" ({check.note})"
                lines.append(line)

        extra = getattr(report, "markdown_sections", None)
        if callable(extra):
            lines.extend(extra())

        return "\n".join(lines)

    def _generate_json_report(self, report: BaseModel) -> str:
        """Generate a JSON format report."""
        def serialize(obj):
            if isinstance(obj, np.ndarray):
                return obj.tolist()
            if hasattr(obj, '__dict__'):
                return obj.__dict__
            return str(obj)

        payload = report.model_dump()
        if hasattr(report, "passed"):
            payload["passed"] = report.passed
        return json.dumps(payload, default=serialize, indent=2, sort_keys=True)
