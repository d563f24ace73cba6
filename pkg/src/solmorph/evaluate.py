"""Scoring detector reports against the ground-truth manifest.

A ground-truth record counts as detected when some finding lands in the
same file, maps to the same vulnerability type, and overlaps the record's
line span; everything else is a false negative. The headline number is the
false-negative ratio r = n_FN / N over the valid records of a dataset, kept
as an exact rational and rendered to three decimals. False positives are
outside the metric but unmatched findings are listed for inspection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import PurePath
from typing import Iterable, Optional

from .inject import InjectionRecord
from .transform import chain_label

VULN_TYPES = (
    "Reentrancy", "TimestampDependency", "OverflowUnderflow", "TxOrigin",
    "UncheckedSend", "UnhandledException", "TOD",
)


class ReportError(Exception):
    pass


class UnknownFormat(ReportError):
    pass


class MalformedReport(ReportError):
    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (byte {offset})" if offset else message)
        self.offset = offset


class EmptyDataset(ReportError):
    pass


class MissingBaseline(ReportError):
    pass


@dataclass(frozen=True)
class Finding:
    tool: str
    check_id: str
    file: str
    line_start: int
    line_end: int
    mapped_vuln_type: Optional[str] = None


# Default check-id mappings for common tool rule names. The mapping is
# policy, not code: profiles can replace it wholesale from config.
SLITHER_MAPPING = {
    "reentrancy-eth": "Reentrancy",
    "reentrancy-no-eth": "Reentrancy",
    "reentrancy-benign": "Reentrancy",
    "reentrancy-events": "Reentrancy",
    "reentrancy-unlimited-gas": "Reentrancy",
    "timestamp": "TimestampDependency",
    "tx-origin": "TxOrigin",
    "unchecked-send": "UncheckedSend",
    "unchecked-lowlevel": "UnhandledException",
    "unchecked-transfer": "UnhandledException",
}

MYTHRIL_MAPPING = {
    "Integer Arithmetic Bugs": "OverflowUnderflow",
    "Integer Overflow": "OverflowUnderflow",
    "Integer Underflow": "OverflowUnderflow",
    "Dependence on predictable environment variable": "TimestampDependency",
    "Use of tx.origin": "TxOrigin",
    "Unprotected Ether Withdrawal": "UncheckedSend",
    "Unchecked Call Return Value": "UnhandledException",
    "External Call To User-Supplied Address": "Reentrancy",
    "State access after external call": "Reentrancy",
    "Transaction Order Dependence": "TOD",
}


@dataclass(frozen=True)
class ToolProfile:
    tool: str
    format: str = "normalized"  # normalized | slither_json | mythril_json
    mapping: dict = field(default_factory=dict)

    def map_check(self, check_id: str) -> Optional[str]:
        if self.mapping:
            return self.mapping.get(check_id)
        if self.format == "slither_json":
            return SLITHER_MAPPING.get(check_id)
        if self.format == "mythril_json":
            return MYTHRIL_MAPPING.get(check_id)
        return None


def default_profile(tool: str) -> ToolProfile:
    if tool == "slither":
        return ToolProfile("slither", "slither_json")
    if tool == "mythril":
        return ToolProfile("mythril", "mythril_json")
    return ToolProfile(tool, "normalized")


def load_findings(report_file, profile: ToolProfile) -> list[Finding]:
    """Parse a detector report into normalized findings.

    Check ids without a mapping entry keep mapped_vuln_type=None; they are
    reported in the unmapped appendix rather than silently dropped.
    """
    path = str(report_file)
    with open(report_file, "r") as fh:
        text = fh.read()
    if profile.format == "normalized":
        return _load_normalized(text, profile)
    if profile.format == "slither_json":
        return _load_slither(text, profile)
    if profile.format == "mythril_json":
        return _load_mythril(text, profile)
    raise UnknownFormat(f"{path}: unknown report format {profile.format!r}")


def _map(profile: ToolProfile, finding: Finding) -> Finding:
    mapped = profile.map_check(finding.check_id)
    if mapped is not None and mapped not in VULN_TYPES:
        raise MalformedReport(f"mapping names unknown vuln type {mapped!r}")
    if mapped is None:
        return finding
    return Finding(finding.tool, finding.check_id, finding.file,
                   finding.line_start, finding.line_end, mapped)


def _load_normalized(text: str, profile: ToolProfile) -> list[Finding]:
    findings = []
    offset = 0
    for line in text.splitlines(keepends=True):
        stripped = line.strip()
        if stripped:
            try:
                data = json.loads(stripped)
                finding = Finding(
                    data.get("tool", profile.tool), data["check_id"],
                    data["file"], int(data["line_start"]), int(data["line_end"]))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise MalformedReport(f"bad normalized finding: {exc}", offset) from None
            findings.append(_map(profile, finding))
        offset += len(line)
    return findings


def _load_slither(text: str, profile: ToolProfile) -> list[Finding]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedReport(f"bad slither JSON: {exc.msg}", exc.pos) from None
    findings = []
    detectors = (data.get("results") or {}).get("detectors") or []
    for issue in detectors:
        check = issue.get("check", "")
        for element in issue.get("elements") or [{}]:
            mapping = element.get("source_mapping") or {}
            lines = mapping.get("lines") or []
            file = (mapping.get("filename_relative")
                    or mapping.get("filename_absolute") or "")
            if not lines:
                continue
            findings.append(_map(profile, Finding(
                profile.tool, check, file, min(lines), max(lines))))
    return findings


def _load_mythril(text: str, profile: ToolProfile) -> list[Finding]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedReport(f"bad mythril JSON: {exc.msg}", exc.pos) from None
    findings = []
    for issue in data.get("issues") or []:
        line = int(issue.get("lineno", issue.get("line", 0)) or 0)
        findings.append(_map(profile, Finding(
            profile.tool, issue.get("title", ""),
            issue.get("filename", ""), line, line)))
    return findings


# --------------------------------------------------------------------------
# matching and metrics


def _same_file(record_file: str, finding_file: str) -> bool:
    if record_file == finding_file:
        return True
    return PurePath(record_file).name == PurePath(finding_file).name


def _matches(record: InjectionRecord, finding: Finding) -> bool:
    if finding.mapped_vuln_type != record.vuln_type:
        return False
    if not _same_file(record.generated_file, finding.file):
        return False
    return (finding.line_start <= record.end_line
            and record.start_line <= finding.line_end)


def match(records: Iterable[InjectionRecord], findings: Iterable[Finding],
          ) -> dict[InjectionRecord, bool]:
    """Per-record detection verdict: True = Detected, False = Missed."""
    index: dict[tuple[str, Optional[str]], list[Finding]] = {}
    for f in findings:
        index.setdefault((PurePath(f.file).name, f.mapped_vuln_type), []).append(f)
    out = {}
    for record in records:
        key = (PurePath(record.generated_file).name, record.vuln_type)
        out[record] = any(_matches(record, f) for f in index.get(key, ()))
    return out


@dataclass(frozen=True)
class MetricsReport:
    dataset_id: str
    tool: str
    vuln_type: str
    n_valid: int  # N_D: valid injected locations
    n_false_negative: int  # n_FN: locations the tool missed
    ratio: Fraction  # r_D, exact
    per_chain: dict = field(default_factory=dict)  # label -> (N, n_FN, Fraction)

    def to_json(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "tool": self.tool,
            "vuln_type": self.vuln_type,
            "N_D": self.n_valid,
            "n_FN": self.n_false_negative,
            "r_D": format_ratio(self.ratio),
            "r_D_exact": [self.ratio.numerator, self.ratio.denominator],
            "per_chain": {
                label: {"N": n, "n_FN": fn, "r": format_ratio(r)}
                for label, (n, fn, r) in sorted(self.per_chain.items())
            },
        }


def format_ratio(r: Fraction) -> str:
    scaled = r * 1000
    rounded = scaled.numerator // scaled.denominator
    if 2 * (scaled - rounded) >= 1:
        rounded += 1
    return f"{rounded // 1000}.{rounded % 1000:03d}"


def compute_ratio(records: Iterable[InjectionRecord], findings: Iterable[Finding],
                  dataset_id: str = "", tool: str = "", vuln_type: str = "",
                  ) -> MetricsReport:
    """False-negative ratio over the valid records (optionally one type)."""
    pool = [r for r in records if r.valid]
    if vuln_type:
        pool = [r for r in pool if r.vuln_type == vuln_type]
    if not pool:
        raise EmptyDataset("no valid records to score")
    verdicts = match(pool, findings)
    n_fn = sum(1 for detected in verdicts.values() if not detected)
    per_chain: dict[str, tuple[int, int, Fraction]] = {}
    for record, detected in verdicts.items():
        label = chain_label(record.chain)
        n, fn, _ = per_chain.get(label, (0, 0, Fraction(0)))
        n += 1
        fn += 0 if detected else 1
        per_chain[label] = (n, fn, Fraction(fn, n))
    return MetricsReport(dataset_id, tool, vuln_type or "all", len(pool),
                         n_fn, Fraction(n_fn, len(pool)), per_chain)


def unmatched_findings(records: Iterable[InjectionRecord],
                       findings: Iterable[Finding]) -> list[Finding]:
    pool = [r for r in records if r.valid]
    return [f for f in findings if not any(_matches(r, f) for r in pool)]


def unmapped_check_ids(findings: Iterable[Finding]) -> dict[str, int]:
    out: dict[str, int] = {}
    for f in findings:
        if f.mapped_vuln_type is None:
            out[f.check_id] = out.get(f.check_id, 0) + 1
    return dict(sorted(out.items()))


# --------------------------------------------------------------------------
# comparisons (operator vs default, all- vs single-location)


AXIS_OPERATOR_VS_DEFAULT = "operator_vs_default"
AXIS_ALL_VS_SINGLE = "all_vs_single_location"

_DEFAULT_BASELINES = {
    AXIS_OPERATOR_VS_DEFAULT: "default",
    AXIS_ALL_VS_SINGLE: "single_location",
}


@dataclass(frozen=True)
class ComparisonRow:
    group: str
    n_valid: int
    n_false_negative: int
    ratio: Fraction
    delta_vs_baseline: Fraction

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "N": self.n_valid,
            "n_FN": self.n_false_negative,
            "r": format_ratio(self.ratio),
            "delta_r": format_signed(self.delta_vs_baseline),
        }


def format_signed(r: Fraction) -> str:
    text = format_ratio(abs(r))
    if r > 0:
        return "+" + text
    if r < 0:
        return "-" + text
    return text


def compare(reports: list[MetricsReport], axis: str,
            baseline: str = "") -> list[ComparisonRow]:
    """Rows of (group, N, n_FN, r, delta r vs baseline) along an axis.

    Reports must share tool and vuln_type; groups are dataset ids. The
    baseline defaults to "default" (untransformed) for the operator axis and
    "single_location" for the location axis.
    """
    if axis not in _DEFAULT_BASELINES:
        raise ReportError(f"unknown comparison axis {axis!r}")
    baseline = baseline or _DEFAULT_BASELINES[axis]
    keys = {(r.tool, r.vuln_type) for r in reports}
    if len(keys) > 1:
        raise ReportError(f"reports mix tools/vuln types: {sorted(keys)}")
    by_group = {r.dataset_id: r for r in reports}
    if baseline not in by_group:
        raise MissingBaseline(f"no report for baseline group {baseline!r}")
    base = by_group[baseline].ratio
    rows = []
    for group in sorted(by_group, key=lambda g: (g != baseline, g)):
        rep = by_group[group]
        rows.append(ComparisonRow(group, rep.n_valid, rep.n_false_negative,
                                  rep.ratio, rep.ratio - base))
    return rows


# --------------------------------------------------------------------------
# rendering


def render_metrics_table(reports: list[MetricsReport]) -> str:
    """Aligned text table: one section per vuln type, operators x tools."""
    sections: dict[str, dict[str, dict[str, MetricsReport]]] = {}
    for rep in reports:
        sections.setdefault(rep.vuln_type, {}).setdefault(
            rep.dataset_id, {})[rep.tool] = rep
    lines = []
    for vuln_type in sorted(sections):
        groups = sections[vuln_type]
        tools = sorted({t for by_tool in groups.values() for t in by_tool})
        header = ["group", "N"] + [f"{t} n_FN" for t in tools] + [f"{t} r" for t in tools]
        rows = [header]
        for group in sorted(groups):
            by_tool = groups[group]
            any_rep = next(iter(by_tool.values()))
            row = [group, str(any_rep.n_valid)]
            row += [str(by_tool[t].n_false_negative) if t in by_tool else "-"
                    for t in tools]
            row += [format_ratio(by_tool[t].ratio) if t in by_tool else "-"
                    for t in tools]
            rows.append(row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        lines.append(f"== {vuln_type} ==")
        for row in rows:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        lines.append("")
    return "\n".join(lines)


def render_comparison_table(rows: list[ComparisonRow], axis: str) -> str:
    header = ["group", "N", "n_FN", "r", "delta_r"]
    table = [header] + [
        [r.group, str(r.n_valid), str(r.n_false_negative),
         format_ratio(r.ratio), format_signed(r.delta_vs_baseline)]
        for r in rows
    ]
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = [f"== {axis} =="]
    for row in table:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)
