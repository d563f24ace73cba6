"""Finding ingestion, record matching, and the false-negative ratio."""

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solmorph.evaluate import (
    AXIS_ALL_VS_SINGLE,
    AXIS_OPERATOR_VS_DEFAULT,
    EmptyDataset,
    Finding,
    MalformedReport,
    MissingBaseline,
    ToolProfile,
    compare,
    compute_ratio,
    default_profile,
    format_ratio,
    load_findings,
    match,
    render_comparison_table,
    render_metrics_table,
    unmapped_check_ids,
    unmatched_findings,
)
from solmorph.inject import InjectionLocation, InjectionRecord

from conftest import FIXTURES


def _record(i, vuln="Reentrancy", file=None, start=None, end=None, valid=True,
            chain=("if_swap",)):
    start = start if start is not None else 10 * i + 1
    end = end if end is not None else 10 * i + 5
    return InjectionRecord(
        generated_file=file or f"contracts/gen_{i}.sol",
        snippet_id=f"s{i}",
        chain=chain,
        vuln_type=vuln,
        start_line=start,
        end_line=end,
        location=InjectionLocation("host.sol", "C", i),
        valid=valid,
    )


def _finding(record, tool="slither", vuln=None, dy=0):
    return Finding(tool, "check", record.generated_file,
                   record.start_line + dy, record.start_line + dy,
                   vuln or record.vuln_type)


# -- matching -----------------------------------------------------------------


def test_overlap_detected():
    record = _record(0, start=11, end=20)
    finding = Finding("t", "c", record.generated_file, 10, 12, "Reentrancy")
    assert match([record], [finding])[record] is True


def test_type_mismatch_missed():
    record = _record(0)
    finding = _finding(record, vuln="TxOrigin")
    assert match([record], [finding])[record] is False


def test_file_mismatch_missed():
    record = _record(0)
    finding = Finding("t", "c", "contracts/other.sol",
                      record.start_line, record.end_line, record.vuln_type)
    assert match([record], [finding])[record] is False


def test_no_overlap_missed():
    record = _record(0, start=11, end=20)
    finding = Finding("t", "c", record.generated_file, 21, 25, "Reentrancy")
    assert match([record], [finding])[record] is False


def test_basename_match_tolerates_path_prefixes():
    record = _record(0, file="contracts/gen_0.sol")
    finding = Finding("t", "c", "/abs/work/contracts/gen_0.sol", 1, 5, "Reentrancy")
    assert match([record], [finding])[record] is True


def test_match_independent_of_finding_order():
    records = [_record(i) for i in range(10)]
    findings = [_finding(r) for r in records[:4]]
    forward = match(records, findings)
    backward = match(records, list(reversed(findings)))
    assert forward == backward


# -- ratios -------------------------------------------------------------------


def _table3_fixture():
    """30 valid records, 3 engineered misses."""
    records = [_record(i) for i in range(30)]
    findings = [_finding(r) for r in records[3:]]
    return records, findings


def test_table3_ratio_exact():
    records, findings = _table3_fixture()
    report = compute_ratio(records, findings, "single_location", "slither", "Reentrancy")
    assert report.n_valid == 30
    assert report.n_false_negative == 3
    assert report.ratio == Fraction(3, 30) == Fraction(1, 10)
    assert format_ratio(report.ratio) == "0.100"


def test_table2_ratio_rounds_to_0_106():
    records = [_record(i) for i in range(1235)]
    findings = [_finding(r) for r in records[131:]]
    report = compute_ratio(records, findings, "all_locations", "slither", "Reentrancy")
    assert report.n_valid == 1235 and report.n_false_negative == 131
    assert format_ratio(report.ratio) == "0.106"


def test_zero_misses():
    records, _ = _table3_fixture()
    report = compute_ratio(records, [_finding(r) for r in records])
    assert report.ratio == 0
    assert format_ratio(report.ratio) == "0.000"


def test_empty_findings_means_total_blindness():
    records, _ = _table3_fixture()
    report = compute_ratio(records, [])
    assert report.ratio == 1
    assert format_ratio(report.ratio) == "1.000"


def test_invalid_records_excluded():
    records = [_record(i) for i in range(5)] + [_record(9, valid=False)]
    report = compute_ratio(records, [])
    assert report.n_valid == 5


def test_empty_dataset_rejected():
    with pytest.raises(EmptyDataset):
        compute_ratio([_record(0, valid=False)], [])


def test_ratio_scale_exact():
    small = compute_ratio(*_table3_fixture()).ratio
    records = [_record(i) for i in range(300)]
    findings = [_finding(r) for r in records[30:]]
    big = compute_ratio(records, findings).ratio
    assert small == big  # 3/30 == 30/300 as rationals


def test_detected_plus_missed_is_total():
    records, findings = _table3_fixture()
    verdicts = match(records, findings)
    assert sum(verdicts.values()) + sum(not v for v in verdicts.values()) == 30


def test_per_chain_breakdown():
    records = [_record(i, chain=("if_swap",) if i % 2 else ()) for i in range(10)]
    findings = [_finding(r) for r in records[2:]]
    report = compute_ratio(records, findings)
    assert set(report.per_chain) == {"default", "if_swap"}
    n, fn, r = report.per_chain["default"]
    assert n == 5 and fn == 1


@given(st.integers(min_value=0, max_value=29), st.integers(min_value=0, max_value=29))
@settings(max_examples=40, deadline=None)
def test_monotonicity_adding_findings(n_before, n_extra):
    records = [_record(i) for i in range(30)]
    base = [_finding(r) for r in records[:n_before]]
    extra = [_finding(r) for r in records[:min(29, n_before + n_extra)]]
    r_base = compute_ratio(records, base).n_false_negative
    r_more = compute_ratio(records, base + extra).n_false_negative
    assert r_more <= r_base


# -- loading ------------------------------------------------------------------


def test_load_normalized(tmp_path):
    path = tmp_path / "norm.jsonl"
    path.write_text(
        json.dumps({"tool": "x", "check_id": "tx-origin", "file": "a.sol",
                    "line_start": 3, "line_end": 4}) + "\n"
        + json.dumps({"check_id": "other", "file": "b.sol",
                      "line_start": 1, "line_end": 1}) + "\n")
    profile = ToolProfile("x", "normalized", {"tx-origin": "TxOrigin"})
    findings = load_findings(path, profile)
    assert len(findings) == 2
    assert findings[0].mapped_vuln_type == "TxOrigin"
    assert findings[1].mapped_vuln_type is None


def test_load_slither_fixture():
    findings = load_findings(FIXTURES / "reports" / "slither_sample.json",
                             default_profile("slither"))
    assert len(findings) == 3
    reent = [f for f in findings if f.check_id == "reentrancy-eth"]
    assert reent and reent[0].mapped_vuln_type == "Reentrancy"
    assert reent[0].line_start == 10 and reent[0].line_end == 12
    assert unmapped_check_ids(findings) == {"naming-convention": 1}


def test_load_mythril_fixture():
    findings = load_findings(FIXTURES / "reports" / "mythril_sample.json",
                             default_profile("mythril"))
    assert len(findings) == 2
    assert findings[0].mapped_vuln_type == "OverflowUnderflow"
    assert findings[1].mapped_vuln_type == "UnhandledException"


def test_malformed_report_carries_offset(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"results": {"detectors": [}}')
    with pytest.raises(MalformedReport):
        load_findings(path, default_profile("slither"))


def test_unmatched_findings_listed():
    records, findings = _table3_fixture()
    stray = Finding("slither", "c", "contracts/unknown.sol", 1, 2, "Reentrancy")
    assert stray in unmatched_findings(records, findings + [stray])


# -- comparisons ---------------------------------------------------------------


def test_operator_vs_default_delta():
    default = compute_ratio([_record(i, chain=()) for i in range(1343)],
                            [_finding(_record(i, chain=())) for i in range(1343)],
                            "default", "slither", "Reentrancy")
    assert default.ratio == 0
    records = [_record(i) for i in range(1235)]
    op_if = compute_ratio(records, [_finding(r) for r in records[131:]],
                          "if_swap", "slither", "Reentrancy")
    rows = compare([default, op_if], AXIS_OPERATOR_VS_DEFAULT)
    assert rows[0].group == "default"
    delta = [r for r in rows if r.group == "if_swap"][0].delta_vs_baseline
    assert format_ratio(delta) == "0.106"


def test_identical_reports_zero_delta():
    records, findings = _table3_fixture()
    a = compute_ratio(records, findings, "default", "slither", "Reentrancy")
    b = compute_ratio(records, findings, "op", "slither", "Reentrancy")
    rows = compare([a, b], AXIS_OPERATOR_VS_DEFAULT)
    assert all(r.delta_vs_baseline == 0 for r in rows)


def test_all_vs_single_location_direction():
    single_records, single_findings = _table3_fixture()
    single = compute_ratio(single_records, single_findings,
                           "single_location", "slither", "Reentrancy")
    all_records = [_record(i) for i in range(1235)]
    all_report = compute_ratio(all_records, [_finding(r) for r in all_records[131:]],
                               "all_locations", "slither", "Reentrancy")
    rows = compare([single, all_report], AXIS_ALL_VS_SINGLE)
    all_row = [r for r in rows if r.group == "all_locations"][0]
    assert all_row.delta_vs_baseline > 0
    assert format_ratio(all_row.ratio) == "0.106"
    assert format_ratio(rows[0].ratio) == "0.100"


def test_missing_baseline():
    records, findings = _table3_fixture()
    only = compute_ratio(records, findings, "op", "slither", "Reentrancy")
    with pytest.raises(MissingBaseline):
        compare([only], AXIS_OPERATOR_VS_DEFAULT)


def test_render_tables_smoke():
    records, findings = _table3_fixture()
    rep = compute_ratio(records, findings, "default", "slither", "Reentrancy")
    text = render_metrics_table([rep])
    assert "Reentrancy" in text and "0.100" in text
    rows = compare([rep], AXIS_OPERATOR_VS_DEFAULT, baseline="default")
    assert "default" in render_comparison_table(rows, AXIS_OPERATOR_VS_DEFAULT)
