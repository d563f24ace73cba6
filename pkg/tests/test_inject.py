"""Location enumeration, splicing, ground truth, dataset generation."""

import json

import pytest

from solmorph.corpus import SnippetKind, VulnType, load_corpus, parse_snippet_source
from solmorph.inject import (
    InjectionLocation,
    enumerate_locations,
    generate_dataset,
    host_names,
    inject,
    load_manifest,
    resolve_collisions,
)
from solmorph.parser import parse
from solmorph.printer import member_block, print_unit
from solmorph.transform import apply_chain

from conftest import FIXTURES


def _count_locations_independently(source: str) -> dict[str, int]:
    """Line-based boundary counter, independent of the parser.

    Tracks brace depth per line (the fixture hosts keep comments and strings
    brace-free, so plain counting is sound). A member is either a code line
    group at depth 1 (a decl through its ';', a function through its braces)
    or a run of blank separator lines; each contract yields members+1
    boundaries.
    """
    counts: dict[str, int] = {}
    current = None
    depth = 0
    in_braced_member = False
    in_blank_run = False
    for line in source.splitlines():
        stripped = line.strip()
        before = depth
        depth += line.count("{") - line.count("}")
        if current is None:
            if stripped.startswith("contract ") and depth == 1:
                current = stripped.split()[1]
                counts[current] = 0
                in_blank_run = False
            continue
        if in_braced_member:
            if depth == 1:
                in_braced_member = False
            continue
        if before == 1 and depth == 0:
            current = None  # contract footer
            continue
        if not stripped:
            if not in_blank_run:
                counts[current] += 1  # blank separator run = one raw member
                in_blank_run = True
            continue
        in_blank_run = False
        counts[current] += 1
        if depth > 1:
            in_braced_member = True
    return {name: n + 1 for name, n in counts.items()}


def test_empty_contract_single_location():
    unit = parse("contract C {\n}\n")
    locs = enumerate_locations(unit, "c.sol")
    assert len(locs) == 1
    assert locs[0] == InjectionLocation("c.sol", "C", 0)


def test_three_members_four_locations():
    unit = parse("contract C {\n    uint a;\n    uint b;\n    uint c;\n}\n")
    locs = enumerate_locations(unit, "c.sol")
    assert [l.member_index for l in locs] == [0, 1, 2, 3]


def test_bundled_host_counts_match_independent_counter(hosts):
    for host in hosts:
        source = host.read_text()
        unit = parse(source)
        expected = _count_locations_independently(source)
        for contract in unit.contracts:
            locs = [l for l in enumerate_locations(unit, host.name)
                    if l.contract == contract.name]
            assert len(locs) == expected[contract.name], (host.name, contract.name)


def _variant(corpus, snippet_id, chain=()):
    snippet = next(s for s in corpus if s.id == snippet_id)
    return snippet, apply_chain(snippet, chain, 0)


def test_inject_into_empty_host(corpus):
    host = parse("contract Empty {\n}\n")
    snippet, variant = _variant(corpus, "txorigin1")
    unit, record, spliced = inject(host, variant, InjectionLocation("e.sol", "Empty", 0))
    text = print_unit(unit)
    lines = text.splitlines()
    assert record.start_line == 2
    assert lines[record.start_line - 1:record.end_line] == spliced.splitlines()
    assert "bug_txorigin1" in text
    reparsed = parse(text)
    assert len(reparsed.contracts[0].members) == len(variant.members)


def test_inject_collision_renames_variant_not_host(corpus):
    host_src = (FIXTURES / "hosts_collision" / "host_with_bug_name.sol").read_text()
    host = parse(host_src)
    snippet, variant = _variant(corpus, "txorigin1")
    locs = enumerate_locations(host, "host_with_bug_name.sol")
    unit, record, spliced = inject(host, variant, locs[-1])
    text = print_unit(unit)
    # host bytes outside the splice are untouched
    lines = text.splitlines()
    del lines[record.start_line - 1:record.end_line]
    assert "\n".join(lines) + "\n" == print_unit(host)
    # the variant's clashing declarations were renamed, the host's kept
    assert spliced.count("bug_txorigin1") == 0
    assert spliced.count("owner_txorigin1") == 0
    assert text.count("bug_txorigin1") == 1  # host's own
    reparsed = parse(text)
    names = [getattr(m, "name", None) for m in reparsed.contracts[0].members]
    assert len([n for n in names if n == "bug_txorigin1"]) == 1


def test_double_injection_avoids_duplicate_functions(corpus):
    host = parse("contract Hostess {\n    uint filler;\n}\n")
    snippet, variant = _variant(corpus, "re_ent1")
    unit1, record1, _ = inject(host, variant, InjectionLocation("h.sol", "Hostess", 0))
    unit2, record2, _ = inject(unit1, variant, InjectionLocation("h.sol", "Hostess", 0))
    reparsed = parse(print_unit(unit2))
    names = [getattr(m, "name", None) for m in reparsed.contracts[0].members]
    fn_names = [n for n in names if n and n.startswith(("deposit", "withdraw", "r_"))]
    assert len(fn_names) == len(set(fn_names))
    assert "deposit_re_ent1" in names  # first copy kept its name


def test_all_locations_count_identity(corpus, hosts, tmp_path):
    result = generate_dataset(
        hosts, corpus, [("rename_var",)], mode="all_locations", seed=0,
        out_dir=tmp_path / "ds")
    per_host_locations = {
        h.name: len(enumerate_locations(parse(h.read_text()), h.name))
        for h in hosts
    }
    n_variants = len({(r.snippet_id, r.chain) for r in result.records})
    expected = sum(per_host_locations.values()) * n_variants
    assert len(result.records) == expected


def test_single_location_one_per_pair(corpus, hosts, tmp_path):
    result = generate_dataset(
        hosts, corpus, [("rename_var",)], mode="single_location", seed=0,
        out_dir=tmp_path / "ds")
    seen = {(r.location.host_file, r.snippet_id, r.chain) for r in result.records}
    assert len(result.records) == len(seen)
    n_hosts = len(hosts)
    n_variants = len({(r.snippet_id, r.chain) for r in result.records})
    assert len(result.records) == n_hosts * n_variants


def test_host_preservation_and_manifest_faithfulness(corpus, hosts, tmp_path):
    result = generate_dataset(
        hosts, corpus, [("if2while",), ("tx_passing",)], mode="all_locations",
        seed=0, out_dir=tmp_path / "ds", include_default=True)
    assert result.records
    printed_hosts = {h.name: print_unit(parse(h.read_text())) for h in hosts}
    for record in result.records:
        assert record.valid
        generated = (tmp_path / "ds" / record.generated_file).read_text()
        lines = generated.splitlines()
        spliced = lines[record.start_line - 1:record.end_line]
        remaining = lines[:record.start_line - 1] + lines[record.end_line:]
        assert "\n".join(remaining) + "\n" == printed_hosts[record.location.host_file]
        # the extracted span is exactly the printed variant text
        snippet = next(s for s in corpus if s.id == record.snippet_id)
        variant = apply_chain(snippet, record.chain, 0)
        resolved, _ = resolve_collisions(
            variant.members,
            host_names(parse((hosts[0].parent / record.location.host_file).read_text())),
            0)
        expected = "\n".join(member_block(m) for m in resolved)
        assert "\n".join(spliced) == expected, record.generated_file


def test_generation_deterministic(corpus, hosts, tmp_path):
    kwargs = dict(chains=[("permutation",), ("if_swap",)], mode="all_locations",
                  seed=7, include_default=True, dataset_id="det")
    a = generate_dataset(hosts, corpus, out_dir=tmp_path / "a", **kwargs)
    b = generate_dataset(hosts, corpus, out_dir=tmp_path / "b", **kwargs)
    assert a.manifest_path.read_text() == b.manifest_path.read_text()
    files_a = sorted(p.name for p in (tmp_path / "a" / "contracts").iterdir())
    files_b = sorted(p.name for p in (tmp_path / "b" / "contracts").iterdir())
    assert files_a == files_b
    for name in files_a:
        assert (tmp_path / "a" / "contracts" / name).read_text() == \
            (tmp_path / "b" / "contracts" / name).read_text()


def test_manifest_roundtrip(corpus, hosts, tmp_path):
    result = generate_dataset(
        hosts, corpus, [("rename_func",)], mode="all_locations", seed=0,
        out_dir=tmp_path / "ds")
    header, records = load_manifest(result.manifest_path)
    assert header["mode"] == "all_locations"
    assert header["validation"] == "syntax-only"
    assert records == list(result.records)
    csv_lines = result.csv_path.read_text().splitlines()
    assert csv_lines[0] == "file,start_line,end_line,vuln_type,chain"
    assert len(csv_lines) == len(records) + 1


def test_statement_level_injection():
    host = parse(
        "contract Host {\n"
        "    uint total;\n"
        "\n"
        "    function crunch(uint n) public {\n"
        "        total = total + n;\n"
        "        total = total * 2;\n"
        "    }\n"
        "}\n")
    snippet = parse_snippet_source(
        "uint leak = msg.value;\nmsg.sender.send(leak);\n",
        "stmt1", VulnType.UNCHECKED_SEND, SnippetKind.STATEMENT_LEVEL)
    variant = apply_chain(snippet, (), 0)
    locs = enumerate_locations(host, "host.sol", SnippetKind.STATEMENT_LEVEL)
    assert [l.member_index for l in locs] == [0, 1, 2]
    unit, record, spliced = inject(
        host, variant, locs[1], kind=SnippetKind.STATEMENT_LEVEL)
    text = print_unit(unit)
    lines = text.splitlines()
    assert lines[record.start_line - 1:record.end_line] == spliced.splitlines()
    assert "uint leak = msg.value;" in spliced
    reparsed = parse(text)
    fn = reparsed.contracts[0].members[-1]
    assert len(fn.body.statements) == 4
