"""CFG construction, normalization, and isomorphism checks."""

import random

import pytest

from solmorph.ast_nodes import Block
from solmorph.corpus import SnippetKind, VulnType, parse_snippet_source
from solmorph.oracle import RawEncountered, build_cfg, cfg_equal, normalize_cfg
from solmorph.oracle.cfg import canonical_form
from solmorph.parser import parse
from solmorph.transform import apply_chain, applicable_groups

from conftest import FIG1_FRAGMENT, function_members


def _body(source: str) -> Block:
    unit = parse("contract T {\n    function probe() public {\n"
                 + "\n".join("        " + ln for ln in source.splitlines())
                 + "\n    }\n}\n")
    return unit.contracts[0].members[0].body


def test_fig1_shape_condition_and_assignment():
    cfg = build_cfg(_body("if (balance > p) {\n    balance = balance - p;\n}"))
    norm = normalize_cfg(cfg)
    form = canonical_form(norm)
    kinds = [summary.split(" ", 1)[0] for summary, _ in form]
    assert kinds == ["entry", "cond", "expr", "exit"]
    cond_row = form[1]
    assert dict(cond_row[1])["true"] == 2  # true edge into the assignment
    assert dict(cond_row[1])["false"] == 3  # false edge straight to exit


def test_empty_block_entry_to_exit():
    norm = normalize_cfg(build_cfg(Block(())))
    form = canonical_form(norm)
    assert [s for s, _ in form] == ["entry", "exit"]


def test_fig2_loop_normalizes_to_fig1(fig1_snippet):
    original = function_members(fig1_snippet.members)[0].body
    variant = apply_chain(fig1_snippet, ("if2for",), 0)
    loop_body = function_members(variant.members)[0].body

    raw_loop = build_cfg(loop_body)
    assert len(raw_loop.nodes) > len(build_cfg(original).nodes)  # counter + post

    a = normalize_cfg(build_cfg(original))
    b = normalize_cfg(raw_loop)
    assert cfg_equal(a, b)


def test_normalize_idempotent(fig1_snippet):
    g = build_cfg(function_members(fig1_snippet.members)[0].body)
    once = normalize_cfg(g)
    twice = normalize_cfg(once)
    assert cfg_equal(once, twice)
    assert canonical_form(once) == canonical_form(twice)


def test_while_break_matches_if_random_bodies():
    rng = random.Random(11)
    statements = ["x = x + 1;", "y = x;", "f(x);", "x = y - 1;", "g();"]
    for _ in range(5):
        body = "\n    ".join(rng.choice(statements) for _ in range(rng.randint(1, 4)))
        as_if = _body(f"if (x < y) {{\n    {body}\n}}")
        as_while = _body(f"while (x < y) {{\n    {body}\n    break;\n}}")
        assert cfg_equal(normalize_cfg(build_cfg(as_if)),
                         normalize_cfg(build_cfg(as_while)))


def test_cfg_vs_itself():
    g = normalize_cfg(build_cfg(_body("a = 1;\nb = 2;")))
    assert cfg_equal(g, g)


def test_two_branch_if_differs_from_one_branch():
    one = _body("if (a > 1) {\n    a = 2;\n}")
    two = _body("if (a > 1) {\n    a = 2;\n} else {\n    a = 3;\n}")
    assert not cfg_equal(normalize_cfg(build_cfg(one)), normalize_cfg(build_cfg(two)))


def test_alpha_renaming_consistent():
    ab = _body("a = 1;\nb = a;")
    xy = _body("x = 1;\ny = x;")  # consistent renaming: equal
    yx = _body("x = 1;\nx = y;")  # role swap: different dataflow
    assert cfg_equal(normalize_cfg(build_cfg(ab)), normalize_cfg(build_cfg(xy)))
    assert not cfg_equal(normalize_cfg(build_cfg(ab)), normalize_cfg(build_cfg(yx)))
    a_then_call = _body("a = 1;\nf(a);")
    call_then_a = _body("f(a);\na = 1;")
    assert not cfg_equal(normalize_cfg(build_cfg(a_then_call)),
                         normalize_cfg(build_cfg(call_then_a)))


def test_negation_strip_swaps_edges():
    plain = _body("if (c) {\n    a = 1;\n} else {\n    a = 2;\n}")
    negated = _body("if (!(c)) {\n    a = 2;\n} else {\n    a = 1;\n}")
    assert cfg_equal(normalize_cfg(build_cfg(plain)), normalize_cfg(build_cfg(negated)))


def test_double_negation_strips():
    plain = _body("if (c) {\n    a = 1;\n}")
    doubled = _body("if (!(!(c))) {\n    a = 1;\n}")
    assert cfg_equal(normalize_cfg(build_cfg(plain)), normalize_cfg(build_cfg(doubled)))


def test_unread_declaration_removed():
    with_decl = _body("uint unused = 0;\na = 1;")
    without = _body("a = 1;")
    assert cfg_equal(normalize_cfg(build_cfg(with_decl)),
                     normalize_cfg(build_cfg(without)))


def test_read_declaration_kept():
    with_decl = _body("uint used = 2;\na = used;")
    without = _body("a = 2;")  # propagation folds the temp away entirely
    assert cfg_equal(normalize_cfg(build_cfg(with_decl)),
                     normalize_cfg(build_cfg(without)))


def test_raw_statement_rejected():
    body = _body("assembly {\n    let x := 1\n}")
    with pytest.raises(RawEncountered):
        build_cfg(body)


def test_return_edges_to_exit():
    g = normalize_cfg(build_cfg(_body("if (c) {\n    return;\n}\na = 1;")))
    form = canonical_form(g)
    summaries = [s for s, _ in form]
    assert "return" in summaries


def test_statement_ops_cfg_equal_across_corpus(corpus):
    statement_ops = ("if_swap", "if2for", "if2while", "tx_passing")
    checked = 0
    for snippet in corpus:
        groups = applicable_groups(snippet.members)
        for token in statement_ops:
            if token not in groups:
                continue
            variant = apply_chain(snippet, (token,), 0)
            for before, after in zip(function_members(snippet.members),
                                     function_members(variant.members)):
                try:
                    a = normalize_cfg(build_cfg(before.body))
                    b = normalize_cfg(build_cfg(after.body))
                except RawEncountered:
                    continue
                assert cfg_equal(a, b), (snippet.id, token, before.name)
                checked += 1
    assert checked >= 8
