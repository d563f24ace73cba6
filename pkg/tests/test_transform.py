"""Operator rewrites, applicability, and chain enumeration."""

import json
from itertools import combinations

import pytest

from solmorph.ast_nodes import (
    Binary,
    Block,
    Break,
    For,
    FunctionDef,
    Identifier,
    If,
    MemberAccess,
    Unary,
    VarDecl,
    While,
    walk_expressions,
    walk_statements,
)
from solmorph.corpus import SnippetKind, VulnType, parse_snippet_source
from solmorph.idents import NameAllocator
from solmorph.parser import parse_expression
from solmorph.printer import member_block, print_expr, print_stmt
from solmorph.transform import (
    GROUP_TOKENS,
    ForFillStyle,
    InvalidChain,
    NotApplicable,
    applicable,
    applicable_groups,
    apply_chain,
    chain_label,
    enumerate_valid_chains,
    if_to_for,
    if_to_while,
    is_tx_origin,
    parse_chain_label,
    permute_commutative,
    permute_division,
    permute_ordering,
    permute_subtraction,
    rename_functions,
    rename_variables,
    swap_if_branches,
    tx_origin_passing,
)

from conftest import FIXTURES, function_members


def _fragment(source, vuln=VulnType.REENTRANCY):
    return parse_snippet_source(source, "t", vuln)


# -- expression-level --------------------------------------------------------


def test_permute_commutative_pattern():
    expr = parse_expression("a + b")
    assert print_expr(permute_commutative(expr)) == "(b + a)"
    expr = parse_expression("x * 2")
    assert print_expr(permute_commutative(expr)) == "(2 * x)"
    with pytest.raises(NotApplicable):
        permute_commutative(parse_expression("a - b"))


def test_permute_subtraction_pattern():
    expr = parse_expression("a - b")
    out = permute_subtraction(expr)
    assert isinstance(out, Unary) and out.op == "-"
    assert print_expr(out) == "-(b - a)"
    with pytest.raises(NotApplicable):
        permute_subtraction(parse_expression("a + b"))


def test_permute_division_pattern():
    out = permute_division(parse_expression("a / b"))
    assert print_expr(out) == "(1 / (b / a))"
    with pytest.raises(NotApplicable):
        permute_division(parse_expression("a * b"))


def test_permute_ordering_mirror_table():
    cases = {
        "a != b": "!(b == a)",
        "a < b": "!(b <= a)",
        "a > b": "!(b >= a)",
        "a <= b": "!(b < a)",
        "a >= b": "!(b > a)",
    }
    for text, expected in cases.items():
        assert print_expr(permute_ordering(parse_expression(text))) == expected
    with pytest.raises(NotApplicable):
        permute_ordering(parse_expression("a == b"))


# -- naming-level ------------------------------------------------------------


def test_rename_variables_single():
    frag = _fragment("function f() public {\n    uint a = 1;\n    a += 1;\n}\n")
    renamed, mapping = rename_variables(frag.members, NameAllocator(set()))
    (fn,) = function_members(renamed)
    text = member_block(fn)
    assert mapping == {"a": "v_0"}
    assert "uint v_0 = 1;" in text
    assert "v_0 = (v_0 + 1);" in text
    assert " a " not in text


def test_rename_leaves_out_of_snippet_names():
    frag = _fragment("function f() public {\n    owner = msg.sender;\n"
                     "    uint fee = 1;\n    total = fee;\n}\n")
    renamed, mapping = rename_variables(
        frag.members, NameAllocator({"owner", "total", "fee", "msg", "sender", "f"}))
    (fn,) = function_members(renamed)
    text = member_block(fn)
    assert "owner = msg.sender;" in text  # host state untouched
    assert "total = " in text
    assert "fee" not in mapping.values() and "fee" in mapping


def test_rename_functions_internal_calls_only():
    frag = _fragment(
        "function bug() public {\n    helper();\n    other.foo();\n}\n"
        "\n"
        "function helper() public {\n    bug();\n}\n")
    renamed, mapping = rename_functions(
        frag.members, NameAllocator({"bug", "helper", "other", "foo"}))
    texts = [member_block(m) for m in function_members(renamed)]
    assert set(mapping) == {"bug", "helper"}
    assert all("other.foo()" in t or "foo" not in t for t in texts)
    joined = "\n".join(texts)
    assert "bug" not in joined and "helper" not in joined


def test_rename_skips_names_hiding_in_raw_regions():
    frag = _fragment(
        "uint counter;\n"
        "\n"
        "function f() public {\n"
        "    assembly {\n"
        "        let x := sload(counter_slot)\n"
        "    }\n"
        "    counter = counter + 1;\n"
        "}\n")
    renamed, mapping = rename_variables(frag.members, NameAllocator(set()))
    assert "counter" in mapping  # only word-occurrences block a rename
    frag2 = _fragment(
        "uint counter;\n"
        "\n"
        "function f() public {\n"
        "    assembly {\n"
        "        let x := sload(counter)\n"
        "    }\n"
        "}\n")
    renamed2, mapping2 = rename_variables(frag2.members, NameAllocator(set()))
    assert "counter" not in mapping2


# -- statement-level ---------------------------------------------------------


def test_swap_if_branches_pattern():
    frag = _fragment("function f(uint c) public {\n"
                     "    if (c > 0) {\n        a();\n    } else {\n        b();\n    }\n}\n")
    (fn,) = function_members(frag.members)
    (stmt,) = [s for s in fn.body.statements if isinstance(s, If)]
    swapped = swap_if_branches(stmt)
    assert isinstance(swapped.cond, Unary) and swapped.cond.op == "!"
    assert swapped.then == stmt.orelse
    assert swapped.orelse == stmt.then
    with pytest.raises(NotApplicable):
        swap_if_branches(If(parse_expression("c"), Block(()), None))


def test_if_to_while_pattern():
    frag = _fragment("function f(uint x) public {\n    if (x > 0) {\n        g();\n    }\n}\n")
    (fn,) = function_members(frag.members)
    (stmt,) = [s for s in fn.body.statements if isinstance(s, If)]
    out = if_to_while(stmt)
    assert isinstance(out, While)
    assert out.cond is stmt.cond
    assert isinstance(out.body.statements[-1], Break)
    text = print_stmt(out, 0)
    assert text.startswith("while (x > 0) {")
    assert "break;" in text


def test_if_to_while_empty_body():
    stmt = If(parse_expression("c"), Block(()), None)
    out = if_to_while(stmt)
    assert out.body.statements == (Break(),)


def test_if_to_for_styles():
    stmt = If(parse_expression("c"), Block(()), None)
    empty = if_to_for(stmt, ForFillStyle.EMPTY_EMPTY)
    assert empty.init is None and empty.post is None
    assert print_stmt(empty, 0).startswith("for (; c; ) {")

    alloc = NameAllocator({"c"})
    tempvar = if_to_for(stmt, ForFillStyle.TEMP_VAR, alloc)
    assert isinstance(tempvar.init, VarDecl) and tempvar.init.type_text == "uint"
    assert tempvar.post is not None
    assert print_stmt(tempvar, 0).startswith("for (uint v_0 = 0; c; v_0 = (v_0 + 1)) {")


def test_loop_conversion_refuses_loose_break():
    frag = _fragment(
        "function f(uint x) public {\n"
        "    while (x > 0) {\n"
        "        if (x == 1) {\n"
        "            break;\n"
        "        }\n"
        "        x = x - 1;\n"
        "    }\n"
        "}\n")
    # the only if contains a loose break that would rebind to the new loop
    assert not applicable("if2for", frag.members)
    assert not applicable("if2while", frag.members)


def test_tx_origin_passing_fig_pattern():
    frag = _fragment("address owner;\n\nfunction f() public {\n"
                     "    require(tx.origin == owner);\n}\n", VulnType.TX_ORIGIN)
    out, count = tx_origin_passing(frag.members, NameAllocator({"owner", "f"}))
    assert count == 1
    (fn,) = function_members(out)
    decl, call = fn.body.statements
    assert isinstance(decl, VarDecl) and decl.type_text == "address"
    assert is_tx_origin(decl.init)
    text = member_block(fn)
    assert "address tmpVar_0 = tx.origin;" in text
    assert "require((tmpVar_0 == owner));" in text
    assert text.count("tx.origin") == 1  # only the declaration reads it


def test_tx_origin_two_occurrences_share_one_temp():
    frag = _fragment("function f() public {\n"
                     "    require(tx.origin == tx.origin);\n}\n", VulnType.TX_ORIGIN)
    out, count = tx_origin_passing(frag.members, NameAllocator({"f"}))
    assert count == 1
    (fn,) = function_members(out)
    text = member_block(fn)
    assert text.count("tmpVar_0") == 3  # one declaration, two uses
    assert text.count("tx.origin") == 1


# -- applicability -----------------------------------------------------------


def test_applicable_examples(corpus):
    tx2 = next(s for s in corpus if s.id == "txorigin2")
    assert applicable("tx_passing", tx2.members)
    no_if = next(s for s in corpus if s.id == "unchk_send1")
    assert not applicable("if2for", no_if.members)
    with pytest.raises(InvalidChain):
        applicable("bogus_token", no_if.members)


def test_applicability_matches_hand_built_matrix(corpus):
    matrix = json.loads((FIXTURES / "applicability_matrix.json").read_text())
    for snippet in corpus:
        expected = sorted(matrix[snippet.id])
        assert sorted(applicable_groups(snippet.members)) == expected, snippet.id


# -- chains ------------------------------------------------------------------


def test_enumerate_valid_chains_full_set():
    chains = enumerate_valid_chains()
    assert len(chains) == 95
    assert all(not ({"if2for", "if2while"} <= set(c)) for c in chains)
    assert len(set(chains)) == 95


def test_enumerate_valid_chains_brute_force_cross_check():
    # independent powerset filter over the same groups
    for size in range(1, 8):
        groups = GROUP_TOKENS[:size]
        expected = []
        for r in range(1, size + 1):
            for combo in combinations(groups, r):
                if "if2for" in combo and "if2while" in combo:
                    continue
                expected.append(combo)
        assert sorted(enumerate_valid_chains(groups)) == sorted(expected)


def test_enumerate_two_unconstrained_groups():
    assert len(enumerate_valid_chains(("rename_var", "permutation"))) == 3


def test_chain_validation():
    with pytest.raises(InvalidChain):
        apply_chain((), ("if2for", "if2while"))
    with pytest.raises(InvalidChain):
        apply_chain((), ("nonsense",))
    with pytest.raises(InvalidChain):
        apply_chain((), ("rename_var", "rename_var"))


def test_chain_singleton_equals_node_op(corpus):
    tod = next(s for s in corpus if s.id == "tod1")
    variant = apply_chain(tod, ("if_swap",), 0)
    fns = function_members(variant.members)
    swapped = [s for f in fns for s in walk_statements(f.body) if isinstance(s, If)]
    assert any(isinstance(s.cond, Unary) and s.cond.op == "!" for s in swapped)


def test_chain_not_applicable_names_operator(corpus):
    send = next(s for s in corpus if s.id == "unchk_send1")
    with pytest.raises(NotApplicable) as err:
        apply_chain(send, ("if_swap",), 0)
    assert err.value.operator == "if_swap"


def test_chain_rename_then_tx(corpus):
    tx1 = next(s for s in corpus if s.id == "txorigin1")
    variant = apply_chain(tx1, ("tx_passing", "rename_var"), 0)
    text = "\n".join(member_block(m) for m in variant.members)
    assert "tx.origin" in text  # the declaration still reads it
    assert "owner_txorigin1" not in text  # state var renamed
    assert variant.chain == ("tx_passing", "rename_var")


def test_chain_determinism(corpus):
    re_ent = next(s for s in corpus if s.id == "re_ent1")
    a = apply_chain(re_ent, ("if2for", "permutation", "rename_var"), seed=3)
    b = apply_chain(re_ent, ("if2for", "permutation", "rename_var"), seed=3)
    assert [member_block(m) for m in a.members] == [member_block(m) for m in b.members]
    c = apply_chain(re_ent, ("if2for", "permutation", "rename_var"), seed=4)
    assert [member_block(m) for m in a.members] != [member_block(m) for m in c.members]


def test_chain_labels_roundtrip():
    assert chain_label(()) == "default"
    assert parse_chain_label("default") == ()
    chain = ("if_swap", "rename_var")
    assert parse_chain_label(chain_label(chain)) == chain


# -- structural vulnerability preservation ------------------------------------


def _characteristic_counts(members):
    tx_reads = calls = timestamps = 0
    for m in members:
        for e in walk_expressions(m):
            if is_tx_origin(e):
                tx_reads += 1
            elif isinstance(e, MemberAccess) and e.member == "timestamp":
                timestamps += 1
            elif type(e).__name__ == "Call" and isinstance(e.callee, MemberAccess):
                calls += 1
    return tx_reads, calls, timestamps


@pytest.mark.parametrize("token", ["permutation", "if_swap", "if2for", "if2while"])
def test_vulnerability_constructs_preserved(corpus, token):
    for snippet in corpus:
        if not applicable(token, snippet.members):
            continue
        variant = apply_chain(snippet, (token,), 0)
        assert _characteristic_counts(variant.members) == \
            _characteristic_counts(snippet.members), (snippet.id, token)


def test_no_new_raw_nodes(corpus):
    from solmorph.ast_nodes import RawRegion, RawStmt, RawExpr
    from solmorph.ast_nodes import walk_statements as ws

    def raw_count(members):
        n = 0
        for m in members:
            if isinstance(m, RawRegion):
                n += 1
                continue
            if hasattr(m, "body"):
                n += sum(1 for s in ws(m.body) if isinstance(s, RawStmt))
            for e in walk_expressions(m):
                if isinstance(e, RawExpr):
                    n += 1
        return n

    for snippet in corpus:
        for token in applicable_groups(snippet.members):
            variant = apply_chain(snippet, (token,), 0)
            assert raw_count(variant.members) <= raw_count(snippet.members)


def test_break_stays_inside_loops(corpus):
    def check(members):
        def loose(stmt):
            if isinstance(stmt, Break):
                return True
            if isinstance(stmt, (While, For)):
                return False
            from solmorph.ast_nodes import statement_children
            return any(loose(c) for c in statement_children(stmt))

        for m in function_members(members):
            assert not loose(m.body)

    for snippet in corpus:
        check(snippet.members)
        for token in applicable_groups(snippet.members):
            check(apply_chain(snippet, (token,), 0).members)
