"""Interpreter semantics, exhaustive sweeps, kernel/fallback agreement."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solmorph.oracle import (
    DIV_BY_ZERO,
    OVERFLOW,
    EvalEnv,
    UnboundIdentifier,
    eval_expr,
    equivalent_exprs,
)
from solmorph.oracle import _sweep_py
from solmorph.oracle.program import TAG_BOOL, TAG_INT, compile_expr, encode
from solmorph.oracle.sweep import (
    KERNEL,
    DomainTooLarge,
    abstract_pair,
    check_rewrite_pair,
    width_for,
)
from solmorph.parser import parse_expression

try:
    from solmorph.oracle import _sweep as _sweep_c
except ImportError:
    _sweep_c = None


def ev(text, semantics="wrap", width=8, **bindings):
    return eval_expr(parse_expression(text), EvalEnv(bindings, width, semantics))


def test_wrapping_addition():
    assert ev("a + b", a=200, b=100) == 44  # (300 mod 256)


def test_subtraction_mirror_hand_check():
    assert ev("-(b - a)", a=5, b=3) == 2
    assert ev("a - b", a=5, b=3) == 2


def test_division_rewrite_divergence_point():
    assert ev("1/(b / a)", a=6, b=3) is DIV_BY_ZERO
    assert ev("a / b", a=6, b=3) == 2


def test_division_by_zero_signal():
    assert ev("a / b", a=1, b=0) is DIV_BY_ZERO


def test_checked_semantics_overflow():
    assert ev("a + b", semantics="checked", a=200, b=100) is OVERFLOW
    assert ev("a - b", semantics="checked", a=3, b=5) is OVERFLOW
    assert ev("-(a)", semantics="checked", a=1) is OVERFLOW
    assert ev("a - b", semantics="checked", a=5, b=3) == 2


def test_unbound_identifier_raises():
    with pytest.raises(UnboundIdentifier):
        ev("missing + 1")


def test_short_circuit_hides_right_error():
    assert ev("(a > 0) && (1 / a > 0)", a=0) is False
    assert ev("(a == 0) || (1 / a > 0)", a=0) is True


def test_unit_literals():
    assert ev("a + 1 ether", a=0, width=8) == (10**18) % 256


# -- equivalence sweeps --------------------------------------------------------


def test_commutative_equal():
    r = equivalent_exprs(parse_expression("a + b"), parse_expression("b + a"))
    assert r.equal and r.total == 65536


def test_ordering_equal():
    r = equivalent_exprs(parse_expression("a < b"), parse_expression("!(b <= a)"))
    assert r.equal


def test_division_divergent_with_witness():
    r = equivalent_exprs(parse_expression("a / b"), parse_expression("1/(b / a)"))
    assert not r.equal
    assert r.divergence_count > 0
    assert r.is_witness({"a": 6, "b": 3})
    assert {"a": 6, "b": 3} in r.witnesses()


def test_divergence_witnesses_involve_truncation_or_div_zero():
    e1, e2 = parse_expression("a / b"), parse_expression("1/(b / a)")
    r = equivalent_exprs(e1, e2)
    for w in r.witnesses(50):
        lhs = ev("a / b", **w)
        rhs = ev("1/(b / a)", **w)
        assert lhs != rhs
        assert DIV_BY_ZERO in (lhs, rhs) or isinstance(lhs, int)


def test_free_identifier_mismatch_rejected():
    with pytest.raises(ValueError):
        equivalent_exprs(parse_expression("a + b"), parse_expression("a + c"))


def test_domain_cap():
    e1 = parse_expression("a + b + c")
    e2 = parse_expression("c + b + a")
    with pytest.raises(DomainTooLarge):
        equivalent_exprs(e1, e2, width=8)
    assert width_for(3) == 6
    r = equivalent_exprs(e1, e2, width=width_for(3))
    assert r.equal


def test_abstraction_shares_placeholders():
    old = parse_expression("balances[msg.sender] + msg.value")
    new = parse_expression("msg.value + balances[msg.sender]")
    a, b, table = abstract_pair(old, new)
    assert len(table) == 2
    r = equivalent_exprs(a, b)
    assert r.equal


def test_check_rewrite_pair_handles_opaque_operands():
    old = parse_expression("userBalance[msg.sender] > 0")
    new = parse_expression("!(0 >= userBalance[msg.sender])")
    assert check_rewrite_pair(old, new).equal


# -- kernel consistency --------------------------------------------------------


@pytest.mark.skipif(_sweep_c is None, reason="compiled kernel not built")
@given(st.integers(min_value=0, max_value=2**40))
@settings(max_examples=30, deadline=None)
def test_kernel_matches_fallback_on_random_programs(rng_seed):
    rng = np.random.default_rng(rng_seed)
    texts = [
        "a + b", "a - b", "a * b", "a / b", "-(b - a)", "1/(b / a)",
        "!(b <= a)", "(a < b) && (b != 0)", "(a == b) || (a > b)",
        "-(a) * (b + 3)", "(a / (b + 1)) - b",
    ]
    text = texts[int(rng.integers(len(texts)))]
    width = int(rng.integers(2, 9))
    checked = bool(rng.integers(2))
    p = compile_expr(parse_expression(text), ("a", "b"), width)
    args = (p.kinds, p.args, p.lefts, p.rights, p.root, 2, width, checked)
    assert np.array_equal(_sweep_c.run_sweep(*args), _sweep_py.run_sweep(*args))


def test_kernel_agrees_with_reference_interpreter():
    # the sweep kernels and the tree interpreter are independent routes
    text = "(a - b) * (a + b)"
    expr = parse_expression(text)
    p = compile_expr(expr, ("a", "b"), 4)
    swept = _sweep_py.run_sweep(p.kinds, p.args, p.lefts, p.rights, p.root, 2, 4, False)
    for a in range(16):
        for b in range(16):
            value = eval_expr(expr, EvalEnv({"a": a, "b": b}, width=4))
            packed = (b << 4) | a
            if isinstance(value, bool):
                assert swept[packed] == encode(TAG_BOOL, int(value))
            else:
                assert swept[packed] == encode(TAG_INT, value)


def test_selected_kernel_is_reported():
    assert KERNEL in ("compiled", "python")
