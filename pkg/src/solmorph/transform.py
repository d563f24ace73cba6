"""Rewrite operators over snippet fragments, and operator-chain machinery.

Each operator is exposed twice: a node-level rewrite matching one construct
(``permute_commutative``, ``swap_if_branches``, ...) and a fragment-level
maximal application used by chains, which rewrites every applicable site in
one deterministic bottom-up pass. Rewrites that are not value-preserving in
every integer semantics carry soundness flags on the resulting variant:

* ``IntegerDivisionRisk``: the division rewrite ``a / b -> 1 / (b / a)``
  truncates differently (and can divide by zero) under integer division.
* ``CheckedArithmeticRisk``: ``a - b -> -(b - a)`` is value-preserving only
  under two's-complement wrapping; with checked arithmetic (Solidity >= 0.8)
  one side may revert where the other does not.

Fragment-level rewrites record (original, rewritten) expression pairs so the
equivalence oracle can sweep exactly the sites that changed.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable, Optional

from .ast_nodes import (
    Assign,
    Binary,
    Block,
    Break,
    Call,
    Expression,
    ExprStmt,
    For,
    FunctionDef,
    Identifier,
    If,
    Index,
    Literal,
    MemberAccess,
    Param,
    RawExpr,
    RawRegion,
    RawStmt,
    Return,
    StateVarDecl,
    Statement,
    Unary,
    VarDecl,
    While,
    walk_expressions,
    walk_statements,
    expression_children,
)
from .idents import NameAllocator, words_in


class OperatorId(Enum):
    RENAME_VARIABLE = "RenameVariable"
    RENAME_FUNCTION = "RenameFunction"
    PERMUTATION = "Permutation"
    SUBTRACTION = "Subtraction"
    DIVISION = "Division"
    UNEQUAL = "Unequal"
    IF_SWAP = "IfSwap"
    IF_TO_FOR = "IfToFor"
    IF_TO_WHILE = "IfToWhile"
    TX_ORIGIN_PASSING = "TxOriginPassing"


class ForFillStyle(Enum):
    EMPTY_EMPTY = "empty_empty"
    TEMP_VAR = "temp_var"


INTEGER_DIVISION_RISK = "IntegerDivisionRisk"
CHECKED_ARITHMETIC_RISK = "CheckedArithmeticRisk"

# The seven user-facing operator groups, in canonical application order:
# statement-level rewrites first, then the tx.origin pass, then expression
# permutations, renames last so fresh names account for added temporaries.
GROUP_TOKENS = (
    "if_swap", "if2for", "if2while", "tx_passing",
    "permutation", "rename_var", "rename_func",
)

GROUP_MEMBERS = {
    "rename_var": (OperatorId.RENAME_VARIABLE,),
    "rename_func": (OperatorId.RENAME_FUNCTION,),
    "permutation": (OperatorId.PERMUTATION, OperatorId.SUBTRACTION,
                    OperatorId.DIVISION, OperatorId.UNEQUAL),
    "if_swap": (OperatorId.IF_SWAP,),
    "if2for": (OperatorId.IF_TO_FOR,),
    "if2while": (OperatorId.IF_TO_WHILE,),
    "tx_passing": (OperatorId.TX_ORIGIN_PASSING,),
}

_COMMUTATIVE_OPS = frozenset({"+", "*", "=="})
_ORDERING_MIRROR = {"!=": "==", "<": "<=", ">": ">=", "<=": "<", ">=": ">"}
_FAMILY_OPS = _COMMUTATIVE_OPS | {"-", "/"} | set(_ORDERING_MIRROR)


class TransformError(Exception):
    pass


class NotApplicable(TransformError):
    def __init__(self, operator: str, reason: str = ""):
        super().__init__(f"{operator}: {reason}" if reason else operator)
        self.operator = operator


class InvalidChain(TransformError):
    pass


Members = tuple


@dataclass(frozen=True)
class Variant:
    """A snippet after an operator chain."""

    snippet_id: str
    chain: tuple[str, ...]
    members: Members
    soundness_flags: frozenset[str]
    seed: int
    vuln_type: str = ""
    expr_rewrites: tuple[tuple[Expression, Expression], ...] = ()

    @property
    def ast(self) -> Members:
        return self.members


# --------------------------------------------------------------------------
# generic rebuild-if-changed walkers


def map_expr(expr: Expression, fn):
    """Bottom-up rewrite. ``fn(original, rebuilt)`` returns the replacement."""
    if isinstance(expr, Binary):
        lhs = map_expr(expr.lhs, fn)
        rhs = map_expr(expr.rhs, fn)
        rebuilt = expr if lhs is expr.lhs and rhs is expr.rhs else Binary(expr.op, lhs, rhs)
    elif isinstance(expr, Unary):
        operand = map_expr(expr.operand, fn)
        rebuilt = expr if operand is expr.operand else Unary(expr.op, operand)
    elif isinstance(expr, MemberAccess):
        base = map_expr(expr.base, fn)
        rebuilt = expr if base is expr.base else MemberAccess(base, expr.member)
    elif isinstance(expr, Call):
        callee = map_expr(expr.callee, fn)
        args = tuple(map_expr(a, fn) for a in expr.args)
        unchanged = callee is expr.callee and all(a is b for a, b in zip(args, expr.args))
        rebuilt = expr if unchanged else Call(callee, args)
    elif isinstance(expr, Assign):
        target = map_expr(expr.target, fn)
        value = map_expr(expr.value, fn)
        rebuilt = expr if target is expr.target and value is expr.value else Assign(target, value)
    elif isinstance(expr, Index):
        base = map_expr(expr.base, fn)
        index = map_expr(expr.index, fn)
        rebuilt = expr if base is expr.base and index is expr.index else Index(base, index)
    else:  # Identifier, Literal, RawExpr
        rebuilt = expr
    return fn(expr, rebuilt)


def map_stmt(stmt: Statement, expr_fn=None, stmt_fn=None):
    """Bottom-up statement rewrite; expressions mapped with ``expr_fn``."""
    def sub_expr(e):
        return map_expr(e, expr_fn) if expr_fn is not None else e

    if isinstance(stmt, Block):
        children = tuple(map_stmt(s, expr_fn, stmt_fn) for s in stmt.statements)
        unchanged = all(a is b for a, b in zip(children, stmt.statements))
        rebuilt = stmt if unchanged else Block(children)
    elif isinstance(stmt, If):
        cond = sub_expr(stmt.cond)
        then = map_stmt(stmt.then, expr_fn, stmt_fn)
        orelse = map_stmt(stmt.orelse, expr_fn, stmt_fn) if stmt.orelse is not None else None
        if cond is stmt.cond and then is stmt.then and orelse is stmt.orelse:
            rebuilt = stmt
        else:
            rebuilt = If(cond, then, orelse)
    elif isinstance(stmt, While):
        cond = sub_expr(stmt.cond)
        body = map_stmt(stmt.body, expr_fn, stmt_fn)
        rebuilt = stmt if cond is stmt.cond and body is stmt.body else While(cond, body)
    elif isinstance(stmt, For):
        init = map_stmt(stmt.init, expr_fn, stmt_fn) if stmt.init is not None else None
        cond = sub_expr(stmt.cond) if stmt.cond is not None else None
        post = sub_expr(stmt.post) if stmt.post is not None else None
        body = map_stmt(stmt.body, expr_fn, stmt_fn)
        if init is stmt.init and cond is stmt.cond and post is stmt.post and body is stmt.body:
            rebuilt = stmt
        else:
            rebuilt = For(init, cond, post, body)
    elif isinstance(stmt, ExprStmt):
        expr = sub_expr(stmt.expr)
        rebuilt = stmt if expr is stmt.expr else ExprStmt(expr)
    elif isinstance(stmt, VarDecl):
        init = sub_expr(stmt.init) if stmt.init is not None else None
        rebuilt = stmt if init is stmt.init else VarDecl(stmt.type_text, stmt.name, init)
    elif isinstance(stmt, Return):
        value = sub_expr(stmt.value) if stmt.value is not None else None
        rebuilt = stmt if value is stmt.value else Return(value)
    else:  # Break, RawStmt
        rebuilt = stmt
    if stmt_fn is not None:
        return stmt_fn(stmt, rebuilt)
    return rebuilt


def map_members(members: Members, expr_fn=None, stmt_fn=None) -> Members:
    out = []
    for m in members:
        if isinstance(m, FunctionDef):
            body = map_stmt(m.body, expr_fn, stmt_fn)
            if body is not m.body:
                m = dataclasses.replace(m, body=body, src=None, span=None)
        elif isinstance(m, StateVarDecl) and m.init is not None and expr_fn is not None:
            init = map_expr(m.init, expr_fn)
            if init is not m.init:
                m = dataclasses.replace(m, init=init, src=None, span=None)
        out.append(m)
    return tuple(out)


# --------------------------------------------------------------------------
# name collection


def declared_variable_names(members: Members) -> set[str]:
    names = set()
    for m in members:
        if isinstance(m, StateVarDecl):
            names.add(m.name)
        elif isinstance(m, FunctionDef):
            names.update(p.name for p in m.params if p.name)
            for s in walk_statements(m.body):
                if isinstance(s, VarDecl):
                    names.add(s.name)
    return names


def declared_function_names(members: Members) -> set[str]:
    return {m.name for m in members if isinstance(m, FunctionDef)}


def _raw_words(members: Members) -> set[str]:
    words: set[str] = set()
    for m in members:
        if isinstance(m, RawRegion):
            words |= words_in(m.text)
        elif isinstance(m, FunctionDef):
            words |= words_in(m.modifiers)
            for s in walk_statements(m.body):
                if isinstance(s, RawStmt):
                    words |= words_in(s.text)
            for e in walk_expressions(m.body):
                if isinstance(e, RawExpr):
                    words |= words_in(e.text)
        elif isinstance(m, StateVarDecl) and isinstance(m.init, RawExpr):
            words |= words_in(m.init.text)
    return words


def occupied_names(members: Members) -> set[str]:
    """Every identifier-shaped name visible in the fragment."""
    names = declared_variable_names(members) | declared_function_names(members)
    names |= _raw_words(members)
    for m in members:
        for e in walk_expressions(m):
            if isinstance(e, Identifier):
                names.add(e.name)
            elif isinstance(e, MemberAccess):
                names.add(e.member)
    return names


def count_tx_origin(node) -> int:
    return sum(1 for e in walk_expressions(node) if is_tx_origin(e))


def is_tx_origin(expr: Expression) -> bool:
    return (isinstance(expr, MemberAccess) and expr.member == "origin"
            and isinstance(expr.base, Identifier) and expr.base.name == "tx")


# --------------------------------------------------------------------------
# expression-level operators (Permutation family)


def permute_commutative(expr: Binary) -> Binary:
    """Swap the operands of a commutative binary expression (+ * ==)."""
    if not isinstance(expr, Binary) or expr.op not in _COMMUTATIVE_OPS:
        raise NotApplicable("permutation", "operand swap needs + * or ==")
    return Binary(expr.op, expr.rhs, expr.lhs)


def permute_subtraction(expr: Binary) -> Unary:
    """a - b  ->  -(b - a); equal under wrapping arithmetic."""
    if not isinstance(expr, Binary) or expr.op != "-":
        raise NotApplicable("permutation", "subtraction rewrite needs '-'")
    return Unary("-", Binary("-", expr.rhs, expr.lhs))


def permute_division(expr: Binary) -> Binary:
    """a / b  ->  1 / (b / a); not value-preserving under integer division."""
    if not isinstance(expr, Binary) or expr.op != "/":
        raise NotApplicable("permutation", "division rewrite needs '/'")
    return Binary("/", Literal("1"), Binary("/", expr.rhs, expr.lhs))


def permute_ordering(expr: Binary) -> Unary:
    """Negated-mirror form of a comparison, e.g. a < b -> !(b <= a)."""
    if not isinstance(expr, Binary) or expr.op not in _ORDERING_MIRROR:
        raise NotApplicable("permutation", "ordering rewrite needs != < > <= >=")
    return Unary("!", Binary(_ORDERING_MIRROR[expr.op], expr.rhs, expr.lhs))


def apply_permutation_family(members: Members):
    """Rewrite every binary site of the family; returns (members, flags, pairs)."""
    flags: set[str] = set()
    pairs: list[tuple[Expression, Expression]] = []

    def fn(orig, rebuilt):
        if not isinstance(rebuilt, Binary):
            return rebuilt
        op = rebuilt.op
        if op in _COMMUTATIVE_OPS:
            new = Binary(op, rebuilt.rhs, rebuilt.lhs)
        elif op == "-":
            new = Unary("-", Binary("-", rebuilt.rhs, rebuilt.lhs))
            flags.add(CHECKED_ARITHMETIC_RISK)
        elif op == "/":
            new = Binary("/", Literal("1"), Binary("/", rebuilt.rhs, rebuilt.lhs))
            flags.add(INTEGER_DIVISION_RISK)
        elif op in _ORDERING_MIRROR:
            new = Unary("!", Binary(_ORDERING_MIRROR[op], rebuilt.rhs, rebuilt.lhs))
        else:
            return rebuilt
        pairs.append((orig, new))
        return new

    new_members = map_members(members, expr_fn=fn)
    return new_members, flags, pairs


# --------------------------------------------------------------------------
# naming-level operators


def _rename_identifiers(members: Members, mapping: dict[str, str],
                        rename_calls: bool) -> Members:
    def expr_fn(orig, rebuilt):
        if isinstance(rebuilt, Identifier) and rebuilt.name in mapping:
            return Identifier(mapping[rebuilt.name])
        return rebuilt

    renamed = map_members(members, expr_fn=expr_fn)
    out = []
    for m in renamed:
        if isinstance(m, StateVarDecl) and m.name in mapping:
            m = dataclasses.replace(m, name=mapping[m.name], src=None, span=None)
        elif isinstance(m, FunctionDef):
            changed = False
            if rename_calls and m.name in mapping:
                m = dataclasses.replace(m, name=mapping[m.name], src=None, span=None)
                changed = True
            params = tuple(
                Param(p.type_text, mapping.get(p.name, p.name)) if p.name else p
                for p in m.params)
            if params != m.params:
                m = dataclasses.replace(m, params=params, src=None, span=None)
                changed = True

            def stmt_fn(orig, rebuilt):
                if isinstance(rebuilt, VarDecl) and rebuilt.name in mapping:
                    return dataclasses.replace(
                        rebuilt, name=mapping[rebuilt.name], src=None, span=None)
                return rebuilt

            body = map_stmt(m.body, stmt_fn=stmt_fn)
            if body is not m.body:
                m = dataclasses.replace(m, body=body, src=None, span=None)
        out.append(m)
    return tuple(out)


def _renameable(names: set[str], members: Members) -> list[str]:
    # A name whose uses may hide inside a raw region is left alone: renaming
    # its declaration would orphan those uses.
    blocked = _raw_words(members)
    return sorted(names - blocked)


def rename_variables(members: Members, allocator: NameAllocator) -> tuple[Members, dict]:
    """Fresh names for every variable declared in the fragment, uses included."""
    targets = _renameable(declared_variable_names(members), members)
    mapping = {name: allocator.fresh("v") for name in targets}
    return _rename_identifiers(members, mapping, rename_calls=False), mapping


def rename_functions(members: Members, allocator: NameAllocator) -> tuple[Members, dict]:
    """Fresh names for declared functions and their intra-fragment call sites."""
    targets = _renameable(declared_function_names(members), members)
    mapping = {name: allocator.fresh("f") for name in targets}
    return _rename_identifiers(members, mapping, rename_calls=True), mapping


# --------------------------------------------------------------------------
# statement-level operators


def _has_loose_break(stmt: Statement) -> bool:
    """A break (or opaque break/continue) not bound to a nested loop."""
    if isinstance(stmt, Break):
        return True
    if isinstance(stmt, (While, For)):
        return False
    if isinstance(stmt, RawStmt):
        return not stmt.pinned and bool(words_in(stmt.text) & {"break", "continue"})
    if isinstance(stmt, Block):
        return any(_has_loose_break(s) for s in stmt.statements)
    if isinstance(stmt, If):
        if _has_loose_break(stmt.then):
            return True
        return stmt.orelse is not None and _has_loose_break(stmt.orelse)
    return False


def _loop_convertible(stmt: If) -> bool:
    return stmt.orelse is None and not _has_loose_break(stmt.then)


def swap_if_branches(stmt: If) -> If:
    """Invert the condition and exchange the branches."""
    if not isinstance(stmt, If) or stmt.orelse is None:
        raise NotApplicable("if_swap", "needs an if with an else branch")
    return If(Unary("!", stmt.cond), stmt.orelse, stmt.then)


def _loop_body(stmt: If) -> Block:
    if isinstance(stmt.then, Block):
        inner = stmt.then.statements
    else:
        inner = (stmt.then,)
    return Block(inner + (Break(),))


def if_to_while(stmt: If) -> While:
    """if (E) S  ->  while (E) { S; break; }"""
    if not isinstance(stmt, If) or stmt.orelse is not None:
        raise NotApplicable("if2while", "needs a one-branch if")
    return While(stmt.cond, _loop_body(stmt))


def if_to_for(stmt: If, style: ForFillStyle = ForFillStyle.TEMP_VAR,
              allocator: Optional[NameAllocator] = None) -> For:
    """if (E) S  ->  for (s1; E; s2) { S; break; }

    TEMP_VAR fills s1/s2 with a fresh counter ("uint v = 0" / "v = v + 1");
    both are dead weight, the post-expression is never executed.
    """
    if not isinstance(stmt, If) or stmt.orelse is not None:
        raise NotApplicable("if2for", "needs a one-branch if")
    if style is ForFillStyle.EMPTY_EMPTY:
        return For(None, stmt.cond, None, _loop_body(stmt))
    if allocator is None:
        allocator = NameAllocator(set())
    name = allocator.fresh("v")
    init = VarDecl("uint", name, Literal("0"))
    post = Assign(Identifier(name), Binary("+", Identifier(name), Literal("1")))
    return For(init, stmt.cond, post, _loop_body(stmt))


def _apply_if_rewrite(members: Members, eligible, rewrite):
    count = 0

    def stmt_fn(orig, rebuilt):
        nonlocal count
        if isinstance(rebuilt, If) and eligible(rebuilt):
            count += 1
            return rewrite(rebuilt)
        return rebuilt

    return map_members(members, stmt_fn=stmt_fn), count


def _replace_tx_outside_blocks(stmt: Statement, name: str) -> Statement:
    if isinstance(stmt, Block):
        return stmt  # nested blocks get their own declaration

    def expr_fn(orig, rebuilt):
        if is_tx_origin(rebuilt):
            return Identifier(name)
        return rebuilt

    if isinstance(stmt, If):
        cond = map_expr(stmt.cond, expr_fn)
        then = _replace_tx_outside_blocks(stmt.then, name)
        orelse = _replace_tx_outside_blocks(stmt.orelse, name) if stmt.orelse else None
        if cond is stmt.cond and then is stmt.then and orelse is stmt.orelse:
            return stmt
        return If(cond, then, orelse)
    if isinstance(stmt, While):
        cond = map_expr(stmt.cond, expr_fn)
        body = _replace_tx_outside_blocks(stmt.body, name)
        return stmt if cond is stmt.cond and body is stmt.body else While(cond, body)
    if isinstance(stmt, For):
        init = _replace_tx_outside_blocks(stmt.init, name) if stmt.init else None
        cond = map_expr(stmt.cond, expr_fn) if stmt.cond else None
        post = map_expr(stmt.post, expr_fn) if stmt.post else None
        body = _replace_tx_outside_blocks(stmt.body, name)
        if init is stmt.init and cond is stmt.cond and post is stmt.post and body is stmt.body:
            return stmt
        return For(init, cond, post, body)
    return map_stmt(stmt, expr_fn=expr_fn)


def _tx_outside_blocks(stmt: Statement) -> int:
    if isinstance(stmt, Block):
        return 0
    n = sum(count_tx_origin(e) for e in expression_children(stmt))
    if isinstance(stmt, If):
        n += _tx_outside_blocks(stmt.then)
        if stmt.orelse is not None:
            n += _tx_outside_blocks(stmt.orelse)
    elif isinstance(stmt, While):
        n += _tx_outside_blocks(stmt.body)
    elif isinstance(stmt, For):
        if stmt.init is not None:
            n += _tx_outside_blocks(stmt.init)
        n += _tx_outside_blocks(stmt.body)
    return n


def tx_origin_passing(members: Members, allocator: NameAllocator):
    """Route every statement's tx.origin reads through a fresh local.

    For each block-level statement still reading tx.origin directly, emits
    ``address v = tx.origin;`` right before it and substitutes ``v`` for all
    occurrences in that statement. Occurrences inside nested blocks receive
    their own declaration next to their own statement.
    """
    count = 0

    def process_block(block: Block) -> Block:
        nonlocal count
        new_stmts = []
        changed = False
        for s in block.statements:
            s2 = _descend(s)
            if s2 is not s:
                changed = True
            if _tx_outside_blocks(s2) > 0:
                name = allocator.fresh("tmpVar")
                decl = VarDecl("address", name,
                               MemberAccess(Identifier("tx"), "origin"))
                new_stmts.append(decl)
                new_stmts.append(_replace_tx_outside_blocks(s2, name))
                count += 1
                changed = True
            else:
                new_stmts.append(s2)
        return Block(tuple(new_stmts)) if changed else block

    def _descend(s: Statement) -> Statement:
        if isinstance(s, Block):
            return process_block(s)
        if isinstance(s, If):
            then = _descend(s.then)
            orelse = _descend(s.orelse) if s.orelse is not None else None
            if then is s.then and orelse is s.orelse:
                return s
            return If(s.cond, then, orelse)
        if isinstance(s, While):
            body = _descend(s.body)
            return s if body is s.body else While(s.cond, body)
        if isinstance(s, For):
            body = _descend(s.body)
            return s if body is s.body else For(s.init, s.cond, s.post, body)
        return s

    out = []
    for m in members:
        if isinstance(m, FunctionDef):
            body = process_block(m.body)
            if body is not m.body:
                m = dataclasses.replace(m, body=body, src=None, span=None)
        out.append(m)
    return tuple(out), count


# --------------------------------------------------------------------------
# applicability and chains


def _family_sites(members: Members, ops: frozenset[str]) -> int:
    return sum(1 for m in members for e in walk_expressions(m)
               if isinstance(e, Binary) and e.op in ops)


def applicable(op, members: Members) -> bool:
    """True iff the operator's rewrite site occurs in the fragment."""
    token = op.value if isinstance(op, OperatorId) else op
    if isinstance(op, OperatorId):
        per_id = {
            OperatorId.RENAME_VARIABLE: lambda: bool(declared_variable_names(members)),
            OperatorId.RENAME_FUNCTION: lambda: bool(declared_function_names(members)),
            OperatorId.PERMUTATION: lambda: _family_sites(members, _COMMUTATIVE_OPS) > 0,
            OperatorId.SUBTRACTION: lambda: _family_sites(members, frozenset("-")) > 0,
            OperatorId.DIVISION: lambda: _family_sites(members, frozenset("/")) > 0,
            OperatorId.UNEQUAL: lambda: _family_sites(members, frozenset(_ORDERING_MIRROR)) > 0,
            OperatorId.IF_SWAP: lambda: _if_sites(members, swap=True) > 0,
            OperatorId.IF_TO_FOR: lambda: _if_sites(members, swap=False) > 0,
            OperatorId.IF_TO_WHILE: lambda: _if_sites(members, swap=False) > 0,
            OperatorId.TX_ORIGIN_PASSING: lambda: _tx_sites(members) > 0,
        }
        return per_id[op]()
    if token not in GROUP_MEMBERS:
        raise InvalidChain(f"unknown operator token: {token!r}")
    return any(applicable(i, members) for i in GROUP_MEMBERS[token])


def _if_sites(members: Members, swap: bool) -> int:
    n = 0
    for m in members:
        if not isinstance(m, FunctionDef):
            continue
        for s in walk_statements(m.body):
            if isinstance(s, If):
                if swap and s.orelse is not None:
                    n += 1
                elif not swap and _loop_convertible(s):
                    n += 1
    return n


def _tx_sites(members: Members) -> int:
    return sum(count_tx_origin(m.body) for m in members if isinstance(m, FunctionDef))


def applicable_groups(members: Members) -> tuple[str, ...]:
    return tuple(t for t in GROUP_TOKENS if applicable(t, members))


def validate_chain(chain: Iterable[str]) -> tuple[str, ...]:
    chain = tuple(chain)
    for token in chain:
        if token not in GROUP_MEMBERS:
            raise InvalidChain(f"unknown operator token: {token!r}")
    if len(set(chain)) != len(chain):
        raise InvalidChain(f"duplicate operator in chain: {chain}")
    if "if2for" in chain and "if2while" in chain:
        raise InvalidChain("if2for and if2while are mutually exclusive")
    return chain


def canonical_chain(chain: Iterable[str]) -> tuple[str, ...]:
    chain = validate_chain(chain)
    return tuple(t for t in GROUP_TOKENS if t in chain)


def apply_chain(snippet, chain: Iterable[str], seed: int = 0,
                for_style: ForFillStyle = ForFillStyle.TEMP_VAR) -> Variant:
    """Apply the operators of ``chain`` in the listed order.

    ``snippet`` is either a corpus Snippet or a bare members tuple.
    Deterministic: identical (snippet, chain, seed) yields an identical
    variant, byte for byte once printed.
    """
    chain = validate_chain(chain)
    if isinstance(snippet, tuple):
        members = snippet
        snippet_id, vuln_type = "", ""
    else:
        members = snippet.members
        snippet_id, vuln_type = snippet.id, getattr(snippet, "vuln_type", "")

    allocator = NameAllocator(occupied_names(members), seed)
    flags: set[str] = set()
    pairs: list[tuple[Expression, Expression]] = []

    for token in chain:
        if token == "rename_var":
            members, _ = rename_variables(members, allocator)
        elif token == "rename_func":
            members, _ = rename_functions(members, allocator)
        elif token == "permutation":
            if not applicable(token, members):
                raise NotApplicable(token, "no binary site in fragment")
            members, step_flags, step_pairs = apply_permutation_family(members)
            flags |= step_flags
            pairs.extend(step_pairs)
        elif token == "if_swap":
            members, n = _apply_if_rewrite(
                members, lambda s: s.orelse is not None, swap_if_branches)
            if n == 0:
                raise NotApplicable(token, "no if/else site in fragment")
        elif token == "if2while":
            members, n = _apply_if_rewrite(members, _loop_convertible, if_to_while)
            if n == 0:
                raise NotApplicable(token, "no one-branch if in fragment")
        elif token == "if2for":
            members, n = _apply_if_rewrite(
                members, _loop_convertible,
                lambda s: if_to_for(s, for_style, allocator))
            if n == 0:
                raise NotApplicable(token, "no one-branch if in fragment")
        elif token == "tx_passing":
            members, n = tx_origin_passing(members, allocator)
            if n == 0:
                raise NotApplicable(token, "no tx.origin read in fragment")
    return Variant(snippet_id, chain, members, frozenset(flags), seed,
                   vuln_type, tuple(pairs))


def enumerate_valid_chains(groups: Iterable[str] = GROUP_TOKENS) -> list[tuple[str, ...]]:
    """All non-empty operator subsets, loop-conversion exclusion applied.

    Subsets containing both if2for and if2while are dropped; each returned
    chain is in canonical application order. For the full seven groups this
    yields 95 chains.
    """
    ordered = [t for t in GROUP_TOKENS if t in set(groups)]
    unknown = set(groups) - set(GROUP_TOKENS)
    if unknown:
        raise InvalidChain(f"unknown operator tokens: {sorted(unknown)}")
    chains = []
    for r in range(1, len(ordered) + 1):
        for combo in combinations(ordered, r):
            if "if2for" in combo and "if2while" in combo:
                continue
            chains.append(combo)
    return chains


def chain_label(chain: Iterable[str]) -> str:
    chain = tuple(chain)
    return "+".join(chain) if chain else "default"


def parse_chain_label(label: str) -> tuple[str, ...]:
    if label in ("", "default"):
        return ()
    return validate_chain(label.split("+"))
