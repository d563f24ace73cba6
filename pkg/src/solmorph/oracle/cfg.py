"""Control-flow graphs for structured statement bodies.

Nodes are individual statements or branch conditions; edges carry
true/false/fall labels. ``break`` contributes no node, it simply routes the
flow edge to the loop exit. Normalization removes what the loop rewrites
introduce as dead weight: unreachable nodes (a for-loop post expression
behind an unconditional break), declarations whose variable is never read
(the loop counter, a propagated temporary), and double negation on
conditions (inverting the condition swaps the branch edges instead).

Equality is isomorphism under a canonical DFS labeling, with statement
summaries compared up to consistent renaming of non-reserved identifiers
and the negated-mirror comparison rewrites.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from ..ast_nodes import (
    Assign,
    Binary,
    Block,
    Break,
    Call,
    Expression,
    ExprStmt,
    For,
    Identifier,
    If,
    Index,
    Literal,
    MemberAccess,
    RawStmt,
    Return,
    Statement,
    Unary,
    VarDecl,
    While,
)
from ..idents import is_reserved
from ..printer import print_expr


class RawEncountered(Exception):
    """The body contains an opaque statement; no CFG can be built."""


@dataclass
class Cfg:
    nodes: dict[int, tuple]
    edges: list[tuple[int, str, int]]  # (src, "true"|"false"|"fall", dst)
    entry: int
    exit: int

    def copy(self) -> "Cfg":
        return Cfg(dict(self.nodes), list(self.edges), self.entry, self.exit)

    def successors(self, nid: int) -> list[tuple[str, int]]:
        return [(label, dst) for src, label, dst in self.edges if src == nid]


class _Builder:
    def __init__(self):
        self.nodes = {0: ("entry",), 1: ("exit",)}
        self.edges: list[tuple[int, str, int]] = []
        self.entry = 0
        self.exit = 1
        self._next = 2

    def node(self, payload: tuple) -> int:
        nid = self._next
        self._next += 1
        self.nodes[nid] = payload
        return nid

    def edge(self, src: int, label: str, dst: int) -> None:
        self.edges.append((src, label, dst))

    def seq(self, stmts, succ: int, loop_exit) -> int:
        target = succ
        for s in reversed(stmts):
            target = self.stmt(s, target, loop_exit)
        return target

    def stmt(self, s: Statement, succ: int, loop_exit) -> int:
        if isinstance(s, Block):
            return self.seq(s.statements, succ, loop_exit)
        if isinstance(s, RawStmt):
            if s.pinned:  # comment/blank-line trivia
                return succ
            raise RawEncountered(s.text.splitlines()[0] if s.text else "")
        if isinstance(s, Break):
            return loop_exit if loop_exit is not None else self.exit
        if isinstance(s, If):
            cond = self.node(("cond", s.cond))
            then_entry = self.stmt(s.then, succ, loop_exit)
            else_entry = self.stmt(s.orelse, succ, loop_exit) if s.orelse else succ
            self.edge(cond, "true", then_entry)
            self.edge(cond, "false", else_entry)
            return cond
        if isinstance(s, While):
            cond = self.node(("cond", s.cond))
            body_entry = self.stmt(s.body, cond, succ)
            self.edge(cond, "true", body_entry)
            self.edge(cond, "false", succ)
            return cond
        if isinstance(s, For):
            cond = self.node(("cond", s.cond if s.cond is not None else Literal("true")))
            post = self.node(("expr", s.post)) if s.post is not None else None
            body_entry = self.stmt(s.body, post if post is not None else cond, succ)
            if post is not None:
                self.edge(post, "fall", cond)
            self.edge(cond, "true", body_entry)
            self.edge(cond, "false", succ)
            head = cond
            if s.init is not None:
                head = self.stmt(s.init, cond, loop_exit)
            return head
        if isinstance(s, ExprStmt):
            nid = self.node(("expr", s.expr))
            self.edge(nid, "fall", succ)
            return nid
        if isinstance(s, VarDecl):
            type_text = " ".join(s.type_text.split())
            nid = self.node(("decl", type_text, s.name, s.init))
            self.edge(nid, "fall", succ)
            return nid
        if isinstance(s, Return):
            nid = self.node(("return", s.value))
            self.edge(nid, "fall", self.exit)
            return nid
        raise RawEncountered(type(s).__name__)


def build_cfg(body) -> Cfg:
    """CFG of a Block (or statement sequence); raises RawEncountered."""
    stmts = body.statements if isinstance(body, Block) else tuple(body)
    b = _Builder()
    first = b.seq(stmts, b.exit, None)
    b.edge(b.entry, "fall", first)
    return Cfg(b.nodes, b.edges, b.entry, b.exit)


# --------------------------------------------------------------------------
# normalization


def _payload_exprs(payload: tuple):
    kind = payload[0]
    if kind in ("cond", "expr"):
        return (payload[1],)
    if kind == "decl":
        return (payload[3],) if payload[3] is not None else ()
    if kind == "return":
        return (payload[1],) if payload[1] is not None else ()
    return ()


def _map_payload_exprs(payload: tuple, fn):
    kind = payload[0]
    if kind in ("cond", "expr"):
        return (kind, fn(payload[1]))
    if kind == "decl" and payload[3] is not None:
        return (kind, payload[1], payload[2], fn(payload[3]))
    if kind == "return" and payload[1] is not None:
        return (kind, fn(payload[1]))
    return payload


def _subst(expr: Expression, name: str, value: Expression) -> Expression:
    if isinstance(expr, Identifier):
        return value if expr.name == name else expr
    if isinstance(expr, Binary):
        return Binary(expr.op, _subst(expr.lhs, name, value),
                      _subst(expr.rhs, name, value))
    if isinstance(expr, Unary):
        return Unary(expr.op, _subst(expr.operand, name, value))
    if isinstance(expr, MemberAccess):
        return MemberAccess(_subst(expr.base, name, value), expr.member)
    if isinstance(expr, Call):
        return Call(_subst(expr.callee, name, value),
                    tuple(_subst(a, name, value) for a in expr.args))
    if isinstance(expr, Assign):
        return Assign(_subst(expr.target, name, value),
                      _subst(expr.value, name, value))
    if isinstance(expr, Index):
        return Index(_subst(expr.base, name, value),
                     _subst(expr.index, name, value))
    return expr


def _identifiers(expr: Expression):
    if isinstance(expr, Identifier):
        yield expr.name
    elif isinstance(expr, Binary):
        yield from _identifiers(expr.lhs)
        yield from _identifiers(expr.rhs)
    elif isinstance(expr, Unary):
        yield from _identifiers(expr.operand)
    elif isinstance(expr, MemberAccess):
        yield from _identifiers(expr.base)
    elif isinstance(expr, Call):
        yield from _identifiers(expr.callee)
        for a in expr.args:
            yield from _identifiers(a)
    elif isinstance(expr, Assign):
        yield from _identifiers(expr.target)
        yield from _identifiers(expr.value)
    elif isinstance(expr, Index):
        yield from _identifiers(expr.base)
        yield from _identifiers(expr.index)


def _assign_root(target: Expression):
    while isinstance(target, (Index, MemberAccess)):
        target = target.base
    return target.name if isinstance(target, Identifier) else None


def _assigned_names(g: Cfg) -> dict[str, int]:
    counts: dict[str, int] = {}
    for payload in g.nodes.values():
        if payload[0] == "decl":
            counts[payload[2]] = counts.get(payload[2], 0) + 1
        for e in _payload_exprs(payload):
            for sub in _walk(e):
                if isinstance(sub, Assign):
                    root = _assign_root(sub.target)
                    if root is not None:
                        counts[root] = counts.get(root, 0) + 1
    return counts


def _walk(expr: Expression):
    yield expr
    if isinstance(expr, Binary):
        yield from _walk(expr.lhs)
        yield from _walk(expr.rhs)
    elif isinstance(expr, Unary):
        yield from _walk(expr.operand)
    elif isinstance(expr, MemberAccess):
        yield from _walk(expr.base)
    elif isinstance(expr, Call):
        yield from _walk(expr.callee)
        for a in expr.args:
            yield from _walk(a)
    elif isinstance(expr, Assign):
        yield from _walk(expr.target)
        yield from _walk(expr.value)
    elif isinstance(expr, Index):
        yield from _walk(expr.base)
        yield from _walk(expr.index)


def _read_count(g: Cfg, name: str, skip_node: int | None = None) -> int:
    n = 0
    for nid, payload in g.nodes.items():
        if nid == skip_node:
            continue
        for e in _payload_exprs(payload):
            n += sum(1 for ident in _identifiers(e) if ident == name)
    return n


def _is_pure_value(expr: Expression) -> bool:
    if isinstance(expr, Literal):
        return True
    if isinstance(expr, Identifier):
        return True
    if isinstance(expr, MemberAccess):
        return _is_pure_value(expr.base)
    return False


def _drop_unreachable(g: Cfg) -> bool:
    seen = {g.entry}
    stack = [g.entry]
    while stack:
        nid = stack.pop()
        for _, dst in g.successors(nid):
            if dst not in seen:
                seen.add(dst)
                stack.append(dst)
    seen.add(g.exit)
    dead = set(g.nodes) - seen
    if not dead:
        return False
    for nid in dead:
        del g.nodes[nid]
    g.edges = [(s, l, d) for (s, l, d) in g.edges if s not in dead and d not in dead]
    return True


def _strip_negations(g: Cfg) -> bool:
    changed = False
    for nid, payload in list(g.nodes.items()):
        while payload[0] == "cond" and isinstance(payload[1], Unary) \
                and payload[1].op == "!":
            g.nodes[nid] = payload = ("cond", payload[1].operand)
            g.edges = [
                (s, {"true": "false", "false": "true"}.get(l, l) if s == nid else l, d)
                for (s, l, d) in g.edges
            ]
            changed = True
    return changed


def _remove_node(g: Cfg, nid: int) -> None:
    succs = g.successors(nid)
    assert len(succs) == 1 and succs[0][0] == "fall"
    target = succs[0][1]
    new_edges = []
    for (s, l, d) in g.edges:
        if s == nid:
            continue
        if d == nid:
            d = target
        new_edges.append((s, l, d))
    del g.nodes[nid]
    # dedupe while keeping order
    seen = set()
    g.edges = [e for e in new_edges if not (e in seen or seen.add(e))]


def _propagate_copies(g: Cfg) -> bool:
    assigned = _assigned_names(g)
    for nid, payload in list(g.nodes.items()):
        if payload[0] != "decl" or payload[3] is None:
            continue
        name, init = payload[2], payload[3]
        if not _is_pure_value(init):
            continue
        if assigned.get(name, 0) != 1:
            continue
        # the substituted value must be stable: nothing it reads is assigned
        if any(assigned.get(n, 0) > 0 for n in _identifiers(init)):
            continue
        if _read_count(g, name, skip_node=nid) == 0:
            continue  # nothing to propagate; dead-decl pass handles it
        for other, other_payload in list(g.nodes.items()):
            if other == nid:
                continue
            g.nodes[other] = _map_payload_exprs(
                other_payload, lambda e: _subst(e, name, init))
        g.nodes[nid] = ("decl", payload[1], name, init)
        return True
    return False


def _drop_dead_decls(g: Cfg) -> bool:
    for nid, payload in list(g.nodes.items()):
        if payload[0] != "decl":
            continue
        if payload[3] is not None and not _is_pure_value(payload[3]):
            continue
        if _read_count(g, payload[2], skip_node=nid) == 0:
            _remove_node(g, nid)
            return True
    return False


def normalize_cfg(cfg: Cfg) -> Cfg:
    """Idempotent cleanup; see the module docstring for the passes."""
    g = cfg.copy()
    changed = True
    while changed:
        changed = False
        changed |= _drop_unreachable(g)
        changed |= _strip_negations(g)
        changed |= _propagate_copies(g)
        changed |= _drop_dead_decls(g)
    return g


# --------------------------------------------------------------------------
# canonical comparison


_NEGATED = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}
_MIRROR = {">": "<", ">=": "<="}
_CMP_OPS = frozenset(_NEGATED)


def _canon_expr(expr: Expression) -> Expression:
    if isinstance(expr, Unary):
        inner = _canon_expr(expr.operand)
        if expr.op == "!":
            if isinstance(inner, Unary) and inner.op == "!":
                return inner.operand
            if isinstance(inner, Binary) and inner.op in _CMP_OPS:
                return _canon_expr(Binary(_NEGATED[inner.op], inner.lhs, inner.rhs))
        return Unary(expr.op, inner)
    if isinstance(expr, Binary):
        lhs = _canon_expr(expr.lhs)
        rhs = _canon_expr(expr.rhs)
        op = expr.op
        # mirror > and >= so both spellings of an ordering compare equal;
        # operand order of ==/!= is left alone (reordering would have to
        # survive the alpha-renaming of summaries, which it cannot)
        if op in _MIRROR:
            op, lhs, rhs = _MIRROR[op], rhs, lhs
        return Binary(op, lhs, rhs)
    if isinstance(expr, MemberAccess):
        return MemberAccess(_canon_expr(expr.base), expr.member)
    if isinstance(expr, Call):
        return Call(_canon_expr(expr.callee), tuple(_canon_expr(a) for a in expr.args))
    if isinstance(expr, Assign):
        return Assign(_canon_expr(expr.target), _canon_expr(expr.value))
    if isinstance(expr, Index):
        return Index(_canon_expr(expr.base), _canon_expr(expr.index))
    if isinstance(expr, (Identifier, Literal)):
        return dataclasses.replace(expr, src=None)
    return expr


def _alpha_str(expr: Expression, alpha: dict[str, str]) -> str:
    def rename(e: Expression) -> Expression:
        if isinstance(e, Identifier):
            if is_reserved(e.name):
                return e
            if e.name not in alpha:
                alpha[e.name] = f"i{len(alpha)}"
            return Identifier(alpha[e.name])
        if isinstance(e, Binary):
            return Binary(e.op, rename(e.lhs), rename(e.rhs))
        if isinstance(e, Unary):
            return Unary(e.op, rename(e.operand))
        if isinstance(e, MemberAccess):
            return MemberAccess(rename(e.base), e.member)
        if isinstance(e, Call):
            return Call(rename(e.callee), tuple(rename(a) for a in e.args))
        if isinstance(e, Assign):
            return Assign(rename(e.target), rename(e.value))
        if isinstance(e, Index):
            return Index(rename(e.base), rename(e.index))
        return e

    return print_expr(rename(_canon_expr(expr)))


def _summary(payload: tuple, alpha: dict[str, str]) -> str:
    kind = payload[0]
    if kind in ("entry", "exit"):
        return kind
    if kind == "cond":
        return f"cond {_alpha_str(payload[1], alpha)}"
    if kind == "expr":
        return f"expr {_alpha_str(payload[1], alpha)}"
    if kind == "return":
        if payload[1] is None:
            return "return"
        return f"return {_alpha_str(payload[1], alpha)}"
    if kind == "decl":
        name = payload[2]
        if not is_reserved(name):
            if name not in alpha:
                alpha[name] = f"i{len(alpha)}"
            name = alpha[name]
        init = f" = {_alpha_str(payload[3], alpha)}" if payload[3] is not None else ""
        return f"decl {payload[1]} {name}{init}"
    return repr(payload)


_LABEL_ORDER = {"true": 0, "false": 1, "fall": 2}


def canonical_form(g: Cfg) -> tuple:
    """DFS labeling from entry; equal forms mean isomorphic graphs."""
    alpha: dict[str, str] = {}
    ids: dict[int, int] = {}
    order: list[int] = []

    def visit(nid: int):
        ids[nid] = len(ids)
        order.append(nid)
        for label, dst in sorted(g.successors(nid), key=lambda e: _LABEL_ORDER[e[0]]):
            if dst not in ids:
                visit(dst)

    visit(g.entry)
    form = []
    for nid in order:
        succs = tuple(
            (label, ids[dst])
            for label, dst in sorted(g.successors(nid), key=lambda e: _LABEL_ORDER[e[0]])
        )
        form.append((_summary(g.nodes[nid], alpha), succs))
    return tuple(form)


def cfg_equal(a: Cfg, b: Cfg) -> bool:
    """Label-respecting isomorphism of two (normalized) CFGs."""
    return canonical_form(a) == canonical_form(b)
