"""Syntax tree for the Solidity subset the rewrite engine understands.

Nodes are frozen dataclasses. Provenance fields (``span``, ``src``) are
excluded from equality, so ``==`` is structural equality: two trees compare
equal when they describe the same program, regardless of where in a file
they came from or how they were formatted. ``src`` holds the verbatim source
slice of a node parsed from a file; nodes built by transforms carry
``src=None`` and are printed canonically.

Raw nodes (``RawRegion``, ``RawStmt``, ``RawExpr``) carry verbatim text for
everything outside the subset grammar. Their text *is* their structure and
participates in equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Span:
    """1-based, inclusive line range."""

    start: int
    end: int

    @property
    def line_count(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: "Span") -> bool:
        return self.start <= other.end and other.start <= self.end


# --------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Expression:
    pass


@dataclass(frozen=True)
class Identifier(Expression):
    name: str
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Literal(Expression):
    """Verbatim literal text: numbers (with optional unit), strings, bools."""

    text: str
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Binary(Expression):
    op: str  # one of + - * / == != < > <= >= && ||
    lhs: Expression
    rhs: Expression
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Unary(Expression):
    op: str  # one of ! -
    operand: Expression
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class MemberAccess(Expression):
    base: Expression
    member: str
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call(Expression):
    callee: Expression
    args: tuple[Expression, ...]
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Assign(Expression):
    target: Expression
    value: Expression
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Index(Expression):
    base: Expression
    index: Expression
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class RawExpr(Expression):
    text: str


# --------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Statement:
    pass


@dataclass(frozen=True)
class Block(Statement):
    statements: tuple[Statement, ...]
    span: Optional[Span] = field(default=None, compare=False, repr=False)
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class If(Statement):
    cond: Expression
    then: Statement
    orelse: Optional[Statement]
    span: Optional[Span] = field(default=None, compare=False, repr=False)
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class While(Statement):
    cond: Expression
    body: Statement
    span: Optional[Span] = field(default=None, compare=False, repr=False)
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class For(Statement):
    init: Optional[Statement]  # VarDecl or ExprStmt, printed with its ';'
    cond: Optional[Expression]
    post: Optional[Expression]
    body: Statement
    span: Optional[Span] = field(default=None, compare=False, repr=False)
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ExprStmt(Statement):
    expr: Expression
    span: Optional[Span] = field(default=None, compare=False, repr=False)
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class VarDecl(Statement):
    type_text: str
    name: str
    init: Optional[Expression]
    span: Optional[Span] = field(default=None, compare=False, repr=False)
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Return(Statement):
    value: Optional[Expression]
    span: Optional[Span] = field(default=None, compare=False, repr=False)
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Break(Statement):
    span: Optional[Span] = field(default=None, compare=False, repr=False)
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class RawStmt(Statement):
    """Statement-level opaque region. Only the parser creates these.

    ``pinned`` marks full-line trivia (comments, blank lines) that must be
    reprinted verbatim with no added indentation.
    """

    text: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)
    pinned: bool = field(default=False, compare=False)


# --------------------------------------------------------------------------
# Contract members and top level


@dataclass(frozen=True)
class Param:
    type_text: str
    name: Optional[str]


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple[Param, ...]
    modifiers: str  # raw visibility/mutability/returns text between ')' and '{'
    body: Block
    span: Optional[Span] = field(default=None, compare=False, repr=False)
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class StateVarDecl:
    type_text: str  # verbatim, may carry visibility ("uint public")
    name: str
    init: Optional[Expression]
    span: Optional[Span] = field(default=None, compare=False, repr=False)
    src: Optional[str] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class RawRegion:
    """Verbatim source bytes outside the subset grammar."""

    text: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


Member = Union[FunctionDef, StateVarDecl, RawRegion]


@dataclass(frozen=True)
class ContractDef:
    name: str
    header: str  # verbatim from the 'contract' keyword through '{'
    members: tuple[Member, ...]
    footer: str = "}"  # verbatim from the closing '}' to its line end
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SourceUnit:
    pragmas: tuple[RawRegion, ...]  # pragma/import directives, verbatim
    contracts: tuple[ContractDef, ...]
    trailing_raw: tuple[RawRegion, ...]  # every other top-level region

    def items(self):
        """Top-level pieces in source order (falls back to field order)."""
        pieces = list(self.pragmas) + list(self.contracts) + list(self.trailing_raw)
        order = {id(p): i for i, p in enumerate(pieces)}
        return sorted(
            pieces,
            key=lambda p: (p.span.start, order[id(p)]) if p.span else (1 << 30, order[id(p)]),
        )


def walk_expressions(node):
    """Yield every Expression reachable from an expression/statement/member."""
    if isinstance(node, Expression):
        yield node
        if isinstance(node, Binary):
            yield from walk_expressions(node.lhs)
            yield from walk_expressions(node.rhs)
        elif isinstance(node, Unary):
            yield from walk_expressions(node.operand)
        elif isinstance(node, MemberAccess):
            yield from walk_expressions(node.base)
        elif isinstance(node, Call):
            yield from walk_expressions(node.callee)
            for a in node.args:
                yield from walk_expressions(a)
        elif isinstance(node, Assign):
            yield from walk_expressions(node.target)
            yield from walk_expressions(node.value)
        elif isinstance(node, Index):
            yield from walk_expressions(node.base)
            yield from walk_expressions(node.index)
    elif isinstance(node, Statement):
        for child in expression_children(node):
            yield from walk_expressions(child)
        for child in statement_children(node):
            yield from walk_expressions(child)
    elif isinstance(node, FunctionDef):
        yield from walk_expressions(node.body)
    elif isinstance(node, StateVarDecl):
        if node.init is not None:
            yield from walk_expressions(node.init)


def expression_children(stmt: Statement) -> tuple[Expression, ...]:
    if isinstance(stmt, If):
        return (stmt.cond,)
    if isinstance(stmt, While):
        return (stmt.cond,)
    if isinstance(stmt, For):
        out = []
        if stmt.cond is not None:
            out.append(stmt.cond)
        if stmt.post is not None:
            out.append(stmt.post)
        return tuple(out)
    if isinstance(stmt, ExprStmt):
        return (stmt.expr,)
    if isinstance(stmt, VarDecl):
        return (stmt.init,) if stmt.init is not None else ()
    if isinstance(stmt, Return):
        return (stmt.value,) if stmt.value is not None else ()
    return ()


def statement_children(stmt: Statement) -> tuple[Statement, ...]:
    if isinstance(stmt, Block):
        return stmt.statements
    if isinstance(stmt, If):
        return (stmt.then,) + ((stmt.orelse,) if stmt.orelse is not None else ())
    if isinstance(stmt, While):
        return (stmt.body,)
    if isinstance(stmt, For):
        out = []
        if stmt.init is not None:
            out.append(stmt.init)
        out.append(stmt.body)
        return tuple(out)
    return ()


def walk_statements(node):
    """Yield every Statement reachable from a statement/member, preorder."""
    if isinstance(node, Statement):
        yield node
        for child in statement_children(node):
            yield from walk_statements(child)
    elif isinstance(node, FunctionDef):
        yield from walk_statements(node.body)
