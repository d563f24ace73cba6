"""Deterministic source emission.

Unchanged nodes reprint their verbatim source slice, so layout and comments
survive anywhere a transform did not touch. Nodes built by transforms have
no source slice and are rendered canonically; canonical binary and unary
expressions are always parenthesized, so a rewrite can never change
evaluation order through precedence.
"""

from __future__ import annotations

from .ast_nodes import (
    Assign,
    Binary,
    Block,
    Break,
    Call,
    ContractDef,
    Expression,
    ExprStmt,
    For,
    FunctionDef,
    Identifier,
    If,
    Index,
    Literal,
    MemberAccess,
    RawExpr,
    RawRegion,
    RawStmt,
    Return,
    SourceUnit,
    StateVarDecl,
    Statement,
    Unary,
    VarDecl,
    While,
)

INDENT = "    "

_ATOMIC = (Identifier, Literal, MemberAccess, Call, Index)


def print_unit(unit: SourceUnit) -> str:
    blocks = unit_blocks(unit)
    if not blocks:
        return ""
    return "\n".join(blocks) + "\n"


def unit_blocks(unit: SourceUnit) -> list[str]:
    """Top-level blocks in print order; print_unit joins them with newlines."""
    out = []
    for piece in unit.items():
        if isinstance(piece, ContractDef):
            out.append(contract_block(piece))
        else:
            out.append(piece.text)
    return out


def contract_block(contract: ContractDef) -> str:
    parts = [contract.header]
    parts.extend(member_block(m) for m in contract.members)
    parts.append(contract.footer)
    return "\n".join(parts)


def member_block(member) -> str:
    if isinstance(member, RawRegion):
        return member.text
    if member.src is not None:
        return member.src
    if isinstance(member, FunctionDef):
        return function_block(member, 1)
    if isinstance(member, StateVarDecl):
        return INDENT + _state_var_text(member)
    raise TypeError(f"not a member: {member!r}")


def function_block(fn: FunctionDef, level: int) -> str:
    ind = INDENT * level
    params = ", ".join(
        f"{p.type_text} {p.name}" if p.name else p.type_text for p in fn.params)
    head = f"{ind}function {fn.name}({params})"
    if fn.modifiers:
        head += f" {fn.modifiers}"
    return head + " " + _attached(fn.body, level)


def _state_var_text(decl: StateVarDecl) -> str:
    if decl.init is None:
        return f"{decl.type_text} {decl.name};"
    return f"{decl.type_text} {decl.name} = {print_expr(decl.init)};"


def _with_semi(text: str) -> str:
    return text if text.endswith(";") else text + ";"


def _inline_text(stmt: Statement) -> str | None:
    """Single-line rendering for simple statements, or None."""
    if isinstance(stmt, RawStmt):
        return stmt.text if "\n" not in stmt.text else None
    if stmt.src is not None:
        if "\n" in stmt.src:
            return None
        if isinstance(stmt, (ExprStmt, VarDecl, Return, Break)):
            return _with_semi(stmt.src)
        return stmt.src
    if isinstance(stmt, ExprStmt):
        return f"{print_expr(stmt.expr)};"
    if isinstance(stmt, VarDecl):
        if stmt.init is None:
            return f"{stmt.type_text} {stmt.name};"
        return f"{stmt.type_text} {stmt.name} = {print_expr(stmt.init)};"
    if isinstance(stmt, Return):
        return "return;" if stmt.value is None else f"return {print_expr(stmt.value)};"
    if isinstance(stmt, Break):
        return "break;"
    return None


def _attached(stmt: Statement, level: int) -> str:
    """Render a statement attached to a header ('if (c) ...', 'while ...')."""
    if isinstance(stmt, Block):
        if stmt.src is not None:
            return stmt.src
        ind = INDENT * level
        if not stmt.statements:
            return "{\n" + ind + "}"
        inner = "\n".join(print_stmt(s, level + 1) for s in stmt.statements)
        return "{\n" + inner + "\n" + ind + "}"
    inline = _inline_text(stmt)
    if inline is not None:
        return inline
    return "\n" + print_stmt(stmt, level + 1)


def print_stmt(stmt: Statement, level: int) -> str:
    ind = INDENT * level
    if isinstance(stmt, RawStmt):
        return stmt.text if stmt.pinned else ind + stmt.text
    if stmt.src is not None:
        if isinstance(stmt, (ExprStmt, VarDecl, Return, Break)):
            return ind + _with_semi(stmt.src)
        return ind + stmt.src
    if isinstance(stmt, Block):
        return ind + _attached(stmt, level)
    if isinstance(stmt, If):
        text = f"{ind}if ({print_expr(stmt.cond)}) " + _attached(stmt.then, level)
        if stmt.orelse is not None:
            text += " else " + _attached(stmt.orelse, level)
        return text
    if isinstance(stmt, While):
        return f"{ind}while ({print_expr(stmt.cond)}) " + _attached(stmt.body, level)
    if isinstance(stmt, For):
        init = _inline_text(stmt.init) if stmt.init is not None else ";"
        if init is None:  # multi-line initializer cannot sit in a for header
            init = ";"
        cond = print_expr(stmt.cond) if stmt.cond is not None else ""
        post = print_expr(stmt.post) if stmt.post is not None else ""
        head = f"{ind}for ({init} {cond}; {post})"
        return head + " " + _attached(stmt.body, level)
    if isinstance(stmt, ExprStmt):
        return f"{ind}{print_expr(stmt.expr)};"
    if isinstance(stmt, VarDecl):
        if stmt.init is None:
            return f"{ind}{stmt.type_text} {stmt.name};"
        return f"{ind}{stmt.type_text} {stmt.name} = {print_expr(stmt.init)};"
    if isinstance(stmt, Return):
        if stmt.value is None:
            return f"{ind}return;"
        return f"{ind}return {print_expr(stmt.value)};"
    if isinstance(stmt, Break):
        return f"{ind}break;"
    raise TypeError(f"not a statement: {stmt!r}")


def _is_wrapped(text: str) -> bool:
    if not (text.startswith("(") and text.endswith(")")):
        return False
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0 and i != len(text) - 1:
                return False
    return depth == 0


def _operand(expr: Expression) -> str:
    text = print_expr(expr)
    if isinstance(expr, _ATOMIC) or _is_wrapped(text):
        return text
    return f"({text})"


def print_expr(expr: Expression) -> str:
    if isinstance(expr, RawExpr):
        return expr.text
    if expr.src is not None:
        return expr.src
    if isinstance(expr, Identifier):
        return expr.name
    if isinstance(expr, Literal):
        return expr.text
    if isinstance(expr, Binary):
        return f"({_operand(expr.lhs)} {expr.op} {_operand(expr.rhs)})"
    if isinstance(expr, Unary):
        text = print_expr(expr.operand)
        if not _is_wrapped(text):
            text = f"({text})"
        return f"{expr.op}{text}"
    if isinstance(expr, MemberAccess):
        return f"{_operand(expr.base)}.{expr.member}"
    if isinstance(expr, Call):
        args = ", ".join(print_expr(a) for a in expr.args)
        return f"{_operand(expr.callee)}({args})"
    if isinstance(expr, Assign):
        return f"{print_expr(expr.target)} = {print_expr(expr.value)}"
    if isinstance(expr, Index):
        return f"{_operand(expr.base)}[{print_expr(expr.index)}]"
    raise TypeError(f"not an expression: {expr!r}")
