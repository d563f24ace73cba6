"""Reference interpreter over width-bit unsigned integers.

Arithmetic follows the pre-0.8 Solidity baseline: values wrap modulo
2**width. ``checked`` semantics raises an Overflow signal instead of
wrapping, mirroring 0.8-style checked arithmetic. Division by zero and type
mismatches are signals, not exceptions, so sweeps can compare error behavior
between two expressions the same way they compare values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

from ..ast_nodes import Binary, Expression, Identifier, Literal, Unary


@dataclass(frozen=True)
class Signal:
    name: str

    def __repr__(self):
        return f"<{self.name}>"


DIV_BY_ZERO = Signal("DivByZero")
OVERFLOW = Signal("Overflow")
TYPE_ERROR = Signal("TypeError")


class UnboundIdentifier(Exception):
    pass


class UnsupportedExpression(Exception):
    """Expression outside the Binary/Unary/Identifier/Literal subset."""


_UNIT_FACTORS = {
    "wei": 1,
    "gwei": 10**9,
    "szabo": 10**12,
    "finney": 10**15,
    "ether": 10**18,
    "seconds": 1,
    "minutes": 60,
    "hours": 3600,
    "days": 86400,
    "weeks": 604800,
}


def literal_value(text: str) -> Union[int, bool]:
    if text == "true":
        return True
    if text == "false":
        return False
    parts = text.split()
    if len(parts) == 2 and parts[1] in _UNIT_FACTORS:
        return int(parts[0], 0) * _UNIT_FACTORS[parts[1]]
    try:
        return int(text, 0)
    except ValueError:
        raise UnsupportedExpression(f"non-integer literal: {text!r}") from None


@dataclass(frozen=True)
class EvalEnv:
    bindings: Mapping[str, int]
    width: int = 8
    semantics: str = "wrap"  # or "checked"

    @property
    def modulus(self) -> int:
        return 1 << self.width


Value = Union[int, bool, Signal]


def eval_expr(expr: Expression, env: EvalEnv) -> Value:
    """Evaluate an expression; && and || short-circuit as in Solidity."""
    if isinstance(expr, Literal):
        v = literal_value(expr.text)
        if isinstance(v, bool):
            return v
        return v % env.modulus
    if isinstance(expr, Identifier):
        try:
            return env.bindings[expr.name] % env.modulus
        except KeyError:
            raise UnboundIdentifier(expr.name) from None
    if isinstance(expr, Unary):
        v = eval_expr(expr.operand, env)
        if isinstance(v, Signal):
            return v
        if expr.op == "!":
            return (not v) if isinstance(v, bool) else TYPE_ERROR
        if expr.op == "-":
            if isinstance(v, bool):
                return TYPE_ERROR
            if env.semantics == "checked":
                return 0 if v == 0 else OVERFLOW
            return (-v) % env.modulus
        raise UnsupportedExpression(f"unary {expr.op!r}")
    if isinstance(expr, Binary):
        return _eval_binary(expr, env)
    raise UnsupportedExpression(type(expr).__name__)


def _eval_binary(expr: Binary, env: EvalEnv) -> Value:
    op = expr.op
    if op in ("&&", "||"):
        lhs = eval_expr(expr.lhs, env)
        if isinstance(lhs, Signal):
            return lhs
        if not isinstance(lhs, bool):
            return TYPE_ERROR
        if op == "&&" and not lhs:
            return False
        if op == "||" and lhs:
            return True
        rhs = eval_expr(expr.rhs, env)
        if isinstance(rhs, Signal):
            return rhs
        return rhs if isinstance(rhs, bool) else TYPE_ERROR

    lhs = eval_expr(expr.lhs, env)
    if isinstance(lhs, Signal):
        return lhs
    rhs = eval_expr(expr.rhs, env)
    if isinstance(rhs, Signal):
        return rhs

    if op in ("==", "!="):
        if isinstance(lhs, bool) != isinstance(rhs, bool):
            return TYPE_ERROR
        return (lhs == rhs) if op == "==" else (lhs != rhs)

    if isinstance(lhs, bool) or isinstance(rhs, bool):
        return TYPE_ERROR

    if op in ("<", ">", "<=", ">="):
        return {"<": lhs < rhs, ">": lhs > rhs,
                "<=": lhs <= rhs, ">=": lhs >= rhs}[op]
    if op == "/":
        if rhs == 0:
            return DIV_BY_ZERO
        return lhs // rhs
    if op in ("+", "-", "*"):
        raw = {"+": lhs + rhs, "-": lhs - rhs, "*": lhs * rhs}[op]
        if env.semantics == "checked" and not (0 <= raw < env.modulus):
            return OVERFLOW
        return raw % env.modulus
    raise UnsupportedExpression(f"binary {op!r}")
