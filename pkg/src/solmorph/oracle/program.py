"""Flattened expression programs consumed by the sweep kernels.

The tree is laid out as parallel arrays indexed by node id (children before
parents), so the compiled kernel and the pure-Python fallback execute the
same structure. Results are encoded as ``tag << 32 | value`` with tag 0 for
integers, 1 for booleans and >= 2 for signals; comparing encoded results
compares values and error behavior at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ast_nodes import Binary, Expression, Identifier, Literal, Unary
from .interp import UnsupportedExpression, literal_value

# node kinds
K_CONST_INT = 0
K_CONST_BOOL = 1
K_VAR = 2
K_ADD = 3
K_SUB = 4
K_MUL = 5
K_DIV = 6
K_EQ = 7
K_NE = 8
K_LT = 9
K_GT = 10
K_LE = 11
K_GE = 12
K_AND = 13
K_OR = 14
K_NOT = 15
K_NEG = 16

_BINARY_KINDS = {
    "+": K_ADD, "-": K_SUB, "*": K_MUL, "/": K_DIV,
    "==": K_EQ, "!=": K_NE, "<": K_LT, ">": K_GT, "<=": K_LE, ">=": K_GE,
    "&&": K_AND, "||": K_OR,
}

# result tags
TAG_INT = 0
TAG_BOOL = 1
TAG_DIV_BY_ZERO = 2
TAG_OVERFLOW = 3
TAG_TYPE_ERROR = 4

TAG_NAMES = {
    TAG_INT: "int",
    TAG_BOOL: "bool",
    TAG_DIV_BY_ZERO: "DivByZero",
    TAG_OVERFLOW: "Overflow",
    TAG_TYPE_ERROR: "TypeError",
}


def encode(tag: int, value: int = 0) -> int:
    return (tag << 32) | value


@dataclass(frozen=True)
class Program:
    kinds: np.ndarray  # int32
    args: np.ndarray  # int64: constant value or variable index
    lefts: np.ndarray  # int32 child ids, -1 when absent
    rights: np.ndarray
    root: int
    var_names: tuple[str, ...]


def free_identifiers(expr: Expression) -> set[str]:
    if isinstance(expr, Identifier):
        return {expr.name}
    if isinstance(expr, Binary):
        return free_identifiers(expr.lhs) | free_identifiers(expr.rhs)
    if isinstance(expr, Unary):
        return free_identifiers(expr.operand)
    if isinstance(expr, Literal):
        return set()
    raise UnsupportedExpression(type(expr).__name__)


def compile_expr(expr: Expression, var_names: tuple[str, ...], width: int) -> Program:
    kinds: list[int] = []
    args: list[int] = []
    lefts: list[int] = []
    rights: list[int] = []
    var_index = {name: i for i, name in enumerate(var_names)}
    modulus = 1 << width

    def emit(kind: int, arg: int = 0, left: int = -1, right: int = -1) -> int:
        kinds.append(kind)
        args.append(arg)
        lefts.append(left)
        rights.append(right)
        return len(kinds) - 1

    def build(e: Expression) -> int:
        if isinstance(e, Literal):
            v = literal_value(e.text)
            if isinstance(v, bool):
                return emit(K_CONST_BOOL, int(v))
            return emit(K_CONST_INT, v % modulus)
        if isinstance(e, Identifier):
            if e.name not in var_index:
                raise UnsupportedExpression(f"unbound identifier {e.name!r}")
            return emit(K_VAR, var_index[e.name])
        if isinstance(e, Unary):
            operand = build(e.operand)
            if e.op == "!":
                return emit(K_NOT, left=operand)
            if e.op == "-":
                return emit(K_NEG, left=operand)
            raise UnsupportedExpression(f"unary {e.op!r}")
        if isinstance(e, Binary):
            if e.op not in _BINARY_KINDS:
                raise UnsupportedExpression(f"binary {e.op!r}")
            left = build(e.lhs)
            right = build(e.rhs)
            return emit(_BINARY_KINDS[e.op], left=left, right=right)
        raise UnsupportedExpression(type(e).__name__)

    root = build(expr)
    return Program(
        np.asarray(kinds, dtype=np.int32),
        np.asarray(args, dtype=np.int64),
        np.asarray(lefts, dtype=np.int32),
        np.asarray(rights, dtype=np.int32),
        root,
        var_names,
    )
