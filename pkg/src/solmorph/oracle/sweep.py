"""Exhaustive small-domain equivalence sweeps.

The kernel is selected at import: the compiled extension when it was built,
else the pure-Python mirror. Set SOLMORPH_PURE=1 to force the fallback.
Semantics are identical either way; `benchmarks/bench_sweep.py` measures the
difference.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..ast_nodes import (
    Binary,
    Expression,
    Identifier,
    Literal,
    Unary,
)
from ..printer import print_expr
from .interp import UnsupportedExpression, literal_value
from .program import Program, compile_expr, free_identifiers

if os.environ.get("SOLMORPH_PURE"):
    from . import _sweep_py as _impl
    KERNEL = "python"
else:
    try:
        from . import _sweep as _impl  # type: ignore[attr-defined]
        KERNEL = "compiled"
    except ImportError:
        from . import _sweep_py as _impl
        KERNEL = "python"

# Hard cap on the swept domain: n_vars * width bits of assignment space.
MAX_DOMAIN_BITS = 20


class DomainTooLarge(Exception):
    pass


def width_for(n_vars: int, width: int = 8) -> int:
    """Largest width <= `width` that keeps the sweep within the domain cap."""
    if n_vars == 0:
        return width
    return min(width, MAX_DOMAIN_BITS // n_vars)


def sweep_values(program: Program, width: int, checked: bool = False,
                 impl=None) -> np.ndarray:
    impl = impl or _impl
    n_vars = len(program.var_names)
    if n_vars * width > MAX_DOMAIN_BITS:
        raise DomainTooLarge(
            f"{n_vars} variables at {width} bits exceeds the "
            f"{MAX_DOMAIN_BITS}-bit sweep cap")
    return impl.run_sweep(program.kinds, program.args, program.lefts,
                          program.rights, program.root, n_vars, width, checked)


@dataclass(frozen=True)
class EquivalenceResult:
    equal: bool
    var_names: tuple[str, ...]
    width: int
    diverging: np.ndarray  # packed assignment indices where results differ
    total: int

    @property
    def divergence_count(self) -> int:
        return int(self.diverging.size)

    def _decode(self, packed: int) -> dict[str, int]:
        mask = (1 << self.width) - 1
        out = {}
        for i, name in enumerate(self.var_names):
            out[name] = (packed >> (i * self.width)) & mask
        return out

    def witnesses(self, limit: int | None = None) -> list[dict[str, int]]:
        idx = self.diverging if limit is None else self.diverging[:limit]
        return [self._decode(int(p)) for p in idx]

    def is_witness(self, assignment: dict[str, int]) -> bool:
        packed = 0
        for i, name in enumerate(self.var_names):
            packed |= (assignment[name] & ((1 << self.width) - 1)) << (i * self.width)
        pos = int(np.searchsorted(self.diverging, packed))
        return pos < self.diverging.size and int(self.diverging[pos]) == packed


def equivalent_exprs(e1: Expression, e2: Expression, width: int = 8,
                     semantics: str = "wrap", impl=None) -> EquivalenceResult:
    """Exhaustively compare two expressions over the width-bit domain.

    Both expressions must bind the same free identifiers. Signals (division
    by zero, overflow in checked mode) are compared as values, so the result
    is Equal only when the two sides also fail identically.
    """
    names1 = free_identifiers(e1)
    names2 = free_identifiers(e2)
    if names1 != names2:
        raise ValueError(
            f"free identifier sets differ: {sorted(names1)} vs {sorted(names2)}")
    var_names = tuple(sorted(names1))
    checked = semantics == "checked"
    p1 = compile_expr(e1, var_names, width)
    p2 = compile_expr(e2, var_names, width)
    r1 = sweep_values(p1, width, checked, impl)
    r2 = sweep_values(p2, width, checked, impl)
    diverging = np.nonzero(r1 != r2)[0].astype(np.int64)
    return EquivalenceResult(diverging.size == 0, var_names, width,
                             diverging, int(r1.size))


def _is_supported_literal(expr: Literal) -> bool:
    try:
        literal_value(expr.text)
        return True
    except UnsupportedExpression:
        return False


def abstract_pair(e1: Expression, e2: Expression):
    """Replace opaque subexpressions with shared placeholder variables.

    Subexpressions the interpreter cannot evaluate (member accesses, calls,
    indexing, raw text, non-integer literals) become fresh identifiers;
    printed-equal subtrees map to the same placeholder on both sides, so
    rewrites that only reorder them can still be swept. This treats opaque
    operands as pure values; operand evaluation order is outside the
    oracle's scope.
    """
    table: dict[str, str] = {}

    def ab(e: Expression) -> Expression:
        if isinstance(e, Binary):
            return Binary(e.op, ab(e.lhs), ab(e.rhs))
        if isinstance(e, Unary):
            return Unary(e.op, ab(e.operand))
        if isinstance(e, Identifier):
            return Identifier(e.name)
        if isinstance(e, Literal) and _is_supported_literal(e):
            return Literal(e.text)
        key = print_expr(e)
        if key not in table:
            table[key] = f"x_{len(table)}"
        return Identifier(table[key])

    return ab(e1), ab(e2), dict(table)


def check_rewrite_pair(old: Expression, new: Expression, width: int = 8,
                       semantics: str = "wrap", impl=None) -> EquivalenceResult:
    """Sweep a (pre-rewrite, post-rewrite) pair after operand abstraction."""
    a, b, _ = abstract_pair(old, new)
    n_vars = len(free_identifiers(a) | free_identifiers(b))
    return equivalent_exprs(a, b, width=width_for(n_vars, width),
                            semantics=semantics, impl=impl)
