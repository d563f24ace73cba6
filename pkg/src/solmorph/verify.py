"""Runs the equivalence oracle over transformed variants.

Expression rewrites are swept exhaustively (pairs recorded by the transform
engine, operands abstracted to free variables). Statement rewrites are
checked by normalized-CFG isomorphism, function by function; chains that
include the permutation family skip the CFG check since arithmetic
rewriting changes statement summaries by design. A variant passes when
every check holds, except that division rewrites are allowed (and expected)
to diverge: they carry IntegerDivisionRisk and their witnesses are
reported, not failed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast_nodes import Binary, FunctionDef
from .corpus import Snippet
from .oracle import RawEncountered, build_cfg, cfg_equal, normalize_cfg
from .oracle.sweep import check_rewrite_pair
from .printer import print_expr
from .transform import INTEGER_DIVISION_RISK, Variant

WITNESS_SAMPLE = 8


def _contains_division(expr) -> bool:
    if isinstance(expr, Binary) and expr.op == "/":
        return True
    for name in ("lhs", "rhs", "operand", "base", "index", "target", "value", "callee"):
        child = getattr(expr, name, None)
        if child is not None and _contains_division(child):
            return True
    return any(_contains_division(a) for a in getattr(expr, "args", ()))


@dataclass(frozen=True)
class ExprCheck:
    old: str
    new: str
    equal: bool
    allowed_divergence: bool
    divergence_count: int
    witnesses: tuple = ()

    @property
    def ok(self) -> bool:
        return self.equal or self.allowed_divergence

    def to_json(self) -> dict:
        return {
            "old": self.old,
            "new": self.new,
            "equal": self.equal,
            "allowed_divergence": self.allowed_divergence,
            "divergence_count": self.divergence_count,
            "witnesses_sample": [dict(w) for w in self.witnesses],
        }


@dataclass(frozen=True)
class CfgCheck:
    function: str
    equal: bool
    skipped: str = ""

    @property
    def ok(self) -> bool:
        return self.equal or bool(self.skipped)

    def to_json(self) -> dict:
        out = {"function": self.function, "equal": self.equal}
        if self.skipped:
            out["skipped"] = self.skipped
        return out


@dataclass(frozen=True)
class VariantReport:
    snippet_id: str
    chain: tuple[str, ...]
    soundness_flags: tuple[str, ...]
    expr_checks: tuple[ExprCheck, ...] = ()
    cfg_checks: tuple[CfgCheck, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.expr_checks) and all(c.ok for c in self.cfg_checks)

    @property
    def has_divergence(self) -> bool:
        return any(not c.equal for c in self.expr_checks)

    def to_json(self) -> dict:
        return {
            "snippet_id": self.snippet_id,
            "chain": list(self.chain),
            "soundness_flags": list(self.soundness_flags),
            "passed": self.passed,
            "expr_checks": [c.to_json() for c in self.expr_checks],
            "cfg_checks": [c.to_json() for c in self.cfg_checks],
        }


def verify_variant(snippet: Snippet, variant: Variant, width: int = 8) -> VariantReport:
    expr_checks = []
    for old, new in variant.expr_rewrites:
        result = check_rewrite_pair(old, new, width=width)
        allowed = (not result.equal
                   and INTEGER_DIVISION_RISK in variant.soundness_flags
                   and _contains_division(old))
        expr_checks.append(ExprCheck(
            print_expr(old), print_expr(new), result.equal, allowed,
            result.divergence_count,
            tuple(tuple(sorted(w.items())) for w in result.witnesses(WITNESS_SAMPLE)),
        ))

    cfg_checks = []
    if "permutation" in variant.chain:
        cfg_checks.append(CfgCheck(
            "*", True, skipped="arithmetic permutation changes statement summaries"))
    else:
        originals = [m for m in snippet.members if isinstance(m, FunctionDef)]
        transformed = [m for m in variant.members if isinstance(m, FunctionDef)]
        for before, after in zip(originals, transformed):
            try:
                a = normalize_cfg(build_cfg(before.body))
                b = normalize_cfg(build_cfg(after.body))
            except RawEncountered as exc:
                cfg_checks.append(CfgCheck(
                    before.name, True, skipped=f"opaque statement: {exc}"))
                continue
            cfg_checks.append(CfgCheck(before.name, cfg_equal(a, b)))

    return VariantReport(
        variant.snippet_id, variant.chain, tuple(sorted(variant.soundness_flags)),
        tuple(expr_checks), tuple(cfg_checks))


def verify_all(pairs: list[tuple[Snippet, Variant]], width: int = 8,
               ) -> tuple[list[VariantReport], bool]:
    reports = [verify_variant(s, v, width) for s, v in pairs]
    return reports, all(r.passed for r in reports)
