"""Vulnerability injection into benign host contracts.

Function-level injection splices a variant's members at a member boundary
of a host contract; statement-level injection (off by default) splices
statements at a boundary inside a function body. The host is never
rewritten: name collisions are resolved by renaming the variant only, and
outside the spliced lines the generated file is byte-identical to the
printed host. Every injection is recorded with its exact line span in the
generated file, forming the ground-truth manifest detectors are scored
against.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .ast_nodes import Block, ContractDef, FunctionDef, SourceUnit, StateVarDecl
from .corpus import Snippet, SnippetKind
from .idents import NameAllocator, words_in
from .parser import parse
from .printer import contract_block, member_block, print_stmt, print_unit
from .transform import (
    NotApplicable,
    Variant,
    _rename_identifiers,
    applicable,
    apply_chain,
    chain_label,
    declared_function_names,
    occupied_names,
)
from . import validate as validation


class InjectError(Exception):
    pass


class KindMismatch(InjectError):
    pass


@dataclass(frozen=True)
class InjectionLocation:
    host_file: str
    contract: str
    member_index: int
    function_index: Optional[int] = None  # statement-level only

    def to_json(self) -> dict:
        out = {
            "host_file": self.host_file,
            "contract": self.contract,
            "member_index": self.member_index,
        }
        if self.function_index is not None:
            out["function_index"] = self.function_index
        return out


@dataclass(frozen=True)
class InjectionRecord:
    generated_file: str
    snippet_id: str
    chain: tuple[str, ...]
    vuln_type: str
    start_line: int
    end_line: int
    location: InjectionLocation
    valid: Optional[bool] = None

    def to_json(self) -> dict:
        return {
            "generated_file": self.generated_file,
            "snippet_id": self.snippet_id,
            "chain": list(self.chain),
            "vuln_type": self.vuln_type,
            "start_line": self.start_line,
            "end_line": self.end_line,
            "location": self.location.to_json(),
            "valid": self.valid,
        }

    @classmethod
    def from_json(cls, data: dict) -> "InjectionRecord":
        loc = data["location"]
        return cls(
            generated_file=data["generated_file"],
            snippet_id=data["snippet_id"],
            chain=tuple(data["chain"]),
            vuln_type=data["vuln_type"],
            start_line=data["start_line"],
            end_line=data["end_line"],
            location=InjectionLocation(
                loc["host_file"], loc["contract"], loc["member_index"],
                loc.get("function_index")),
            valid=data["valid"],
        )


def enumerate_locations(host: SourceUnit, host_file: str,
                        kind: SnippetKind = SnippetKind.FUNCTION_LEVEL,
                        ) -> list[InjectionLocation]:
    """All injection points, in document order.

    Function level: every member boundary of every contract (a contract
    with m members yields m+1 points). Statement level: every statement
    boundary of every structured function body.
    """
    out = []
    for contract in host.contracts:
        if kind is SnippetKind.FUNCTION_LEVEL:
            for k in range(len(contract.members) + 1):
                out.append(InjectionLocation(host_file, contract.name, k))
        else:
            for fi, member in enumerate(contract.members):
                if isinstance(member, FunctionDef):
                    n = len(member.body.statements)
                    for k in range(n + 1):
                        out.append(InjectionLocation(host_file, contract.name, k, fi))
    return out


def host_names(host: SourceUnit) -> set[str]:
    """Every identifier-shaped word in the printed host (conservative)."""
    return words_in(print_unit(host))


def resolve_collisions(members: tuple, taken: set[str], seed: int = 0):
    """Rename variant-declared globals that collide with host names.

    Only the variant is touched; function names and state variable names
    are the global declarations that can clash inside one contract.
    """
    declared = declared_function_names(members)
    declared |= {m.name for m in members if isinstance(m, StateVarDecl)}
    colliding = sorted(declared & taken)
    if not colliding:
        return members, {}
    allocator = NameAllocator(taken | occupied_names(members), seed)
    mapping = {name: allocator.fresh("r") for name in colliding}
    return _rename_identifiers(members, mapping, rename_calls=True), mapping


def _block_lines(text: str) -> int:
    return text.count("\n") + 1


def inject(host: SourceUnit, variant: Variant, location: InjectionLocation,
           seed: int = 0, generated_file: str = "",
           kind: SnippetKind = SnippetKind.FUNCTION_LEVEL):
    """Splice a variant at one location; returns (unit, record, spliced_text)."""
    contract_idx = None
    for ci, c in enumerate(host.contracts):
        if c.name == location.contract:
            contract_idx = ci
            break
    if contract_idx is None:
        raise InjectError(f"host has no contract {location.contract!r}")
    contract = host.contracts[contract_idx]

    if kind is SnippetKind.FUNCTION_LEVEL:
        if location.function_index is not None:
            raise KindMismatch("function-level variant at a statement location")
        new_contract, offset, spliced = _splice_members(
            host, contract, variant, location, seed)
    else:
        if location.function_index is None:
            raise KindMismatch("statement-level variant at a member location")
        new_contract, offset, spliced = _splice_statements(
            contract, variant, location)

    contracts = (host.contracts[:contract_idx] + (new_contract,)
                 + host.contracts[contract_idx + 1:])
    new_unit = dataclasses.replace(host, contracts=contracts)

    before = 0
    for piece in new_unit.items():
        if piece is new_contract:
            break
        before += _block_lines(
            contract_block(piece) if isinstance(piece, ContractDef) else piece.text)
    start_line = before + offset
    end_line = start_line + _block_lines(spliced) - 1
    record = InjectionRecord(
        generated_file=generated_file,
        snippet_id=variant.snippet_id,
        chain=variant.chain,
        vuln_type=variant.vuln_type,
        start_line=start_line,
        end_line=end_line,
        location=location,
    )
    return new_unit, record, spliced


def _splice_members(host, contract, variant, location, seed):
    k = location.member_index
    if not 0 <= k <= len(contract.members):
        raise InjectError(f"member index {k} out of bounds")
    resolved, _ = resolve_collisions(variant.members, host_names(host), seed)
    new_members = contract.members[:k] + resolved + contract.members[k:]
    new_contract = dataclasses.replace(contract, members=new_members)
    offset = _block_lines(contract.header)
    for m in contract.members[:k]:
        offset += _block_lines(member_block(m))
    spliced = "\n".join(member_block(m) for m in resolved)
    return new_contract, offset + 1, spliced


def _splice_statements(contract, variant, location):
    fi = location.function_index
    if not 0 <= fi < len(contract.members):
        raise InjectError(f"function index {fi} out of bounds")
    fn = contract.members[fi]
    if not isinstance(fn, FunctionDef):
        raise KindMismatch(f"member {fi} is not a structured function")
    stmts = fn.body.statements
    k = location.member_index
    if not 0 <= k <= len(stmts):
        raise InjectError(f"statement index {k} out of bounds")
    new_stmts = _variant_statements(variant)
    body = Block(stmts[:k] + new_stmts + stmts[k:])
    new_fn = dataclasses.replace(fn, body=body, src=None, span=None)
    members = contract.members[:fi] + (new_fn,) + contract.members[fi + 1:]
    new_contract = dataclasses.replace(contract, members=members)

    offset = _block_lines(contract.header)
    for m in contract.members[:fi]:
        offset += _block_lines(member_block(m))
    offset += 1  # the rebuilt function's "function ... () ... {" line
    for s in stmts[:k]:
        offset += _block_lines(print_stmt(s, 2))
    spliced = "\n".join(print_stmt(s, 2) for s in new_stmts)
    return new_contract, offset + 1, spliced


def _variant_statements(variant: Variant) -> tuple:
    fns = [m for m in variant.members if isinstance(m, FunctionDef)]
    if not fns:
        raise KindMismatch(f"variant {variant.snippet_id} carries no statements")
    return fns[0].body.statements


# --------------------------------------------------------------------------
# dataset generation


@dataclass(frozen=True)
class DatasetResult:
    out_dir: Path
    records: tuple[InjectionRecord, ...]
    manifest_path: Path
    csv_path: Path

    @property
    def valid_records(self) -> tuple[InjectionRecord, ...]:
        return tuple(r for r in self.records if r.valid)


def generated_name(host_stem: str, snippet_id: str, chain: tuple[str, ...],
                   loc_ordinal: int) -> str:
    return f"{host_stem}__{snippet_id}__{chain_label(chain)}__loc{loc_ordinal}.sol"


def build_variants(snippets: Iterable[Snippet], chains: Iterable[tuple[str, ...]],
                   seed: int = 0, include_default: bool = False,
                   on_error=None) -> list[tuple[SnippetKind, Variant]]:
    """Apply every applicable chain to every snippet, deterministically."""
    out = []
    chains = list(chains)
    for snippet in snippets:
        if include_default:
            out.append((snippet.kind, apply_chain(snippet, (), seed)))
        for chain in chains:
            if not all(applicable(t, snippet.members) for t in chain):
                continue
            try:
                out.append((snippet.kind, apply_chain(snippet, chain, seed)))
            except NotApplicable as exc:
                if on_error is not None:
                    on_error(snippet.id, chain, exc)
    return out


def generate_dataset(hosts: Iterable[Path], snippets: Iterable[Snippet] = (),
                     chains: Iterable[tuple[str, ...]] = (), mode: str = "all_locations",
                     seed: int = 0, out_dir: Path = Path("."),
                     compiler: Optional[validation.CompilerConfig] = None,
                     include_default: bool = False,
                     kind: SnippetKind = SnippetKind.FUNCTION_LEVEL,
                     dataset_id: str = "",
                     variants: Optional[list[tuple[SnippetKind, Variant]]] = None,
                     ) -> DatasetResult:
    """Write generated files, a JSONL manifest and a CSV export.

    mode: "all_locations" writes one file per (host, variant, location);
    "single_location" keeps the first valid location per (host, variant).
    Variants are built from (snippets, chains) unless pre-built ones are
    supplied. Deterministic for a fixed (inputs, seed): iteration follows
    sorted host names, snippet ids, the given chain order and document
    location order.
    """
    if mode not in ("all_locations", "single_location"):
        raise InjectError(f"unknown mode {mode!r}")
    out_dir = Path(out_dir)
    files_dir = out_dir / "contracts"
    files_dir.mkdir(parents=True, exist_ok=True)

    host_units = []
    for path in sorted(Path(p) for p in hosts):
        host_units.append((path.name, path.stem, parse(path.read_text())))

    if variants is None:
        pairs = build_variants(sorted(snippets, key=lambda s: s.id), chains,
                               seed=seed, include_default=include_default)
    else:
        pairs = list(variants)

    records: list[InjectionRecord] = []
    for host_name, host_stem, host_unit in host_units:
        locations = enumerate_locations(host_unit, host_name, kind)
        for variant_kind, variant in pairs:
            if variant_kind is not kind:
                continue
            chosen = False
            for ordinal, location in enumerate(locations):
                if mode == "single_location" and chosen:
                    break
                name = generated_name(host_stem, variant.snippet_id, variant.chain, ordinal)
                rel = f"contracts/{name}"
                unit, record, _spliced = inject(
                    host_unit, variant, location, seed, rel, kind)
                text = print_unit(unit)
                target = files_dir / name
                target.write_text(text)
                outcome = validation.validate_file(
                    target, compiler, splice_span=(record.start_line, record.end_line))
                ok = outcome.syntax_ok and outcome.compile_ok is not False
                record = dataclasses.replace(record, valid=ok)
                if mode == "single_location":
                    if ok:
                        records.append(record)
                        chosen = True
                    else:
                        target.unlink()
                else:
                    records.append(record)

    header = {
        "dataset_id": dataset_id or out_dir.name,
        "mode": mode,
        "seed": seed,
        "validation": "syntax+compile" if compiler else "syntax-only",
        "compiler_version": validation.compiler_version(compiler) if compiler else None,
    }
    manifest_path = out_dir / "manifest.jsonl"
    with manifest_path.open("w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")

    csv_path = out_dir / "manifest.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file", "start_line", "end_line", "vuln_type", "chain"])
        for record in records:
            writer.writerow([
                record.generated_file, record.start_line, record.end_line,
                record.vuln_type, chain_label(record.chain),
            ])
    return DatasetResult(out_dir, tuple(records), manifest_path, csv_path)


def load_manifest(path: Path) -> tuple[dict, list[InjectionRecord]]:
    header: dict = {}
    records: list[InjectionRecord] = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            if "generated_file" in data:
                records.append(InjectionRecord.from_json(data))
            else:
                header = data
    return header, records
