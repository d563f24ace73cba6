"""Snippet corpus loading.

A corpus directory holds one subdirectory per vulnerability type; each
snippet is a ``.sol`` file with a ``<stem>.meta.json`` sidecar carrying
``{id, vuln_type, kind}``. Snippet files may be bare fragments (functions
and state variables at the top level, SolidiFI style) or full contracts
whose members form the fragment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib.resources import files
from pathlib import Path

from .ast_nodes import SourceUnit
from .parser import parse


class VulnType(str, Enum):
    REENTRANCY = "Reentrancy"
    TIMESTAMP_DEPENDENCY = "TimestampDependency"
    OVERFLOW_UNDERFLOW = "OverflowUnderflow"
    TX_ORIGIN = "TxOrigin"
    UNCHECKED_SEND = "UncheckedSend"
    UNHANDLED_EXCEPTION = "UnhandledException"
    TOD = "TOD"


class SnippetKind(str, Enum):
    FUNCTION_LEVEL = "function_level"
    STATEMENT_LEVEL = "statement_level"


_WRAPPER_NAME = "__Snippet__"


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class Snippet:
    id: str
    vuln_type: VulnType
    kind: SnippetKind
    source: str
    unit: SourceUnit  # wrapper contract holding the fragment

    @property
    def members(self) -> tuple:
        return self.unit.contracts[0].members

    @property
    def statements(self) -> tuple:
        if self.kind is not SnippetKind.STATEMENT_LEVEL:
            raise CorpusError(f"snippet {self.id} is not statement-level")
        fns = [m for m in self.members if hasattr(m, "body")]
        if not fns:
            raise CorpusError(f"snippet {self.id} has no function body")
        return fns[0].body.statements


def wrap_fragment(source: str, kind: SnippetKind = SnippetKind.FUNCTION_LEVEL) -> str:
    """Wrap a bare fragment in a contract so it parses as members."""
    body = "\n".join(
        "    " + line if line.strip() else line for line in source.splitlines())
    if kind is SnippetKind.STATEMENT_LEVEL:
        body = "    function __stmts__() public {\n" + "\n".join(
            "    " + line if line.strip() else line for line in body.splitlines()
        ) + "\n    }"
    return f"contract {_WRAPPER_NAME} {{\n{body}\n}}\n"


def parse_snippet_source(source: str, snippet_id: str, vuln_type: VulnType,
                         kind: SnippetKind = SnippetKind.FUNCTION_LEVEL) -> Snippet:
    stripped_first = source.lstrip()
    if stripped_first.startswith("contract ") or "\ncontract " in source:
        unit = parse(source)
        if not unit.contracts:
            raise CorpusError(f"snippet {snippet_id}: no contract found")
    else:
        unit = parse(wrap_fragment(source, kind))
    return Snippet(snippet_id, vuln_type, kind, source, unit)


def load_snippet(sol_path: Path) -> Snippet:
    sol_path = Path(sol_path)
    meta_path = sol_path.with_suffix(".meta.json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
    else:
        meta = {}
    snippet_id = meta.get("id", sol_path.stem)
    vuln_raw = meta.get("vuln_type")
    if vuln_raw is None:
        raise CorpusError(f"{sol_path}: missing vuln_type in sidecar metadata")
    try:
        vuln = VulnType(vuln_raw)
    except ValueError:
        raise CorpusError(f"{sol_path}: unknown vuln_type {vuln_raw!r}") from None
    kind = SnippetKind(meta.get("kind", "function_level"))
    return parse_snippet_source(sol_path.read_text(), snippet_id, vuln, kind)


def load_corpus(corpus_dir: Path) -> list[Snippet]:
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise CorpusError(f"corpus directory not found: {corpus_dir}")
    snippets = []
    for sol in sorted(corpus_dir.rglob("*.sol")):
        snippets.append(load_snippet(sol))
    if not snippets:
        raise CorpusError(f"no snippets under {corpus_dir}")
    snippets.sort(key=lambda s: s.id)
    ids = [s.id for s in snippets]
    if len(set(ids)) != len(ids):
        raise CorpusError(f"duplicate snippet ids in {corpus_dir}")
    return snippets


def bundled_snippets_dir() -> Path:
    return Path(str(files("solmorph").joinpath("data", "snippets")))


def bundled_hosts_dir() -> Path:
    return Path(str(files("solmorph").joinpath("data", "hosts")))
