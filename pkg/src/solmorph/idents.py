"""Identifier generation and collection helpers."""

from __future__ import annotations

import re
from typing import Iterable, Set

# Keywords plus globals whose meaning must never be captured by a rename.
RESERVED_WORDS = frozenset({
    "abstract", "address", "after", "alias", "anonymous", "apply", "assembly",
    "auto", "bool", "break", "byte", "bytes", "calldata", "case", "catch",
    "constant", "constructor", "continue", "contract", "copyof", "days",
    "default", "define", "delete", "do", "else", "emit", "enum", "ether",
    "event", "external", "fallback", "false", "final", "finney", "for",
    "function", "gwei", "hex", "hours", "if", "immutable", "implements",
    "import", "in", "indexed", "inline", "int", "interface", "internal",
    "is", "let", "library", "macro", "mapping", "match", "memory", "minutes",
    "modifier", "mutable", "new", "now", "null", "of", "override", "payable",
    "pragma", "private", "public", "pure", "receive", "reference",
    "relocatable", "return", "returns", "seconds", "sealed", "sizeof",
    "static", "storage", "string", "struct", "supports", "switch", "szabo",
    "this", "throw", "true", "try", "type", "typedef", "typeof", "uint",
    "unchecked", "using", "var", "view", "virtual", "weeks", "wei", "while",
    # builtin globals
    "msg", "tx", "block", "abi", "require", "assert", "revert", "keccak256",
    "sha256", "ripemd160", "ecrecover", "addmod", "mulmod", "selfdestruct",
    "suicide", "gasleft", "blockhash",
})

# uint8..uint256 / int8..int256 / bytes1..bytes32 are reserved as well.
_SIZED_TYPE_RE = re.compile(r"^(u?int|bytes)\d+$")

_IDENT_RE = re.compile(r"^[A-Za-z_$][A-Za-z0-9_$]*$")

_WORD_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")


def is_reserved(name: str) -> bool:
    return name in RESERVED_WORDS or bool(_SIZED_TYPE_RE.match(name))


def is_valid_identifier(name: str) -> bool:
    return bool(_IDENT_RE.match(name)) and not is_reserved(name)


def fresh_identifier(forbidden: Set[str], prefix: str = "v", seed: int = 0) -> str:
    """First identifier of the deterministic scheme not in ``forbidden``.

    Candidates are ``{prefix}_{k}`` for k = seed, seed+1, ...; reserved words
    are skipped, so the result is always a valid Solidity identifier. The
    same (forbidden, prefix, seed) always yields the same name.
    """
    k = seed
    while True:
        candidate = f"{prefix}_{k}"
        if candidate not in forbidden and not is_reserved(candidate):
            return candidate
        k += 1


class NameAllocator:
    """Hands out a deterministic stream of fresh names.

    Every allocated name is added to the forbidden set, so repeated calls
    never collide with each other or with the initial set.
    """

    def __init__(self, forbidden: Iterable[str], seed: int = 0):
        self._forbidden = set(forbidden)
        self._seed = seed
        self._next = {}  # prefix -> next counter to try

    def fresh(self, prefix: str = "v") -> str:
        k = self._next.get(prefix, self._seed)
        while True:
            candidate = f"{prefix}_{k}"
            k += 1
            if candidate not in self._forbidden and not is_reserved(candidate):
                self._next[prefix] = k
                self._forbidden.add(candidate)
                return candidate

    def forbid(self, names: Iterable[str]) -> None:
        self._forbidden.update(names)


def words_in(text: str) -> Set[str]:
    """All identifier-shaped words in a raw text blob."""
    return set(_WORD_RE.findall(text))
