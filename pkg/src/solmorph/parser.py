"""Parser for the Solidity subset the rewrite engine needs.

Full Solidity is deliberately not parsed. Contracts, functions, state
variables, the statement forms the operators rewrite, and a conventional
expression grammar are turned into structured nodes; every other construct
(interfaces, libraries, modifiers, assembly, exotic statements, unsupported
operators) degrades to a verbatim raw region. Parsing therefore never fails
on unknown syntax; ``ParseError`` is raised only when the bracket structure
of the file is unbalanced.

Top-level items and contract members are line-aligned: each owns whole
source lines, constructs sharing a line are merged into one raw region, and
gap lines (comments, blanks) become raw regions of their own, so the items
of a parse partition the input lines exactly.
"""

from __future__ import annotations

import bisect
import dataclasses
import re
from dataclasses import dataclass

from .ast_nodes import (
    Assign,
    Binary,
    Block,
    Break,
    Call,
    ContractDef,
    Expression,
    ExprStmt,
    FunctionDef,
    Identifier,
    If,
    Index,
    Literal,
    MemberAccess,
    Param,
    RawExpr,
    RawRegion,
    RawStmt,
    Return,
    SourceUnit,
    Span,
    StateVarDecl,
    Statement,
    Unary,
    VarDecl,
    While,
    For,
)
from .idents import is_reserved


class ParseError(Exception):
    """Unbalanced top-level bracket structure."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class _Unsupported(Exception):
    """Internal: construct outside the subset; caller degrades to raw."""


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "number" | "string" | "punct"
    text: str
    pos: int  # byte offset into the source
    line: int  # 1-based

    @property
    def end(self) -> int:
        return self.pos + len(self.text)


_TOKEN_RE = re.compile(
    r"""
      (?P<comment>//[^\n]*|/\*.*?\*/)
    | (?P<string>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
    | (?P<number>0[xX][0-9a-fA-F]+|\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
    | (?P<punct>=>|\*\*|\+\+|--|\+=|-=|\*=|/=|%=|!=|==|<=|>=|&&|\|\||->|<<|>>|
        [-+*/%!<>=(){}\[\];,.:?&|^~])
    | (?P<ws>\s+)
    """,
    re.VERBOSE | re.DOTALL,
)

_OPEN = {"(": ")", "{": "}", "[": "]"}
_CLOSE = {")": "(", "}": "{", "]": "["}

_STMT_KEYWORDS = frozenset({
    "if", "else", "while", "for", "return", "break", "continue", "do",
    "assembly", "emit", "unchecked", "try", "catch", "throw", "delete",
    "new", "function", "contract", "struct", "enum", "event", "modifier",
    "using", "constructor", "receive", "fallback", "import", "pragma",
})

_DECL_MODIFIERS = frozenset({
    "public", "private", "internal", "external", "constant", "immutable",
    "payable", "memory", "storage", "calldata", "override", "virtual",
    "indexed",
})

_UNIT_SUFFIXES = frozenset({
    "wei", "gwei", "szabo", "finney", "ether",
    "seconds", "minutes", "hours", "days", "weeks",
})


def _line_starts(source: str) -> list[int]:
    starts = [0]
    for i, ch in enumerate(source):
        if ch == "\n":
            starts.append(i + 1)
    return starts


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    starts = _line_starts(source)
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            if source.startswith("/*", pos):
                break  # unterminated block comment swallows the rest
            # byte outside the grammar (stray unicode etc.): opaque punct
            line = bisect.bisect_right(starts, pos)
            tokens.append(Token("punct", source[pos], pos, line))
            pos += 1
            continue
        kind = m.lastgroup
        if kind not in ("comment", "ws"):
            line = bisect.bisect_right(starts, m.start())
            tokens.append(Token(kind, m.group(), m.start(), line))
        pos = m.end()
    return tokens


def _check_balance(tokens: list[Token]) -> None:
    stack: list[Token] = []
    for tok in tokens:
        if tok.kind != "punct":
            continue
        if tok.text in _OPEN:
            stack.append(tok)
        elif tok.text in _CLOSE:
            if not stack or stack[-1].text != _CLOSE[tok.text]:
                raise ParseError(f"unbalanced '{tok.text}'", tok.line)
            stack.pop()
    if stack:
        raise ParseError(f"unclosed '{stack[-1].text}'", stack[-1].line)


def _match_group(tokens: list[Token], open_idx: int) -> int:
    """Index of the token closing the group opened at ``open_idx``."""
    want = _OPEN[tokens[open_idx].text]
    depth = 0
    for j in range(open_idx, len(tokens)):
        t = tokens[j]
        if t.kind != "punct":
            continue
        if t.text in _OPEN:
            depth += 1
        elif t.text in _CLOSE:
            depth -= 1
            if depth == 0:
                if t.text != want:
                    raise ParseError(f"mismatched '{t.text}'", t.line)
                return j
    raise ParseError("unclosed group", tokens[open_idx].line)


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.starts = _line_starts(source)
        # line i (1-based) is source[starts[i-1] : line_end(i)] without '\n'
        self.total_lines = len(source.splitlines())

    # -- slicing helpers ----------------------------------------------------

    def _line_end(self, line: int) -> int:
        if line < len(self.starts):
            return self.starts[line] - 1  # before the '\n'
        return len(self.source)

    def _line_slice(self, first: int, last: int) -> str:
        return self.source[self.starts[first - 1]:self._line_end(last)]

    def _slice(self, lo_tok: Token, hi_tok: Token) -> str:
        return self.source[lo_tok.pos:hi_tok.end]

    def _starts_line(self, tok: Token) -> bool:
        prefix = self.source[self.starts[tok.line - 1]:tok.pos]
        return prefix.strip() == ""

    # -- top level ------------------------------------------------------------

    def parse_unit(self) -> SourceUnit:
        _check_balance(self.tokens)
        pragmas: list[RawRegion] = []
        contracts: list[ContractDef] = []
        raws: list[RawRegion] = []
        covered: list[Span] = []

        toks = self.tokens
        n = len(toks)
        i = 0
        while i < n:
            tok = toks[i]
            item_done = False
            if tok.kind == "ident" and self._starts_line(tok):
                if tok.text in ("pragma", "import"):
                    res = self._try_directive(i)
                    if res is not None:
                        region, i = res
                        pragmas.append(region)
                        covered.append(region.span)
                        item_done = True
                elif tok.text == "contract":
                    res = self._try_contract(i)
                    if res is not None:
                        contract, i = res
                        contracts.append(contract)
                        covered.append(contract.span)
                        item_done = True
            if not item_done:
                region, i = self._raw_run(i)
                raws.append(region)
                covered.append(region.span)

        # gap lines (comments, blanks) between token-bearing items
        for span in self._gaps(covered):
            raws.append(RawRegion(self._line_slice(span.start, span.end), span))
        return SourceUnit(tuple(pragmas), tuple(contracts), tuple(raws))

    def _gaps(self, covered: list[Span]) -> list[Span]:
        out = []
        line = 1
        for span in sorted(covered, key=lambda s: s.start):
            if span.start > line:
                out.append(Span(line, span.start - 1))
            line = max(line, span.end + 1)
        if line <= self.total_lines:
            out.append(Span(line, self.total_lines))
        return out

    def _try_directive(self, i: int):
        toks = self.tokens
        j = i
        while j < len(toks) and not (toks[j].kind == "punct" and toks[j].text == ";"):
            if toks[j].kind == "punct" and toks[j].text in _OPEN and toks[j].text != "(":
                return None
            j += 1
        if j >= len(toks):
            return None
        end_line = toks[j].line
        if j + 1 < len(toks) and toks[j + 1].line == end_line:
            return None  # something follows on the directive's line
        span = Span(toks[i].line, end_line)
        return RawRegion(self._line_slice(span.start, span.end), span), j + 1

    def _raw_run(self, i: int):
        """Consume an opaque top-level run, whole construct groups included."""
        toks = self.tokens
        n = len(toks)
        depth = 0
        j = i
        last = i
        while j < n:
            t = toks[j]
            if depth == 0 and j > i and t.kind == "ident" and self._starts_line(t) \
                    and t.text in ("pragma", "import", "contract") \
                    and t.line > toks[last].line:
                break
            if t.kind == "punct":
                if t.text in _OPEN:
                    depth += 1
                elif t.text in _CLOSE:
                    depth -= 1
            last = j
            j += 1
        span = Span(toks[i].line, toks[last].line)
        return RawRegion(self._line_slice(span.start, span.end), span), j

    def _try_contract(self, i: int):
        toks = self.tokens
        n = len(toks)
        if i + 2 >= n:
            return None
        name_tok = toks[i + 1]
        if name_tok.kind != "ident" or is_reserved(name_tok.text):
            return None
        # scan for the opening brace; inheritance lists may hold paren groups
        j = i + 2
        open_idx = None
        while j < n:
            t = toks[j]
            if t.kind == "punct":
                if t.text == "(":
                    j = _match_group(toks, j) + 1
                    continue
                if t.text == "{":
                    open_idx = j
                    break
                if t.text in (";", "}"):
                    return None
            j += 1
        if open_idx is None:
            return None
        close_idx = _match_group(toks, open_idx)
        next_i = close_idx + 1
        footer_end = self._line_end(toks[close_idx].line)
        # allow a trailing ';' after '}', nothing else on that line
        if next_i < n and toks[next_i].line == toks[close_idx].line:
            if toks[next_i].kind == "punct" and toks[next_i].text == ";" and (
                    next_i + 1 >= n or toks[next_i + 1].line > toks[close_idx].line):
                next_i += 1
            else:
                return None
        header = self.source[self.starts[toks[i].line - 1]:toks[open_idx].end]
        footer = self.source[toks[close_idx].pos:footer_end]

        interior = (open_idx + 1, close_idx)
        if interior[0] >= interior[1]:
            members: tuple = ()
        elif (toks[interior[0]].line == toks[open_idx].line
              or toks[interior[1] - 1].line == toks[close_idx].line):
            # body shares a line with a brace: opaque single member
            first, last = toks[interior[0]], toks[interior[1] - 1]
            members = (RawRegion(self._slice(first, last), Span(first.line, last.line)),)
        else:
            members = self._parse_members(*interior)
        span = Span(toks[i].line, toks[close_idx].line)
        return ContractDef(name_tok.text, header, members, footer, span), next_i

    # -- members ----------------------------------------------------------

    def _parse_members(self, lo: int, hi: int) -> tuple:
        toks = self.tokens
        entries = []  # (start_idx, end_idx_exclusive, node | None)
        i = lo
        while i < hi:
            tok = toks[i]
            node = None
            j = None
            if tok.kind == "ident" and tok.text == "function":
                node, j = self._try_function(i, hi)
            elif tok.kind == "ident" and tok.text not in _STMT_KEYWORDS:
                res = self._try_state_var(i, hi)
                if res is not None:
                    node, j = res
            if j is None:
                j = self._stmt_extent(i, hi)
            entries.append((i, j, node))
            i = j

        # expand to whole lines; merge anything sharing a line into raw
        rows = []
        for start, end, node in entries:
            first, last = toks[start].line, toks[end - 1].line
            if rows and first <= rows[-1][1]:
                prev_first, _, _ = rows.pop()
                rows.append((prev_first, max(last, prev_first), None))
            else:
                rows.append((first, last, node))

        open_line = toks[lo - 1].line
        close_line = toks[hi].line
        members = []
        line = open_line + 1
        for first, last, node in rows:
            if first > line:
                gap = Span(line, first - 1)
                members.append(RawRegion(self._line_slice(gap.start, gap.end), gap))
            span = Span(first, last)
            text = self._line_slice(first, last)
            if node is None:
                members.append(RawRegion(text, span))
            else:
                members.append(dataclasses.replace(node, span=span, src=text))
            line = last + 1
        if line <= close_line - 1:
            gap = Span(line, close_line - 1)
            members.append(RawRegion(self._line_slice(gap.start, gap.end), gap))
        return tuple(members)

    def _try_function(self, i: int, hi: int):
        toks = self.tokens
        if i + 2 >= hi:
            return None, None
        name_tok = toks[i + 1]
        if name_tok.kind != "ident" or is_reserved(name_tok.text):
            return None, None
        if not (toks[i + 2].kind == "punct" and toks[i + 2].text == "("):
            return None, None
        pr_close = _match_group(toks, i + 2)
        if pr_close >= hi:
            return None, None
        params = self._parse_params(i + 3, pr_close)
        j = pr_close + 1
        body_open = None
        while j < hi:
            t = toks[j]
            if t.kind == "punct":
                if t.text == "(":
                    j = _match_group(toks, j) + 1
                    continue
                if t.text == "{":
                    body_open = j
                    break
                if t.text == ";":
                    return None, None  # declaration without a body
            j += 1
        if body_open is None:
            return None, None
        body_close = _match_group(toks, body_open)
        if body_close >= hi:
            return None, None
        modifiers = " ".join(
            self.source[toks[pr_close].end:toks[body_open].pos].split())
        body = self._parse_block(body_open, body_close, loop_depth=0)
        fn = FunctionDef(name_tok.text, params, modifiers, body)
        return fn, body_close + 1

    def _parse_params(self, lo: int, hi: int) -> tuple[Param, ...]:
        toks = self.tokens
        groups: list[list[int]] = [[]]
        depth = 0
        for j in range(lo, hi):
            t = toks[j]
            if t.kind == "punct":
                if t.text in _OPEN:
                    depth += 1
                elif t.text in _CLOSE:
                    depth -= 1
                elif t.text == "," and depth == 0:
                    groups.append([])
                    continue
            groups[-1].append(j)
        params = []
        for g in groups:
            if not g:
                continue
            last = toks[g[-1]]
            if len(g) >= 2 and last.kind == "ident" and not is_reserved(last.text):
                type_text = self._slice(toks[g[0]], toks[g[-2]])
                params.append(Param(type_text, last.text))
            else:
                params.append(Param(self._slice(toks[g[0]], last), None))
        return tuple(params)

    def _try_state_var(self, i: int, hi: int):
        res = self._try_decl_prefix(i, hi)
        if res is None:
            return None
        type_text, name_tok, j = res
        toks = self.tokens
        if j >= hi or toks[j].kind != "punct":
            return None
        if toks[j].text == ";":
            return StateVarDecl(type_text, name_tok.text, None), j + 1
        if toks[j].text != "=":
            return None
        k = j + 1
        depth = 0
        while k < hi:
            t = toks[k]
            if t.kind == "punct":
                if t.text in _OPEN:
                    depth += 1
                elif t.text in _CLOSE:
                    depth -= 1
                elif t.text == ";" and depth == 0:
                    break
            k += 1
        if k >= hi:
            return None
        init = self._expr_or_raw(j + 1, k)
        return StateVarDecl(type_text, name_tok.text, init), k + 1

    def _try_decl_prefix(self, i: int, hi: int):
        """Match ``<type> [modifiers] <name>``; None when it is not a decl."""
        toks = self.tokens
        t0 = toks[i]
        if t0.kind != "ident" or t0.text in _STMT_KEYWORDS:
            return None
        if t0.text == "mapping":
            if i + 1 >= hi or toks[i + 1].text != "(":
                return None
            j = _match_group(toks, i + 1) + 1
        else:
            j = i + 1
        while j < hi:
            t = toks[j]
            if t.kind == "punct" and t.text == "[":
                j = _match_group(toks, j) + 1
            elif t.kind == "ident" and t.text in _DECL_MODIFIERS:
                j += 1
            else:
                break
        if j >= hi or j == i:
            return None
        name_tok = toks[j]
        if name_tok.kind != "ident" or is_reserved(name_tok.text):
            return None
        type_text = self._slice(t0, toks[j - 1])
        return type_text, name_tok, j + 1

    # -- statements ----------------------------------------------------------

    def _parse_block(self, open_idx: int, close_idx: int, loop_depth: int) -> Block:
        stmts = self._parse_statements(open_idx + 1, close_idx, loop_depth)
        toks = self.tokens
        src = self._slice(toks[open_idx], toks[close_idx])
        span = Span(toks[open_idx].line, toks[close_idx].line)
        return Block(tuple(stmts), span, src)

    def _parse_statements(self, lo: int, hi: int, loop_depth: int) -> list[Statement]:
        toks = self.tokens
        stmts: list[Statement] = []
        prev_line = toks[lo - 1].line if lo > 0 else 0
        i = lo
        while i < hi:
            tok = toks[i]
            if tok.line > prev_line + 1:
                trivia = Span(prev_line + 1, tok.line - 1)
                stmts.append(RawStmt(self._line_slice(trivia.start, trivia.end),
                                     trivia, pinned=True))
            stmt, i = self._parse_statement(i, hi, loop_depth)
            stmts.append(stmt)
            prev_line = stmt.span.end if stmt.span else toks[i - 1].line
        if hi < len(toks) and toks[hi].line > prev_line + 1:
            trivia = Span(prev_line + 1, toks[hi].line - 1)
            stmts.append(RawStmt(self._line_slice(trivia.start, trivia.end),
                                 trivia, pinned=True))
        return stmts

    def _raw_stmt(self, i: int, hi: int) -> tuple[RawStmt, int]:
        j = self._stmt_extent(i, hi)
        toks = self.tokens
        text = self._slice(toks[i], toks[j - 1])
        return RawStmt(text, Span(toks[i].line, toks[j - 1].line)), j

    def _parse_statement(self, i: int, hi: int, loop_depth: int):
        toks = self.tokens
        tok = toks[i]
        try:
            if tok.kind == "punct" and tok.text == "{":
                close = _match_group(toks, i)
                if close >= hi:
                    raise _Unsupported
                return self._parse_block(i, close, loop_depth), close + 1
            if tok.kind == "ident":
                if tok.text == "if":
                    return self._parse_if(i, hi, loop_depth)
                if tok.text == "while":
                    return self._parse_while(i, hi, loop_depth)
                if tok.text == "for":
                    return self._parse_for(i, hi, loop_depth)
                if tok.text == "return":
                    return self._parse_return(i, hi)
                if tok.text == "break":
                    if loop_depth > 0 and i + 1 < hi and toks[i + 1].text == ";":
                        span = Span(tok.line, toks[i + 1].line)
                        return Break(span, self._slice(tok, toks[i + 1])), i + 2
                    raise _Unsupported
                if tok.text in _STMT_KEYWORDS:
                    raise _Unsupported
                res = self._try_local_decl(i, hi)
                if res is not None:
                    return res
            # expression statement
            j = self._find_semi(i, hi)
            if j is None:
                raise _Unsupported
            expr = self._parse_expr_range(i, j)
            span = Span(tok.line, toks[j].line)
            return ExprStmt(expr, span, self._slice(tok, toks[j])), j + 1
        except _Unsupported:
            return self._raw_stmt(i, hi)

    def _find_semi(self, i: int, hi: int):
        toks = self.tokens
        depth = 0
        for j in range(i, hi):
            t = toks[j]
            if t.kind != "punct":
                continue
            if t.text in _OPEN:
                if t.text == "{":
                    return None
                depth += 1
            elif t.text in _CLOSE:
                depth -= 1
            elif t.text == ";" and depth == 0:
                return j
        return None

    def _parse_if(self, i: int, hi: int, loop_depth: int):
        toks = self.tokens
        if i + 1 >= hi or toks[i + 1].text != "(":
            raise _Unsupported
        pr_close = _match_group(toks, i + 1)
        if pr_close + 1 >= hi:
            raise _Unsupported
        cond = self._parse_expr_range(i + 2, pr_close)
        then_stmt, j = self._parse_statement(pr_close + 1, hi, loop_depth)
        orelse = None
        if j < hi and toks[j].kind == "ident" and toks[j].text == "else":
            orelse, j = self._parse_statement(j + 1, hi, loop_depth)
        span = Span(toks[i].line, toks[j - 1].line)
        return If(cond, then_stmt, orelse, span, self._slice(toks[i], toks[j - 1])), j

    def _parse_while(self, i: int, hi: int, loop_depth: int):
        toks = self.tokens
        if i + 1 >= hi or toks[i + 1].text != "(":
            raise _Unsupported
        pr_close = _match_group(toks, i + 1)
        if pr_close + 1 >= hi:
            raise _Unsupported
        cond = self._parse_expr_range(i + 2, pr_close)
        body, j = self._parse_statement(pr_close + 1, hi, loop_depth + 1)
        span = Span(toks[i].line, toks[j - 1].line)
        return While(cond, body, span, self._slice(toks[i], toks[j - 1])), j

    def _parse_for(self, i: int, hi: int, loop_depth: int):
        toks = self.tokens
        if i + 1 >= hi or toks[i + 1].text != "(":
            raise _Unsupported
        pr_close = _match_group(toks, i + 1)
        if pr_close + 1 >= hi:
            raise _Unsupported
        # split the header on top-level ';'
        semis = []
        depth = 0
        for j in range(i + 2, pr_close):
            t = toks[j]
            if t.kind != "punct":
                continue
            if t.text in _OPEN:
                depth += 1
            elif t.text in _CLOSE:
                depth -= 1
            elif t.text == ";" and depth == 0:
                semis.append(j)
        if len(semis) != 2:
            raise _Unsupported
        init = self._parse_for_init(i + 2, semis[0])
        cond = None
        if semis[0] + 1 < semis[1]:
            cond = self._parse_expr_range(semis[0] + 1, semis[1])
        post = None
        if semis[1] + 1 < pr_close:
            post = self._parse_expr_range(semis[1] + 1, pr_close)
        body, j = self._parse_statement(pr_close + 1, hi, loop_depth + 1)
        span = Span(toks[i].line, toks[j - 1].line)
        return For(init, cond, post, body, span, self._slice(toks[i], toks[j - 1])), j

    def _parse_for_init(self, lo: int, hi: int):
        if lo >= hi:
            return None
        toks = self.tokens
        src = self._slice(toks[lo], toks[hi - 1])
        span = Span(toks[lo].line, toks[hi - 1].line)
        res = self._try_decl_prefix(lo, hi)
        if res is not None:
            type_text, name_tok, j = res
            if j == hi:
                return VarDecl(type_text, name_tok.text, None, span, src)
            if toks[j].text == "=":
                init = self._parse_expr_range(j + 1, hi)
                return VarDecl(type_text, name_tok.text, init, span, src)
        expr = self._parse_expr_range(lo, hi)
        return ExprStmt(expr, span, src)

    def _parse_return(self, i: int, hi: int):
        toks = self.tokens
        j = self._find_semi(i, hi)
        if j is None:
            raise _Unsupported
        value = None
        if j > i + 1:
            value = self._parse_expr_range(i + 1, j)
        span = Span(toks[i].line, toks[j].line)
        return Return(value, span, self._slice(toks[i], toks[j])), j + 1

    def _try_local_decl(self, i: int, hi: int):
        res = self._try_decl_prefix(i, hi)
        if res is None:
            return None
        type_text, name_tok, j = res
        toks = self.tokens
        if j >= hi or toks[j].kind != "punct" or toks[j].text not in ("=", ";"):
            return None
        if toks[j].text == ";":
            span = Span(toks[i].line, toks[j].line)
            return VarDecl(type_text, name_tok.text, None, span,
                           self._slice(toks[i], toks[j])), j + 1
        semi = self._find_semi(j, hi)
        if semi is None:
            raise _Unsupported
        init = self._parse_expr_range(j + 1, semi)
        span = Span(toks[i].line, toks[semi].line)
        return VarDecl(type_text, name_tok.text, init, span,
                       self._slice(toks[i], toks[semi])), semi + 1

    # -- statement extents for raw fallback ---------------------------------

    def _stmt_extent(self, i: int, hi: int) -> int:
        toks = self.tokens
        tok = toks[i]
        if tok.kind == "punct" and tok.text == "{":
            j = _match_group(toks, i) + 1
            while j < hi and toks[j].kind == "ident" and toks[j].text == "catch":
                j = self._clause_extent(j, hi)
            return min(j, hi)
        if tok.kind == "ident" and tok.text in ("if", "while", "for"):
            j = i + 1
            if j < hi and toks[j].text == "(":
                j = _match_group(toks, j) + 1
            j = self._stmt_extent(j, hi) if j < hi else hi
            if tok.text == "if" and j < hi and toks[j].kind == "ident" \
                    and toks[j].text == "else":
                j = self._stmt_extent(j + 1, hi) if j + 1 < hi else hi
            return j
        if tok.kind == "ident" and tok.text == "do":
            j = self._stmt_extent(i + 1, hi) if i + 1 < hi else hi
            return self._scan_to_semi(j, hi)
        return self._scan_to_semi(i, hi)

    def _clause_extent(self, i: int, hi: int) -> int:
        """Consume a 'catch [ident] [(...)] {...}' clause."""
        toks = self.tokens
        j = i + 1
        while j < hi and not (toks[j].kind == "punct" and toks[j].text == "{"):
            if toks[j].kind == "punct" and toks[j].text == "(":
                j = _match_group(toks, j) + 1
            else:
                j += 1
        if j >= hi:
            return hi
        return _match_group(toks, j) + 1

    def _scan_to_semi(self, i: int, hi: int) -> int:
        toks = self.tokens
        depth = 0
        j = i
        while j < hi:
            t = toks[j]
            if t.kind == "punct":
                if t.text == "{" and depth == 0:
                    j = _match_group(toks, j) + 1
                    while j < hi and toks[j].kind == "ident" and toks[j].text == "catch":
                        j = self._clause_extent(j, hi)
                    return min(j, hi)
                if t.text in _OPEN:
                    depth += 1
                elif t.text in _CLOSE:
                    depth -= 1
                elif t.text == ";" and depth == 0:
                    return j + 1
            j += 1
        return hi

    # -- expressions ----------------------------------------------------------

    def _expr_or_raw(self, lo: int, hi: int) -> Expression:
        try:
            return self._parse_expr_range(lo, hi)
        except _Unsupported:
            return RawExpr(self._slice(self.tokens[lo], self.tokens[hi - 1]))

    def _parse_expr_range(self, lo: int, hi: int) -> Expression:
        if lo >= hi:
            raise _Unsupported
        ep = _ExprParser(self, lo, hi)
        expr = ep.parse_assignment()
        if ep.i != hi:
            raise _Unsupported
        return expr


_BIN_LEVELS = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("+", "-"),
    ("*", "/"),
)

_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/="}


class _ExprParser:
    def __init__(self, parser: _Parser, lo: int, hi: int):
        self.p = parser
        self.toks = parser.tokens
        self.i = lo
        self.hi = hi

    def _peek(self):
        return self.toks[self.i] if self.i < self.hi else None

    def _take(self) -> Token:
        if self.i >= self.hi:
            raise _Unsupported
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def _src(self, start: int) -> str:
        return self.p._slice(self.toks[start], self.toks[self.i - 1])

    def parse_assignment(self) -> Expression:
        start = self.i
        left = self.parse_binary(0)
        tok = self._peek()
        if tok is not None and tok.kind == "punct" and tok.text in _ASSIGN_OPS:
            if not isinstance(left, (Identifier, MemberAccess, Index)):
                raise _Unsupported
            op = self._take().text
            value = self.parse_assignment()
            if op == "=":
                node = Assign(left, value)
            else:
                node = Assign(left, Binary(op[0], left, value))
            return dataclasses.replace(node, src=self._src(start))
        return left

    def parse_binary(self, level: int) -> Expression:
        if level == len(_BIN_LEVELS):
            return self.parse_unary()
        start = self.i
        left = self.parse_binary(level + 1)
        while True:
            tok = self._peek()
            if tok is None or tok.kind != "punct" or tok.text not in _BIN_LEVELS[level]:
                return left
            op = self._take().text
            right = self.parse_binary(level + 1)
            left = Binary(op, left, right, src=self._src(start))

    def parse_unary(self) -> Expression:
        tok = self._peek()
        if tok is not None and tok.kind == "punct" and tok.text in ("!", "-"):
            start = self.i
            op = self._take().text
            operand = self.parse_unary()
            return Unary(op, operand, src=self._src(start))
        return self.parse_postfix()

    def parse_postfix(self) -> Expression:
        start = self.i
        node = self.parse_primary()
        while True:
            tok = self._peek()
            if tok is None or tok.kind != "punct":
                return node
            if tok.text == ".":
                self._take()
                member = self._take()
                if member.kind != "ident":
                    raise _Unsupported
                node = MemberAccess(node, member.text, src=self._src(start))
            elif tok.text == "(":
                self._take()
                args = []
                if self._peek() is not None and self._peek().text != ")":
                    args.append(self.parse_assignment())
                    while self._peek() is not None and self._peek().text == ",":
                        self._take()
                        args.append(self.parse_assignment())
                closing = self._take()
                if closing.text != ")":
                    raise _Unsupported
                node = Call(node, tuple(args), src=self._src(start))
            elif tok.text == "[":
                self._take()
                index = self.parse_assignment()
                closing = self._take()
                if closing.text != "]":
                    raise _Unsupported
                node = Index(node, index, src=self._src(start))
            elif tok.text in ("++", "--"):
                if not isinstance(node, (Identifier, MemberAccess, Index)):
                    raise _Unsupported
                op = self._take().text
                node = Assign(node, Binary(op[0], node, Literal("1")),
                              src=self._src(start))
            else:
                return node

    def parse_primary(self) -> Expression:
        tok = self._take()
        if tok.kind == "punct" and tok.text == "(":
            expr = self.parse_assignment()
            closing = self._take()
            if closing.text != ")":
                raise _Unsupported
            return expr
        if tok.kind == "number":
            nxt = self._peek()
            if nxt is not None and nxt.kind == "ident" and nxt.text in _UNIT_SUFFIXES:
                unit = self._take()
                return Literal(f"{tok.text} {unit.text}", src=f"{tok.text} {unit.text}")
            return Literal(tok.text, src=tok.text)
        if tok.kind == "string":
            return Literal(tok.text, src=tok.text)
        if tok.kind == "ident":
            if tok.text in ("true", "false"):
                return Literal(tok.text, src=tok.text)
            if tok.text in _STMT_KEYWORDS:
                raise _Unsupported
            return Identifier(tok.text, src=tok.text)
        raise _Unsupported


def parse(source: str) -> SourceUnit:
    """Parse UTF-8 Solidity source into a SourceUnit.

    Raises ParseError only for unbalanced bracket structure; any construct
    the subset grammar does not recognize is preserved as a raw region.
    """
    return _Parser(source).parse_unit()


def parse_expression(text: str) -> Expression:
    """Parse a standalone expression; raises ValueError if unsupported."""
    p = _Parser(text)
    try:
        return p._parse_expr_range(0, len(p.tokens))
    except _Unsupported:
        raise ValueError(f"unsupported expression: {text!r}") from None
