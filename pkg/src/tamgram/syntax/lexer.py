"""Tokenizer for ``.tg`` sources.

Whitespace and comments (``//`` to end of line, nestable ``/* */``) are skipped
but never lost: every token's span indexes into the original buffer, so the
source can be rebuilt from the token texts plus the gaps between them.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from ..diagnostics import LexError, Span


class Kind(enum.Enum):
    IDENT = "identifier"
    CELL = "cell-identifier"
    PUBLIC = "public-symbol"
    FRESH = "fresh-marker"
    STRING = "string-literal"
    ANNOTATION = "annotation-string"
    NUMBER = "number"
    KEYWORD = "keyword"
    PUNCT = "punctuation"
    EOF = "end-of-input"


KEYWORDS = frozenset("""
let fun pred apred process module import open include choice while loop if then
else break continue cas as is named rw undef All Ex In Out Fr not in restriction
lemma
""".split())

# Symbols reserved for generated code; user declarations may not use them.
RESERVED_SYMBOLS = frozenset({"Cell", "St", "StF", "StB", "PcSt"})

# Longest first: maximal munch.  The fused forms (``]->[`` and friends) mark
# the boundary between two rule fields; the parser splits them back up.
PUNCTUATION = sorted("""
]-->[ ]->[ ]--[ ]-[ ]--> ]-> ]-- ]-
--> --[ -> -[ -- -
==> := '. <= =
[ ] ( ) { } < > , ; : . @ # & | ! / * + ^ ~ $ ' "
""".split(), key=len, reverse=True)

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_REST = _IDENT_START | set("0123456789")


@dataclass(frozen=True)
class Token:
    kind: Kind
    text: str
    span: Span

    def is_(self, text: str) -> bool:
        return self.kind in (Kind.PUNCT, Kind.KEYWORD) and self.text == text

    def __repr__(self) -> str:
        return f"{self.kind.name}({self.text!r})"


class _Cursor:
    def __init__(self, source: str, path: str):
        self.src = source
        self.path = path
        self.pos = 0
        self.line = 1
        self.col = 1

    def peek(self, k: int = 0) -> str:
        i = self.pos + k
        return self.src[i] if i < len(self.src) else ""

    def startswith(self, s: str) -> bool:
        return self.src.startswith(s, self.pos)

    def advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos >= len(self.src):
                return
            if self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def span_from(self, start: int, line: int, col: int) -> Span:
        return Span(start, self.pos, line, col, self.path)


def tokenize(source: str, path: str = "<input>") -> list[Token]:
    cur = _Cursor(source, path)
    out: list[Token] = []
    while True:
        _skip_trivia(cur)
        if cur.pos >= len(cur.src):
            out.append(Token(Kind.EOF, "", Span(cur.pos, cur.pos, cur.line, cur.col, path)))
            return out
        out.append(_next_token(cur, out))


def _skip_trivia(cur: _Cursor) -> None:
    while True:
        c = cur.peek()
        if c and c.isspace():
            cur.advance()
        elif cur.startswith("//"):
            while cur.peek() and cur.peek() != "\n":
                cur.advance()
        elif cur.startswith("/*"):
            start = (cur.pos, cur.line, cur.col)
            depth = 0
            while True:
                if cur.startswith("/*"):
                    depth += 1
                    cur.advance(2)
                elif cur.startswith("*/"):
                    depth -= 1
                    cur.advance(2)
                    if depth == 0:
                        break
                elif not cur.peek():
                    raise LexError("unterminated block comment",
                                   Span(start[0], cur.pos, start[1], start[2], cur.path))
                else:
                    cur.advance()
        else:
            return


def _read_ident(cur: _Cursor) -> str:
    begin = cur.pos
    while cur.peek() and cur.peek() in _IDENT_REST:
        cur.advance()
    return cur.src[begin:cur.pos]


def _next_token(cur: _Cursor, prev: list[Token]) -> Token:
    start, line, col = cur.pos, cur.line, cur.col
    c = cur.peek()

    if c in _IDENT_START:
        word = _read_ident(cur)
        kind = Kind.KEYWORD if word in KEYWORDS else Kind.IDENT
        return Token(kind, word, cur.span_from(start, line, col))

    if c.isdigit():
        while cur.peek().isdigit():
            cur.advance()
        return Token(Kind.NUMBER, cur.src[start:cur.pos], cur.span_from(start, line, col))

    if c == "'" and cur.peek(1) in _IDENT_START and cur.peek(1):
        cur.advance()
        _read_ident(cur)
        return Token(Kind.CELL, cur.src[start:cur.pos], cur.span_from(start, line, col))

    if c == "$" and cur.peek(1) in _IDENT_START and cur.peek(1):
        cur.advance()
        _read_ident(cur)
        return Token(Kind.PUBLIC, cur.src[start:cur.pos], cur.span_from(start, line, col))

    if c == "~":
        cur.advance()
        return Token(Kind.FRESH, "~", cur.span_from(start, line, col))

    if c == '"':
        cur.advance()
        while True:
            ch = cur.peek()
            if not ch or ch == "\n":
                raise LexError("unterminated string literal", cur.span_from(start, line, col))
            if ch == "\\" and cur.peek(1) == '"':
                cur.advance(2)
                continue
            cur.advance()
            if ch == '"':
                break
        span = cur.span_from(start, line, col)
        kind = Kind.ANNOTATION if _followed_by_colon(cur) else Kind.STRING
        return Token(kind, cur.src[start:cur.pos], span)

    for p in PUNCTUATION:
        if cur.startswith(p):
            if p in ("'", '"', "$"):
                break
            cur.advance(len(p))
            return Token(Kind.PUNCT, p, cur.span_from(start, line, col))

    cur.advance()
    raise LexError(f"stray character {c!r}", cur.span_from(start, line, col))


def _followed_by_colon(cur: _Cursor) -> bool:
    i = cur.pos
    src = cur.src
    while i < len(src) and src[i] in " \t\r\n":
        i += 1
    return src.startswith(":", i) and not src.startswith(":=", i)


def string_value(tok: Token) -> str:
    return tok.text[1:-1].replace('\\"', '"')


def reconstruct(source: str, tokens: list[Token]) -> str:
    """Rebuild ``source`` from tokens and the skipped trivia between them."""
    parts = []
    pos = 0
    for t in tokens:
        parts.append(source[pos:t.span.start])
        parts.append(t.text)
        pos = t.span.end
    parts.append(source[pos:])
    return "".join(parts)
