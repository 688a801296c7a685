"""TSQL lexer. Keywords are case-insensitive; identifiers keep their case."""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..store import parse_instant
from .errors import TsqlSyntaxError

KEYWORDS = frozenset(
    {
        "SELECT", "FROM", "WHERE", "WHEN", "AND", "OR",
        "INSERT", "INTO", "VALUES", "UPDATE", "SET", "DELETE",
        "VALID", "VALID_START", "VALID_END", "TT", "FOREVER", "AT",
        "BEFORE", "AFTER", "MEETS", "MET_BY", "OVERLAPS", "OVERLAPPED_BY",
        "STARTS", "STARTED_BY", "DURING", "CONTAINS", "FINISHES",
        "FINISHED_BY", "EQUALS", "INTERSECTS",
    }
)

ALLEN_KEYWORDS = frozenset(
    {
        "BEFORE", "AFTER", "MEETS", "MET_BY", "OVERLAPS", "OVERLAPPED_BY",
        "STARTS", "STARTED_BY", "DURING", "CONTAINS", "FINISHES",
        "FINISHED_BY", "EQUALS",
    }
)

INSTANT_KEYWORDS = frozenset({"BEFORE", "AFTER", "AT"})

# kinds: KEYWORD IDENT NUMBER STRING INSTANT SYMBOL EOF
_INSTANT_RE = re.compile(r"\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z")
_NUMBER_RE = re.compile(r"-?\d+(\.\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_SYMBOLS = ("<=", ">=", "<>", "=", "<", ">", "*", ",", "(", ")", "[", ";")


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    line: int
    column: int

    def is_keyword(self, *names: str) -> bool:
        return self.kind == "KEYWORD" and self.value in names


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0

    def column() -> int:
        return pos - line_start + 1

    while pos < len(text):
        ch = text[pos]
        if ch == "\n":
            line += 1
            pos += 1
            line_start = pos
            continue
        if ch in " \t\r":
            pos += 1
            continue

        m = _INSTANT_RE.match(text, pos)
        if m:
            tokens.append(Token("INSTANT", parse_instant(m.group()), line, column()))
            pos = m.end()
            continue

        m = _NUMBER_RE.match(text, pos)
        if m:
            raw = m.group()
            value = float(raw) if "." in raw else int(raw)
            tokens.append(Token("NUMBER", value, line, column()))
            pos = m.end()
            continue

        m = _IDENT_RE.match(text, pos)
        if m:
            word = m.group()
            upper = word.upper()
            if upper in KEYWORDS:
                tokens.append(Token("KEYWORD", upper, line, column()))
            else:
                tokens.append(Token("IDENT", word, line, column()))
            pos = m.end()
            continue

        if ch == "'":
            start_line, start_col = line, column()
            pos += 1
            chunks: list[str] = []
            while True:
                if pos >= len(text):
                    raise TsqlSyntaxError("unterminated string literal", start_line, start_col)
                c = text[pos]
                if c == "'":
                    if pos + 1 < len(text) and text[pos + 1] == "'":
                        chunks.append("'")
                        pos += 2
                        continue
                    pos += 1
                    break
                if c == "\n":
                    raise TsqlSyntaxError("unterminated string literal", start_line, start_col)
                chunks.append(c)
                pos += 1
            tokens.append(Token("STRING", "".join(chunks), start_line, start_col))
            continue

        for sym in _SYMBOLS:
            if text.startswith(sym, pos):
                tokens.append(Token("SYMBOL", sym, line, column()))
                pos += len(sym)
                break
        else:
            raise TsqlSyntaxError(f"unexpected character {ch!r}", line, column())

    tokens.append(Token("EOF", None, line, column()))
    return tokens
