"""Recursive-descent TSQL parser.

Grammar (keywords case-insensitive, AND/OR left-associative, no precedence
beyond parentheses):

    stmt   := select | insert | update | delete [";"]
    select := SELECT ("*" | column ("," column)*) FROM ident
              [WHERE cond] [WHEN tcond]
    column := ident | VALID | VALID_START | VALID_END | TT
    cond   := cterm ((AND | OR) cterm)*
    cterm  := "(" cond ")" | ident cmp literal
    cmp    := "=" | "<>" | "<" | "<=" | ">" | ">="
    tcond  := tterm ((AND | OR) tterm)*
    tterm  := "(" tcond ")" | iexpr allen iexpr | pexpr iop pexpr
    allen  := BEFORE | AFTER | MEETS | MET_BY | OVERLAPS | OVERLAPPED_BY
            | STARTS | STARTED_BY | DURING | CONTAINS | FINISHES
            | FINISHED_BY | EQUALS
    iop    := BEFORE | AFTER | AT
    iexpr  := VALID | "[" instant "," (instant | FOREVER) ")"
    pexpr  := VALID_START | VALID_END | TT | instant | FOREVER
    insert := INSERT INTO ident "(" ident ("," ident)* ")"
              VALUES "(" literal ("," literal)* ")"
              [WHEN VALID_START AT instant]
    update := UPDATE ident SET ident "=" literal ("," ident "=" literal)*
              [WHERE cond] [WHEN VALID_START AT instant]
    delete := DELETE FROM ident [WHERE cond] [WHEN VALID_END AT instant]

BEFORE and AFTER serve both operand kinds and are disambiguated by the left
operand: interval operands make them Allen relations, instant operands make
them point comparisons. Mixing kinds is a type error, reported with the
offending position.
"""
from __future__ import annotations

from .allen import AllenRelation
from .ast_nodes import (
    AllenTest,
    IntersectsTest,
    BoolExpr,
    Comparison,
    Delete,
    FieldRef,
    Insert,
    InstantLit,
    InstantTest,
    IntervalLit,
    Select,
    Statement,
    Update,
    ValidRef,
)
from .errors import TsqlSyntaxError, TsqlTypeError
from .tokens import ALLEN_KEYWORDS, INSTANT_KEYWORDS, Token, tokenize

_COMPARATORS = ("=", "<>", "<", "<=", ">", ">=")
_INSTANT_FIELDS = ("VALID_START", "VALID_END", "TT")


def parse(text: str) -> Statement:
    """Parse a single TSQL statement."""
    return _Parser(tokenize(text)).parse_statement()


class _Parser:
    def __init__(self, tokens: list[Token]):
        self._tokens = tokens
        self._pos = 0

    # -- token plumbing -----------------------------------------------------

    def _peek(self) -> Token:
        return self._tokens[self._pos]

    def _advance(self) -> Token:
        token = self._tokens[self._pos]
        if token.kind != "EOF":
            self._pos += 1
        return token

    def _error(self, message: str, token: Token, expected: tuple[str, ...] = ()) -> TsqlSyntaxError:
        return TsqlSyntaxError(message, token.line, token.column, expected)

    def _expect_symbol(self, symbol: str) -> Token:
        token = self._peek()
        if token.kind == "SYMBOL" and token.value == symbol:
            return self._advance()
        raise self._error(f"expected {symbol!r}", token, (symbol,))

    def _expect_keyword(self, *names: str) -> Token:
        token = self._peek()
        if token.is_keyword(*names):
            return self._advance()
        raise self._error(f"expected {' or '.join(names)}", token, names)

    def _expect_ident(self, what: str) -> str:
        token = self._peek()
        if token.kind == "IDENT":
            return self._advance().value
        raise self._error(f"expected {what}", token, ("identifier",))

    def _match_keyword(self, *names: str) -> bool:
        if self._peek().is_keyword(*names):
            self._advance()
            return True
        return False

    # -- statements ---------------------------------------------------------

    def parse_statement(self) -> Statement:
        token = self._peek()
        if token.is_keyword("SELECT"):
            stmt = self._parse_select()
        elif token.is_keyword("INSERT"):
            stmt = self._parse_insert()
        elif token.is_keyword("UPDATE"):
            stmt = self._parse_update()
        elif token.is_keyword("DELETE"):
            stmt = self._parse_delete()
        else:
            raise self._error(
                "expected a statement", token, ("SELECT", "INSERT", "UPDATE", "DELETE")
            )
        if self._peek().kind == "SYMBOL" and self._peek().value == ";":
            self._advance()
        tail = self._peek()
        if tail.kind != "EOF":
            raise self._error("unexpected input after statement", tail, ("end of input",))
        return stmt

    def _parse_select(self) -> Select:
        self._expect_keyword("SELECT")
        columns: tuple[str, ...] | None
        if self._peek().kind == "SYMBOL" and self._peek().value == "*":
            self._advance()
            columns = None
        else:
            names = [self._parse_column()]
            while self._peek().kind == "SYMBOL" and self._peek().value == ",":
                self._advance()
                names.append(self._parse_column())
            columns = tuple(names)
        self._expect_keyword("FROM")
        table = self._expect_ident("table name")
        where = self._parse_cond() if self._match_keyword("WHERE") else None
        when = self._parse_tcond() if self._match_keyword("WHEN") else None
        return Select(columns, table, where, when)

    def _parse_column(self) -> str:
        token = self._peek()
        if token.kind == "IDENT":
            return self._advance().value
        if token.is_keyword("VALID", *_INSTANT_FIELDS):
            return self._advance().value
        raise self._error("expected a column", token, ("identifier", "VALID", "VALID_START", "VALID_END", "TT"))

    def _parse_insert(self) -> Insert:
        self._expect_keyword("INSERT")
        self._expect_keyword("INTO")
        table = self._expect_ident("table name")
        self._expect_symbol("(")
        columns = [self._expect_ident("column name")]
        while self._peek().kind == "SYMBOL" and self._peek().value == ",":
            self._advance()
            columns.append(self._expect_ident("column name"))
        self._expect_symbol(")")
        self._expect_keyword("VALUES")
        self._expect_symbol("(")
        values = [self._parse_literal()]
        while self._peek().kind == "SYMBOL" and self._peek().value == ",":
            self._advance()
            values.append(self._parse_literal())
        self._expect_symbol(")")
        if len(values) != len(columns):
            token = self._peek()
            raise self._error(
                f"{len(columns)} columns but {len(values)} values", token, ()
            )
        valid_start = self._parse_dml_when("VALID_START")
        return Insert(table, tuple(columns), tuple(values), valid_start)

    def _parse_update(self) -> Update:
        self._expect_keyword("UPDATE")
        table = self._expect_ident("table name")
        self._expect_keyword("SET")
        assignments = [self._parse_assignment()]
        while self._peek().kind == "SYMBOL" and self._peek().value == ",":
            self._advance()
            assignments.append(self._parse_assignment())
        where = self._parse_cond() if self._match_keyword("WHERE") else None
        valid_start = self._parse_dml_when("VALID_START")
        return Update(table, tuple(assignments), where, valid_start)

    def _parse_delete(self) -> Delete:
        self._expect_keyword("DELETE")
        self._expect_keyword("FROM")
        table = self._expect_ident("table name")
        where = self._parse_cond() if self._match_keyword("WHERE") else None
        valid_end = self._parse_dml_when("VALID_END")
        return Delete(table, where, valid_end)

    def _parse_assignment(self) -> tuple[str, object]:
        attr = self._expect_ident("column name")
        self._expect_symbol("=")
        return (attr, self._parse_literal())

    def _parse_literal(self):
        token = self._peek()
        if token.kind in ("NUMBER", "STRING"):
            return self._advance().value
        raise self._error("expected a literal", token, ("number", "string"))

    def _parse_dml_when(self, field: str) -> int | None:
        """The restricted DML clause: WHEN <field> AT <instant>."""
        if not self._match_keyword("WHEN"):
            return None
        token = self._peek()
        if not token.is_keyword(field):
            raise self._error(f"DML WHEN clause must use {field}", token, (field,))
        self._advance()
        self._expect_keyword("AT")
        instant = self._peek()
        if instant.kind != "INSTANT":
            raise self._error("expected an instant literal", instant, ("instant",))
        return self._advance().value

    # -- WHERE conditions ----------------------------------------------------

    def _parse_cond(self):
        node = self._parse_cterm()
        while self._peek().is_keyword("AND", "OR"):
            op = self._advance().value
            node = BoolExpr(op, node, self._parse_cterm())
        return node

    def _parse_cterm(self):
        token = self._peek()
        if token.kind == "SYMBOL" and token.value == "(":
            self._advance()
            node = self._parse_cond()
            self._expect_symbol(")")
            return node
        attr = self._expect_ident("attribute name")
        op_token = self._peek()
        if op_token.kind == "SYMBOL" and op_token.value in _COMPARATORS:
            self._advance()
        else:
            raise self._error("expected a comparison operator", op_token, _COMPARATORS)
        return Comparison(attr, op_token.value, self._parse_literal())

    # -- WHEN temporal conditions ---------------------------------------------

    def _parse_tcond(self):
        node = self._parse_tterm()
        while self._peek().is_keyword("AND", "OR"):
            op = self._advance().value
            node = BoolExpr(op, node, self._parse_tterm())
        return node

    def _parse_tterm(self):
        token = self._peek()
        if token.kind == "SYMBOL" and token.value == "(":
            self._advance()
            node = self._parse_tcond()
            self._expect_symbol(")")
            return node

        left_kind, left = self._parse_texpr()
        op_token = self._peek()
        if left_kind == "interval":
            if op_token.is_keyword(*ALLEN_KEYWORDS) or op_token.is_keyword("INTERSECTS"):
                self._advance()
                op_name = op_token.value
            elif op_token.is_keyword("AT"):
                raise TsqlTypeError(
                    "AT compares instants; interval operands take Allen relations",
                    op_token.line, op_token.column,
                )
            else:
                raise self._error(
                    "expected an interval operator", op_token,
                    tuple(sorted(ALLEN_KEYWORDS | {"INTERSECTS"})),
                )
            right_kind, right = self._parse_texpr()
            if right_kind != "interval":
                raise TsqlTypeError(
                    f"{op_name} requires an interval right operand",
                    op_token.line, op_token.column,
                )
            if op_name == "INTERSECTS":
                return IntersectsTest(left, right)
            return AllenTest(left, AllenRelation(op_name), right)

        # left operand is an instant expression
        if op_token.is_keyword(*INSTANT_KEYWORDS):
            self._advance()
        elif op_token.is_keyword(*ALLEN_KEYWORDS) or op_token.is_keyword("INTERSECTS"):
            raise TsqlTypeError(
                f"{op_token.value} requires interval operands",
                op_token.line, op_token.column,
            )
        else:
            raise self._error("expected BEFORE, AFTER or AT", op_token, tuple(sorted(INSTANT_KEYWORDS)))
        right_kind, right = self._parse_texpr()
        if right_kind != "instant":
            raise TsqlTypeError(
                f"{op_token.value} requires an instant right operand",
                op_token.line, op_token.column,
            )
        return InstantTest(left, op_token.value, right)

    def _parse_texpr(self):
        """One temporal operand; returns ("interval" | "instant", node)."""
        token = self._peek()
        if token.is_keyword("VALID"):
            self._advance()
            return "interval", ValidRef()
        if token.kind == "SYMBOL" and token.value == "[":
            self._advance()
            start_token = self._peek()
            if start_token.kind != "INSTANT":
                raise self._error("interval start must be an instant", start_token, ("instant",))
            start = self._advance().value
            self._expect_symbol(",")
            end_token = self._peek()
            if end_token.is_keyword("FOREVER"):
                self._advance()
                end: int | None = None
            elif end_token.kind == "INSTANT":
                end = self._advance().value
            else:
                raise self._error("interval end must be an instant or FOREVER", end_token,
                                  ("instant", "FOREVER"))
            self._expect_symbol(")")
            if end is not None and not start < end:
                raise self._error("empty interval literal", start_token, ())
            return "interval", IntervalLit(start, end)
        if token.is_keyword(*_INSTANT_FIELDS):
            self._advance()
            return "instant", FieldRef(token.value)
        if token.kind == "INSTANT":
            self._advance()
            return "instant", InstantLit(token.value)
        if token.is_keyword("FOREVER"):
            self._advance()
            return "instant", InstantLit(None)
        raise self._error(
            "expected a temporal operand", token,
            ("VALID", "VALID_START", "VALID_END", "TT", "instant", "interval literal"),
        )
