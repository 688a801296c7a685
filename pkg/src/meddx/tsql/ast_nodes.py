"""TSQL AST nodes and the canonical renderer.

``parse(render(stmt))`` is structurally equal to ``stmt`` for every valid
AST; rendering uses uppercase keywords, ISO instants and FOREVER for the
open end bound.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..store import format_instant
from .allen import AllenRelation

Literal = Union[int, float, str]

# Projection entries are either payload attribute names (case preserved) or
# the uppercase temporal pseudo-columns VALID, VALID_START, VALID_END, TT.
TEMPORAL_COLUMNS = ("VALID", "VALID_START", "VALID_END", "TT")


@dataclass(frozen=True)
class Comparison:
    attr: str
    op: str  # = <> < <= > >=
    value: Literal


@dataclass(frozen=True)
class BoolExpr:
    op: str  # AND | OR
    left: object
    right: object


@dataclass(frozen=True)
class ValidRef:
    """The record's valid-time interval."""


@dataclass(frozen=True)
class IntervalLit:
    start: int
    end: int | None  # None = FOREVER


@dataclass(frozen=True)
class FieldRef:
    """An instant-valued temporal attribute: VALID_START, VALID_END or TT."""

    name: str


@dataclass(frozen=True)
class InstantLit:
    value: int | None  # None = FOREVER


@dataclass(frozen=True)
class AllenTest:
    left: object  # ValidRef | IntervalLit
    relation: AllenRelation
    right: object


@dataclass(frozen=True)
class IntersectsTest:
    """Loose shared-instant predicate: true when the intervals intersect.

    Not one of the thirteen relations (it is their union over the
    interior-sharing cases), but the predicate most history queries want."""

    left: object
    right: object


@dataclass(frozen=True)
class InstantTest:
    left: object  # FieldRef | InstantLit
    op: str  # BEFORE | AFTER | AT
    right: object


@dataclass(frozen=True)
class Select:
    columns: tuple[str, ...] | None  # None = *
    table: str
    where: object | None = None
    when: object | None = None


@dataclass(frozen=True)
class Insert:
    table: str
    columns: tuple[str, ...]
    values: tuple[Literal, ...]
    valid_start: int | None = None  # None = store clock at execution


@dataclass(frozen=True)
class Update:
    table: str
    assignments: tuple[tuple[str, Literal], ...]
    where: object | None = None
    valid_start: int | None = None


@dataclass(frozen=True)
class Delete:
    table: str
    where: object | None = None
    valid_end: int | None = None


Statement = Union[Select, Insert, Update, Delete]


def _render_literal(value: Literal) -> str:
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render_instant(value: int | None) -> str:
    return "FOREVER" if value is None else format_instant(value)


def _render_texpr(node) -> str:
    if isinstance(node, ValidRef):
        return "VALID"
    if isinstance(node, IntervalLit):
        return f"[{format_instant(node.start)}, {_render_instant(node.end)})"
    if isinstance(node, FieldRef):
        return node.name
    if isinstance(node, InstantLit):
        return _render_instant(node.value)
    raise TypeError(f"not a temporal operand: {node!r}")


def _render_condition(node) -> str:
    if isinstance(node, BoolExpr):
        left = _render_condition(node.left)
        right = _render_condition(node.right)
        if isinstance(node.left, BoolExpr):
            left = f"({left})"
        if isinstance(node.right, BoolExpr):
            right = f"({right})"
        return f"{left} {node.op} {right}"
    if isinstance(node, Comparison):
        return f"{node.attr} {node.op} {_render_literal(node.value)}"
    if isinstance(node, AllenTest):
        return f"{_render_texpr(node.left)} {node.relation.value} {_render_texpr(node.right)}"
    if isinstance(node, IntersectsTest):
        return f"{_render_texpr(node.left)} INTERSECTS {_render_texpr(node.right)}"
    if isinstance(node, InstantTest):
        return f"{_render_texpr(node.left)} {node.op} {_render_texpr(node.right)}"
    raise TypeError(f"not a condition node: {node!r}")


def render(stmt: Statement) -> str:
    """Render a statement as canonical TSQL text."""
    if isinstance(stmt, Select):
        cols = "*" if stmt.columns is None else ", ".join(stmt.columns)
        text = f"SELECT {cols} FROM {stmt.table}"
        if stmt.where is not None:
            text += f" WHERE {_render_condition(stmt.where)}"
        if stmt.when is not None:
            text += f" WHEN {_render_condition(stmt.when)}"
        return text
    if isinstance(stmt, Insert):
        cols = ", ".join(stmt.columns)
        vals = ", ".join(_render_literal(v) for v in stmt.values)
        text = f"INSERT INTO {stmt.table} ({cols}) VALUES ({vals})"
        if stmt.valid_start is not None:
            text += f" WHEN VALID_START AT {format_instant(stmt.valid_start)}"
        return text
    if isinstance(stmt, Update):
        sets = ", ".join(f"{attr} = {_render_literal(v)}" for attr, v in stmt.assignments)
        text = f"UPDATE {stmt.table} SET {sets}"
        if stmt.where is not None:
            text += f" WHERE {_render_condition(stmt.where)}"
        if stmt.valid_start is not None:
            text += f" WHEN VALID_START AT {format_instant(stmt.valid_start)}"
        return text
    if isinstance(stmt, Delete):
        text = f"DELETE FROM {stmt.table}"
        if stmt.where is not None:
            text += f" WHERE {_render_condition(stmt.where)}"
        if stmt.valid_end is not None:
            text += f" WHEN VALID_END AT {format_instant(stmt.valid_end)}"
        return text
    raise TypeError(f"not a statement: {stmt!r}")
