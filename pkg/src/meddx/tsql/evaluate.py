"""TSQL evaluation over a temporal store.

SELECT without WHEN scans current records only; a WHEN clause widens the
scan to every archived version (tombstones excluded). WHERE filters payload
attributes, WHEN filters temporal attributes. DML statements delegate to the
store's history-preserving operations, taking their valid-time bound from
the WHEN clause when present and from the store clock otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Number

from ..store import BitemporalRecord, EntityTable, Interval, TemporalStore, format_instant
from .allen import allen_relation
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
from .errors import TsqlEvalError

_INF = float("inf")


@dataclass
class ResultSet:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    provenance: list[str] = field(default_factory=list)  # "current" | "history"


@dataclass
class DmlResult:
    affected: int


def evaluate(stmt: Statement, store: TemporalStore):
    """Execute a parsed statement; SELECT yields a :class:`ResultSet`,
    DML a :class:`DmlResult`. DML statements serialize through the store's
    writer lock so multi-record updates stay atomic per statement."""
    if isinstance(stmt, Select):
        return _eval_select(stmt, store)
    with store.write_lock:
        if isinstance(stmt, Insert):
            return _eval_insert(stmt, store)
        if isinstance(stmt, Update):
            return _eval_update(stmt, store)
        if isinstance(stmt, Delete):
            return _eval_delete(stmt, store)
    raise TsqlEvalError(f"cannot evaluate {type(stmt).__name__}")


# -- SELECT -------------------------------------------------------------------


def _eval_select(stmt: Select, store: TemporalStore) -> ResultSet:
    table = store.table(stmt.table)
    if stmt.when is None:
        records = table.current_records()
    else:
        records = table.versions()

    columns = list(table.schema) if stmt.columns is None else list(stmt.columns)
    for col in columns:
        if col not in table.schema and col not in ("VALID", "VALID_START", "VALID_END", "TT"):
            raise TsqlEvalError(f"unknown attribute {col!r} in table {table.name!r}")

    result = ResultSet(columns=columns)
    for rec in records:
        if stmt.where is not None and not _eval_where(stmt.where, rec.payload, table):
            continue
        if stmt.when is not None and not _eval_when(stmt.when, rec):
            continue
        result.rows.append([_project(col, rec) for col in columns])
        result.provenance.append("current" if rec.valid.end is None else "history")
    return result


def _project(column: str, rec: BitemporalRecord):
    if column == "VALID":
        return str(rec.valid)
    if column == "VALID_START":
        return format_instant(rec.valid.start)
    if column == "VALID_END":
        return "FOREVER" if rec.valid.end is None else format_instant(rec.valid.end)
    if column == "TT":
        return format_instant(rec.tt)
    return rec.payload[column]


def _eval_where(node, payload: dict, table: EntityTable) -> bool:
    if isinstance(node, BoolExpr):
        left = _eval_where(node.left, payload, table)
        right = _eval_where(node.right, payload, table)
        return (left and right) if node.op == "AND" else (left or right)
    if isinstance(node, Comparison):
        if node.attr not in table.schema:
            raise TsqlEvalError(f"unknown attribute {node.attr!r} in table {table.name!r}")
        return _compare(payload[node.attr], node.op, node.value, node.attr)
    raise TsqlEvalError(f"bad WHERE node {node!r}")


def _compare(actual, op: str, literal, attr: str) -> bool:
    both_numbers = (
        isinstance(actual, Number) and not isinstance(actual, bool)
        and isinstance(literal, Number) and not isinstance(literal, bool)
    )
    both_strings = isinstance(actual, str) and isinstance(literal, str)
    if not (both_numbers or both_strings):
        raise TsqlEvalError(
            f"type mismatch comparing attribute {attr!r} "
            f"({type(actual).__name__}) with {type(literal).__name__} literal"
        )
    if op == "=":
        return actual == literal
    if op == "<>":
        return actual != literal
    if op == "<":
        return actual < literal
    if op == "<=":
        return actual <= literal
    if op == ">":
        return actual > literal
    return actual >= literal


def _eval_when(node, rec: BitemporalRecord) -> bool:
    if isinstance(node, BoolExpr):
        left = _eval_when(node.left, rec)
        right = _eval_when(node.right, rec)
        return (left and right) if node.op == "AND" else (left or right)
    if isinstance(node, AllenTest):
        return allen_relation(_interval_of(node.left, rec), _interval_of(node.right, rec)) is node.relation
    if isinstance(node, IntersectsTest):
        a = _interval_of(node.left, rec)
        b = _interval_of(node.right, rec)
        return a.start < b.end_key() and b.start < a.end_key()
    if isinstance(node, InstantTest):
        left = _instant_of(node.left, rec)
        right = _instant_of(node.right, rec)
        if node.op == "BEFORE":
            return left < right
        if node.op == "AFTER":
            return left > right
        return left == right
    raise TsqlEvalError(f"bad WHEN node {node!r}")


def _interval_of(node, rec: BitemporalRecord) -> Interval:
    if isinstance(node, ValidRef):
        return rec.valid
    if isinstance(node, IntervalLit):
        return Interval(node.start, node.end)
    raise TsqlEvalError(f"not an interval operand: {node!r}")


def _instant_of(node, rec: BitemporalRecord) -> float:
    if isinstance(node, FieldRef):
        if node.name == "VALID_START":
            return rec.valid.start
        if node.name == "VALID_END":
            return rec.valid.end_key()
        return rec.tt
    if isinstance(node, InstantLit):
        return _INF if node.value is None else node.value
    raise TsqlEvalError(f"not an instant operand: {node!r}")


# -- DML ----------------------------------------------------------------------


def _eval_insert(stmt: Insert, store: TemporalStore) -> DmlResult:
    table = store.table(stmt.table)
    payload = dict(zip(stmt.columns, stmt.values))
    key = payload.get(table.key_attr)
    if key is None:
        raise TsqlEvalError(f"INSERT must supply the key attribute {table.key_attr!r}")
    valid_start = stmt.valid_start if stmt.valid_start is not None else store.now()
    table.insert(str(key), payload, valid_start)
    return DmlResult(affected=1)


def _matching_keys(table: EntityTable, where) -> list[str]:
    keys = []
    for rec in table.current_records():
        if where is None or _eval_where(where, rec.payload, table):
            keys.append(rec.key)
    return keys


def _eval_update(stmt: Update, store: TemporalStore) -> DmlResult:
    table = store.table(stmt.table)
    for attr, _ in stmt.assignments:
        if attr not in table.schema:
            raise TsqlEvalError(f"unknown attribute {attr!r} in table {table.name!r}")
    valid_from = stmt.valid_start if stmt.valid_start is not None else store.now()
    affected = 0
    for key in _matching_keys(table, stmt.where):
        current = table.current(key)
        payload = dict(current.payload)
        payload.update(dict(stmt.assignments))
        table.update(key, payload, valid_from)
        affected += 1
    return DmlResult(affected=affected)


def _eval_delete(stmt: Delete, store: TemporalStore) -> DmlResult:
    table = store.table(stmt.table)
    at = stmt.valid_end if stmt.valid_end is not None else store.now()
    affected = 0
    for key in _matching_keys(table, stmt.where):
        table.delete(key, at)
        affected += 1
    return DmlResult(affected=affected)
