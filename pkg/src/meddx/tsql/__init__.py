"""TSQL: a small temporal SQL dialect.

SELECT grows an extra WHEN clause for temporal predicates -- instant
comparisons (BEFORE, AFTER, AT) over VALID_START / VALID_END / TT and the
thirteen Allen relations over VALID or interval literals. UPDATE and DELETE
keep history by construction (they delegate to the bitemporal store).
"""
from .allen import AllenRelation, allen_relation, inverse_relation
from .ast_nodes import (
    AllenTest,
    BoolExpr,
    Comparison,
    Delete,
    FieldRef,
    Insert,
    InstantLit,
    InstantTest,
    IntersectsTest,
    IntervalLit,
    Select,
    Update,
    ValidRef,
    render,
)
from .errors import TsqlError, TsqlEvalError, TsqlSyntaxError, TsqlTypeError
from .evaluate import DmlResult, ResultSet, evaluate
from .parser import parse

__all__ = [
    "AllenRelation",
    "allen_relation",
    "inverse_relation",
    "AllenTest",
    "BoolExpr",
    "Comparison",
    "Delete",
    "FieldRef",
    "Insert",
    "InstantLit",
    "InstantTest",
    "IntersectsTest",
    "IntervalLit",
    "Select",
    "Update",
    "ValidRef",
    "render",
    "TsqlError",
    "TsqlEvalError",
    "TsqlSyntaxError",
    "TsqlTypeError",
    "DmlResult",
    "ResultSet",
    "evaluate",
    "parse",
]
