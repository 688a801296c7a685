"""The thirteen Allen relations, adapted to half-open intervals.

With [start, end) semantics the boundary cases stay a clean partition:
MEETS holds exactly when a.end == b.start and BEFORE when a.end < b.start,
so for any pair of well-formed intervals exactly one relation holds.
Open-ended intervals (end = forever) compare with an infinite end bound.
"""
from __future__ import annotations

from enum import Enum

from ..store import Interval


class AllenRelation(str, Enum):
    BEFORE = "BEFORE"
    AFTER = "AFTER"
    MEETS = "MEETS"
    MET_BY = "MET_BY"
    OVERLAPS = "OVERLAPS"
    OVERLAPPED_BY = "OVERLAPPED_BY"
    STARTS = "STARTS"
    STARTED_BY = "STARTED_BY"
    DURING = "DURING"
    CONTAINS = "CONTAINS"
    FINISHES = "FINISHES"
    FINISHED_BY = "FINISHED_BY"
    EQUALS = "EQUALS"


_INVERSE = {
    AllenRelation.BEFORE: AllenRelation.AFTER,
    AllenRelation.AFTER: AllenRelation.BEFORE,
    AllenRelation.MEETS: AllenRelation.MET_BY,
    AllenRelation.MET_BY: AllenRelation.MEETS,
    AllenRelation.OVERLAPS: AllenRelation.OVERLAPPED_BY,
    AllenRelation.OVERLAPPED_BY: AllenRelation.OVERLAPS,
    AllenRelation.STARTS: AllenRelation.STARTED_BY,
    AllenRelation.STARTED_BY: AllenRelation.STARTS,
    AllenRelation.DURING: AllenRelation.CONTAINS,
    AllenRelation.CONTAINS: AllenRelation.DURING,
    AllenRelation.FINISHES: AllenRelation.FINISHED_BY,
    AllenRelation.FINISHED_BY: AllenRelation.FINISHES,
    AllenRelation.EQUALS: AllenRelation.EQUALS,
}


def inverse_relation(rel: AllenRelation) -> AllenRelation:
    """The relation of (b, a) given the relation of (a, b)."""
    return _INVERSE[rel]


def allen_relation(a: Interval, b: Interval) -> AllenRelation:
    """The unique relation holding between intervals a and b."""
    a_start, a_end = a.start, a.end_key()
    b_start, b_end = b.start, b.end_key()

    if a_end < b_start:
        return AllenRelation.BEFORE
    if b_end < a_start:
        return AllenRelation.AFTER
    if a_end == b_start:
        return AllenRelation.MEETS
    if b_end == a_start:
        return AllenRelation.MET_BY

    # The intervals share interior points from here on.
    if a_start == b_start and a_end == b_end:
        return AllenRelation.EQUALS
    if a_start == b_start:
        return AllenRelation.STARTS if a_end < b_end else AllenRelation.STARTED_BY
    if a_end == b_end:
        return AllenRelation.FINISHED_BY if a_start < b_start else AllenRelation.FINISHES
    if a_start < b_start:
        return AllenRelation.CONTAINS if b_end < a_end else AllenRelation.OVERLAPS
    return AllenRelation.DURING if a_end < b_end else AllenRelation.OVERLAPPED_BY
