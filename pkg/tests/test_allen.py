import random

import pytest

from meddx.store import Interval
from meddx.tsql import AllenRelation, allen_relation, inverse_relation

from helpers import holding_relations, random_interval


def iv(start, end=None) -> Interval:
    return Interval(start, end)


@pytest.mark.parametrize(
    ("a", "b", "expected"),
    [
        ((1, 3), (3, 5), AllenRelation.MEETS),  # shared endpoint under half-open semantics
        ((3, 5), (1, 3), AllenRelation.MET_BY),
        ((1, 5), (2, 3), AllenRelation.CONTAINS),
        ((2, 3), (1, 5), AllenRelation.DURING),
        ((2, 4), (2, 6), AllenRelation.STARTS),
        ((2, 6), (2, 4), AllenRelation.STARTED_BY),
        ((1, 2), (4, 9), AllenRelation.BEFORE),
        ((4, 9), (1, 2), AllenRelation.AFTER),
        ((1, 4), (2, 6), AllenRelation.OVERLAPS),
        ((2, 6), (1, 4), AllenRelation.OVERLAPPED_BY),
        ((3, 7), (1, 7), AllenRelation.FINISHES),
        ((1, 7), (3, 7), AllenRelation.FINISHED_BY),
        ((2, 8), (2, 8), AllenRelation.EQUALS),
    ],
)
def test_all_thirteen_relations(a, b, expected):
    assert allen_relation(iv(*a), iv(*b)) is expected


def test_open_ended_intervals():
    assert allen_relation(iv(5), iv(5)) is AllenRelation.EQUALS
    assert allen_relation(iv(1), iv(3, 8)) is AllenRelation.CONTAINS
    assert allen_relation(iv(3, 8), iv(1)) is AllenRelation.DURING
    assert allen_relation(iv(1, 5), iv(5)) is AllenRelation.MEETS
    assert allen_relation(iv(3), iv(1)) is AllenRelation.FINISHES
    assert allen_relation(iv(1), iv(3)) is AllenRelation.FINISHED_BY
    assert allen_relation(iv(1), iv(1, 4)) is AllenRelation.STARTED_BY


def test_partition_property_randomized():
    rng = random.Random(13)
    for _ in range(2000):
        a = random_interval(rng)
        b = random_interval(rng)
        got = allen_relation(iv(*a), iv(*b))
        a_num = (a[0], float("inf") if a[1] is None else a[1])
        b_num = (b[0], float("inf") if b[1] is None else b[1])
        holding = holding_relations(a_num, b_num)
        assert holding == [got.value], (a, b)


def test_inverse_symmetry_randomized():
    rng = random.Random(29)
    for _ in range(2000):
        a = iv(*random_interval(rng))
        b = iv(*random_interval(rng))
        assert allen_relation(b, a) is inverse_relation(allen_relation(a, b))


def test_adjacent_small_intervals_partition():
    # exhaustive over a small grid, including every boundary coincidence
    points = range(0, 5)
    intervals = [iv(s, e) for s in points for e in points if s < e]
    for a in intervals:
        for b in intervals:
            a_num = (a.start, a.end)
            b_num = (b.start, b.end)
            assert holding_relations(a_num, b_num) == [allen_relation(a, b).value]
