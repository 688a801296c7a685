import random

import pytest

from meddx.store import LogicalClock, TemporalStore, UnknownTable, parse_instant
from meddx.tsql import DmlResult, Select, evaluate, parse
from meddx.tsql.errors import TsqlEvalError

from helpers import QUERY_SCHEMA, oracle_select, random_query_store, random_when, random_where


@pytest.fixture()
def store():
    store = TemporalStore(clock=LogicalClock(5000))
    t = store.create_table("t", {"id": "str", "v": "int", "tag": "str"})
    t.insert("a", {"id": "a", "v": 1, "tag": "x"}, 100)
    t.update("a", {"id": "a", "v": 2, "tag": "x"}, 200)
    t.update("a", {"id": "a", "v": 3, "tag": "y"}, 300)
    t.insert("b", {"id": "b", "v": 10, "tag": "y"}, 150)
    return store


def rows(result):
    return [tuple(row) for row in result.rows]


# -- scope ---------------------------------------------------------------------


def test_select_without_when_scans_current_only(store):
    result = evaluate(parse("SELECT id, v FROM t"), store)
    assert sorted(rows(result)) == [("a", 3), ("b", 10)]
    assert set(result.provenance) == {"current"}


def test_when_widens_to_history(store):
    result = evaluate(parse(
        "SELECT id, v FROM t WHEN VALID_START AFTER 1970-01-01T00:00:00Z"
    ), store)
    assert sorted(rows(result)) == [("a", 1), ("a", 2), ("a", 3), ("b", 10)]
    assert sorted(result.provenance) == ["current", "current", "history", "history"]


def test_tombstones_stay_invisible(store):
    store.table("t").delete("b", 400)
    result = evaluate(parse("SELECT id FROM t WHEN VALID_START AFTER 1970-01-01T00:00:00Z"), store)
    assert sorted(rows(result)) == [("a",), ("a",), ("a",), ("b",)]


# -- WHEN semantics -----------------------------------------------------------------


def test_overlap_query_matches_exact_versions(store):
    # versions of a: [100,200) [200,300) [300,inf); literal [150,250)
    # strict overlap holds for [100,200) only; [200,300) is DURING the literal
    result = evaluate(parse(
        "SELECT v FROM t WHERE id = 'a' WHEN VALID OVERLAPS "
        "[1970-01-01T00:02:30Z, 1970-01-01T00:04:10Z)"
    ), store)
    assert rows(result) == [(1,)]


def test_during_query(store):
    result = evaluate(parse(
        "SELECT v FROM t WHERE id = 'a' WHEN VALID DURING "
        "[1970-01-01T00:01:00Z, 1970-01-01T00:10:00Z)"
    ), store)
    # [100,200) and [200,300) sit strictly inside [60,600); [300,inf) does not
    assert sorted(rows(result)) == [(1,), (2,)]


def test_intersects_is_the_loose_shared_instant_test(store):
    # all three versions of a share instants with [150, 250); strict OVERLAPS
    # keeps only the first (see test above)
    result = evaluate(parse(
        "SELECT v FROM t WHERE id = 'a' WHEN VALID INTERSECTS "
        "[1970-01-01T00:02:30Z, 1970-01-01T00:04:10Z)"
    ), store)
    assert sorted(rows(result)) == [(1,), (2,)]
    window = evaluate(parse(
        "SELECT v FROM t WHERE id = 'a' WHEN VALID INTERSECTS "
        "[1970-01-01T00:02:30Z, FOREVER)"
    ), store)
    assert sorted(rows(window)) == [(1,), (2,), (3,)]


def test_intersects_row_for_row_against_standalone_predicate(store):
    lo, hi = 150, 250
    expected = sorted(
        (rec.payload["v"],)
        for rec in store.table("t").versions()
        if rec.key == "a"
        and rec.valid.start < hi
        and lo < (float("inf") if rec.valid.end is None else rec.valid.end)
    )
    got = evaluate(parse(
        "SELECT v FROM t WHERE id = 'a' WHEN VALID INTERSECTS "
        "[1970-01-01T00:02:30Z, 1970-01-01T00:04:10Z)"
    ), store)
    assert sorted(rows(got)) == expected


def test_valid_end_at_forever_is_current(store):
    result = evaluate(parse("SELECT id FROM t WHEN VALID_END AT FOREVER"), store)
    assert sorted(rows(result)) == [("a",), ("b",)]


def test_tt_comparisons(store):
    # logical tt: a@5000, a-update@5001, a-update@5002, b@5003
    result = evaluate(parse(
        "SELECT id, v FROM t WHEN TT BEFORE 1970-03-04T20:56:41Z"
    ), store)
    # 5001 seconds after epoch? No: the literal is just a big instant; all tts qualify
    assert len(result.rows) == 4


def test_where_and_when_combine(store):
    result = evaluate(parse(
        "SELECT id, v FROM t WHERE v > 1 WHEN VALID_START BEFORE 1970-01-01T00:04:00Z"
    ), store)
    assert sorted(rows(result)) == [("a", 2), ("b", 10)]


def test_temporal_projection(store):
    result = evaluate(parse("SELECT id, VALID_START, VALID_END FROM t WHERE id = 'b'"), store)
    assert rows(result) == [("b", "1970-01-01T00:02:30Z", "FOREVER")]


# -- errors ------------------------------------------------------------------------


def test_unknown_table(store):
    with pytest.raises(UnknownTable):
        evaluate(parse("SELECT * FROM ghosts"), store)


def test_unknown_attribute(store):
    with pytest.raises(TsqlEvalError):
        evaluate(parse("SELECT nope FROM t"), store)
    with pytest.raises(TsqlEvalError):
        evaluate(parse("SELECT * FROM t WHERE nope = 1"), store)


def test_comparison_type_mismatch(store):
    with pytest.raises(TsqlEvalError):
        evaluate(parse("SELECT * FROM t WHERE v = 'one'"), store)
    with pytest.raises(TsqlEvalError):
        evaluate(parse("SELECT * FROM t WHERE tag > 3"), store)


# -- DML ----------------------------------------------------------------------------


def test_insert_then_select(store):
    result = evaluate(parse(
        "INSERT INTO t (id, v, tag) VALUES ('c', 5, 'z') "
        "WHEN VALID_START AT 1970-01-01T00:10:00Z"
    ), store)
    assert result == DmlResult(affected=1)
    got = evaluate(parse("SELECT id, v FROM t WHERE id = 'c'"), store)
    assert rows(got) == [("c", 5)]
    rec = store.table("t").current("c")
    assert rec.valid.start == 600


def test_update_archives_history(store):
    evaluate(parse(
        "UPDATE t SET v = 99 WHERE id = 'b' WHEN VALID_START AT 1970-01-01T00:10:00Z"
    ), store)
    closed = evaluate(parse(
        "SELECT id, v FROM t WHERE id = 'b' WHEN VALID_END BEFORE FOREVER"
    ), store)
    assert ("b", 10) in rows(closed)
    current = evaluate(parse("SELECT v FROM t WHERE id = 'b'"), store)
    assert rows(current) == [(99,)]


def test_update_without_where_touches_all_current(store):
    result = evaluate(parse(
        "UPDATE t SET tag = 'all' WHEN VALID_START AT 1970-01-01T01:00:00Z"
    ), store)
    assert result.affected == 2


def test_delete_via_tsql(store):
    evaluate(parse("DELETE FROM t WHERE id = 'a' WHEN VALID_END AT 1970-01-01T00:10:00Z"), store)
    assert rows(evaluate(parse("SELECT id FROM t"), store)) == [("b",)]
    # history of a is still queryable
    past = evaluate(parse(
        "SELECT id FROM t WHERE id = 'a' WHEN VALID_START AFTER 1970-01-01T00:00:00Z"
    ), store)
    assert len(past.rows) == 3


def test_dml_defaults_to_store_clock(store):
    evaluate(parse("INSERT INTO t (id, v, tag) VALUES ('d', 1, 'x')"), store)
    rec = store.table("t").current("d")
    assert rec.valid.start >= 5000  # logical clock territory, not caller-chosen


def test_insert_must_cover_key_attribute(store):
    with pytest.raises(TsqlEvalError):
        evaluate(parse("INSERT INTO t (v, tag) VALUES (1, 'x')"), store)


def test_update_unknown_assignment_attribute(store):
    with pytest.raises(TsqlEvalError):
        evaluate(parse("UPDATE t SET nope = 1"), store)


# -- oracle equivalence ---------------------------------------------------------------


def result_key(result):
    return sorted(
        ((tuple(row), prov) for row, prov in zip(result.rows, result.provenance)),
        key=repr,
    )


def test_random_when_queries_match_brute_force():
    rng = random.Random(31337)
    store = random_query_store(rng, max_versions=300)
    table = store.table("t")
    for case in range(40):
        stmt = Select(
            None,
            "t",
            random_where(rng) if rng.random() < 0.5 else None,
            random_when(rng),
        )
        got = evaluate(stmt, store)
        expected = sorted(oracle_select(stmt, table), key=repr)
        assert result_key(got) == expected, f"case {case}"


def test_three_version_key_overlap_rows(store):
    # row-for-row check against a standalone overlap predicate
    literal = (parse_instant("1970-01-01T00:02:30Z"), parse_instant("1970-01-01T00:04:10Z"))
    expected = []
    for rec in store.table("t").versions():
        if rec.key != "a":
            continue
        start = rec.valid.start
        end = float("inf") if rec.valid.end is None else rec.valid.end
        # strict Allen overlap of the version with the literal
        if start < literal[0] < end < literal[1]:
            expected.append((rec.payload["v"],))
    got = evaluate(parse(
        "SELECT v FROM t WHERE id = 'a' WHEN VALID OVERLAPS "
        "[1970-01-01T00:02:30Z, 1970-01-01T00:04:10Z)"
    ), store)
    assert rows(got) == expected == [(1,)]
