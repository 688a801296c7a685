"""Shared test utilities: synthetic packs, random stores/queries/ASTs and
the independent oracles the property suites compare against.

The oracles here deliberately re-derive semantics from first principles
(textbook inequality definitions, naive replay lists, brute-force filters)
instead of calling back into the implementation under test.
"""
from __future__ import annotations

import operator
import random
import string

from meddx.knowledge import KnowledgePack, parse_pack
from meddx.store import EntityTable, LogicalClock, TemporalStore
from meddx.tsql.ast_nodes import (
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
    Update,
    ValidRef,
)
from meddx.tsql.allen import AllenRelation

INF = float("inf")

# identifiers guaranteed not to collide with TSQL keywords
IDENT_POOL = ("t", "patient", "visits", "obs", "alpha", "beta_1", "z9", "Reading", "dose")


# ---------------------------------------------------------------------------
# Synthetic packs
# ---------------------------------------------------------------------------


def make_pack(doc: dict) -> KnowledgePack:
    return parse_pack(doc)


def tiny_pack_doc() -> dict:
    """Two symptoms, two diseases, one subpart; handy mutation target."""
    return {
        "manifest": {
            "profile": "demo",
            "symptoms": 2,
            "diseases": 2,
            "subparts": {"nose": {"symptoms": 2, "diseases": 2}},
        },
        "parts": [{"name": "head", "subparts": [
            {"id": "nose", "symptoms": ["s1", "s2"], "diseases": ["d1", "d2"]},
        ]}],
        "symptoms": [
            {"id": "s1", "icd": "R06.7", "name": "First sign"},
            {"id": "s2", "icd": "R09.81", "name": "Second sign"},
        ],
        "diseases": [
            {"id": "d1", "icd": "J00", "name": "Condition one",
             "profile": {"s1": {"lower": 0.2, "upper": 0.8, "weight": 1.0}}},
            {"id": "d2", "icd": "J30.1", "name": "Condition two",
             "profile": {"s1": {"lower": 0.0, "upper": 0.3, "weight": 0.6},
                         "s2": {"lower": 0.5, "upper": 1.0, "weight": 0.9}}},
        ],
        "rules": [],
    }


def synthetic_pack(rng: random.Random, n_symptoms: int = 8, n_diseases: int = 6) -> KnowledgePack:
    """Random well-formed demo pack with one subpart holding everything."""
    symptoms = [
        {"id": f"sym{i}", "icd": f"R{rng.randrange(10, 99)}.{rng.randrange(10)}",
         "name": f"Sign {i}"}
        for i in range(n_symptoms)
    ]
    diseases = []
    for i in range(n_diseases):
        profile = {}
        for sym in rng.sample(range(n_symptoms), rng.randint(1, min(4, n_symptoms))):
            lower = round(rng.uniform(0.0, 0.8), 2)
            upper = round(rng.uniform(lower, 1.0), 2)
            profile[f"sym{sym}"] = {
                "lower": lower, "upper": upper, "weight": round(rng.uniform(0.05, 1.0), 2)
            }
        diseases.append({
            "id": f"dis{i}", "icd": f"J{rng.randrange(10, 99)}", "name": f"Illness {i}",
            "profile": profile,
        })
    return make_pack({
        "manifest": {
            "profile": "demo",
            "symptoms": n_symptoms,
            "diseases": n_diseases,
            "subparts": {"zone": {"symptoms": n_symptoms, "diseases": n_diseases}},
        },
        "parts": [{"name": "chest", "subparts": [{
            "id": "zone",
            "symptoms": [s["id"] for s in symptoms],
            "diseases": [d["id"] for d in diseases],
        }]}],
        "symptoms": symptoms,
        "diseases": diseases,
        "rules": [],
    })


# ---------------------------------------------------------------------------
# Allen relation oracle: textbook inequality definitions
# ---------------------------------------------------------------------------

RELATION_PREDICATES = {
    "BEFORE": lambda a, b: a[1] < b[0],
    "AFTER": lambda a, b: b[1] < a[0],
    "MEETS": lambda a, b: a[1] == b[0],
    "MET_BY": lambda a, b: b[1] == a[0],
    "OVERLAPS": lambda a, b: a[0] < b[0] < a[1] < b[1],
    "OVERLAPPED_BY": lambda a, b: b[0] < a[0] < b[1] < a[1],
    "STARTS": lambda a, b: a[0] == b[0] and a[1] < b[1],
    "STARTED_BY": lambda a, b: a[0] == b[0] and b[1] < a[1],
    "DURING": lambda a, b: b[0] < a[0] and a[1] < b[1],
    "CONTAINS": lambda a, b: a[0] < b[0] and b[1] < a[1],
    "FINISHES": lambda a, b: a[1] == b[1] and b[0] < a[0],
    "FINISHED_BY": lambda a, b: a[1] == b[1] and a[0] < b[0],
    "EQUALS": lambda a, b: a[0] == b[0] and a[1] == b[1],
}


def holding_relations(a: tuple[float, float], b: tuple[float, float]) -> list[str]:
    """All relation names whose textbook predicate holds for (a, b)."""
    return [name for name, pred in RELATION_PREDICATES.items() if pred(a, b)]


def random_interval(rng: random.Random, lo: int = -1000, hi: int = 1000,
                    forever_p: float = 0.15) -> tuple[int, int | None]:
    start = rng.randint(lo, hi - 1)
    if rng.random() < forever_p:
        return start, None
    return start, rng.randint(start + 1, hi)


# ---------------------------------------------------------------------------
# Naive bitemporal snapshot oracle: an append-only versioned list
# ---------------------------------------------------------------------------


class NaiveVersionList:
    """Replays insert/update/delete as plain (payload, start, end) triples."""

    def __init__(self):
        self.rows: dict[str, list[list]] = {}

    def insert(self, key: str, payload: dict, valid_start: int) -> None:
        self.rows.setdefault(key, []).append([dict(payload), valid_start, None])

    def update(self, key: str, payload: dict, valid_from: int) -> None:
        self.rows[key][-1][2] = valid_from
        self.rows[key].append([dict(payload), valid_from, None])

    def delete(self, key: str, at: int) -> None:
        self.rows[key][-1][2] = at

    def snapshot(self, as_of: int) -> list[dict]:
        hits = []
        for key in self.rows:
            for payload, start, end in self.rows[key]:
                if start <= as_of and (end is None or as_of < end):
                    hits.append((key, start, payload))
        hits.sort(key=lambda t: t[:2])
        return [payload for _, _, payload in hits]


def random_dml_run(rng: random.Random, table: EntityTable, oracle: NaiveVersionList,
                   n_ops: int, n_keys: int = 10) -> None:
    """Drive table and oracle through the same random valid op sequence.
    Resumable: derives the starting state from the table's version set."""
    next_time = {f"k{i}": 0 for i in range(n_keys)}
    for rec in table.versions(include_tombstones=True):
        horizon = max(rec.valid.start, rec.valid.end or 0)
        next_time[rec.key] = max(next_time.get(rec.key, 0), horizon)
    live = {rec.key for rec in table.current_records()}
    for _ in range(n_ops):
        key = f"k{rng.randrange(n_keys)}"
        t = next_time[key] + rng.randint(1, 50)
        payload = {"id": key, "v": rng.randint(0, 999)}
        if key not in live:
            table.insert(key, payload, t)
            oracle.insert(key, payload, t)
            live.add(key)
        else:
            if rng.random() < 0.35:
                table.delete(key, t)
                oracle.delete(key, t)
                live.discard(key)
            else:
                table.update(key, payload, t)
                oracle.update(key, payload, t)
        next_time[key] = t


# ---------------------------------------------------------------------------
# Random stores + WHEN queries and the brute-force SELECT oracle
# ---------------------------------------------------------------------------

QUERY_SCHEMA = {"id": "str", "v": "int", "w": "float", "tag": "str"}


def random_query_store(rng: random.Random, max_versions: int = 1000) -> TemporalStore:
    store = TemporalStore(clock=LogicalClock(10_000))
    table = store.create_table("t", QUERY_SCHEMA)
    next_time = {f"k{i}": 0 for i in range(10)}
    live: set[str] = set()
    versions = 0
    while versions < max_versions:
        key = f"k{rng.randrange(10)}"
        t = next_time[key] + rng.randint(1, 40)
        payload = {
            "id": key,
            "v": rng.randint(-50, 50),
            "w": round(rng.uniform(-5, 5), 3),
            "tag": rng.choice(("a", "b", "c")),
        }
        if key not in live:
            table.insert(key, payload, t)
            live.add(key)
        elif rng.random() < 0.3:
            table.delete(key, t)
            live.discard(key)
        else:
            table.update(key, payload, t)
        next_time[key] = t
        versions += 1
    return store


def random_where(rng: random.Random, depth: int = 2):
    if depth > 0 and rng.random() < 0.4:
        return BoolExpr(rng.choice(("AND", "OR")),
                        random_where(rng, depth - 1), random_where(rng, depth - 1))
    attr = rng.choice(("v", "w", "tag"))
    op = rng.choice(("=", "<>", "<", "<=", ">", ">="))
    if attr == "v":
        value: object = rng.randint(-50, 50)
    elif attr == "w":
        value = round(rng.uniform(-5, 5), 3)
    else:
        value = rng.choice(("a", "b", "c"))
    return Comparison(attr, op, value)


def _random_iexpr(rng: random.Random):
    if rng.random() < 0.5:
        return ValidRef()
    start, end = random_interval(rng, 0, 1200, forever_p=0.2)
    return IntervalLit(start, end)


def _random_pexpr(rng: random.Random):
    if rng.random() < 0.5:
        return FieldRef(rng.choice(("VALID_START", "VALID_END", "TT")))
    if rng.random() < 0.15:
        return InstantLit(None)
    return InstantLit(rng.randint(0, 1200))


def random_when(rng: random.Random, depth: int = 2):
    if depth > 0 and rng.random() < 0.4:
        return BoolExpr(rng.choice(("AND", "OR")),
                        random_when(rng, depth - 1), random_when(rng, depth - 1))
    kind = rng.random()
    if kind < 0.5:
        left, right = _random_iexpr(rng), _random_iexpr(rng)
        return AllenTest(left, AllenRelation(rng.choice(list(RELATION_PREDICATES))), right)
    if kind < 0.65:
        return IntersectsTest(_random_iexpr(rng), _random_iexpr(rng))
    return InstantTest(_random_pexpr(rng), rng.choice(("BEFORE", "AFTER", "AT")),
                       _random_pexpr(rng))


_CMP = {"=": operator.eq, "<>": operator.ne, "<": operator.lt,
        "<=": operator.le, ">": operator.gt, ">=": operator.ge}


def oracle_where(node, payload: dict) -> bool:
    if isinstance(node, BoolExpr):
        if node.op == "AND":
            return oracle_where(node.left, payload) and oracle_where(node.right, payload)
        return oracle_where(node.left, payload) or oracle_where(node.right, payload)
    return _CMP[node.op](payload[node.attr], node.value)


def _oracle_interval(node, record) -> tuple[float, float]:
    if isinstance(node, ValidRef):
        return (record.valid.start, INF if record.valid.end is None else record.valid.end)
    return (node.start, INF if node.end is None else node.end)


def _oracle_instant(node, record) -> float:
    if isinstance(node, FieldRef):
        if node.name == "VALID_START":
            return record.valid.start
        if node.name == "VALID_END":
            return INF if record.valid.end is None else record.valid.end
        return record.tt
    return INF if node.value is None else node.value


def oracle_when(node, record) -> bool:
    if isinstance(node, BoolExpr):
        if node.op == "AND":
            return oracle_when(node.left, record) and oracle_when(node.right, record)
        return oracle_when(node.left, record) or oracle_when(node.right, record)
    if isinstance(node, AllenTest):
        a = _oracle_interval(node.left, record)
        b = _oracle_interval(node.right, record)
        return RELATION_PREDICATES[node.relation.value](a, b)
    if isinstance(node, IntersectsTest):
        a = _oracle_interval(node.left, record)
        b = _oracle_interval(node.right, record)
        return a[0] < b[1] and b[0] < a[1]
    left = _oracle_instant(node.left, record)
    right = _oracle_instant(node.right, record)
    return {"BEFORE": left < right, "AFTER": left > right, "AT": left == right}[node.op]


def oracle_select(stmt: Select, table: EntityTable) -> list[tuple]:
    """Brute-force filter over the full version set (or current rows when no
    WHEN is present), projecting payload attributes only."""
    records = table.current_records() if stmt.when is None else table.versions()
    columns = list(table.schema) if stmt.columns is None else list(stmt.columns)
    rows = []
    for rec in records:
        if stmt.where is not None and not oracle_where(stmt.where, rec.payload):
            continue
        if stmt.when is not None and not oracle_when(stmt.when, rec):
            continue
        provenance = "current" if rec.valid.end is None else "history"
        rows.append((tuple(rec.payload[c] for c in columns), provenance))
    rows.sort(key=repr)
    return rows


# ---------------------------------------------------------------------------
# Random statement ASTs for the parser round-trip property
# ---------------------------------------------------------------------------


def _random_literal(rng: random.Random):
    kind = rng.random()
    if kind < 0.4:
        return rng.randint(-10_000, 10_000)
    if kind < 0.7:
        return round(rng.uniform(-100, 100), rng.randint(0, 6))
    alphabet = string.ascii_letters + string.digits + " '_-"
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))


def _random_columns(rng: random.Random):
    if rng.random() < 0.3:
        return None
    pool = list(IDENT_POOL) + ["VALID", "VALID_START", "VALID_END", "TT"]
    return tuple(rng.sample(pool, rng.randint(1, 4)))


def _random_instant(rng: random.Random) -> int:
    # stays within years ~1906..2096
    return rng.randint(-2_000_000_000, 4_000_000_000)


def _random_when_literal(rng: random.Random, depth: int = 2):
    """WHEN tree with wide-range instant/interval literals."""
    if depth > 0 and rng.random() < 0.35:
        return BoolExpr(rng.choice(("AND", "OR")),
                        _random_when_literal(rng, depth - 1),
                        _random_when_literal(rng, depth - 1))
    if rng.random() < 0.6:
        def iexpr():
            if rng.random() < 0.4:
                return ValidRef()
            start = _random_instant(rng)
            end = None if rng.random() < 0.2 else rng.randint(start + 1, start + 10_000_000)
            return IntervalLit(start, end)
        if rng.random() < 0.2:
            return IntersectsTest(iexpr(), iexpr())
        return AllenTest(iexpr(), AllenRelation(rng.choice(list(RELATION_PREDICATES))), iexpr())

    def pexpr():
        r = rng.random()
        if r < 0.4:
            return FieldRef(rng.choice(("VALID_START", "VALID_END", "TT")))
        if r < 0.5:
            return InstantLit(None)
        return InstantLit(_random_instant(rng))

    return InstantTest(pexpr(), rng.choice(("BEFORE", "AFTER", "AT")), pexpr())


def random_statement(rng: random.Random):
    kind = rng.random()
    table = rng.choice(IDENT_POOL)
    if kind < 0.55:
        where = random_where(rng) if rng.random() < 0.6 else None
        when = _random_when_literal(rng) if rng.random() < 0.6 else None
        return Select(_random_columns(rng), table, where, when)
    if kind < 0.75:
        columns = tuple(rng.sample(IDENT_POOL, rng.randint(1, 4)))
        values = tuple(_random_literal(rng) for _ in columns)
        valid_start = _random_instant(rng) if rng.random() < 0.5 else None
        return Insert(table, columns, values, valid_start)
    if kind < 0.9:
        assignments = tuple(
            (ident, _random_literal(rng))
            for ident in rng.sample(IDENT_POOL, rng.randint(1, 3))
        )
        where = random_where(rng) if rng.random() < 0.5 else None
        valid_start = _random_instant(rng) if rng.random() < 0.5 else None
        return Update(table, assignments, where, valid_start)
    where = random_where(rng) if rng.random() < 0.5 else None
    valid_end = _random_instant(rng) if rng.random() < 0.5 else None
    return Delete(table, where, valid_end)
