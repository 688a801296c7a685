"""Bitemporal storage: current + history tables with valid-time intervals
and transaction-time instants.

Each entity table keeps at most one *current* record per key (valid interval
open-ended) and a list of *history* records: closed versions plus tombstone
markers left behind by deletes. Updates and deletes never rewrite history;
they close the current version and archive it. A delete additionally archives
an open-ended tombstone so the gap in the key's timeline is explicit; a later
insert closes that tombstone. Tombstones are bookkeeping, not facts: snapshots
and version scans exclude them unless asked.

Instants are whole seconds since the Unix epoch, UTC. Valid intervals are
half-open ``[start, end)``; ``end is None`` means "until forever".

Persistence is a single append-only journal per table: length-prefixed JSON
records, one per DML operation (format documented in the README). Opening a
store replays the journals to rebuild in-memory state byte-for-byte,
including transaction times.
"""
from __future__ import annotations

import calendar
import json
import struct
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterator

Instant = int

_ISO_FORMAT = "%Y-%m-%dT%H:%M:%SZ"

SCHEMA_TYPES = {"str": str, "int": int, "float": (int, float), "bool": bool}


class StoreError(Exception):
    pass


class UnknownTable(StoreError):
    pass


class DuplicateKey(StoreError):
    pass


class MissingRecord(StoreError):
    """No current record for the key."""


class SchemaMismatch(StoreError):
    pass


class InvalidValidTime(StoreError):
    """A valid-time bound that would create an empty or overlapping interval."""


class BadInstant(StoreError):
    """Unparseable instant literal."""


def parse_instant(text: str) -> Instant:
    """Parse an ISO-8601 UTC literal like ``2020-01-01T00:00:00Z``."""
    try:
        dt = datetime.strptime(text, _ISO_FORMAT)
    except ValueError:
        raise BadInstant(f"bad instant literal {text!r}: expected YYYY-MM-DDThh:mm:ssZ") from None
    return calendar.timegm(dt.timetuple())


def format_instant(value: Instant) -> str:
    return datetime.fromtimestamp(value, tz=timezone.utc).strftime(_ISO_FORMAT)


@dataclass(frozen=True, order=True)
class Interval:
    """Half-open valid-time interval [start, end); end None means forever."""

    start: Instant
    end: Instant | None = None

    def __post_init__(self) -> None:
        if self.end is not None and not self.start < self.end:
            raise InvalidValidTime(f"interval start {self.start} must precede end {self.end}")

    def contains(self, t: Instant) -> bool:
        return self.start <= t and (self.end is None or t < self.end)

    def end_key(self) -> float:
        """The end bound as a comparable number (+inf when open)."""
        return float("inf") if self.end is None else self.end

    def __str__(self) -> str:
        end = "FOREVER" if self.end is None else format_instant(self.end)
        return f"[{format_instant(self.start)}, {end})"


@dataclass(frozen=True)
class BitemporalRecord:
    rid: int
    key: str
    payload: dict
    valid: Interval
    tt: Instant
    tombstone: bool = False


class LogicalClock:
    """Deterministic test clock: strictly increasing integers."""

    def __init__(self, start: Instant = 0):
        self._next = start

    def __call__(self) -> Instant:
        value = self._next
        self._next += 1
        return value


def wall_clock() -> Instant:
    return int(time.time())


class EntityTable:
    """One entity set: schema-checked payloads, keyed versions, journal.

    Writes are serialized by a per-table lock; reads copy under the same lock
    so they observe a consistent version set.
    """

    def __init__(
        self,
        name: str,
        schema: dict[str, str],
        key_attr: str = "id",
        journal_path: Path | None = None,
        clock: Callable[[], Instant] | None = None,
    ):
        for attr, type_name in schema.items():
            if type_name not in SCHEMA_TYPES:
                raise SchemaMismatch(f"unknown schema type {type_name!r} for attribute {attr!r}")
        if key_attr not in schema:
            raise SchemaMismatch(f"key attribute {key_attr!r} not in schema")
        self.name = name
        self.schema = dict(schema)
        self.key_attr = key_attr
        self._clock = clock or wall_clock
        self._lock = threading.Lock()
        self._current: dict[str, BitemporalRecord] = {}
        self._history: dict[str, list[BitemporalRecord]] = {}
        self._last_tt: Instant | None = None
        self._next_rid = 1
        self._journal_path = journal_path

    # -- internals ----------------------------------------------------------

    def _stamp(self) -> Instant:
        t = self._clock()
        if self._last_tt is not None and t < self._last_tt:
            t = self._last_tt
        self._last_tt = t
        return t

    def _check_payload(self, payload: dict) -> dict:
        missing = set(self.schema) - set(payload)
        if missing:
            raise SchemaMismatch(f"table {self.name}: payload missing attributes {sorted(missing)}")
        extra = set(payload) - set(self.schema)
        if extra:
            raise SchemaMismatch(f"table {self.name}: payload has unknown attributes {sorted(extra)}")
        for attr, value in payload.items():
            expected = SCHEMA_TYPES[self.schema[attr]]
            if isinstance(value, bool) and self.schema[attr] != "bool":
                raise SchemaMismatch(f"table {self.name}: attribute {attr!r} must be {self.schema[attr]}")
            if not isinstance(value, expected):
                raise SchemaMismatch(f"table {self.name}: attribute {attr!r} must be {self.schema[attr]}")
        return dict(payload)

    def _journal(self, entry: dict) -> None:
        if self._journal_path is None:
            return
        body = json.dumps(entry, sort_keys=True, separators=(",", ":")).encode("utf-8")
        with open(self._journal_path, "ab") as fh:
            fh.write(struct.pack(">I", len(body)))
            fh.write(body)

    # -- DML ----------------------------------------------------------------

    def insert(self, key: str, payload: dict, valid_start: Instant) -> int:
        """Create the current record for a key, valid [valid_start, forever)."""
        payload = self._check_payload(payload)
        with self._lock:
            if key in self._current:
                raise DuplicateKey(f"table {self.name}: current record for key {key!r} exists")
            tt = self._stamp()
            rid = self._apply_insert(key, payload, valid_start, tt)
            self._journal(
                {"op": "insert", "key": key, "payload": payload, "valid_start": valid_start,
                 "tt": tt, "rid": rid}
            )
            return rid

    def _apply_insert(self, key: str, payload: dict, valid_start: Instant, tt: Instant) -> int:
        history = self._history.setdefault(key, [])
        if history and history[-1].tombstone and history[-1].valid.end is None:
            grave = history[-1]
            if valid_start < grave.valid.start:
                raise InvalidValidTime(
                    f"table {self.name}: insert at {valid_start} precedes deletion of {key!r}"
                )
            if valid_start == grave.valid.start:
                history.pop()  # deletion superseded before it ever "took"
            else:
                history[-1] = BitemporalRecord(
                    grave.rid, key, grave.payload, Interval(grave.valid.start, valid_start),
                    grave.tt, tombstone=True,
                )
        rid = self._next_rid
        self._next_rid += 1
        self._current[key] = BitemporalRecord(rid, key, payload, Interval(valid_start, None), tt)
        return rid

    def update(self, key: str, new_payload: dict, valid_from: Instant) -> None:
        """Close the current version at valid_from and start a new one."""
        new_payload = self._check_payload(new_payload)
        with self._lock:
            old = self._current.get(key)
            if old is None:
                raise MissingRecord(f"table {self.name}: no current record for key {key!r}")
            if not valid_from > old.valid.start:
                raise InvalidValidTime(
                    f"table {self.name}: update valid_from {valid_from} must follow "
                    f"current start {old.valid.start}"
                )
            tt = self._stamp()
            rid = self._apply_update(key, new_payload, valid_from, tt)
            self._journal(
                {"op": "update", "key": key, "payload": new_payload, "valid_from": valid_from,
                 "tt": tt, "rid": rid}
            )

    def _apply_update(self, key: str, payload: dict, valid_from: Instant, tt: Instant) -> int:
        old = self._current[key]
        self._history.setdefault(key, []).append(
            BitemporalRecord(old.rid, key, old.payload, Interval(old.valid.start, valid_from), old.tt)
        )
        rid = self._next_rid
        self._next_rid += 1
        self._current[key] = BitemporalRecord(rid, key, payload, Interval(valid_from, None), tt)
        return rid

    def delete(self, key: str, at: Instant) -> None:
        """Close and archive the current version; leave a tombstone marker."""
        with self._lock:
            old = self._current.get(key)
            if old is None:
                raise MissingRecord(f"table {self.name}: no current record for key {key!r}")
            if not at > old.valid.start:
                raise InvalidValidTime(
                    f"table {self.name}: delete at {at} must follow current start {old.valid.start}"
                )
            tt = self._stamp()
            rid = self._apply_delete(key, at, tt)
            self._journal({"op": "delete", "key": key, "at": at, "tt": tt, "rid": rid})

    def _apply_delete(self, key: str, at: Instant, tt: Instant) -> int:
        old = self._current.pop(key)
        history = self._history.setdefault(key, [])
        history.append(
            BitemporalRecord(old.rid, key, old.payload, Interval(old.valid.start, at), old.tt)
        )
        rid = self._next_rid
        self._next_rid += 1
        history.append(BitemporalRecord(rid, key, {}, Interval(at, None), tt, tombstone=True))
        return rid

    # -- reads --------------------------------------------------------------

    def snapshot(self, as_of: Instant) -> list[dict]:
        """Payloads of every version whose valid interval contains as_of,
        tombstones excluded, ordered by key then valid start."""
        rows = [
            (rec.key, rec.valid.start, dict(rec.payload))
            for rec in self.versions()
            if rec.valid.contains(as_of)
        ]
        rows.sort(key=lambda t: t[:2])
        return [payload for _, _, payload in rows]

    def versions(self, include_tombstones: bool = False) -> list[BitemporalRecord]:
        """Current plus history records, in (key, valid start) order."""
        with self._lock:
            records = [r for recs in self._history.values() for r in recs]
            records.extend(self._current.values())
        if not include_tombstones:
            records = [r for r in records if not r.tombstone]
        records.sort(key=lambda r: (r.key, r.valid.start, r.rid))
        return records

    def current_records(self) -> list[BitemporalRecord]:
        with self._lock:
            records = list(self._current.values())
        records.sort(key=lambda r: r.key)
        return records

    def current(self, key: str) -> BitemporalRecord | None:
        with self._lock:
            return self._current.get(key)

    # -- journal replay -----------------------------------------------------

    def _replay(self, entry: dict) -> None:
        op = entry["op"]
        tt = entry["tt"]
        if op == "insert":
            self._apply_insert(entry["key"], entry["payload"], entry["valid_start"], tt)
        elif op == "update":
            self._apply_update(entry["key"], entry["payload"], entry["valid_from"], tt)
        elif op == "delete":
            self._apply_delete(entry["key"], entry["at"], tt)
        else:
            raise StoreError(f"table {self.name}: unknown journal op {op!r}")
        self._last_tt = tt if self._last_tt is None else max(self._last_tt, tt)
        self._next_rid = max(self._next_rid, entry["rid"] + 1)


class TemporalStore:
    """A directory of entity tables, one journal file per table.

    With ``data_dir=None`` the store is purely in-memory (tests, scratch
    sessions). Otherwise ``<data_dir>/<table>.journal`` files are created and
    replayed on open.
    """

    def __init__(self, data_dir: str | Path | None = None,
                 clock: Callable[[], Instant] | None = None):
        self._data_dir = Path(data_dir) if data_dir is not None else None
        self._clock = clock
        self._tables: dict[str, EntityTable] = {}
        self._lock = threading.Lock()
        # statement-level writer lock: multi-record DML (TSQL UPDATE/DELETE)
        # reads then writes, which single-op table locks cannot make atomic
        self.write_lock = threading.Lock()
        if self._data_dir is not None:
            self._data_dir.mkdir(parents=True, exist_ok=True)
            for journal in sorted(self._data_dir.glob("*.journal")):
                self._open_journal(journal)

    def _open_journal(self, path: Path) -> None:
        entries = list(_read_journal(path))
        if not entries:
            return
        head = entries[0]
        if head.get("op") != "create":
            raise StoreError(f"journal {path.name}: first record must be the table definition")
        table = EntityTable(
            head["table"], head["schema"], head.get("key_attr", "id"),
            journal_path=path, clock=self._clock,
        )
        for entry in entries[1:]:
            table._replay(entry)
        self._tables[table.name] = table

    def create_table(self, name: str, schema: dict[str, str], key_attr: str = "id") -> EntityTable:
        with self._lock:
            if name in self._tables:
                raise StoreError(f"table {name!r} already exists")
            journal_path = None
            if self._data_dir is not None:
                journal_path = self._data_dir / f"{name}.journal"
            table = EntityTable(name, schema, key_attr, journal_path=journal_path, clock=self._clock)
            table._journal({"op": "create", "table": name, "schema": schema, "key_attr": key_attr})
            self._tables[name] = table
            return table

    def table(self, name: str) -> EntityTable:
        try:
            return self._tables[name]
        except KeyError:
            raise UnknownTable(f"unknown table {name!r}") from None

    def has_table(self, name: str) -> bool:
        return name in self._tables

    def table_names(self) -> list[str]:
        return sorted(self._tables)

    def now(self) -> Instant:
        clock = self._clock or wall_clock
        return clock()


def _read_journal(path: Path) -> Iterator[dict]:
    data = path.read_bytes()
    offset = 0
    while offset < len(data):
        if offset + 4 > len(data):
            raise StoreError(f"journal {path.name}: truncated length prefix at byte {offset}")
        (length,) = struct.unpack_from(">I", data, offset)
        offset += 4
        if offset + length > len(data):
            raise StoreError(f"journal {path.name}: truncated record at byte {offset}")
        yield json.loads(data[offset : offset + length].decode("utf-8"))
        offset += length
