"""HTTP/JSON API for triage sessions, knowledge browsing, TSQL and history.

The dispatch core (:meth:`TriageService.handle`) is plain
(method, path, query, body) -> (status, document), so the whole API is
testable without sockets; a thin ``http.server`` layer carries it in
production. Distances are serialized as strings with exactly four decimals
so every surface (API, CLI, UI) shows byte-identical numbers.

Endpoints:

    POST /sessions                       start a session
    GET  /body/parts                     the eight body parts
    GET  /body/{part}/subparts           subparts of a part
    GET  /subparts/{id}/symptoms         symptoms of a subpart
    POST /sessions/{id}/symptoms         submit the initial severity map
    GET  /sessions/{id}/question         outstanding question, if any
    POST /sessions/{id}/answers          answer the outstanding question
    GET  /sessions/{id}/diagnosis        current top-3
    POST /sessions/{id}/finalize         persist the decision
    POST /tsql                           run one TSQL statement
    GET  /patients/{id}/history?as_of=   diagnosis snapshot for a patient

Sessions are in-memory with an idle expiry (default 30 minutes); only
finalized decisions reach the store.
"""
from __future__ import annotations

import json
import re
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qsl, urlsplit

from . import knowledge
from .diagnosis import DiagnosisConfig, DiagnosisError, SeverityRangeError
from .engine import (
    DIAGNOSIS_TABLE,
    EngineError,
    Phase,
    PhaseError,
    Session,
    TriageEngine,
    UnknownQuestion,
)
from .knowledge import (
    KnowledgePack,
    PART_NAMES,
    UnknownPart,
    UnknownSubpart,
    UnknownSymptom,
    list_subparts,
    symptoms_for_subpart,
)
from .store import (
    BadInstant,
    DuplicateKey,
    InvalidValidTime,
    MissingRecord,
    SchemaMismatch,
    StoreError,
    TemporalStore,
    UnknownTable,
    parse_instant,
)
from .tsql import DmlResult, TsqlSyntaxError, TsqlTypeError, evaluate, parse
from .tsql.errors import TsqlEvalError

DEFAULT_SESSION_TTL = 30 * 60  # seconds


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, **extra):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.extra = extra

    def body(self) -> dict:
        error = {"code": self.code, "message": self.message}
        error.update(self.extra)
        return {"error": error}


# engine fault -> (HTTP status, machine code); 4xx are caller faults
_ERROR_MAP: list[tuple[type, int, str]] = [
    (UnknownPart, 404, "unknown_part"),
    (UnknownSubpart, 404, "unknown_subpart"),
    (UnknownSymptom, 422, "unknown_symptom"),
    (SeverityRangeError, 422, "invalid_severity"),
    (PhaseError, 409, "wrong_phase"),
    (UnknownQuestion, 409, "unknown_question"),
    (DiagnosisError, 422, "diagnosis_error"),
    (EngineError, 422, "engine_error"),
    (TsqlSyntaxError, 400, "syntax_error"),
    (TsqlTypeError, 400, "type_error"),
    (UnknownTable, 404, "unknown_table"),
    (TsqlEvalError, 400, "eval_error"),
    (BadInstant, 422, "bad_instant"),
    (DuplicateKey, 409, "duplicate_key"),
    (MissingRecord, 409, "missing_record"),
    (SchemaMismatch, 422, "schema_mismatch"),
    (InvalidValidTime, 422, "invalid_valid_time"),
    (StoreError, 409, "store_error"),
]


def _to_api_error(exc: Exception) -> ApiError:
    for klass, status, code in _ERROR_MAP:
        if isinstance(exc, klass):
            extra = {}
            if isinstance(exc, (TsqlSyntaxError, TsqlTypeError)):
                extra = {"line": exc.line, "column": exc.column}
            return ApiError(status, code, str(exc), **extra)
    return ApiError(500, "internal_error", str(exc))


def format_distance(value: float) -> str:
    return f"{value:.4f}"


class TriageService:
    """Route dispatch plus session bookkeeping. Safe for concurrent requests;
    each session serializes its own mutations."""

    def __init__(
        self,
        pack: KnowledgePack,
        store: TemporalStore,
        config: DiagnosisConfig = DiagnosisConfig(),
        session_ttl: float = DEFAULT_SESSION_TTL,
        time_fn=time.monotonic,
    ):
        self.engine = TriageEngine(pack, store, config)
        self.pack = pack
        self.store = store
        self._ttl = session_ttl
        self._time = time_fn
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._session_locks: dict[str, threading.Lock] = {}
        self._last_access: dict[str, float] = {}

    # -- session bookkeeping --------------------------------------------------

    def _purge_expired(self) -> None:
        now = self._time()
        dead = [t for t, seen in self._last_access.items() if seen + self._ttl < now]
        for token in dead:
            self._sessions.pop(token, None)
            self._session_locks.pop(token, None)
            self._last_access.pop(token, None)

    def _session(self, token: str) -> tuple[Session, threading.Lock]:
        with self._lock:
            self._purge_expired()
            session = self._sessions.get(token)
            if session is None:
                raise ApiError(404, "unknown_session", f"unknown session {token!r}")
            self._last_access[token] = self._time()
            return session, self._session_locks[token]

    # -- dispatch --------------------------------------------------------------

    _ROUTES = [
        ("POST", re.compile(r"^/sessions$"), "_start_session"),
        ("GET", re.compile(r"^/body/parts$"), "_body_parts"),
        ("GET", re.compile(r"^/body/([^/]+)/subparts$"), "_subparts"),
        ("GET", re.compile(r"^/subparts/([^/]+)/symptoms$"), "_symptoms"),
        ("POST", re.compile(r"^/sessions/([^/]+)/symptoms$"), "_submit_symptoms"),
        ("GET", re.compile(r"^/sessions/([^/]+)/question$"), "_question"),
        ("POST", re.compile(r"^/sessions/([^/]+)/answers$"), "_answer"),
        ("GET", re.compile(r"^/sessions/([^/]+)/diagnosis$"), "_diagnosis"),
        ("POST", re.compile(r"^/sessions/([^/]+)/finalize$"), "_finalize"),
        ("POST", re.compile(r"^/tsql$"), "_tsql"),
        ("GET", re.compile(r"^/patients/([^/]+)/history$"), "_history"),
    ]

    def handle(self, method: str, path: str, query: dict | None = None,
               body: dict | None = None) -> tuple[int, dict]:
        """Dispatch one request; returns (status, response document)."""
        query = query or {}
        try:
            for route_method, pattern, handler in self._ROUTES:
                match = pattern.match(path)
                if match:
                    if method != route_method:
                        raise ApiError(405, "method_not_allowed",
                                       f"{method} not allowed on {path}")
                    return getattr(self, handler)(*match.groups(), query=query, body=body)
            raise ApiError(404, "not_found", f"no route for {path}")
        except ApiError as exc:
            return exc.status, exc.body()
        except Exception as exc:  # noqa: BLE001 - map every engine fault
            api = _to_api_error(exc)
            return api.status, api.body()

    @staticmethod
    def _field(body: dict | None, name: str, kind, required: bool = True):
        if body is None or not isinstance(body, dict):
            raise ApiError(400, "bad_request", "request body must be a JSON object")
        if name not in body:
            if required:
                raise ApiError(400, "bad_request", f"missing field {name!r}")
            return None
        value = body[name]
        if not isinstance(value, kind) or isinstance(value, bool):
            raise ApiError(400, "bad_request", f"field {name!r} has the wrong type")
        return value

    # -- knowledge browsing -----------------------------------------------------

    def _body_parts(self, query: dict, body: dict | None) -> tuple[int, dict]:
        parts = []
        for name in PART_NAMES:
            subs = [s.id for s in list_subparts(self.pack, name)]
            parts.append({"name": name, "subparts": subs})
        return 200, {"parts": parts}

    def _subparts(self, part: str, query: dict, body: dict | None) -> tuple[int, dict]:
        subs = list_subparts(self.pack, part)
        return 200, {
            "subparts": [
                {
                    "id": sub.id,
                    "symptom_count": len(sub.symptom_ids),
                    "disease_count": len(sub.disease_ids),
                }
                for sub in subs
            ]
        }

    def _symptoms(self, subpart_id: str, query: dict, body: dict | None) -> tuple[int, dict]:
        symptoms = symptoms_for_subpart(self.pack, subpart_id)
        return 200, {
            "symptoms": [{"id": s.id, "icd": s.icd.text, "name": s.name} for s in symptoms]
        }

    # -- triage -----------------------------------------------------------------

    def _start_session(self, query: dict, body: dict | None) -> tuple[int, dict]:
        patient = "anonymous"
        if body:
            patient = self._field(body, "patient_id", str, required=False) or "anonymous"
        session = self.engine.start_session(patient)
        with self._lock:
            self._sessions[session.session_id] = session
            self._session_locks[session.session_id] = threading.Lock()
            self._last_access[session.session_id] = self._time()
        return 201, {"token": session.session_id, "phase": session.phase.value}

    def _submit_symptoms(self, token: str, query: dict, body: dict | None) -> tuple[int, dict]:
        session, lock = self._session(token)
        severities = self._field(body, "severities", dict)
        subpart = self._field(body, "subpart", str, required=False)
        clean: dict[str, float] = {}
        for sym_id, value in severities.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ApiError(422, "invalid_severity", f"severity for {sym_id!r} must be a number")
            clean[sym_id] = float(value)
        with lock:
            self.engine.submit_symptoms(session, clean, subpart)
            question = self.engine.next_question(session)
        return 200, {"phase": session.phase.value, "question_available": question is not None}

    def _question(self, token: str, query: dict, body: dict | None) -> tuple[int, dict]:
        session, lock = self._session(token)
        with lock:
            question = self.engine.next_question(session)
        if question is None:
            return 200, {"done": True, "question": None}
        return 200, {
            "done": False,
            "question": {
                "id": question.id,
                "symptom_id": question.symptom_id,
                "prompt": question.prompt,
            },
        }

    def _answer(self, token: str, query: dict, body: dict | None) -> tuple[int, dict]:
        session, lock = self._session(token)
        question_id = self._field(body, "question_id", str)
        severity = self._field(body, "severity", (int, float))
        with lock:
            self.engine.apply_answer(session, question_id, float(severity))
            question = self.engine.next_question(session)
        return 200, {"phase": session.phase.value, "question_available": question is not None}

    def _diagnosis(self, token: str, query: dict, body: dict | None) -> tuple[int, dict]:
        session, lock = self._session(token)
        with lock:
            results = self.engine.diagnosis(session)
        return 200, {
            "phase": session.phase.value,
            "results": [
                {
                    "rank": r.rank,
                    "disease_id": r.disease_id,
                    "icd": r.icd.text,
                    "name": self.pack.disease(r.disease_id).name,
                    "distance": format_distance(r.distance),
                }
                for r in results
            ],
        }

    def _finalize(self, token: str, query: dict, body: dict | None) -> tuple[int, dict]:
        session, lock = self._session(token)
        with lock:
            self.engine.decision_history(session)
            top = self.engine.diagnosis(session)[0]
        return 200, {
            "persisted": True,
            "decision": {
                "patient_id": session.patient_id,
                "disease_id": top.disease_id,
                "icd": top.icd.text,
                "distance": format_distance(top.distance),
            },
        }

    # -- tsql + history -----------------------------------------------------------

    def _tsql(self, query: dict, body: dict | None) -> tuple[int, dict]:
        text = self._field(body, "query", str)
        result = evaluate(parse(text), self.store)
        if isinstance(result, DmlResult):
            return 200, {"affected": result.affected}
        return 200, {
            "columns": result.columns,
            "rows": result.rows,
            "provenance": result.provenance,
        }

    def _history(self, patient_id: str, query: dict, body: dict | None) -> tuple[int, dict]:
        table = self.store.table(DIAGNOSIS_TABLE)
        known = any(
            rec.payload.get("patient") == patient_id
            for rec in table.versions()
        )
        if not known:
            raise ApiError(404, "unknown_patient", f"no history for patient {patient_id!r}")
        as_of_text = query.get("as_of")
        as_of = parse_instant(as_of_text) if as_of_text else self.store.now()
        records = [
            row for row in table.snapshot(as_of) if row.get("patient") == patient_id
        ]
        return 200, {"as_of": as_of, "records": records}


# -- HTTP layer -----------------------------------------------------------------


def _make_handler(service: TriageService):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def _respond(self, status: int, doc: dict) -> None:
            data = json.dumps(doc).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(data)

        def _dispatch(self, method: str) -> None:
            url = urlsplit(self.path)
            query = dict(parse_qsl(url.query))
            body = None
            length = int(self.headers.get("Content-Length") or 0)
            if length:
                raw = self.rfile.read(length)
                try:
                    body = json.loads(raw)
                except json.JSONDecodeError as exc:
                    self._respond(400, {"error": {"code": "bad_json", "message": str(exc)}})
                    return
            status, doc = service.handle(method, url.path, query, body)
            self._respond(status, doc)

        def do_GET(self) -> None:  # noqa: N802 - http.server API
            self._dispatch("GET")

        def do_POST(self) -> None:  # noqa: N802
            self._dispatch("POST")

        def do_OPTIONS(self) -> None:  # noqa: N802
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def log_message(self, fmt: str, *args) -> None:  # quiet by default
            pass

    return Handler


def make_server(service: TriageService, listen: str = "127.0.0.1:0") -> ThreadingHTTPServer:
    """Bind a threading HTTP server; port 0 picks a free port."""
    host, _, port_text = listen.rpartition(":")
    host = host or "127.0.0.1"
    server = ThreadingHTTPServer((host, int(port_text)), _make_handler(service))
    return server


def serve(pack_path: str | Path, data_dir: str | Path, listen: str = "127.0.0.1:8000") -> None:
    """Load the pack, open the store and serve until interrupted."""
    pack = knowledge.load_pack(pack_path)
    store = TemporalStore(data_dir)
    service = TriageService(pack, store)
    server = make_server(service, listen)
    host, port = server.server_address[:2]
    print(f"meddx service listening on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
