"""Forward-chaining candidate generation and the interactive triage session.

Rules are derived from the knowledge pack rather than authored twice: each
disease gets one rule whose antecedent is its hallmark symptoms (profile
entries with weight >= 0.5); a disease with no hallmark falls back to one
single-symptom rule per profile entry. Authored rules shipped in the pack
are appended as-is.

The scheduler orders applicable rules by specificity (antecedent size)
descending, ties by rule id; the interpreter fires each at most once and
accumulates consequents as a set, so the candidate set is independent of
firing order. Candidates are scored by the fuzzy distance, trimmed to the
likely ones, and the session's question loop asks about the unreported
symptom with the widest weight spread across surviving candidates until
nothing discriminates any more.
"""
from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from enum import Enum

from .analytics import kmeans
from .diagnosis import (
    DiagnosisConfig,
    DiagnosisResult,
    SeverityVector,
    check_severity,
    exclude_unlikely,
    rank_diseases,
)
from .knowledge import KnowledgePack, conditions_for_symptom
from .store import TemporalStore

HALLMARK_WEIGHT = 0.5
MIN_CANDIDATES = 5
MAX_CANDIDATES = 10
TOP_N = 3

# profile "full" packs declare this many distinct consequents per subpart
FULL_RULE_COUNT_RANGE = (40, 230)

DIAGNOSIS_TABLE = "diagnosis"
DIAGNOSIS_SCHEMA = {
    "id": "str",  # session id; one decision per session
    "patient": "str",
    "disease": "str",
    "icd": "str",
    "distance": "float",
}


class EngineError(Exception):
    pass


class PhaseError(EngineError):
    """Operation applied in the wrong session phase."""


class UnknownQuestion(EngineError):
    """Answer for a question that is not the outstanding one."""


@dataclass(frozen=True)
class Rule:
    id: str
    antecedent: frozenset[str]
    consequent: str

    @property
    def specificity(self) -> int:
        return len(self.antecedent)


class RuleBase:
    """Rules grouped by subpart, with a symptom index."""

    def __init__(self, rules: list[Rule], pack: KnowledgePack):
        self.rules = tuple(sorted(rules, key=lambda r: r.id))
        self.by_symptom: dict[str, tuple[Rule, ...]] = {}
        index: dict[str, list[Rule]] = {}
        for rule in self.rules:
            for sym_id in rule.antecedent:
                index.setdefault(sym_id, []).append(rule)
        self.by_symptom = {sym: tuple(rs) for sym, rs in index.items()}
        self.by_subpart: dict[str, tuple[Rule, ...]] = {}
        for sub_id in pack.subpart_ids():
            diseases = set(pack.subpart(sub_id).disease_ids)
            self.by_subpart[sub_id] = tuple(r for r in self.rules if r.consequent in diseases)

    def consequent_counts(self) -> dict[str, int]:
        """Distinct consequents per subpart (full-profile packs bound these
        to the 40..230 range)."""
        return {
            sub_id: len({r.consequent for r in rules})
            for sub_id, rules in self.by_subpart.items()
        }


def load_rules(pack: KnowledgePack) -> RuleBase:
    """Derive hallmark rules from disease profiles and append any rules
    authored in the pack."""
    rules: list[Rule] = []
    for disease in pack.diseases.values():
        hallmarks = frozenset(
            sym_id for sym_id, band in disease.profile.items() if band.weight >= HALLMARK_WEIGHT
        )
        if hallmarks:
            rules.append(Rule(f"r_{disease.id}", hallmarks, disease.id))
        else:
            for sym_id in disease.profile:
                rules.append(Rule(f"r_{disease.id}_{sym_id}", frozenset({sym_id}), disease.id))
    for authored in pack.rules:
        rules.append(Rule(authored.id, frozenset(authored.symptom_ids), authored.disease_id))
    return RuleBase(rules, pack)


def rule_count_violations(rulebase: RuleBase, pack: KnowledgePack) -> list[str]:
    """For profile "full" packs, distinct rule consequents per subpart must
    stay in the declared 40..230 range. Other profiles are unconstrained."""
    if pack.manifest.profile != "full":
        return []
    low, high = FULL_RULE_COUNT_RANGE
    return [
        f"subpart {sub_id}: {count} rule consequents outside [{low}, {high}]"
        for sub_id, count in sorted(rulebase.consequent_counts().items())
        if not low <= count <= high
    ]


def _present_symptoms(reported: SeverityVector) -> frozenset[str]:
    # severity 0 means "explicitly absent": recorded, but not a present symptom
    return frozenset(sym for sym, sev in reported.entries.items() if sev > 0)


def fire_rules(rules: list[Rule], reported: SeverityVector) -> dict[str, int]:
    """Fire every applicable rule once; returns consequent -> best (highest)
    specificity among the rules that produced it. Order-independent."""
    present = _present_symptoms(reported)
    fired: dict[str, int] = {}
    for rule in rules:
        if rule.antecedent <= present:
            fired[rule.consequent] = max(fired.get(rule.consequent, 0), rule.specificity)
    return fired


def generate_candidates(
    reported: SeverityVector,
    rulebase: RuleBase,
    pack: KnowledgePack,
    cluster_overflow: bool = False,
) -> list[str]:
    """Forward chaining, then clamp the candidate list to [5, 10] where the
    pack allows: over 10 keeps the highest-specificity consequents, under 5
    pads with known conditions of the most severe reported symptoms.

    With ``cluster_overflow`` the over-10 cut instead groups candidates by
    k-means over their band-midpoint vectors and drains the cluster nearest
    the patient first. Off by default; it reorders only the overflow case.
    """
    ordered = sorted(rulebase.rules, key=lambda r: (-r.specificity, r.id))
    fired = fire_rules(ordered, reported)
    candidates = sorted(fired, key=lambda d: (-fired[d], d))
    if len(candidates) > MAX_CANDIDATES:
        if cluster_overflow:
            candidates = _cluster_order(candidates, reported, pack)
        return candidates[:MAX_CANDIDATES]

    if len(candidates) < MIN_CANDIDATES:
        by_severity = sorted(
            reported.entries.items(), key=lambda item: (-item[1], item[0])
        )
        seen = set(candidates)
        for sym_id, severity in by_severity:
            if severity <= 0 or sym_id not in pack.symptoms:
                continue
            for disease in conditions_for_symptom(pack, sym_id):
                if disease.id not in seen:
                    candidates.append(disease.id)
                    seen.add(disease.id)
                    if len(candidates) >= MIN_CANDIDATES:
                        break
            if len(candidates) >= MIN_CANDIDATES:
                break
    return candidates


def _cluster_order(candidates: list[str], reported: SeverityVector,
                   pack: KnowledgePack) -> list[str]:
    """Order candidates cluster-by-cluster, nearest centroid to the patient
    first; candidates keep their relative order within a cluster."""
    dims = sorted({sym for d in candidates for sym in pack.disease(d).profile})
    vectors = []
    for disease_id in candidates:
        profile = pack.disease(disease_id).profile
        vectors.append([
            (profile[s].lower + profile[s].upper) / 2.0 if s in profile else 0.0
            for s in dims
        ])
    clustering = kmeans(vectors, min(3, len(vectors)))
    patient = [reported.get(s, 0.0) for s in dims]
    order = sorted(
        range(clustering.k),
        key=lambda c: (
            sum((a - b) ** 2 for a, b in zip(clustering.centroids[c], patient)),
            c,
        ),
    )
    ranked = []
    for cluster in order:
        ranked.extend(
            candidates[i] for i in range(len(candidates))
            if clustering.assignment[i] == cluster
        )
    return ranked


def score_and_rank(
    candidate_ids: list[str],
    reported: SeverityVector,
    pack: KnowledgePack,
    config: DiagnosisConfig = DiagnosisConfig(),
) -> list[DiagnosisResult]:
    """Rank candidates by distance, drop the unlikely tail, keep the top 3."""
    if not candidate_ids:
        raise EngineError("no candidates to score")
    diseases = [pack.disease(d) for d in candidate_ids]
    ranked = exclude_unlikely(rank_diseases(reported, diseases, config), config)
    return ranked[:TOP_N]


# -- sessions -----------------------------------------------------------------


class Phase(Enum):
    COLLECTING = "collecting"
    QUESTIONING = "questioning"
    FINAL = "final"


@dataclass(frozen=True)
class Question:
    id: str
    symptom_id: str
    prompt: str


@dataclass
class Session:
    session_id: str
    patient_id: str
    subpart_id: str | None = None
    reported: dict[str, float] = field(default_factory=dict)
    asked: list[str] = field(default_factory=list)
    candidate_ids: list[str] = field(default_factory=list)
    candidates: list[DiagnosisResult] = field(default_factory=list)  # ranked, ascending
    phase: Phase = Phase.COLLECTING
    persisted: bool = False


class TriageEngine:
    """Session manager over one pack + rulebase + store.

    The pack is immutable, sessions are independent; a single session is
    driven strictly request-by-request.
    """

    def __init__(
        self,
        pack: KnowledgePack,
        store: TemporalStore | None = None,
        config: DiagnosisConfig = DiagnosisConfig(),
    ):
        self.pack = pack
        self.rulebase = load_rules(pack)
        self.config = config
        self.store = store
        if store is not None and not store.has_table(DIAGNOSIS_TABLE):
            store.create_table(DIAGNOSIS_TABLE, DIAGNOSIS_SCHEMA, key_attr="id")

    def start_session(self, patient_id: str) -> Session:
        return Session(session_id=secrets.token_urlsafe(18), patient_id=patient_id)

    def submit_symptoms(
        self, session: Session, severities: dict[str, float], subpart_id: str | None = None
    ) -> Session:
        """Record the initial severity map and move to questioning (or
        straight to the final phase when nothing discriminates)."""
        if session.phase is not Phase.COLLECTING:
            raise PhaseError(f"cannot submit symptoms in phase {session.phase.value}")
        if not severities:
            raise EngineError("severity map must be nonempty")
        if subpart_id is not None:
            self.pack.subpart(subpart_id)  # raises UnknownSubpart
            session.subpart_id = subpart_id
        for sym_id, severity in severities.items():
            self.pack.symptom(sym_id)  # raises UnknownSymptom
            session.reported[sym_id] = check_severity(severity, what=f"severity for {sym_id!r}")
        session.candidate_ids = generate_candidates(
            SeverityVector(dict(session.reported)), self.rulebase, self.pack
        )
        session.phase = Phase.QUESTIONING
        self._rescore(session)
        if self.next_question(session) is None:
            session.phase = Phase.FINAL
        return session

    def _rescore(self, session: Session) -> None:
        if not session.candidate_ids:
            session.candidates = []
            return
        vector = SeverityVector(dict(session.reported))
        diseases = [self.pack.disease(d) for d in session.candidate_ids]
        session.candidates = exclude_unlikely(
            rank_diseases(vector, diseases, self.config), self.config
        )

    def next_question(self, session: Session) -> Question | None:
        """The unasked symptom with the widest weight spread across surviving
        candidates; None when nothing remains to discriminate."""
        if session.phase is Phase.FINAL:
            return None
        if session.phase is not Phase.QUESTIONING:
            raise PhaseError(f"no questions in phase {session.phase.value}")
        if len(session.candidates) <= 1:
            return None
        profiles = [self.pack.disease(r.disease_id).profile for r in session.candidates]
        eligible: dict[str, float] = {}
        for profile in profiles:
            for sym_id in profile:
                if sym_id in session.reported or sym_id in eligible:
                    continue
                weights = [p[sym_id].weight if sym_id in p else 0.0 for p in profiles]
                eligible[sym_id] = max(weights) - min(weights)
        discriminating = {s: w for s, w in eligible.items() if w > 0}
        if not discriminating:
            return None
        sym_id = min(discriminating, key=lambda s: (-discriminating[s], s))
        name = self.pack.symptom(sym_id).name
        return Question(
            id=f"q_{sym_id}",
            symptom_id=sym_id,
            prompt=f"How severe is '{name}'? (0 = none, 1 = worst imaginable)",
        )

    def apply_answer(self, session: Session, question_id: str, severity: float) -> Session:
        """Merge an answer into the reported vector and re-score; flips to the
        final phase once no question remains."""
        if session.phase is not Phase.QUESTIONING:
            raise PhaseError(f"cannot answer in phase {session.phase.value}")
        outstanding = self.next_question(session)
        if outstanding is None or question_id != outstanding.id:
            raise UnknownQuestion(f"question {question_id!r} is not outstanding")
        severity = check_severity(severity)
        session.reported[outstanding.symptom_id] = float(severity)
        session.asked.append(question_id)
        self._rescore(session)
        if self.next_question(session) is None:
            session.phase = Phase.FINAL
        return session

    def diagnosis(self, session: Session) -> list[DiagnosisResult]:
        if session.phase is Phase.COLLECTING:
            raise PhaseError("no diagnosis while still collecting symptoms")
        return session.candidates[:TOP_N]

    def decision_history(self, session: Session) -> None:
        """Persist the final decision as a bitemporal diagnosis record.
        Idempotent per session."""
        if self.store is None:
            raise EngineError("no store attached")
        if session.phase is not Phase.FINAL:
            raise PhaseError("decision not final yet")
        if session.persisted:
            return
        top = self.diagnosis(session)
        if not top:
            raise EngineError("no diagnosis to persist")
        best = top[0]
        table = self.store.table(DIAGNOSIS_TABLE)
        table.insert(
            session.session_id,
            {
                "id": session.session_id,
                "patient": session.patient_id,
                "disease": best.disease_id,
                "icd": best.icd.text,
                "distance": round(best.distance, 4),
            },
            valid_start=self.store.now(),
        )
        session.persisted = True
