"""Knowledge packs: the ICD-10-coded body map, symptoms, diseases and rules.

A pack is a single UTF-8 JSON document with five top-level keys:
``manifest``, ``parts``, ``symptoms``, ``diseases`` and ``rules``. Entity
order inside arrays is meaningful ("pack order"); the canonical on-disk form
sorts object keys lexicographically, so anything ordered is an array.

Loading is strict about structure (shape, id resolution, ICD syntax);
value-level invariants (band ranges, declared counts, full-profile census)
are checked by :func:`validate_pack`, which reports violations instead of
raising.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .icd import IcdCode, InvalidIcdCode

PART_NAMES = ("head", "neck", "chest", "abdomen", "pelvic", "leg", "arm", "back")

# Reference census for profile "full": (part, symptom count, disease count)
# per subpart. Note the row sums (858 symptoms, 4758 diseases) exceed the
# declared totals below; both checks are applied as given, so a pack matching
# every census row will still be reported against the totals.
FULL_SYMPTOM_TOTAL = 839
FULL_DISEASE_TOTAL = 4210
FULL_PROFILE_CENSUS: dict[str, tuple[str, int, int]] = {
    "head": ("head", 84, 543),
    "ears": ("head", 16, 76),
    "eyes": ("head", 75, 327),
    "nose": ("head", 20, 101),
    "mouth": ("head", 66, 248),
    "face": ("head", 21, 88),
    "neck": ("neck", 38, 221),
    "chest": ("chest", 34, 218),
    "side_of_chest": ("chest", 11, 46),
    "sternum": ("chest", 16, 94),
    "upper_abdomen": ("abdomen", 22, 166),
    "lower_abdomen": ("abdomen", 27, 158),
    "inguinal": ("pelvic", 14, 56),
    "pelvis": ("pelvic", 23, 83),
    "genital": ("pelvic", 35, 160),
    "hip": ("pelvic", 20, 79),
    "fingers": ("arm", 32, 149),
    "palm": ("arm", 23, 102),
    "wrist": ("arm", 11, 66),
    "forearm": ("arm", 16, 56),
    "elbow": ("arm", 20, 89),
    "upper_arm": ("arm", 14, 59),
    "shoulder": ("arm", 13, 75),
    "foot": ("leg", 21, 94),
    "ankle": ("leg", 13, 83),
    "shin": ("leg", 18, 69),
    "knee": ("leg", 19, 97),
    "thigh": ("leg", 16, 69),
    "toe": ("leg", 18, 97),
    # The reference census files sole/calf/hamstring under "back" even though
    # they are anatomically leg; mirrored as published, not corrected.
    "sole": ("back", 18, 86),
    "calf": ("back", 17, 75),
    "hamstring": ("back", 19, 68),
    "back": ("back", 16, 626),
    "upper_spine": ("back", 14, 64),
    "lower_spine": ("back", 18, 70),
}


class PackError(Exception):
    """Base class for knowledge-pack failures."""


class PackFormatError(PackError):
    """Structurally malformed pack file. Carries a position when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DanglingReference(PackError):
    """An id referenced somewhere in the pack does not resolve."""


class UnknownPart(PackError):
    """A body-part name outside the canonical eight."""


class UnknownSubpart(PackError):
    """No subpart with the given id in the pack."""


class UnknownSymptom(PackError):
    """No symptom with the given id in the pack."""


@dataclass(frozen=True)
class FuzzyBand:
    """Severity interval [lower, upper] consistent with a disease, plus the
    symptom's weight for that disease. All three values live in [0, 1]."""

    lower: float
    upper: float
    weight: float


@dataclass(frozen=True)
class SymptomDef:
    id: str
    icd: IcdCode
    name: str
    subpart_ids: tuple[str, ...]


@dataclass(frozen=True)
class DiseaseDef:
    id: str
    icd: IcdCode
    name: str
    profile: dict[str, FuzzyBand]  # symptom id -> band


@dataclass(frozen=True)
class SubpartDef:
    id: str
    part: str
    symptom_ids: tuple[str, ...]
    disease_ids: tuple[str, ...]


@dataclass(frozen=True)
class BodyPart:
    name: str
    subparts: tuple[SubpartDef, ...]


@dataclass(frozen=True)
class AuthoredRule:
    """A rule stored verbatim in the pack (the derived rules live in
    :mod:`meddx.engine`)."""

    id: str
    symptom_ids: tuple[str, ...]
    disease_id: str


@dataclass(frozen=True)
class PackManifest:
    profile: str  # "full" | "demo"
    symptom_count: int
    disease_count: int
    subpart_counts: dict[str, tuple[int, int]]  # subpart id -> (symptoms, diseases)


@dataclass
class ValidationReport:
    """Violations found by :func:`validate_pack`; empty means valid."""

    entries: list[str] = field(default_factory=list)

    def add(self, entry: str) -> None:
        self.entries.append(entry)

    @property
    def ok(self) -> bool:
        return not self.entries

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


class KnowledgePack:
    """A loaded, fully indexed pack. Immutable once constructed; safe to
    share across threads."""

    def __init__(
        self,
        manifest: PackManifest,
        parts: dict[str, BodyPart],
        symptoms: dict[str, SymptomDef],
        diseases: dict[str, DiseaseDef],
        rules: tuple[AuthoredRule, ...],
        document: dict,
    ):
        self.manifest = manifest
        self.parts = parts
        self.symptoms = symptoms
        self.diseases = diseases
        self.rules = rules
        self._document = document
        self._subparts: dict[str, SubpartDef] = {}
        for part in parts.values():
            for sub in part.subparts:
                self._subparts[sub.id] = sub
        # symptom id -> diseases whose profile mentions it, ordered by ICD then id
        self._by_symptom: dict[str, tuple[DiseaseDef, ...]] = {}
        for sym_id in symptoms:
            hits = [d for d in diseases.values() if sym_id in d.profile]
            hits.sort(key=lambda d: (d.icd.text, d.id))
            self._by_symptom[sym_id] = tuple(hits)

    @property
    def document(self) -> dict:
        return self._document

    def subpart(self, subpart_id: str) -> SubpartDef:
        try:
            return self._subparts[subpart_id]
        except KeyError:
            raise UnknownSubpart(f"unknown subpart {subpart_id!r}") from None

    def subpart_ids(self) -> tuple[str, ...]:
        return tuple(self._subparts)

    def symptom(self, symptom_id: str) -> SymptomDef:
        try:
            return self.symptoms[symptom_id]
        except KeyError:
            raise UnknownSymptom(f"unknown symptom {symptom_id!r}") from None

    def disease(self, disease_id: str) -> DiseaseDef:
        return self.diseases[disease_id]


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _require(doc: dict, key: str, kind: type, where: str):
    if key not in doc:
        raise PackFormatError(f"{where}: missing key {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise PackFormatError(f"{where}: key {key!r} must be {kind.__name__}")
    return value


def _check_keys(doc: dict, allowed: Iterable[str], where: str) -> None:
    extra = set(doc) - set(allowed)
    if extra:
        raise PackFormatError(f"{where}: unknown keys {sorted(extra)}")


def _ident(value, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise PackFormatError(f"{where}: identifier must be a nonempty string")
    return value


def _icd(value, where: str) -> IcdCode:
    if not isinstance(value, str):
        raise PackFormatError(f"{where}: ICD code must be a string")
    try:
        return IcdCode(value)
    except InvalidIcdCode as exc:
        raise InvalidIcdCode(f"{where}: {exc}") from None


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise PackFormatError(f"{where}: expected a number")
    return float(value)


def load_pack(path: str | Path) -> KnowledgePack:
    """Load, structurally validate and index a pack file.

    Raises :class:`PackFormatError` (with position for JSON errors),
    :class:`DanglingReference` or :class:`~meddx.icd.InvalidIcdCode`.
    """
    raw = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise PackFormatError(f"malformed pack file: {exc.msg}", exc.lineno, exc.colno) from None
    return parse_pack(doc)


def parse_pack(doc) -> KnowledgePack:
    """Build a :class:`KnowledgePack` from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise PackFormatError("pack document must be a JSON object")
    _check_keys(doc, ("manifest", "parts", "symptoms", "diseases", "rules"), "pack")
    man_doc = _require(doc, "manifest", dict, "pack")
    parts_doc = _require(doc, "parts", list, "pack")
    symptoms_doc = _require(doc, "symptoms", list, "pack")
    diseases_doc = _require(doc, "diseases", list, "pack")
    rules_doc = _require(doc, "rules", list, "pack")

    manifest = _parse_manifest(man_doc)

    symptoms: dict[str, SymptomDef] = {}
    sym_rows: list[tuple[str, IcdCode, str]] = []
    for i, row in enumerate(symptoms_doc):
        where = f"symptoms[{i}]"
        if not isinstance(row, dict):
            raise PackFormatError(f"{where}: must be an object")
        _check_keys(row, ("id", "icd", "name"), where)
        sid = _ident(row.get("id"), where)
        if sid in symptoms:
            raise PackFormatError(f"{where}: duplicate symptom id {sid!r}")
        code = _icd(row.get("icd"), where)
        name = _ident(row.get("name"), where)
        symptoms[sid] = SymptomDef(sid, code, name, ())  # subparts filled below
        sym_rows.append((sid, code, name))

    diseases: dict[str, DiseaseDef] = {}
    for i, row in enumerate(diseases_doc):
        where = f"diseases[{i}]"
        if not isinstance(row, dict):
            raise PackFormatError(f"{where}: must be an object")
        _check_keys(row, ("id", "icd", "name", "profile"), where)
        did = _ident(row.get("id"), where)
        if did in diseases:
            raise PackFormatError(f"{where}: duplicate disease id {did!r}")
        code = _icd(row.get("icd"), where)
        name = _ident(row.get("name"), where)
        profile_doc = _require(row, "profile", dict, where)
        if not profile_doc:
            raise PackFormatError(f"{where}: profile must be nonempty")
        profile: dict[str, FuzzyBand] = {}
        for sym_id, band_doc in profile_doc.items():
            bw = f"{where}.profile[{sym_id!r}]"
            if sym_id not in symptoms:
                raise DanglingReference(f"{bw}: unknown symptom {sym_id!r}")
            if not isinstance(band_doc, dict):
                raise PackFormatError(f"{bw}: band must be an object")
            _check_keys(band_doc, ("lower", "upper", "weight"), bw)
            profile[sym_id] = FuzzyBand(
                lower=_number(band_doc.get("lower"), bw),
                upper=_number(band_doc.get("upper"), bw),
                weight=_number(band_doc.get("weight"), bw),
            )
        diseases[did] = DiseaseDef(did, code, name, profile)

    parts: dict[str, BodyPart] = {}
    symptom_subparts: dict[str, list[str]] = {sid: [] for sid in symptoms}
    for i, part_doc in enumerate(parts_doc):
        where = f"parts[{i}]"
        if not isinstance(part_doc, dict):
            raise PackFormatError(f"{where}: must be an object")
        _check_keys(part_doc, ("name", "subparts"), where)
        pname = _ident(part_doc.get("name"), where)
        if pname not in PART_NAMES:
            raise UnknownPart(f"{where}: unknown body part {pname!r}")
        if pname in parts:
            raise PackFormatError(f"{where}: duplicate part {pname!r}")
        subs: list[SubpartDef] = []
        seen_sub: set[str] = set()
        for j, sub_doc in enumerate(_require(part_doc, "subparts", list, where)):
            sw = f"{where}.subparts[{j}]"
            if not isinstance(sub_doc, dict):
                raise PackFormatError(f"{sw}: must be an object")
            _check_keys(sub_doc, ("id", "symptoms", "diseases"), sw)
            sub_id = _ident(sub_doc.get("id"), sw)
            if sub_id in seen_sub:
                raise PackFormatError(f"{sw}: duplicate subpart id {sub_id!r}")
            seen_sub.add(sub_id)
            sym_ids = _require(sub_doc, "symptoms", list, sw)
            dis_ids = _require(sub_doc, "diseases", list, sw)
            if not sym_ids or not dis_ids:
                raise PackFormatError(f"{sw}: symptom and disease lists must be nonempty")
            for sid in sym_ids:
                if sid not in symptoms:
                    raise DanglingReference(f"{sw}: unknown symptom {sid!r}")
                symptom_subparts[sid].append(sub_id)
            for did in dis_ids:
                if did not in diseases:
                    raise DanglingReference(f"{sw}: unknown disease {did!r}")
            subs.append(SubpartDef(sub_id, pname, tuple(sym_ids), tuple(dis_ids)))
        parts[pname] = BodyPart(pname, tuple(subs))

    # duplicate subpart ids across parts
    all_sub_ids: list[str] = [s.id for p in parts.values() for s in p.subparts]
    if len(all_sub_ids) != len(set(all_sub_ids)):
        dupes = sorted({s for s in all_sub_ids if all_sub_ids.count(s) > 1})
        raise PackFormatError(f"duplicate subpart ids across parts: {dupes}")

    for sid, code, name in sym_rows:
        symptoms[sid] = SymptomDef(sid, code, name, tuple(symptom_subparts[sid]))

    rules: list[AuthoredRule] = []
    seen_rule: set[str] = set()
    for i, rule_doc in enumerate(rules_doc):
        where = f"rules[{i}]"
        if not isinstance(rule_doc, dict):
            raise PackFormatError(f"{where}: must be an object")
        _check_keys(rule_doc, ("id", "symptoms", "disease"), where)
        rid = _ident(rule_doc.get("id"), where)
        if rid in seen_rule:
            raise PackFormatError(f"{where}: duplicate rule id {rid!r}")
        seen_rule.add(rid)
        ante = _require(rule_doc, "symptoms", list, where)
        if not ante:
            raise PackFormatError(f"{where}: antecedent must be nonempty")
        for sid in ante:
            if sid not in symptoms:
                raise DanglingReference(f"{where}: unknown symptom {sid!r}")
        did = _ident(rule_doc.get("disease"), where)
        if did not in diseases:
            raise DanglingReference(f"{where}: unknown disease {did!r}")
        rules.append(AuthoredRule(rid, tuple(ante), did))

    return KnowledgePack(manifest, parts, symptoms, diseases, tuple(rules), doc)


def _parse_manifest(doc: dict) -> PackManifest:
    _check_keys(doc, ("profile", "symptoms", "diseases", "subparts"), "manifest")
    profile = doc.get("profile")
    if profile not in ("full", "demo"):
        raise PackFormatError(f"manifest: profile must be 'full' or 'demo', got {profile!r}")
    sym_count = doc.get("symptoms")
    dis_count = doc.get("diseases")
    for label, n in (("symptoms", sym_count), ("diseases", dis_count)):
        if not isinstance(n, int) or isinstance(n, bool) or n < 0:
            raise PackFormatError(f"manifest: {label} count must be a nonnegative integer")
    counts: dict[str, tuple[int, int]] = {}
    for sub_id, c in _require(doc, "subparts", dict, "manifest").items():
        where = f"manifest.subparts[{sub_id!r}]"
        if not isinstance(c, dict):
            raise PackFormatError(f"{where}: must be an object")
        _check_keys(c, ("symptoms", "diseases"), where)
        s, d = c.get("symptoms"), c.get("diseases")
        for label, n in (("symptoms", s), ("diseases", d)):
            if not isinstance(n, int) or isinstance(n, bool) or n < 0:
                raise PackFormatError(f"{where}: {label} count must be a nonnegative integer")
        counts[sub_id] = (s, d)
    return PackManifest(profile, sym_count, dis_count, counts)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def canonical_dumps(doc: dict) -> str:
    """Canonical pack serialization: sorted keys, two-space indent, newline."""
    return json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def save_pack(pack: KnowledgePack, path: str | Path) -> None:
    """Write the pack in canonical form (byte-stable for valid inputs)."""
    Path(path).write_text(canonical_dumps(pack.document), encoding="utf-8")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_pack(pack: KnowledgePack) -> ValidationReport:
    """Check every value-level invariant; violations become report entries.

    Idempotent and side-effect free. An empty report means the pack satisfies
    all type invariants plus, for profile "full", the reference census.
    """
    report = ValidationReport()
    man = pack.manifest

    for disease in pack.diseases.values():
        any_weight = False
        for sym_id, band in disease.profile.items():
            pair = f"{disease.id}/{sym_id}"
            if not (0.0 <= band.lower <= 1.0 and 0.0 <= band.upper <= 1.0):
                report.add(f"band {pair}: bounds must lie in [0, 1]")
            if band.lower > band.upper:
                report.add(f"band {pair}: lower {band.lower} > upper {band.upper}")
            if not (0.0 <= band.weight <= 1.0):
                report.add(f"band {pair}: weight {band.weight} outside [0, 1]")
            if band.weight > 0:
                any_weight = True
        if not any_weight:
            report.add(f"disease {disease.id}: no band with weight > 0")

    actual_subparts = {sub.id: sub for part in pack.parts.values() for sub in part.subparts}

    # declared vs actual, all profiles
    if man.symptom_count != len(pack.symptoms):
        report.add(
            f"manifest: declared symptom total {man.symptom_count} "
            f"!= actual {len(pack.symptoms)}"
        )
    if man.disease_count != len(pack.diseases):
        report.add(
            f"manifest: declared disease total {man.disease_count} "
            f"!= actual {len(pack.diseases)}"
        )
    for sub_id, (s_decl, d_decl) in sorted(man.subpart_counts.items()):
        sub = actual_subparts.get(sub_id)
        if sub is None:
            report.add(f"manifest: subpart {sub_id!r} declared but not present")
            continue
        if s_decl != len(sub.symptom_ids):
            report.add(
                f"subpart {sub_id}: declared {s_decl} symptoms, has {len(sub.symptom_ids)}"
            )
        if d_decl != len(sub.disease_ids):
            report.add(
                f"subpart {sub_id}: declared {d_decl} diseases, has {len(sub.disease_ids)}"
            )
    for sub_id in sorted(set(actual_subparts) - set(man.subpart_counts)):
        report.add(f"manifest: subpart {sub_id!r} present but not declared")

    if man.profile == "full":
        if man.symptom_count != FULL_SYMPTOM_TOTAL:
            report.add(f"symptom total {man.symptom_count} != {FULL_SYMPTOM_TOTAL}")
        if man.disease_count != FULL_DISEASE_TOTAL:
            report.add(f"disease total {man.disease_count} != {FULL_DISEASE_TOTAL}")
        missing_parts = [p for p in PART_NAMES if p not in pack.parts]
        if missing_parts:
            report.add(f"full profile: missing body parts {missing_parts}")
        for sub_id, (part, s_ref, d_ref) in FULL_PROFILE_CENSUS.items():
            decl = man.subpart_counts.get(sub_id)
            if decl is None:
                report.add(f"full profile: census subpart {sub_id!r} not declared")
                continue
            if decl[0] != s_ref:
                report.add(f"subpart {sub_id}: census expects {s_ref} symptoms, declared {decl[0]}")
            if decl[1] != d_ref:
                report.add(f"subpart {sub_id}: census expects {d_ref} diseases, declared {decl[1]}")
            sub = actual_subparts.get(sub_id)
            if sub is not None and sub.part != part:
                report.add(f"subpart {sub_id}: census places it under {part!r}, pack has {sub.part!r}")

    return report


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------


def list_subparts(pack: KnowledgePack, part: str) -> list[SubpartDef]:
    """Subparts of a body part, in pack order. Empty if the pack omits the
    part (demo packs); unknown names raise."""
    if part not in PART_NAMES:
        raise UnknownPart(f"unknown body part {part!r}: expected one of {', '.join(PART_NAMES)}")
    body_part = pack.parts.get(part)
    return list(body_part.subparts) if body_part else []


def symptoms_for_subpart(pack: KnowledgePack, subpart_id: str) -> list[SymptomDef]:
    """Symptoms listed for a subpart, in pack order."""
    sub = pack.subpart(subpart_id)
    return [pack.symptoms[sid] for sid in sub.symptom_ids]


def conditions_for_symptom(pack: KnowledgePack, symptom_id: str) -> list[DiseaseDef]:
    """Every disease whose profile contains the symptom, ordered by ICD code
    then disease id."""
    pack.symptom(symptom_id)  # raises UnknownSymptom
    return list(pack._by_symptom[symptom_id])
