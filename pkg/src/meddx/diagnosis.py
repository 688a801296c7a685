"""Scoring and ranking of candidate diseases against a severity vector.

The per-symptom deviation is zero while the reported severity falls inside
the disease's [lower, upper] band and otherwise is the distance to the
nearest bound. Deviations aggregate into a weight-normalized Minkowski mean

    D = ( sum_i w_i * d_i**p / sum_i w_i ) ** (1/p)

over the disease's profile symptoms, which for the default p = 2 is a
weighted root-mean-square and degrades to a point-prototype Euclidean
distance when every band collapses to a point. Severities, bounds and
weights all live in [0, 1], so D does too; smaller is more likely.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .icd import IcdCode
from .knowledge import DiseaseDef, FuzzyBand


class DiagnosisError(Exception):
    pass


class DegenerateProfile(DiagnosisError):
    """All band weights are zero; the distance is undefined."""


class SeverityRangeError(DiagnosisError):
    """A severity value outside [0, 1]."""


@dataclass(frozen=True)
class SeverityVector:
    """Patient-reported severities, symptom id -> value in [0, 1]."""

    entries: dict[str, float]

    def __post_init__(self) -> None:
        if not self.entries:
            raise SeverityRangeError("severity vector must be nonempty")
        for sym_id, value in self.entries.items():
            check_severity(value, what=f"severity for {sym_id!r}")

    def get(self, symptom_id: str, default: float) -> float:
        return self.entries.get(symptom_id, default)


@dataclass(frozen=True)
class DiagnosisConfig:
    minkowski_order: float = 2.0
    exclusion_threshold: float = 0.75
    absent_severity: float = 0.0

    def __post_init__(self) -> None:
        if self.minkowski_order < 1:
            raise DiagnosisError(f"minkowski_order must be >= 1, got {self.minkowski_order}")
        if not 0.0 <= self.exclusion_threshold <= 1.0:
            raise DiagnosisError("exclusion_threshold must lie in [0, 1]")
        check_severity(self.absent_severity, what="absent_severity")


@dataclass(frozen=True)
class DiagnosisResult:
    disease_id: str
    icd: IcdCode
    distance: float
    rank: int


def check_severity(value: float, what: str = "severity") -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SeverityRangeError(f"{what} must be a number")
    if not 0.0 <= value <= 1.0:
        raise SeverityRangeError(f"{what} must lie in [0, 1], got {value}")
    return float(value)


def band_distance(severity: float, band: FuzzyBand) -> float:
    """Deviation of a severity from a band: 0 inside, else distance to the
    nearest bound."""
    if band.lower <= severity <= band.upper:
        return 0.0
    return min(abs(severity - band.lower), abs(severity - band.upper))


def disease_distance(
    vector: SeverityVector,
    disease: DiseaseDef,
    config: DiagnosisConfig = DiagnosisConfig(),
) -> float:
    """Weighted Minkowski mean of band deviations over the disease profile.

    Symptoms absent from the vector take ``config.absent_severity``.
    Raises :class:`DegenerateProfile` when every weight is zero.
    """
    p = config.minkowski_order
    total_weight = 0.0
    acc = 0.0
    for sym_id, band in disease.profile.items():
        severity = vector.get(sym_id, config.absent_severity)
        deviation = band_distance(severity, band)
        acc += band.weight * deviation**p
        total_weight += band.weight
    if total_weight <= 0.0:
        raise DegenerateProfile(f"disease {disease.id}: all profile weights are zero")
    return (acc / total_weight) ** (1.0 / p)


def rank_diseases(
    vector: SeverityVector,
    candidates: list[DiseaseDef],
    config: DiagnosisConfig = DiagnosisConfig(),
) -> list[DiagnosisResult]:
    """Candidates sorted by ascending distance, ties broken by ICD code then
    disease id; ranks assigned 1..n."""
    if not candidates:
        raise DiagnosisError("no candidates to rank")
    scored = [
        (disease_distance(vector, disease, config), disease.icd.text, disease.id, disease)
        for disease in candidates
    ]
    scored.sort(key=lambda t: t[:3])
    return [
        DiagnosisResult(disease.id, disease.icd, distance, rank)
        for rank, (distance, _, _, disease) in enumerate(scored, start=1)
    ]


def exclude_unlikely(
    results: list[DiagnosisResult],
    config: DiagnosisConfig = DiagnosisConfig(),
) -> list[DiagnosisResult]:
    """Drop results beyond the exclusion threshold, never dropping rank 1,
    and re-rank the survivors."""
    if not results:
        return []
    kept = [r for r in results if r.distance <= config.exclusion_threshold]
    if not kept:
        kept = [min(results, key=lambda r: r.rank)]
    return [
        DiagnosisResult(r.disease_id, r.icd, r.distance, rank)
        for rank, r in enumerate(sorted(kept, key=lambda r: r.rank), start=1)
    ]
