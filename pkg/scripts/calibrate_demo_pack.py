#!/usr/bin/env python3
"""Calibrate and emit the bundled demo knowledge pack.

The demo pack ships with band bounds solved so that the reference patient

    strange_smell 0.1, sneezing 0.7, nasal_congestion 0.4, runny_nose 0.6

is scored at the target distances 0.19 (common cold), 0.39 (dust exposure)
and 0.54 (foreign object in nose), each within +/- 0.005. One band bound per
disease is treated as free and solved by grid search on a 0.01 grid; all
other bounds and every weight are fixed by hand. Rerunning with --write
regenerates src/meddx/data/demo_pack.json byte-for-byte.

Usage:
    python scripts/calibrate_demo_pack.py            # verify the shipped pack
    python scripts/calibrate_demo_pack.py --solve    # re-derive the free bounds
    python scripts/calibrate_demo_pack.py --write    # rewrite the pack file
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from meddx.knowledge import canonical_dumps, load_pack, validate_pack  # noqa: E402

PACK_PATH = Path(__file__).resolve().parents[1] / "src" / "meddx" / "data" / "demo_pack.json"

REFERENCE_PATIENT = {
    "strange_smell": 0.1,
    "sneezing": 0.7,
    "nasal_congestion": 0.4,
    "runny_nose": 0.6,
}

TARGETS = {
    "common_cold": 0.19,
    "dust_exposure": 0.39,
    "nasal_foreign_object": 0.54,
}
TOLERANCE = 0.005

# (lower, upper, weight) per symptom. Weights and all but one bound per
# disease are fixed by hand; the free bounds below carry the values found by
# --solve: common_cold nasal_congestion.lower = 0.75, dust_exposure
# nasal_congestion.lower = 0.95, nasal_foreign_object runny_nose.upper = 0.04.
PROFILES = {
    "common_cold": {
        "sneezing": (0.5, 1.0, 1.0),
        "runny_nose": (0.5, 1.0, 0.9),
        "nasal_congestion": (0.75, 1.0, 0.9),
        "strange_smell": (0.0, 0.2, 0.3),
    },
    "dust_exposure": {
        "sneezing": (0.6, 1.0, 1.0),
        "strange_smell": (0.6, 1.0, 0.6),
        "runny_nose": (0.0, 0.3, 0.7),
        "nasal_congestion": (0.95, 1.0, 0.9),
    },
    "nasal_foreign_object": {
        "strange_smell": (0.7, 1.0, 1.0),
        "nasal_congestion": (0.8, 1.0, 0.9),
        "sneezing": (0.0, 0.1, 0.5),
        "runny_nose": (0.0, 0.04, 0.7),
    },
}

FREE_BOUND = {
    "common_cold": ("nasal_congestion", "lower"),
    "dust_exposure": ("nasal_congestion", "lower"),
    "nasal_foreign_object": ("runny_nose", "upper"),
}


def band_deviation(severity: float, lower: float, upper: float) -> float:
    if lower <= severity <= upper:
        return 0.0
    return min(abs(severity - lower), abs(severity - upper))


def profile_distance(profile: dict[str, tuple[float, float, float]]) -> float:
    num = 0.0
    den = 0.0
    for sym, (lower, upper, weight) in profile.items():
        severity = REFERENCE_PATIENT.get(sym, 0.0)
        num += weight * band_deviation(severity, lower, upper) ** 2
        den += weight
    return math.sqrt(num / den)


def solve() -> None:
    """Grid-search each free bound on a 0.01 grid; report the best value."""
    for disease, (sym, side) in FREE_BOUND.items():
        target = TARGETS[disease]
        best = None
        for step in range(0, 101):
            value = step / 100.0
            profile = {s: list(b) for s, b in PROFILES[disease].items()}
            profile[sym]["lower upper".split().index(side)] = value
            lo, up, w = profile[sym]
            if lo > up:
                continue
            candidate = {s: tuple(b) for s, b in profile.items()}
            err = abs(profile_distance(candidate) - target)
            if best is None or err < best[0]:
                best = (err, value)
        err, value = best
        status = "ok" if err <= TOLERANCE else "OUT OF TOLERANCE"
        print(f"{disease}: {sym}.{side} = {value:.2f} (|err| = {err:.5f}, {status})")


def build_document() -> dict:
    symptoms = [
        {"id": "strange_smell", "icd": "R43.1", "name": "Strange smell"},
        {"id": "sneezing", "icd": "R06.7", "name": "Sneezing"},
        {"id": "nasal_congestion", "icd": "R09.81", "name": "Nasal congestion"},
        {"id": "runny_nose", "icd": "R09.82", "name": "Runny nose"},
        {"id": "ear_pain", "icd": "H92.0", "name": "Ear pain"},
        {"id": "hearing_loss", "icd": "H91.9", "name": "Hearing loss"},
        {"id": "ear_discharge", "icd": "H92.1", "name": "Ear discharge"},
    ]
    ear_profiles = {
        "otitis_media": {
            "ear_pain": (0.5, 1.0, 0.9),
            "ear_discharge": (0.3, 0.8, 0.5),
            "hearing_loss": (0.2, 0.7, 0.4),
        },
        "earwax_blockage": {
            "hearing_loss": (0.4, 0.9, 0.9),
            "ear_pain": (0.0, 0.4, 0.3),
            "ear_discharge": (0.0, 0.2, 0.2),
        },
        "otitis_externa": {
            "ear_pain": (0.6, 1.0, 1.0),
            "ear_discharge": (0.4, 0.9, 0.7),
            "hearing_loss": (0.0, 0.5, 0.3),
        },
    }
    names = {
        "common_cold": ("J00", "Common cold"),
        "dust_exposure": ("Z77.1", "Dust exposure"),
        "nasal_foreign_object": ("T17.1", "Foreign object in nose"),
        "otitis_media": ("H66.9", "Otitis media"),
        "earwax_blockage": ("H61.2", "Earwax blockage"),
        "otitis_externa": ("H60.9", "Otitis externa"),
    }
    diseases = []
    for disease_id, profile in {**PROFILES, **ear_profiles}.items():
        icd, name = names[disease_id]
        diseases.append(
            {
                "id": disease_id,
                "icd": icd,
                "name": name,
                "profile": {
                    sym: {"lower": lo, "upper": up, "weight": w}
                    for sym, (lo, up, w) in profile.items()
                },
            }
        )
    parts = []
    for part in ("head", "neck", "chest", "abdomen", "pelvic", "leg", "arm", "back"):
        subparts = []
        if part == "head":
            subparts = [
                {
                    "id": "nose",
                    "symptoms": ["strange_smell", "sneezing", "nasal_congestion", "runny_nose"],
                    "diseases": ["common_cold", "dust_exposure", "nasal_foreign_object"],
                },
                {
                    "id": "ears",
                    "symptoms": ["ear_pain", "hearing_loss", "ear_discharge"],
                    "diseases": ["otitis_media", "earwax_blockage", "otitis_externa"],
                },
            ]
        parts.append({"name": part, "subparts": subparts})
    return {
        "manifest": {
            "profile": "demo",
            "symptoms": len(symptoms),
            "diseases": len(diseases),
            "subparts": {
                "nose": {"symptoms": 4, "diseases": 3},
                "ears": {"symptoms": 3, "diseases": 3},
            },
        },
        "parts": parts,
        "symptoms": symptoms,
        "diseases": diseases,
        "rules": [],
    }


def verify() -> int:
    failures = 0
    for disease, target in TARGETS.items():
        d = profile_distance(PROFILES[disease])
        err = abs(d - target)
        ok = err <= TOLERANCE
        failures += 0 if ok else 1
        print(f"{disease:22s} distance={d:.6f} target={target} |err|={err:.5f} "
              f"{'ok' if ok else 'FAIL'}")
    if PACK_PATH.exists():
        pack = load_pack(PACK_PATH)
        report = validate_pack(pack)
        if report.ok:
            print(f"{PACK_PATH.name}: validation clean")
        else:
            failures += 1
            for entry in report:
                print(f"{PACK_PATH.name}: {entry}")
        if PACK_PATH.read_text(encoding="utf-8") != canonical_dumps(build_document()):
            failures += 1
            print(f"{PACK_PATH.name}: file differs from calibrated document (rerun with --write)")
    else:
        failures += 1
        print(f"{PACK_PATH} missing (run with --write)")
    return failures


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--solve", action="store_true", help="re-derive the free band bounds")
    parser.add_argument("--write", action="store_true", help="rewrite the demo pack file")
    args = parser.parse_args()
    if args.solve:
        solve()
        return 0
    if args.write:
        PACK_PATH.parent.mkdir(parents=True, exist_ok=True)
        PACK_PATH.write_text(canonical_dumps(build_document()), encoding="utf-8")
        print(f"wrote {PACK_PATH}")
    return 1 if verify() else 0


if __name__ == "__main__":
    raise SystemExit(main())
