import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
SRC = REPO_ROOT / "src"
for entry in (str(SRC), str(REPO_ROOT / "tests")):
    if entry not in sys.path:
        sys.path.insert(0, entry)

from meddx.knowledge import load_pack  # noqa: E402

DEMO_PACK_PATH = SRC / "meddx" / "data" / "demo_pack.json"

# the reference patient the demo pack is calibrated for
PATIENT_X = {
    "strange_smell": 0.1,
    "sneezing": 0.7,
    "nasal_congestion": 0.4,
    "runny_nose": 0.6,
}


@pytest.fixture(scope="session")
def demo_pack_path() -> Path:
    return DEMO_PACK_PATH


@pytest.fixture(scope="session")
def demo_pack():
    return load_pack(DEMO_PACK_PATH)


@pytest.fixture()
def patient_x() -> dict[str, float]:
    return dict(PATIENT_X)
