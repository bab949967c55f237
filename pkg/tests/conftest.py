import json
import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
DATA_DIR = TESTS_DIR / "data"
SYNTHETIC_DIR = DATA_DIR / "synthetic"

sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture(scope="session")
def mt_reference():
    """Frozen outputs of the reference C generator, seeds 0..4 x 1000 draws."""
    with open(DATA_DIR / "mt19937_reference.json", encoding="utf-8") as f:
        return {int(k): v for k, v in json.load(f).items()}


@pytest.fixture(scope="session")
def synthetic_dir():
    return SYNTHETIC_DIR
