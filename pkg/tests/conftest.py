from pathlib import Path

import pytest

from midair.sceneio import parse_scene

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
SCENES = FIXTURES / "scenes"
GOLDEN = FIXTURES / "golden"
STATS = FIXTURES / "stats"

FIXTURE_NAMES = ("lamp", "wheel", "birdhouse")


def scene_path(name: str) -> Path:
    return SCENES / f"object_{name}.json"


def load_fixture(name: str):
    return parse_scene(scene_path(name).read_text(encoding="utf-8"))


@pytest.fixture
def lamp():
    return load_fixture("lamp")


@pytest.fixture
def wheel():
    return load_fixture("wheel")


@pytest.fixture
def birdhouse():
    return load_fixture("birdhouse")
