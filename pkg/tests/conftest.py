import json
from pathlib import Path

import pytest

from pipeforge.llm import ReplayBackend
from pipeforge.registry import load_canonical_registry

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


@pytest.fixture(scope="session")
def registry():
    return load_canonical_registry()


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def replay_backend():
    return ReplayBackend(FIXTURES / "replay")


@pytest.fixture(scope="session")
def replay_cases():
    manifest = json.loads((FIXTURES / "replay_manifest.json").read_text())
    return {case["name"]: case for case in manifest["cases"]}
