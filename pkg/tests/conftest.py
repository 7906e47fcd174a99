from __future__ import annotations

import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = REPO_ROOT / "scenarios"
STUB_DIR = Path(__file__).resolve().parent / "stubs"


@pytest.fixture
def scenario_dir() -> Path:
    return SCENARIO_DIR


def stub_command(name: str) -> str:
    return f"{sys.executable} {STUB_DIR / name}"
