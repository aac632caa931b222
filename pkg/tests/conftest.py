"""Shared test helpers: fixture paths and a CLI runner."""

from __future__ import annotations

from pathlib import Path

import pytest
from click.testing import CliRunner

from ebhint.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

FIXTURE_FILES = (
    "hypSel0.ebh",
    "hypSel0_workaround.ebh",
    "case0.ebh",
    "case0_abstract.ebh",
    "case0_merge.ebh",
)


def run_cli(*args: str):
    """Invoke the CLI in-process and return the click result."""
    return CliRunner().invoke(main, list(args))


def statuses_from(output: str) -> dict[str, str]:
    """Map obligation name -> status from prove's text output."""
    out: dict[str, str] = {}
    for line in output.splitlines():
        parts = line.split()
        if len(parts) == 2 and parts[0] in {"PROVED", "UNPROVED", "UNSUPPORTED"}:
            out[parts[1]] = parts[0].lower()
    return out


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES
