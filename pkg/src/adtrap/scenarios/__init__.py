"""Bundled scenario files, addressable by bare name from the CLI and tests."""

from __future__ import annotations

import json
from importlib.resources import files
from pathlib import Path


def _root():
    return files(__package__)


def names() -> list[str]:
    """Bare names of every bundled scenario."""
    return sorted(
        entry.name[: -len(".json")]
        for entry in _root().iterdir()
        if entry.name.endswith(".json")
    )


def path(name: str) -> Path:
    """Filesystem path of a bundled scenario."""
    resource = _root() / f"{name}.json"
    if not resource.is_file():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return Path(str(resource))


def load(name: str) -> dict:
    """Parsed (but unvalidated) document of a bundled scenario."""
    return json.loads((_root() / f"{name}.json").read_text(encoding="utf-8"))
