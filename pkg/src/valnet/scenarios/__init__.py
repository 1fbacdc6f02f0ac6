"""Bundled network documents."""

from importlib import resources
from pathlib import Path

SUFFIX = ".vn"


def bundled() -> list[str]:
    root = resources.files(__name__)
    return sorted(p.name[: -len(SUFFIX)] for p in root.iterdir() if p.name.endswith(SUFFIX))


def scenario_path(name: str) -> Path:
    return Path(str(resources.files(__name__) / f"{name}{SUFFIX}"))


def scenario_text(name: str) -> str:
    return scenario_path(name).read_text(encoding="utf-8")
