"""Bundled run configurations: ``empty``, ``nd_yag``, ``nanodisc``, ``single_line``."""

from pathlib import Path

from ..config import RunConfig, load_config

_DIR = Path(__file__).parent
NAMES = ("empty", "nd_yag", "nanodisc", "single_line")


def fixture_path(name: str) -> Path:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {NAMES}")
    return _DIR / f"{name}.yaml"


def fixture_config(name: str) -> RunConfig:
    return load_config(fixture_path(name))
