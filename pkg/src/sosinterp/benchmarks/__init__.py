"""Shipped benchmark problem files (loop-step encodings with primed variables)."""

from importlib.resources import files
from typing import List

_NAMES = [
    "circle",
    "ex1_1",
    "ex1_2",
    "accelerate",
    "logistic_1",
    "logistic_2",
    "logistic_3",
    "logistic_4",
]


def list_benchmarks() -> List[str]:
    return list(_NAMES)


def benchmark_path(name: str) -> str:
    if name not in _NAMES:
        raise KeyError(f"unknown benchmark {name!r}; available: {', '.join(_NAMES)}")
    return str(files(__package__).joinpath(f"{name}.json"))
