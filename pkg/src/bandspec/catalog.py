"""Bundled operator files and run configurations."""

from __future__ import annotations

from importlib import resources

from .operator_model import BandOperator, parse_operator

NAMES = ("shift", "example_b", "example_c")


def example_path(filename: str):
    return resources.files(__package__).joinpath("examples").joinpath(filename)


def load_example(name: str) -> BandOperator:
    if name not in NAMES:
        raise KeyError(f"unknown example {name!r}; choose from {NAMES}")
    return parse_operator(example_path(f"{name}.json").read_text())
