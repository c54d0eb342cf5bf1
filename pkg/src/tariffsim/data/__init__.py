"""Bundled synthetic fixtures and the two reference reform scenarios.

``iran2010_shape.csv`` is a synthetic agricultural-imports dataset whose
partner totals and per-band tariff revenue are calibrated to published
marginals (partner CIF 34.9/11.9/10.7/6.1/4.9 plus a 25.6 residual under
OTHER, total 94.1; band revenue 6.95/1.27/1.95/0.15/2.54).
``exemptions_shape.csv`` mixes fully exempt flows (statutory 45%, applied
5%) with unexempt ones, for exemption-removal experiments.
"""

from __future__ import annotations

from importlib.resources import files

from ..ingest import Dataset, load_dataset
from ..scenario import Scenario, parse_scenario

SCENARIO_NAMES = ("scenario1", "scenario2", "remove_exemptions")
DATASET_NAMES = ("iran2010_shape", "exemptions_shape")


def read(name: str) -> bytes:
    """Raw bytes of a bundled data file, e.g. ``read("scenario1.json")``."""
    return (files(__package__) / name).read_bytes()


def bundled_scenario(name: str) -> Scenario:
    if name not in SCENARIO_NAMES:
        raise KeyError(f"no bundled scenario {name!r}; choose from {SCENARIO_NAMES}")
    return parse_scenario(read(f"{name}.json"))


def bundled_dataset(name: str = "iran2010_shape") -> Dataset:
    if name not in DATASET_NAMES:
        raise KeyError(f"no bundled dataset {name!r}; choose from {DATASET_NAMES}")
    return load_dataset(read(f"{name}.csv"), currency_label="1000 Billion Rials")


__all__ = ["DATASET_NAMES", "SCENARIO_NAMES", "bundled_dataset", "bundled_scenario", "read"]
