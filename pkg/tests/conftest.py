"""Shared fixtures: flat and Taub-NUT models and structure-file helpers."""

import json
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from src.services.structure_files import structure_for_model
from src.twistor.form_algebra import TwoForm
from src.twistor.pointwise import HoloSympFamily, metric_from_family
from src.twistor.zoo import FLAT_FORMS, ZooModel, flat_hk, taub_nut


@pytest.fixture(scope="session")
def flat() -> ZooModel:
    return flat_hk(1)


@pytest.fixture(scope="session")
def flat_family() -> HoloSympFamily:
    w1, w2, w3 = FLAT_FORMS
    return HoloSympFamily(omega_plus=TwoForm(entries=w1 + 1j * w2), omega_3=TwoForm(entries=w3))


@pytest.fixture(scope="session")
def flat_structure(flat_family):
    return metric_from_family(flat_family)


@pytest.fixture(scope="session")
def taub_nut_model() -> ZooModel:
    return taub_nut()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def flat_file_data(flat) -> dict[str, Any]:
    return structure_for_model(flat).model_dump(mode="json")


@pytest.fixture
def write_json(tmp_path: Path):
    def write(data: dict[str, Any], name: str = "structure.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write
