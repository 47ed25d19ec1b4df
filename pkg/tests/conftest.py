from pathlib import Path

import pytest

from dbnci.model import load_model

MODELS = Path(__file__).resolve().parent.parent / "models"


@pytest.fixture
def fig1():
    return load_model(MODELS / "fig1.json")[0]


@pytest.fixture
def fig4():
    return load_model(MODELS / "fig4.json")[0]


@pytest.fixture
def models_dir():
    return MODELS
