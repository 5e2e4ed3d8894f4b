import random

import pytest

from icardmaps.services import file_ops
from icardmaps.services.ordinal_parser import parse_ordinal
from icardmaps.services.synthetic_data import sample_bouquets


@pytest.fixture(autouse=True)
def data_dir(tmp_path, monkeypatch):
    """Every test gets its own data directory."""
    monkeypatch.setattr(file_ops, "BASE_DIR", tmp_path)
    return tmp_path


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def bouquets():
    return sample_bouquets()


@pytest.fixture
def o():
    """Shorthand parser for ordinal literals."""
    return parse_ordinal


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: exhaustive or acceptance-sized checks (deselect with -m 'not slow')")
