"""Shared fixtures. Puts the repository root on sys.path the way main.py does."""
import os
import sys

_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if _ROOT not in sys.path:
    sys.path.insert(0, _ROOT)

import pytest

from core import families
from db import database
from db.models import WeightedGraph


@pytest.fixture
def p3() -> WeightedGraph:
    return families.path(3)


@pytest.fixture
def k2() -> WeightedGraph:
    return families.path(2)


@pytest.fixture
def star10() -> WeightedGraph:
    return families.star(10)


@pytest.fixture
def c10() -> WeightedGraph:
    return families.cycle(10)


@pytest.fixture
def history_db(tmp_path):
    path = str(tmp_path / "history.db")
    database.initialize(path)
    yield path
    database.close()
