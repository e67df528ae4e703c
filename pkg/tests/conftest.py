from __future__ import annotations

import pytest

from linident.documents import load_fixture
from linident.model import CompartmentModel

FIG13_EDGES = [(1, 2), (2, 1), (2, 3), (3, 1)]


@pytest.fixture
def fig1() -> CompartmentModel:
    return load_fixture("fig1.model")


@pytest.fixture
def fig1_paper_order() -> CompartmentModel:
    return CompartmentModel.build(3, FIG13_EDGES, {1}, {1}, {1, 2, 3})
