from __future__ import annotations

import pytest

from bicomm.algebra import Algebra
from bicomm.catalog import Catalog, load_catalog
from bicomm.config import AppConfig
from bicomm.dsl import parse_algebra


def alg(text: str) -> Algebra:
    return parse_algebra(text).algebra


@pytest.fixture(scope="session")
def catalog() -> Catalog:
    return load_catalog()


@pytest.fixture
def cfg() -> AppConfig:
    return AppConfig()


@pytest.fixture
def n01() -> Algebra:
    return alg("algebra N01 dim 4\ne1*e1 = e2\n")


@pytest.fixture
def heisenberg_like() -> Algebra:
    return alg("algebra H dim 3\ne1*e2 = e3\ne2*e1 = -e3\n")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: sweeps the whole embedded catalog")
