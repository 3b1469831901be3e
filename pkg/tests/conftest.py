import os

import pytest

from core.context import CACHE_ENV
from core.design import SetSystem
from core.ucycle import ShiftUcycle
from modules.catalog import Catalog, get_catalog


# U from the representation-based STS(7) example
STS7_UCYCLE = (1, 3, 7, 2, 6, 4, 3, 5, 2, 1, 4, 7, 5, 6)


@pytest.fixture(scope="session", autouse=True)
def isolated_cache(tmp_path_factory):
    """Point the fixture cache at a throwaway directory for the whole run."""
    cache = tmp_path_factory.mktemp("ucover-cache")
    previous = os.environ.get(CACHE_ENV)
    os.environ[CACHE_ENV] = str(cache)
    get_catalog.cache_clear()
    yield cache
    if previous is None:
        os.environ.pop(CACHE_ENV, None)
    else:
        os.environ[CACHE_ENV] = previous
    get_catalog.cache_clear()


@pytest.fixture
def catalog(isolated_cache) -> Catalog:
    return get_catalog()


@pytest.fixture
def fresh_catalog(tmp_path) -> Catalog:
    """Bundled fixtures with an empty private cache."""
    bundled = get_catalog()
    return Catalog(fixtures_dir=bundled.fixtures_dir, cache_dir=tmp_path / "cache",
                   repair_seed=bundled.repair_seed, repair_budget=bundled.repair_budget,
                   repair_max_remove=bundled.repair_max_remove)


@pytest.fixture
def covering4() -> SetSystem:
    return SetSystem(4, ((1, 2, 3), (1, 2, 4), (1, 3, 4)))


@pytest.fixture
def fano() -> SetSystem:
    return SetSystem(7, ((1, 2, 4), (2, 3, 5), (3, 4, 6), (4, 5, 7), (5, 6, 1), (6, 7, 2), (7, 1, 3)))


@pytest.fixture
def sts7_ucycle() -> ShiftUcycle:
    return ShiftUcycle(STS7_UCYCLE, s=2, k=3, order=7)
