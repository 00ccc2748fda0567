import pytest

from scmilab.config import bundled_world_paths, load_world_file


@pytest.fixture(scope="session")
def stock_worlds():
    return [load_world_file(p) for p in bundled_world_paths()]


@pytest.fixture(scope="session")
def query_worlds():
    from scmilab.active import acceptance_worlds

    return acceptance_worlds()
