import pytest

from crossdial import database as dbm


@pytest.fixture(scope="session")
def db():
    return dbm.generate_database(seed=7)


@pytest.fixture(scope="session")
def small_db():
    # Small enough for fast queries, large enough for nearby structure.
    return dbm.generate_database(
        seed=3, sizes={"attraction": 60, "restaurant": 60, "hotel": 40})
