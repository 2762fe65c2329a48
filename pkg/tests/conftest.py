import pytest

from app import create_app
from tests.helpers import clique, path, records_of, star


@pytest.fixture
def app():
    app = create_app({"TESTING": True, "CACHE_TYPE": "NullCache"})
    yield app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def family_records():
    """3 cliques, 3 paths, 3 stars of sizes 4..6"""
    graphs = [clique(n) for n in (4, 5, 6)] + [path(n) for n in (4, 5, 6)] + [star(n - 1) for n in (4, 5, 6)]
    return records_of(graphs)
