import pytest

from ldaf.server.app import make_app
from ldaf.server.config import AppConfig, CollectionSpec

from helpers import Client

BASE = "http://testserver"


def build_config(tmp_path, collections=None, **overrides) -> AppConfig:
    if collections is None:
        collections = [
            CollectionSpec("person", f"{BASE}/ontology/Person"),
            CollectionSpec("note", None),
        ]
    (tmp_path / "app").mkdir(exist_ok=True)
    settings = dict(
        base_url=BASE,
        port=8080,
        data_dir=tmp_path / "data",
        ontology_file=None,
        app_dir=tmp_path / "app",
        collections=collections,
    )
    settings.update(overrides)
    return AppConfig(**settings)


@pytest.fixture
def app(tmp_path):
    return make_app(build_config(tmp_path))


@pytest.fixture
def client(app):
    return Client(app)


@pytest.fixture
def logged_in(client):
    client.register_and_login("ada")
    return client
