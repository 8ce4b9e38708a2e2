import threading

from ldaf.terms import Iri

from conftest import BASE, build_config
from helpers import Client


def test_fresh_user_sees_three_graphs(app, logged_in):
    user = Iri(f"{BASE}/user/1")
    names = [n.text for n in app.visible_graph_names(user)]
    assert names == [
        f"{BASE}/graph/user/1",
        f"{BASE}/graph/shared",
        f"{BASE}/graph/ontology",
    ]
    writable = [n.text for n in app.writable_graph_names(user)]
    assert writable == [f"{BASE}/graph/user/1", f"{BASE}/graph/shared"]


def test_unauthenticated_sees_ontology_only(app):
    assert [n.text for n in app.visible_graph_names(None)] == [f"{BASE}/graph/ontology"]
    assert app.writable_graph_names(None) == []


def test_default_resources_are_registry_mounted(app):
    prefixes = set(app.registry.prefixes())
    assert {"/", "/register", "/login", "/logout", "/sparql", "/search", "/ontology", "/upload", "/app", "/person", "/note"} <= prefixes


def test_private_graph_resource_resolves_for_owner_only(app, logged_in):
    # the graph IRI appears as the object of the account's privateGraph triple,
    # so it must resolve for its owner
    r = logged_in.get("/graph/user/1")
    assert r.status == 200
    assert r.json["type"]["localname"] == "Graph"
    other = Client(app)
    other.register_and_login("bob")
    assert other.get("/graph/user/1").status == 404


def test_collection_template_override(tmp_path):
    from ldaf.server.app import make_app
    from ldaf.server.config import CollectionSpec

    config = build_config(
        tmp_path,
        collections=[CollectionSpec("person", f"{BASE}/ontology/Person", "person.tpl")],
    )
    config.templates_dir.mkdir(parents=True, exist_ok=True)
    (config.templates_dir / "person.tpl").write_text("PERSON PAGE: {{ label }}", "utf-8")
    client = Client(make_app(config))
    client.register_and_login("ada")
    client.post("/person", json_body={"label": "Ada"})
    page = client.get("/person/1", accept="text/html")
    assert page.text == "PERSON PAGE: Ada"


def test_concurrent_readers_and_writers_stay_consistent(app):
    writer = Client(app)
    writer.register_and_login("ada")
    writer.post("/person", json_body={"label": "seed"})
    errors = []

    def read_loop():
        c = Client(app)
        c.post("/login", json_body={"username": "ada", "password": "hunter2secret"})
        for _ in range(30):
            r = c.get("/person/1")
            if r.status != 200:
                errors.append(f"read {r.status}")

    def write_loop(n):
        c = Client(app)
        c.post("/login", json_body={"username": "ada", "password": "hunter2secret"})
        for i in range(15):
            r = c.patch("/person/1", json_body={f"w{n}": i})
            if r.status != 200:
                errors.append(f"write {r.status}")

    threads = [threading.Thread(target=read_loop) for _ in range(4)] + [
        threading.Thread(target=write_loop, args=(n,)) for n in range(2)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert errors == []
    final = writer.get("/person/1").json
    assert final["w0"] == 14 and final["w1"] == 14


def test_counter_lock_prevents_duplicate_mints(app):
    minted = []

    def mint_loop():
        for _ in range(25):
            minted.append(app.mint_uri("person").text)

    threads = [threading.Thread(target=mint_loop) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(minted) == len(set(minted)) == 100
