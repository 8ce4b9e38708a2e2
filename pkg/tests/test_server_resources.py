import pytest

from ldaf.server.negotiate import CONTENT_TYPES
from ldaf.server.web import HandlerRegistry, RegistryError, Response, json_response
from ldaf.terms import Iri

from conftest import BASE, build_config
from helpers import Client

PNG = bytes.fromhex(
    "89504e470d0a1a0a0000000d4948445200000001000000010806000000"
    "1f15c4890000000a49444154789c6360000002000154a24f6d0000000049454e44ae426082"
)


# ---------------------------------------------------------------- ontology


@pytest.fixture
def onto_app(tmp_path):
    from ldaf.server.app import make_app

    onto = tmp_path / "ontology.ttl"
    onto.write_text(
        f"""
        @prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
        @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
        @prefix app: <{BASE}/ontology/> .
        app:Person a rdfs:Class ; rdfs:label "Person" .
        app:knows a rdf:Property ; rdfs:label "knows" .
        """,
        "utf-8",
    )
    return make_app(build_config(tmp_path, ontology_file=onto))


def test_ontology_lists_terms_publicly(onto_app):
    client = Client(onto_app)
    page = client.get("/ontology").json
    names = {item["localname"] for item in page["items"]}
    assert {"Person", "knows", "username", "User", "Graph"} <= names
    assert page["total"] == len(page["items"])


def test_ontology_term_resolves_in_three_formats(onto_app):
    client = Client(onto_app)
    r = client.get("/ontology/Person")
    assert r.status == 200
    assert r.json["label"] == "Person"
    assert client.get("/ontology/Person", accept="text/html").status == 200
    turtle = client.get("/ontology/Person", accept="text/turtle")
    assert turtle.status == 200 and "Person" in turtle.text


def test_ontology_unknown_term_404(onto_app):
    assert Client(onto_app).get("/ontology/Nope").status == 404


def test_ontology_mutations_405(onto_app):
    client = Client(onto_app)
    client.register_and_login("ada")
    assert client.put("/ontology/Person", json_body={}).status == 405
    assert client.post("/ontology", json_body={}).status == 405
    assert client.delete("/ontology/Person").status == 405
    assert client.patch("/ontology/knows", json_body={}).status == 405


def test_every_served_predicate_key_resolves(onto_app):
    # crawler oracle: map each key back through the keymap and GET the IRI
    client = Client(onto_app)
    client.register_and_login("ada")
    client.post("/person", json_body={"nickname": "Ada", "knows": {"label": "B"}})
    obj = client.get("/person/1").json
    from ldaf.convert import RESERVED_KEYS

    for key in (k for k in obj if k not in RESERVED_KEYS):
        predicate = onto_app.keymap.predicate_for(key)
        if not predicate.startswith(BASE):
            continue
        path = predicate[len(BASE) :]
        r = client.get(path)
        assert r.status == 200, (key, predicate, r)


def test_minted_predicates_redeclared_after_restart(tmp_path, onto_app):
    from ldaf.server.app import make_app

    client = Client(onto_app)
    client.register_and_login("ada")
    client.post("/person", json_body={"nickname": "Ada"})
    reborn = make_app(build_config(tmp_path, ontology_file=onto_app.config.ontology_file))
    client2 = Client(reborn)
    assert client2.get("/ontology/nickname").status == 200


# ---------------------------------------------------------------- sparql


def test_sparql_limit_one_row(logged_in):
    logged_in.post("/person", json_body={"label": "Ada"})
    r = logged_in.get("/sparql", query={"query": "SELECT * WHERE {?s ?p ?o} LIMIT 1"})
    assert r.status == 200
    doc = r.json
    assert doc["head"]["vars"] == ["s", "p", "o"]
    assert len(doc["results"]["bindings"]) == 1


def test_sparql_unsupported_construct_400(logged_in):
    r = logged_in.get("/sparql", query={"query": "CONSTRUCT {?s ?p ?o} WHERE {?s ?p ?o}"})
    assert r.status == 400
    assert "unsupported" in r.json["message"]


def test_sparql_syntax_error_400_with_message(logged_in):
    r = logged_in.get("/sparql", query={"query": "SELECT WHERE"})
    assert r.status == 400
    assert "line" in r.json["message"]


def test_sparql_requires_auth(client):
    assert client.get("/sparql", query={"query": "SELECT * WHERE {?s ?p ?o}"}).status == 401


def test_sparql_turtle_is_406(logged_in):
    r = logged_in.get("/sparql", accept="text/turtle", query={"query": "SELECT * WHERE {?s ?p ?o}"})
    assert r.status == 406


def test_sparql_matches_direct_evaluation(logged_in, app):
    logged_in.post("/person", json_body={"label": "Ada", "knows": {"label": "Bob"}})
    query = "SELECT ?s ?o WHERE { ?s <http://testserver/ontology/knows> ?o }"
    r = logged_in.get("/sparql", query={"query": query})
    from ldaf.query import evaluate, parse_query, solutions_to_json

    user = Iri(f"{BASE}/user/1")
    direct = solutions_to_json(parse_query(query), evaluate(parse_query(query), app.visible_graphs(user)))
    assert r.json == direct


def test_sparql_post_form_and_html(logged_in):
    logged_in.post("/person", json_body={"label": "Ada"})
    r = logged_in.post("/sparql", form={"query": "SELECT * WHERE {?s ?p ?o} LIMIT 2"}, accept="text/html")
    assert r.status == 200
    assert "<table>" in r.text
    form_page = logged_in.get("/sparql", accept="text/html")
    assert form_page.status == 200 and "<textarea" in form_page.text


def test_sparql_over_visible_graphs_only(app, logged_in):
    logged_in.post("/person", json_body={"label": "private thing"})
    snoop = Client(app)
    snoop.register_and_login("bob")
    r = snoop.get("/sparql", query={"query": 'SELECT ?s WHERE { ?s <http://www.w3.org/2000/01/rdf-schema#label> "private thing" }'})
    assert r.json["results"]["bindings"] == []


# ---------------------------------------------------------------- search


def test_search_json_and_html(logged_in):
    logged_in.post("/person", json_body={"label": "Ada Lovelace"})
    logged_in.post("/person", json_body={"label": "Grace Hopper"})
    r = logged_in.get("/search", query={"q": "lovelace"})
    assert r.status == 200
    assert [hit["label"] for hit in r.json] == ["Ada Lovelace"]
    assert r.json[0]["path"] == "/person/1"
    html = logged_in.get("/search", accept="text/html", query={"q": "lovelace"})
    assert "Ada Lovelace" in html.text


def test_search_invalid_regex_400(logged_in):
    assert logged_in.get("/search", query={"q": "["}).status == 400


def test_search_requires_auth(client):
    assert client.get("/search", query={"q": "x"}).status == 401


def test_search_empty_query_html_form(logged_in):
    r = logged_in.get("/search", accept="text/html")
    assert r.status == 200 and "<form" in r.text


# ---------------------------------------------------------------- upload


def test_upload_round_trips_bytes(logged_in):
    r = logged_in.post("/upload", body=PNG, content_type="image/png")
    assert r.status == 201
    assert r.headers["location"] == "/upload/1"
    fetched = logged_in.get("/upload/1", accept="*/*")
    assert fetched.status == 200
    assert fetched.headers["content-type"] == "image/png"
    assert fetched.body == PNG


def test_upload_with_target_links_depiction(logged_in):
    logged_in.post("/person", json_body={"label": "Ada"})
    r = logged_in.post("/upload?target=/person/1", body=PNG, content_type="image/png")
    assert r.status == 201
    state = logged_in.get("/person/1").json
    assert state["depiction"]["path"] == "/upload/1"


def test_upload_wrong_type_415(logged_in):
    assert logged_in.post("/upload", body=b"GIF89a", content_type="image/gif").status == 415
    assert logged_in.post("/upload", body=b"hi", content_type="text/plain").status == 415


def test_upload_too_large_413(app, logged_in):
    app.config.upload_max_bytes = 64
    assert logged_in.post("/upload", body=b"x" * 65, content_type="image/png").status == 413


def test_upload_bad_target_404(logged_in):
    assert logged_in.post("/upload?target=/person/99", body=PNG, content_type="image/png").status == 404


def test_upload_requires_auth(client):
    assert client.post("/upload", body=PNG, content_type="image/png").status == 401


def test_upload_survives_restart(tmp_path, app, logged_in):
    from ldaf.server.app import make_app

    logged_in.post("/upload", body=PNG, content_type="image/png")
    reborn = make_app(build_config(tmp_path))
    client = Client(reborn)
    client.post("/login", json_body={"username": "ada", "password": "hunter2secret"})
    # counter reconciles from stored files, so the next upload gets a fresh id
    r = client.post("/upload", body=PNG, content_type="image/jpeg")
    assert r.headers["location"] == "/upload/2"
    assert client.get("/upload/1", accept="*/*").headers["content-type"] == "image/png"
    assert client.get("/upload/2", accept="*/*").headers["content-type"] == "image/jpeg"


# ---------------------------------------------------------------- registry / extension point


def test_registry_longest_prefix_wins():
    registry = HandlerRegistry()
    registry.register("/", lambda r: Response(200, [], b"root"))
    registry.register("/a", lambda r: Response(200, [], b"a"))
    registry.register("/a/b", lambda r: Response(200, [], b"ab"))
    assert registry.dispatch("/a/b/c")(None).body == b"ab"
    assert registry.dispatch("/a/x")(None).body == b"a"
    assert registry.dispatch("/ab")(None).body == b"root"
    assert registry.dispatch("/a")(None).body == b"a"


def test_duplicate_prefix_is_startup_error():
    registry = HandlerRegistry()
    registry.register("/hello", lambda r: Response())
    with pytest.raises(RegistryError):
        registry.register("/hello", lambda r: Response())


def test_custom_handler_is_served(app):
    app.register_handler("/hello", lambda req: json_response({"hi": req.format}))
    client = Client(app)
    assert client.get("/hello").json == {"hi": "json"}
    assert client.get("/hello/deeper").json == {"hi": "json"}


def test_duplicate_collection_prefix_fails_at_startup(tmp_path):
    from ldaf.server.app import make_app
    from ldaf.server.config import CollectionSpec

    config = build_config(tmp_path, collections=[CollectionSpec("sparql", None)])
    with pytest.raises(RegistryError):
        make_app(config)


# ---------------------------------------------------------------- error bodies and root


def test_error_bodies_match_format(client):
    r = client.get("/person/1", accept="application/json")
    assert r.status == 401
    assert r.json == {"status": 401, "message": "authentication required"}
    r = client.get("/nope/1", accept="text/turtle")
    assert r.headers["content-type"] == "application/json"


def test_html_error_page_renders_template(logged_in):
    r = logged_in.get("/person/420", accept="text/html")
    assert r.status == 404
    assert r.headers["content-type"] == CONTENT_TYPES["html"]
    assert "404" in r.text


def test_root_json_descriptor(client):
    doc = client.get("/").json
    assert doc["base_url"] == BASE
    assert {"path": "/person", "class": f"{BASE}/ontology/Person"} in doc["collections"]


def test_root_html_redirects(client):
    r = client.get("/", accept="text/html")
    assert r.status == 303
    assert r.headers["location"] == "/search"


def test_static_webui_serving(app, tmp_path):
    webui = app.config.webui_dir
    webui.mkdir(parents=True, exist_ok=True)
    (webui / "index.html").write_text("<html>spa</html>", "utf-8")
    (webui / "app.js").write_text("export {}", "utf-8")
    client = Client(app)
    assert client.get("/app/", accept="text/html").text == "<html>spa</html>"
    assert client.get("/app/index.html", accept="text/html").status == 200
    js = client.get("/app/app.js", accept="*/*")
    assert js.status == 200
    assert "javascript" in js.headers["content-type"]
    assert client.get("/app/../secret", accept="text/html").status == 404
    assert client.get("/app/missing.css", accept="text/html").status == 404
    # with a web UI present the root redirects into it
    r = client.get("/", accept="text/html")
    assert r.headers["location"] == "/app/"


def test_head_requests_have_empty_body(client):
    r = client.request("HEAD", "/", accept="application/json")
    assert r.status == 200
    assert r.body == b""
