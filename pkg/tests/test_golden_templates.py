"""Golden-file checks: the built-in templates rendered against fixed models
must match the stored outputs byte for byte."""
from pathlib import Path

import pytest

from ldaf.template import TemplateLoader, render

GOLDEN_DIR = Path(__file__).parent / "golden"

MODELS = {
    "resource": (
        "resource.tpl",
        {
            "uri": "http://testserver/person/1",
            "path": "/person/1",
            "localname": "1",
            "properties": [
                {"key": "label", "value": "Ada Lovelace"},
                {"key": "age", "value": 36},
                {"key": "knows", "value": {"uri": "http://testserver/person/2", "path": "/person/2", "localname": "2"}},
            ],
            "incoming": [
                {"key": "knows", "ref": {"uri": "http://testserver/person/3", "path": "/person/3", "localname": "3"}}
            ],
            "user": {"username": "ada"},
        },
    ),
    "resource_escaping": (
        "resource.tpl",
        {
            "uri": "http://testserver/person/9",
            "path": "/person/9",
            "localname": "9",
            "properties": [
                {"key": "label", "value": '<script>alert("boo")</script>'},
                {"key": "note", "value": "a&b <i>c</i> 'quote'"},
            ],
            "incoming": [],
            "user": None,
        },
    ),
    "collection": (
        "collection.tpl",
        {
            "collection": "person",
            "items": [
                {"path": "/person/1", "localname": "1", "label": "Ada"},
                {"path": "/person/2", "localname": "2"},
            ],
            "page": 1,
            "size": 2,
            "total": 5,
            "next": "/person?page=2&size=2",
            "prev": "",
            "user": {"username": "ada"},
        },
    ),
    "login": ("login.tpl", {"error": "invalid username or password"}),
    "register": ("register.tpl", {"error": ""}),
    "search": (
        "search.tpl",
        {
            "q": "^Ada",
            "results": [
                {"uri": "http://testserver/person/1", "path": "/person/1", "localname": "1", "label": "Ada"}
            ],
            "user": {"username": "ada"},
        },
    ),
    "sparql": (
        "sparql.tpl",
        {
            "query": "SELECT * WHERE { ?s ?p ?o } LIMIT 2",
            "ran": True,
            "vars": ["s", "o"],
            "rows": [
                [
                    {"text": "http://testserver/person/1", "href": "/person/1"},
                    {"text": "Ada", "href": ""},
                ],
                [
                    {"text": "http://other.net/x", "href": ""},
                    {"text": "42", "href": ""},
                ],
            ],
            "user": {"username": "ada"},
        },
    ),
    "error": ("error.tpl", {"status": 404, "message": "no data about http://testserver/person/7"}),
}


@pytest.mark.parametrize("name", sorted(MODELS))
def test_template_matches_golden(name):
    template_name, model = MODELS[name]
    loader = TemplateLoader(None)
    rendered = render(loader.get(template_name), model)
    golden = (GOLDEN_DIR / f"{name}.html").read_text("utf-8")
    assert rendered == golden, f"{name} drifted from its golden file"


def test_escaping_golden_contains_no_script_tag():
    golden = (GOLDEN_DIR / "resource_escaping.html").read_text("utf-8")
    assert "<script>" not in golden
    assert "&lt;script&gt;" in golden
