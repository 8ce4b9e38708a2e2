"""Shared test helpers: a tiny WSGI client, random RDF generators, and the
independent oracles the derived expectations are checked against."""
from __future__ import annotations

import io
import json
import random
import string
from decimal import Decimal
from urllib.parse import urlencode

from ldaf.graph import Graph
from ldaf.terms import (
    Iri,
    Literal,
    RDF_LANG_STRING,
    Triple,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_NS,
    XSD_STRING,
    canonical_triple,
)


class Result:
    def __init__(self, status: int, headers: list[tuple[str, str]], body: bytes):
        self.status = status
        self.headers = {k.lower(): v for k, v in headers}
        self.raw_headers = headers
        self.body = body

    @property
    def json(self):
        return json.loads(self.body.decode("utf-8"), parse_float=Decimal)

    @property
    def text(self) -> str:
        return self.body.decode("utf-8")

    def __repr__(self):
        return f"<Result {self.status} {self.body[:80]!r}>"


class Client:
    """Calls a WSGI app directly, keeping cookies between requests."""

    def __init__(self, app):
        self.app = app
        self.cookies: dict[str, str] = {}

    def request(self, method, path, *, accept="application/json", body=None,
                json_body=None, form=None, content_type=None, headers=None, query=None) -> Result:
        if "?" in path:
            path, _, qs = path.partition("?")
        else:
            qs = ""
        if query:
            qs = urlencode(query) if isinstance(query, dict) else query
        if json_body is not None:
            body = json.dumps(json_body).encode("utf-8")
            content_type = content_type or "application/json"
        elif form is not None:
            body = urlencode(form).encode("utf-8")
            content_type = content_type or "application/x-www-form-urlencoded"
        body = body or b""
        environ = {
            "REQUEST_METHOD": method.upper(),
            "PATH_INFO": path,
            "QUERY_STRING": qs,
            "CONTENT_LENGTH": str(len(body)),
            "wsgi.input": io.BytesIO(body),
        }
        if content_type:
            environ["CONTENT_TYPE"] = content_type
        all_headers = dict(headers or {})
        if accept is not None:
            all_headers.setdefault("accept", accept)
        if self.cookies:
            all_headers.setdefault("cookie", "; ".join(f"{k}={v}" for k, v in self.cookies.items()))
        for name, value in all_headers.items():
            environ["HTTP_" + name.upper().replace("-", "_")] = value
        captured = {}

        def start_response(status, response_headers):
            captured["status"] = int(status.split(" ", 1)[0])
            captured["headers"] = response_headers

        chunks = self.app(environ, start_response)
        result = Result(captured["status"], captured["headers"], b"".join(chunks))
        self._absorb_cookies(result)
        return result

    def _absorb_cookies(self, result: Result) -> None:
        for key, value in result.raw_headers:
            if key.lower() != "set-cookie":
                continue
            first = value.split(";")[0]
            name, _, cookie_value = first.partition("=")
            if "max-age=0" in value.lower() or cookie_value == "":
                self.cookies.pop(name, None)
            else:
                self.cookies[name] = cookie_value

    def get(self, path, **kw):
        return self.request("GET", path, **kw)

    def post(self, path, **kw):
        return self.request("POST", path, **kw)

    def put(self, path, **kw):
        return self.request("PUT", path, **kw)

    def patch(self, path, **kw):
        return self.request("PATCH", path, **kw)

    def delete(self, path, **kw):
        return self.request("DELETE", path, **kw)

    def register_and_login(self, username: str, password: str = "hunter2secret") -> str:
        r = self.post("/register", json_body={"username": username, "password": password})
        assert r.status == 201, r
        uri = r.json["uri"]
        r = self.post("/login", json_body={"username": username, "password": password})
        assert r.status == 200, r
        return uri


# ---------------------------------------------------------------- random RDF


def random_iri(rng: random.Random, ns_pool=("http://ex.org/", "http://other.net/v#")) -> Iri:
    ns = rng.choice(ns_pool)
    name = rng.choice(("a", "b", "c", "node", "uri", "path", "Person", "x1"))
    return Iri(ns + name + str(rng.randint(0, 6)))


def random_literal(rng: random.Random) -> Literal:
    kind = rng.randrange(7)
    if kind == 0:
        text = "".join(rng.choice(string.printable[:-5]) for _ in range(rng.randint(0, 8)))
        return Literal(text, XSD_STRING)
    if kind == 1:
        lex = rng.choice(("5", "05", "+12", "-3", "0", "007"))
        return Literal(lex, XSD_INTEGER)
    if kind == 2:
        lex = rng.choice(("1.5", "1.50", "-0.25", "3.0", "2", ".5", "10.00"))
        return Literal(lex, XSD_DECIMAL)
    if kind == 3:
        return Literal(rng.choice(("true", "false", "1", "0")), XSD_BOOLEAN)
    if kind == 4:
        return Literal("hallo" + str(rng.randint(0, 3)), RDF_LANG_STRING, rng.choice(("en", "de", "en-US")))
    if kind == 5:
        return Literal(rng.choice(("1.5E0", "2024-01-01", "P1D")), XSD_NS + rng.choice(("double", "dateTime", "duration")))
    return Literal('tricky "quote" \\ and \n newline\ttab', XSD_STRING)


def random_graph(rng: random.Random, name="http://ex.org/g", max_triples=50,
                 literal_ratio=0.5) -> Graph:
    triples = set()
    for _ in range(rng.randint(0, max_triples)):
        subject = random_iri(rng)
        predicate = random_iri(rng)
        obj = random_literal(rng) if rng.random() < literal_ratio else random_iri(rng)
        triples.add(Triple(subject, predicate, obj))
    return Graph(Iri(name), triples)


def canonical_set(triples) -> frozenset:
    return frozenset(canonical_triple(t) for t in triples)


# ---------------------------------------------------------------- oracles


def bfs_subgraph(triples: set[Triple], start: Iri, depth: int) -> set[Triple]:
    """Independent reachability oracle: triples of subjects within ``depth``
    outgoing IRI steps of ``start``, computed by plain breadth-first search."""
    distance = {start: 0}
    queue = [start]
    while queue:
        node = queue.pop(0)
        if distance[node] >= depth:
            continue
        for t in triples:
            if t.subject == node and isinstance(t.object, Iri) and t.object not in distance:
                distance[t.object] = distance[node] + 1
                queue.append(t.object)
    return {t for t in triples if t.subject in distance and distance[t.subject] <= depth}


def exhaustive_solutions(patterns, filters, triples: set[Triple], projection) -> list[tuple]:
    """Brute-force query oracle: try every assignment of query variables to
    graph terms, keep those satisfying every pattern and filter, project."""
    import itertools
    import re as _re

    from ldaf.query import Var

    terms = set()
    for t in triples:
        terms.update((t.subject, t.predicate, t.object))
    terms = sorted(terms, key=lambda x: (x.__class__.__name__, getattr(x, "text", None) or (x.lexical, x.datatype, x.lang or "")))
    variables = []
    for pattern in patterns:
        for pos in pattern:
            if isinstance(pos, Var) and pos.name not in variables:
                variables.append(pos.name)
    results = []
    for combo in itertools.product(terms, repeat=len(variables)):
        binding = dict(zip(variables, combo))

        def substitute(pos):
            return binding[pos.name] if isinstance(pos, Var) else pos

        ok = True
        for pattern in patterns:
            s, p, o = (substitute(pos) for pos in pattern)
            if not isinstance(s, Iri) or not isinstance(p, Iri):
                ok = False
                break
            if Triple(s, p, o) not in triples:
                ok = False
                break
        if not ok:
            continue
        passed = True
        for f in filters:
            value = binding.get(f.var)
            if value is None:
                passed = False
                break
            lexical = value.text if isinstance(value, Iri) else value.lexical
            flags = _re.IGNORECASE if "i" in f.flags else 0
            if _re.search(f.pattern, lexical, flags) is None:
                passed = False
                break
        if not passed:
            continue
        names = variables if projection == "*" else projection
        results.append(tuple(sorted((n, _term_fingerprint(binding[n])) for n in names if n in binding)))
    return results


def _term_fingerprint(term) -> str:
    if isinstance(term, Iri):
        return f"<{term.text}>"
    return f'"{term.lexical}"^^<{term.datatype}>@{term.lang or ""}'


def solution_fingerprints(solutions) -> list[tuple]:
    return [tuple(sorted((name, _term_fingerprint(term)) for name, term in s.items())) for s in solutions]
