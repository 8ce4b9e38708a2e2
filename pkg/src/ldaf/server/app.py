"""The linked-data application: state, WSGI entry point, and shared helpers.

Every request is negotiated and session-resolved centrally, then dispatched
through the handler registry by longest path prefix.  Mutating methods hold
the dataset write lock for their whole read-modify-write-persist span.
"""
from __future__ import annotations

import json
import logging
import re
import threading
from pathlib import Path
from typing import Iterable, Optional
from urllib.parse import parse_qsl

from ..convert import KeyMap, RESERVED_KEYS, build_keymap, localname, path_of, rdf_to_json
from ..graph import Dataset, Graph
from ..storage import load_dataset, save_graph
from ..template import TemplateLoader
from ..terms import (
    Iri,
    Literal,
    RDF_PROPERTY,
    RDF_TYPE,
    RDFS_CLASS,
    RDFS_LABEL,
    Triple,
    XSD_INTEGER,
    XSD_STRING,
)
from .auth import SESSION_COOKIE, PBKDF2_ITERATIONS, SessionStore, hash_password, new_salt, verify_password
from .config import AppConfig
from .locks import ReadWriteLock
from .negotiate import negotiate
from .web import (
    HandlerRegistry,
    HttpError,
    Request,
    Response,
    html_response,
    json_response,
    redirect,
)

log = logging.getLogger("ldaf.server")

MAX_DEPTH = 3
MUTATING_METHODS = {"POST", "PUT", "PATCH", "DELETE"}

COUNTERS_FILE = "counters.json"


class LinkedDataApp:
    """WSGI application exposing the dataset as resolvable linked data."""

    def __init__(self, config: AppConfig):
        self.config = config
        self.base_url = config.base_url
        self.fallback_ns = config.base_url + "/ontology/"
        self.shared_graph_name = Iri(config.base_url + "/graph/shared")
        self.ontology_graph_name = Iri(config.base_url + "/graph/ontology")

        config.data_dir.mkdir(parents=True, exist_ok=True)
        self.dataset: Dataset = load_dataset(config.data_dir)
        self.dataset.prefixes.setdefault("app", self.fallback_ns)

        shared = self.dataset.ensure_graph(self.shared_graph_name)
        shared.insert(Triple(self.shared_graph_name, Iri(RDF_TYPE), Iri(self.ont("Graph"))))

        self._load_ontology()
        self.keymap: KeyMap = build_keymap(
            self.dataset.graph(self.ontology_graph_name), self.dataset.prefixes, self.fallback_ns
        )

        self.counters: dict[str, int] = self._load_counters()
        self._reconcile_counters()

        self.sessions = SessionStore(config.session_ttl_minutes)
        self.templates = TemplateLoader(config.templates_dir)
        self.lock = ReadWriteLock()
        self._counter_lock = threading.Lock()
        self.registry = HandlerRegistry()
        from .resources import register_default_resources

        register_default_resources(self)

    # ------------------------------------------------------------------ vocabulary

    def ont(self, name: str) -> str:
        return self.fallback_ns + name

    def iri_for_path(self, path: str) -> Iri:
        if not path.startswith("/"):
            path = "/" + path
        return Iri(self.base_url + path)

    # ------------------------------------------------------------------ startup

    def _load_ontology(self) -> None:
        from ..turtle import parse_turtle

        graph = Graph(self.ontology_graph_name)
        source = self.config.ontology_file
        if source is not None:
            triples = parse_turtle(Path(source).read_text("utf-8"), self.base_url)
            graph.insert_all(triples)
        self.dataset.graphs[self.ontology_graph_name] = graph
        rdf_type = Iri(RDF_TYPE)
        prop = Iri(RDF_PROPERTY)
        cls = Iri(RDFS_CLASS)
        for name in ("username", "passwordHash", "passwordSalt", "hashIterations", "privateGraph"):
            graph.insert(Triple(Iri(self.ont(name)), rdf_type, prop))
        for name in ("User", "Graph"):
            graph.insert(Triple(Iri(self.ont(name)), rdf_type, cls))
        for spec in self.config.collections:
            if spec.class_iri and self._is_app_iri(spec.class_iri):
                graph.insert(Triple(Iri(spec.class_iri), rdf_type, cls))
        # predicates and classes minted by earlier runs live only in instance
        # data; re-declare them so their term pages stay resolvable
        for instance in self.instance_graphs():
            for triple in instance:
                if self._is_ontology_iri(triple.predicate.text):
                    graph.insert(Triple(triple.predicate, rdf_type, prop))
                if (
                    triple.predicate.text == RDF_TYPE
                    and isinstance(triple.object, Iri)
                    and self._is_ontology_iri(triple.object.text)
                ):
                    graph.insert(Triple(triple.object, rdf_type, cls))

    def _is_app_iri(self, iri: str) -> bool:
        return iri == self.base_url or (
            iri.startswith(self.base_url) and len(iri) > len(self.base_url) and iri[len(self.base_url)] in "/#"
        )

    def _is_ontology_iri(self, iri: str) -> bool:
        return iri.startswith(self.base_url + "/ontology/") or iri.startswith(self.base_url + "/ontology#")

    # ------------------------------------------------------------------ counters

    def _counters_path(self) -> Path:
        return self.config.data_dir / COUNTERS_FILE

    def _load_counters(self) -> dict[str, int]:
        path = self._counters_path()
        if not path.exists():
            return {}
        try:
            raw = json.loads(path.read_text("utf-8"))
        except (OSError, ValueError) as exc:
            log.warning("ignoring unreadable %s: %s", path, exc)
            return {}
        return {k: int(v) for k, v in raw.items() if isinstance(v, (int, float))}

    def _reconcile_counters(self) -> None:
        """Counters must stay above every id already present in stored triples."""
        segments = [spec.path for spec in self.config.collections] + ["user", "upload"]
        patterns = {
            seg: re.compile(re.escape(f"{self.base_url}/{seg}/") + r"([0-9]+)$") for seg in segments
        }
        for graph in self.instance_graphs():
            for triple in graph:
                for term in (triple.subject, triple.predicate, triple.object):
                    if not isinstance(term, Iri):
                        continue
                    for seg, pattern in patterns.items():
                        m = pattern.match(term.text)
                        if m:
                            n = int(m.group(1))
                            if n > self.counters.get(seg, 0):
                                self.counters[seg] = n
        uploads = self.config.uploads_dir
        if uploads.is_dir():
            for path in uploads.iterdir():
                m = re.match(r"^([0-9]+)\.", path.name)
                if m:
                    self.counters["upload"] = max(self.counters.get("upload", 0), int(m.group(1)))

    def _save_counters(self) -> None:
        try:
            self.config.data_dir.mkdir(parents=True, exist_ok=True)
            tmp = self._counters_path().with_suffix(".json.tmp")
            tmp.write_text(json.dumps(self.counters, sort_keys=True, indent=2), "utf-8")
            tmp.replace(self._counters_path())
        except OSError as exc:
            log.warning("could not persist counters: %s", exc)

    def mint_uri(self, collection_path: str) -> Iri:
        """Next ``<base>/<collection>/<n>``; the counter is persisted with the dataset."""
        with self._counter_lock:
            n = self.counters.get(collection_path, 0) + 1
            self.counters[collection_path] = n
            self._save_counters()
        return Iri(f"{self.base_url}/{collection_path}/{n}")

    # ------------------------------------------------------------------ graphs and visibility

    def instance_graphs(self) -> list[Graph]:
        return [
            g for name, g in sorted(self.dataset.graphs.items(), key=lambda kv: kv[0].text)
            if name != self.ontology_graph_name
        ]

    def private_graph_name(self, user: Iri) -> Iri:
        return Iri(f"{self.base_url}/graph/user/{user.text.rsplit('/', 1)[-1]}")

    def visible_graph_names(self, user: Optional[Iri]) -> list[Iri]:
        if user is None:
            return [self.ontology_graph_name]
        return [self.private_graph_name(user), self.shared_graph_name, self.ontology_graph_name]

    def writable_graph_names(self, user: Optional[Iri]) -> list[Iri]:
        if user is None:
            return []
        return [self.private_graph_name(user), self.shared_graph_name]

    def graphs_named(self, names: Iterable[Iri]) -> list[Graph]:
        return [self.dataset.graphs[n] for n in names if n in self.dataset.graphs]

    def visible_graphs(self, user: Optional[Iri]) -> list[Graph]:
        return self.graphs_named(self.visible_graph_names(user))

    def writable_graphs(self, user: Optional[Iri]) -> list[Graph]:
        return self.graphs_named(self.writable_graph_names(user))

    def persist(self, *names: Iri) -> None:
        for name in names:
            if name != self.ontology_graph_name and name in self.dataset.graphs:
                save_graph(self.dataset, name)

    def declare_vocabulary(self, triples: Iterable[Triple]) -> None:
        """Declare freshly minted app-namespace predicates/classes so their
        /ontology term pages resolve immediately."""
        ontology = self.dataset.graph(self.ontology_graph_name)
        for triple in triples:
            if self._is_ontology_iri(triple.predicate.text):
                ontology.insert(Triple(triple.predicate, Iri(RDF_TYPE), Iri(RDF_PROPERTY)))
            if (
                triple.predicate.text == RDF_TYPE
                and isinstance(triple.object, Iri)
                and self._is_ontology_iri(triple.object.text)
            ):
                ontology.insert(Triple(triple.object, Iri(RDF_TYPE), Iri(RDFS_CLASS)))

    # ------------------------------------------------------------------ accounts

    def register_user(self, username: str, password: str) -> Iri:
        username = username.strip()
        if not username or len(username) > 64 or any(c.isspace() for c in username):
            raise HttpError(400, "username must be 1-64 characters with no whitespace")
        if len(password) < 8:
            raise HttpError(400, "password must be at least 8 characters")
        if self.find_account(username) is not None:
            raise HttpError(409, "username is already taken")
        user = self.mint_uri("user")
        graph_name = self.private_graph_name(user)
        graph = self.dataset.ensure_graph(graph_name)
        salt = new_salt()
        digest = hash_password(password, salt, PBKDF2_ITERATIONS)
        ont = self.ont
        graph.insert_all(
            [
                Triple(user, Iri(RDF_TYPE), Iri(ont("User"))),
                Triple(user, Iri(RDFS_LABEL), Literal(username, XSD_STRING)),
                Triple(user, Iri(ont("username")), Literal(username, XSD_STRING)),
                Triple(user, Iri(ont("passwordHash")), Literal(digest.hex(), XSD_STRING)),
                Triple(user, Iri(ont("passwordSalt")), Literal(salt.hex(), XSD_STRING)),
                Triple(user, Iri(ont("hashIterations")), Literal(str(PBKDF2_ITERATIONS), XSD_INTEGER)),
                Triple(user, Iri(ont("privateGraph")), graph_name),
                Triple(graph_name, Iri(RDF_TYPE), Iri(ont("Graph"))),
            ]
        )
        self.persist(graph_name)
        return user

    def find_account(self, username: str) -> Optional[tuple[Iri, Iri]]:
        """(user IRI, private graph name) for a username, or None."""
        username_pred = Iri(self.ont("username"))
        for name, graph in sorted(self.dataset.graphs.items(), key=lambda kv: kv[0].text):
            if not name.text.startswith(self.base_url + "/graph/user/"):
                continue
            for triple in graph.match(predicate=username_pred, object=Literal(username, XSD_STRING)):
                return triple.subject, name
        return None

    def account_field(self, user: Iri, field: str) -> Optional[str]:
        graph = self.dataset.graphs.get(self.private_graph_name(user))
        if graph is None:
            return None
        hits = graph.match(subject=user, predicate=Iri(self.ont(field)))
        for t in hits:
            if isinstance(t.object, Literal):
                return t.object.lexical
        return None

    def authenticate(self, username: str, password: str) -> Iri:
        found = self.find_account(username)
        if found is None:
            raise HttpError(401, "invalid username or password")
        user, _ = found
        salt_hex = self.account_field(user, "passwordSalt")
        digest_hex = self.account_field(user, "passwordHash")
        iterations = self.account_field(user, "hashIterations")
        if not salt_hex or not digest_hex:
            raise HttpError(401, "invalid username or password")
        try:
            ok = verify_password(
                password, bytes.fromhex(salt_hex), int(iterations or PBKDF2_ITERATIONS), bytes.fromhex(digest_hex)
            )
        except ValueError:
            ok = False
        if not ok:
            raise HttpError(401, "invalid username or password")
        return user

    # ------------------------------------------------------------------ resources

    def resource_object(self, user: Optional[Iri], iri: Iri, depth: int) -> dict:
        return rdf_to_json(self.visible_graphs(user), iri, depth, self.keymap, self.base_url)

    def resource_visible(self, user: Optional[Iri], iri: Iri) -> bool:
        for graph in self.visible_graphs(user):
            if graph.match(subject=iri):
                return True
            if graph.match(object=iri):
                return True
        return False

    def resource_known(self, iri: Iri) -> bool:
        for graph in self.dataset.graphs.values():
            if graph.match(subject=iri) or graph.match(object=iri):
                return True
        return False

    def home_graph_name(self, user: Iri, subject: Iri) -> Iri:
        """The writable graph where a subject's outgoing triples live (private wins)."""
        for name in self.writable_graph_names(user):
            graph = self.dataset.graphs.get(name)
            if graph is not None and graph.match(subject=subject):
                return name
        return self.private_graph_name(user)

    # ------------------------------------------------------------------ template models

    def user_model(self, user: Optional[Iri]) -> Optional[dict]:
        if user is None:
            return None
        return {
            "uri": user.text,
            "path": path_of(user.text, self.base_url),
            "localname": localname(user.text),
            "username": self.account_field(user, "username") or localname(user.text),
        }

    def resource_model(self, req: Request, obj: dict) -> dict:
        properties = []
        for key in sorted(k for k in obj if k not in RESERVED_KEYS):
            value = obj[key]
            for item in value if isinstance(value, list) else [value]:
                properties.append({"key": key, "value": item})
        incoming = []
        for key in sorted(obj.get("_incoming", {})):
            for ref in obj["_incoming"][key]:
                incoming.append({"key": key, "ref": ref})
        model = dict(obj)
        model.update(
            properties=properties,
            incoming=incoming,
            user=self.user_model(req.user),
            base_url=self.base_url,
        )
        return model

    def render_page(self, name: str, model: dict, status: int = 200,
                    headers: Optional[list[tuple[str, str]]] = None) -> Response:
        from ..template import render

        return html_response(render(self.templates.get(name), model), status, headers)

    def error_response(self, req: Request, status: int, message: str) -> Response:
        if req.format == "html":
            if status == 401:
                return redirect("/login")
            model = {"status": status, "message": message, "user": self.user_model(req.user)}
            try:
                return self.render_page("error.tpl", model, status)
            except Exception:  # template dir may be broken; never mask the error
                return html_response(f"<h1>{status}</h1><p>{message}</p>", status)
        return json_response({"status": status, "message": message}, status)

    # ------------------------------------------------------------------ extension point

    def register_handler(self, prefix: str, handler) -> None:
        """Mount a handler under a path prefix; duplicate prefixes fail at startup."""
        self.registry.register(prefix, handler)

    # ------------------------------------------------------------------ request handling

    def handle(self, req: Request) -> Response:
        try:
            req.format = negotiate(req.headers.get("accept"))
        except HttpError as exc:
            req.format = "json"
            return self.error_response(req, exc.status, exc.message)
        req.session_token = req.cookie(SESSION_COOKIE)
        req.user = self.sessions.resolve(req.session_token)
        handler = self.registry.dispatch(req.path)
        if handler is None:
            return self.error_response(req, 404, "no handler for this path")
        guard = self.lock.write if req.method in MUTATING_METHODS else self.lock.read
        try:
            with guard():
                return handler(req)
        except HttpError as exc:
            return self.error_response(req, exc.status, exc.message)
        except Exception:
            log.exception("unhandled error for %s %s", req.method, req.path)
            return self.error_response(req, 500, "internal server error")

    def __call__(self, environ, start_response):
        req, early = self._request_from_environ(environ)
        response = early if early is not None else self.handle(req)
        headers = list(response.headers)
        if not any(k.lower() == "content-length" for k, _ in headers):
            headers.append(("Content-Length", str(len(response.body))))
        start_response(f"{response.status} {response.reason}", headers)
        if environ.get("REQUEST_METHOD", "GET").upper() == "HEAD":
            return [b""]
        return [response.body]

    def _request_from_environ(self, environ) -> tuple[Request, Optional[Response]]:
        headers = {}
        for key, value in environ.items():
            if key.startswith("HTTP_"):
                headers[key[5:].replace("_", "-").lower()] = value
        if environ.get("CONTENT_TYPE"):
            headers["content-type"] = environ["CONTENT_TYPE"]
        query = dict(parse_qsl(environ.get("QUERY_STRING", ""), keep_blank_values=True))
        method = environ.get("REQUEST_METHOD", "GET").upper()
        req = Request(
            method="GET" if method == "HEAD" else method,
            path=environ.get("PATH_INFO", "/") or "/",
            query=query,
            headers=headers,
        )
        length_raw = environ.get("CONTENT_LENGTH") or "0"
        try:
            length = int(length_raw)
        except ValueError:
            length = 0
        limit = self.config.upload_max_bytes
        if length > limit:
            req.format = "json"
            return req, self.error_response(req, 413, "request body too large")
        if length > 0:
            req.body = environ["wsgi.input"].read(length)
        return req, None


def make_app(config: AppConfig) -> LinkedDataApp:
    return LinkedDataApp(config)


def serve(app: LinkedDataApp, host: str = "0.0.0.0", port: Optional[int] = None):
    """Run the app on a threading WSGI server (blocks until interrupted)."""
    import socketserver
    from wsgiref.simple_server import WSGIServer, make_server

    class ThreadingWSGIServer(socketserver.ThreadingMixIn, WSGIServer):
        daemon_threads = True

    server = make_server(host, port or app.config.port, app, server_class=ThreadingWSGIServer)
    log.info("serving %s on port %d", app.base_url, server.server_port)
    return server
