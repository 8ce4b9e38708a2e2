"""Default linked-data resources, all mounted through the handler registry:
auth pages, per-collection CRUD with pagination, the read-only ontology,
/sparql, /search, /upload, the web UI bundle, and the catch-all resource
reader that keeps every minted URI resolvable.
"""
from __future__ import annotations

import mimetypes
from typing import TYPE_CHECKING, Optional

from ..convert import (
    ConvertError,
    RESERVED_KEYS,
    json_to_rdf,
    localname,
    path_of,
    rdf_to_json,
    reachable_subgraph,
)
from ..query import QueryError, UnsupportedQueryError, evaluate, parse_query, search_labels, solutions_to_json
from ..terms import FOAF_DEPICTION, Iri, RDF_TYPE, Triple
from ..turtle import serialize_turtle
from .auth import SESSION_COOKIE
from .web import (
    HttpError,
    Request,
    Response,
    json_response,
    no_content,
    redirect,
    split_path,
    turtle_response,
)

if TYPE_CHECKING:
    from .app import LinkedDataApp

from .app import MAX_DEPTH

IMAGE_TYPES = {"image/png": "png", "image/jpeg": "jpg"}
IMAGE_EXTENSIONS = {v: k for k, v in IMAGE_TYPES.items()}


def require_user(req: Request) -> Iri:
    if req.user is None:
        raise HttpError(401, "authentication required")
    return req.user


def _depth(req: Request) -> int:
    return min(req.int_param("depth", 1, minimum=0), MAX_DEPTH)


# --------------------------------------------------------------------- shared CRUD


def read_resource(app: "LinkedDataApp", req: Request, iri: Iri, template: Optional[str] = None) -> Response:
    require_user(req)
    if not app.resource_visible(req.user, iri):
        raise HttpError(404, f"no data about {iri.text}")
    return resource_representation(app, req, iri, template, status=200)


def resource_representation(
    app: "LinkedDataApp", req: Request, iri: Iri, template: Optional[str] = None,
    status: int = 200, headers: Optional[list[tuple[str, str]]] = None,
) -> Response:
    depth = _depth(req)
    graphs = app.visible_graphs(req.user)
    if req.format == "turtle":
        triples = reachable_subgraph(graphs, iri, depth)
        return turtle_response(serialize_turtle(triples, app.dataset.prefixes), status, headers)
    obj = rdf_to_json(graphs, iri, depth, app.keymap, app.base_url)
    if req.format == "json":
        return json_response(obj, status, headers)
    return app.render_page(template or "resource.tpl", app.resource_model(req, obj), status, headers)


def prepare_body(app: "LinkedDataApp", body, collection: Optional[str], forced_uri: Optional[Iri] = None):
    """Copy a request body, minting URIs for nested objects that have none."""
    if not isinstance(body, dict):
        raise HttpError(400, "request body must be a JSON object")

    def walk(value, is_root: bool):
        if isinstance(value, list):
            return [walk(item, False) for item in value]
        if isinstance(value, dict):
            if "value" in value and not is_root:
                return dict(value)
            obj = dict(value)
            if "uri" not in obj and "path" not in obj:
                if collection is None:
                    raise HttpError(400, "nested objects need a uri when no collection is involved")
                obj["uri"] = app.mint_uri(collection).text
            return {k: (v if k in ("uri", "path") else walk(v, False)) for k, v in obj.items()}
        return value

    prepared = {k: walk(v, False) for k, v in body.items()}
    if forced_uri is not None:
        prepared["uri"] = forced_uri.text
        prepared.pop("path", None)
    elif "uri" not in prepared and "path" not in prepared and collection is not None:
        prepared["uri"] = app.mint_uri(collection).text
    return prepared


def _convert_body(app: "LinkedDataApp", prepared: dict) -> set[Triple]:
    try:
        return json_to_rdf(prepared, app.keymap, app.base_url)
    except ConvertError as exc:
        raise HttpError(400, str(exc)) from None


def _check_writable(app: "LinkedDataApp", req: Request, iri: Iri) -> None:
    """404 for resources nobody knows, 403 for resources outside writable graphs."""
    writable = set(app.writable_graph_names(req.user))
    holding = [name for name, g in app.dataset.graphs.items() if g.match(subject=iri)]
    if holding:
        if not writable & set(holding):
            raise HttpError(403, "resource is not in a writable graph")
        return
    referencing = [name for name, g in app.dataset.graphs.items() if g.match(object=iri)]
    if not referencing:
        raise HttpError(404, f"no data about {iri.text}")
    if not writable & set(referencing):
        raise HttpError(403, "resource is not in a writable graph")


def replace_resource(app: "LinkedDataApp", req: Request, iri: Iri,
                     collection: Optional[str] = None, template: Optional[str] = None) -> Response:
    user = require_user(req)
    _check_writable(app, req, iri)
    body = req.json()
    prepared = prepare_body(app, body, collection, forced_uri=iri)
    triples = _convert_body(app, prepared)
    home = app.home_graph_name(user, iri)
    touched = []
    for name in app.writable_graph_names(user):
        graph = app.dataset.graphs.get(name)
        if graph is not None and graph.remove(subject=iri):
            touched.append(name)
    target = app.dataset.ensure_graph(home)
    target.insert_all(triples)
    app.declare_vocabulary(triples)
    touched.append(home)
    app.persist(*dict.fromkeys(touched))
    return resource_representation(app, req, iri, template, status=200)


def patch_resource(app: "LinkedDataApp", req: Request, iri: Iri,
                   collection: Optional[str] = None, template: Optional[str] = None) -> Response:
    user = require_user(req)
    _check_writable(app, req, iri)
    body = req.json()
    if not isinstance(body, dict):
        raise HttpError(400, "request body must be a JSON object")
    home = app.home_graph_name(user, iri)
    touched = []
    for key in sorted(k for k in body if k not in RESERVED_KEYS):
        try:
            predicate = Iri(app.keymap.predicate_for(key))
        except ConvertError as exc:
            raise HttpError(400, str(exc)) from None
        for name in app.writable_graph_names(user):
            graph = app.dataset.graphs.get(name)
            if graph is not None and graph.remove(subject=iri, predicate=predicate):
                touched.append(name)
        value = body[key]
        if value is None:
            continue
        prepared = prepare_body(app, {"uri": iri.text, key: value}, collection)
        new_triples = _convert_body(app, prepared)
        target = app.dataset.ensure_graph(home)
        target.insert_all(new_triples)
        app.declare_vocabulary(new_triples)
        touched.append(home)
    if touched:
        app.persist(*dict.fromkeys(touched))
    return resource_representation(app, req, iri, template, status=200)


def delete_resource(app: "LinkedDataApp", req: Request, iri: Iri) -> Response:
    user = require_user(req)
    _check_writable(app, req, iri)
    touched = []
    for name in app.writable_graph_names(user):
        graph = app.dataset.graphs.get(name)
        if graph is None:
            continue
        removed = graph.remove(subject=iri) + graph.remove(object=iri)
        if removed:
            touched.append(name)
    app.persist(*dict.fromkeys(touched))
    return no_content()


# --------------------------------------------------------------------- collections


def _numeric_tail(iri: Iri) -> tuple[int, object]:
    tail = iri.text.rsplit("/", 1)[-1]
    if tail.isdigit():
        return (0, int(tail))
    return (1, iri.text)


def collection_members(app: "LinkedDataApp", req: Request, spec) -> list[Iri]:
    graphs = app.visible_graphs(req.user)
    members: set[Iri] = set()
    if spec.class_iri:
        class_iri = Iri(spec.class_iri)
        for graph in graphs:
            for triple in graph.match(predicate=Iri(RDF_TYPE), object=class_iri):
                members.add(triple.subject)
    else:
        prefix = f"{app.base_url}/{spec.path}/"
        for graph in graphs:
            for subject in graph.subjects():
                if subject.text.startswith(prefix):
                    members.add(subject)
    return sorted(members, key=lambda iri: (_numeric_tail(iri), iri.text))


def page_object(app: "LinkedDataApp", req: Request, members: list[Iri],
                base_path: str, page: int, size: int) -> dict:
    total = len(members)
    window = members[(page - 1) * size : (page - 1) * size + size]
    items = [rdf_to_json(app.visible_graphs(req.user), m, 1, app.keymap, app.base_url) for m in window]
    result: dict = {"items": items, "page": page, "size": size, "total": total}
    if page * size < total:
        result["next"] = f"{base_path}?page={page + 1}&size={size}"
    if page > 1:
        result["prev"] = f"{base_path}?page={page - 1}&size={size}"
    return result


def list_collection(app: "LinkedDataApp", req: Request, spec) -> Response:
    require_user(req)
    page = req.int_param("page", 1)
    size = req.int_param("size", app.config.default_page_size)
    members = collection_members(app, req, spec)
    result = page_object(app, req, members, f"/{spec.path}", page, size)
    if req.format == "json":
        return json_response(result)
    if req.format == "turtle":
        triples: set[Triple] = set()
        for graph in app.visible_graphs(req.user):
            for member in members[(page - 1) * size : (page - 1) * size + size]:
                triples.update(graph.match(subject=member))
        return turtle_response(serialize_turtle(triples, app.dataset.prefixes))
    model = dict(result)
    model.update(
        collection=spec.path,
        user=app.user_model(req.user),
        next=result.get("next", ""),
        prev=result.get("prev", ""),
    )
    return app.render_page("collection.tpl", model)


def create_resource(app: "LinkedDataApp", req: Request, spec) -> Response:
    user = require_user(req)
    body = req.json()
    if not isinstance(body, dict):
        raise HttpError(400, "request body must be a JSON object")
    graph_choice = req.query.get("graph", "private")
    if graph_choice == "private":
        target_name = app.private_graph_name(user)
    elif graph_choice == "shared":
        target_name = app.shared_graph_name
    else:
        raise HttpError(400, "graph must be 'private' or 'shared'")
    body = dict(body)
    body.pop("uri", None)
    body.pop("path", None)
    minted = app.mint_uri(spec.path)
    prepared = prepare_body(app, body, spec.path, forced_uri=minted)
    triples = _convert_body(app, prepared)
    if spec.class_iri:
        triples.add(Triple(minted, Iri(RDF_TYPE), Iri(spec.class_iri)))
    target = app.dataset.ensure_graph(target_name)
    target.insert_all(triples)
    app.declare_vocabulary(triples)
    app.persist(target_name)
    location = [("Location", path_of(minted.text, app.base_url))]
    return resource_representation(app, req, minted, spec.template, status=201, headers=location)


def make_collection_handler(app: "LinkedDataApp", spec):
    def handler(req: Request) -> Response:
        parts = split_path(req.path)
        if len(parts) == 1:
            if req.method == "GET":
                return list_collection(app, req, spec)
            if req.method == "POST":
                return create_resource(app, req, spec)
            raise HttpError(405, "collection supports GET and POST")
        iri = app.iri_for_path(req.path)
        if req.method == "GET":
            return read_resource(app, req, iri, spec.template)
        if req.method == "PUT":
            return replace_resource(app, req, iri, spec.path, spec.template)
        if req.method == "PATCH":
            return patch_resource(app, req, iri, spec.path, spec.template)
        if req.method == "DELETE":
            return delete_resource(app, req, iri)
        raise HttpError(405, "unsupported method")

    return handler


# --------------------------------------------------------------------- ontology


def ontology_terms(app: "LinkedDataApp") -> list[Iri]:
    graph = app.dataset.graph(app.ontology_graph_name)
    terms: set[Iri] = set()
    for triple in graph:
        for term in (triple.subject, triple.predicate, triple.object):
            if isinstance(term, Iri) and app._is_ontology_iri(term.text):
                terms.add(term)
    return sorted(terms, key=lambda iri: (localname(iri.text), iri.text))


def make_ontology_handler(app: "LinkedDataApp"):
    def handler(req: Request) -> Response:
        if req.method != "GET":
            raise HttpError(405, "the ontology is read-only")
        parts = split_path(req.path)
        graph = app.dataset.graph(app.ontology_graph_name)
        if len(parts) == 1:
            page = req.int_param("page", 1)
            size = req.int_param("size", app.config.default_page_size)
            members = ontology_terms(app)
            total = len(members)
            window = members[(page - 1) * size : (page - 1) * size + size]
            items = [rdf_to_json([graph], m, 1, app.keymap, app.base_url) for m in window]
            result: dict = {"items": items, "page": page, "size": size, "total": total}
            if page * size < total:
                result["next"] = f"/ontology?page={page + 1}&size={size}"
            if page > 1:
                result["prev"] = f"/ontology?page={page - 1}&size={size}"
            if req.format == "json":
                return json_response(result)
            if req.format == "turtle":
                triples: set[Triple] = set()
                for member in window:
                    triples.update(graph.match(subject=member))
                return turtle_response(serialize_turtle(triples, app.dataset.prefixes))
            model = dict(result)
            model.update(
                collection="ontology",
                user=app.user_model(req.user),
                next=result.get("next", ""),
                prev=result.get("prev", ""),
            )
            return app.render_page("collection.tpl", model)
        name = "/".join(parts[1:])
        candidates = [Iri(f"{app.base_url}/ontology#{name}"), Iri(f"{app.base_url}/ontology/{name}")]
        known = {t for triple in graph for t in (triple.subject, triple.predicate, triple.object)}
        for iri in candidates:
            if iri in known:
                depth = _depth(req)
                if req.format == "turtle":
                    triples = reachable_subgraph([graph], iri, depth)
                    return turtle_response(serialize_turtle(triples, app.dataset.prefixes))
                obj = rdf_to_json([graph], iri, depth, app.keymap, app.base_url)
                if req.format == "json":
                    return json_response(obj)
                return app.render_page("resource.tpl", app.resource_model(req, obj))
        raise HttpError(404, f"no such term: {name}")

    return handler


# --------------------------------------------------------------------- sparql and search


def make_sparql_handler(app: "LinkedDataApp"):
    def handler(req: Request) -> Response:
        require_user(req)
        if req.method == "GET":
            query_text = req.query.get("query")
        elif req.method == "POST":
            if req.content_type == "application/x-www-form-urlencoded":
                query_text = req.form().get("query")
            elif req.content_type == "application/sparql-query":
                query_text = req.body.decode("utf-8", "replace")
            else:
                query_text = req.query.get("query")
        else:
            raise HttpError(405, "use GET or POST")
        if req.format == "turtle":
            raise HttpError(406, "query results are not a graph; ask for JSON or HTML")
        if not query_text:
            if req.format == "html":
                model = {"query": "", "user": app.user_model(req.user)}
                return app.render_page("sparql.tpl", model)
            raise HttpError(400, "missing query")
        try:
            query = parse_query(query_text)
            solutions = evaluate(query, app.visible_graphs(req.user))
        except UnsupportedQueryError as exc:
            raise HttpError(400, f"unsupported SPARQL feature: {exc}") from None
        except QueryError as exc:
            raise HttpError(400, str(exc)) from None
        result = solutions_to_json(query, solutions)
        if req.format == "json":
            return json_response(result)
        variables = result["head"]["vars"]
        rows = []
        for binding in result["results"]["bindings"]:
            cells = []
            for name in variables:
                cell = binding.get(name)
                if cell is None:
                    cells.append({"text": "", "href": ""})
                elif cell["type"] == "uri":
                    href = path_of(cell["value"], app.base_url)
                    cells.append({"text": cell["value"], "href": href if href != cell["value"] else ""})
                else:
                    cells.append({"text": cell["value"], "href": ""})
            rows.append(cells)
        model = {
            "query": query_text,
            "ran": True,
            "vars": variables,
            "rows": rows,
            "user": app.user_model(req.user),
        }
        return app.render_page("sparql.tpl", model)

    return handler


def make_search_handler(app: "LinkedDataApp"):
    def handler(req: Request) -> Response:
        require_user(req)
        if req.method != "GET":
            raise HttpError(405, "use GET with ?q=")
        if req.format == "turtle":
            raise HttpError(406, "search results are not a graph; ask for JSON or HTML")
        pattern = req.query.get("q", "")
        limit = req.int_param("limit", app.config.default_page_size)
        results = []
        if pattern:
            try:
                pairs = search_labels(pattern, app.visible_graphs(req.user), limit)
            except QueryError as exc:
                raise HttpError(400, str(exc)) from None
            for iri, label in pairs:
                results.append(
                    {
                        "uri": iri.text,
                        "path": path_of(iri.text, app.base_url),
                        "localname": localname(iri.text),
                        "label": label,
                    }
                )
        if req.format == "json":
            return json_response(results)
        model = {"q": pattern, "results": results, "user": app.user_model(req.user)}
        return app.render_page("search.tpl", model)

    return handler


# --------------------------------------------------------------------- uploads


def make_upload_handler(app: "LinkedDataApp"):
    def handler(req: Request) -> Response:
        parts = split_path(req.path)
        if req.method == "POST" and len(parts) == 1:
            return upload(app, req)
        if req.method == "GET" and len(parts) == 2:
            require_user(req)
            number = parts[1]
            if not number.isdigit():
                raise HttpError(404, "no such upload")
            for ext, ctype in IMAGE_EXTENSIONS.items():
                path = app.config.uploads_dir / f"{int(number)}.{ext}"
                if path.is_file():
                    return Response(200, [("Content-Type", ctype)], path.read_bytes())
            raise HttpError(404, "no such upload")
        raise HttpError(405, "POST an image to /upload, GET /upload/<n>")

    def upload(app: "LinkedDataApp", req: Request) -> Response:
        user = require_user(req)
        content_type = req.content_type
        if content_type not in IMAGE_TYPES:
            raise HttpError(415, "only image/png and image/jpeg are accepted")
        if not req.body:
            raise HttpError(400, "empty upload")
        if len(req.body) > app.config.upload_max_bytes:
            raise HttpError(413, "upload too large")
        target: Optional[Iri] = None
        target_path = req.query.get("target")
        if target_path:
            target = app.iri_for_path(target_path)
            if not app.resource_visible(user, target):
                raise HttpError(404, f"no data about {target.text}")
        minted = app.mint_uri("upload")
        number = minted.text.rsplit("/", 1)[-1]
        app.config.uploads_dir.mkdir(parents=True, exist_ok=True)
        file_path = app.config.uploads_dir / f"{number}.{IMAGE_TYPES[content_type]}"
        file_path.write_bytes(req.body)
        link: Optional[Triple] = None
        if target is not None:
            home = app.home_graph_name(user, target)
            graph = app.dataset.ensure_graph(home)
            link = Triple(target, Iri(FOAF_DEPICTION), minted)
            graph.insert(link)
            app.persist(home)
        upload_path = path_of(minted.text, app.base_url)
        headers = [("Location", upload_path)]
        if req.format == "html":
            return redirect(path_of(target.text, app.base_url) if target else upload_path, 303)
        if req.format == "turtle":
            triples = {link} if link else set()
            return turtle_response(serialize_turtle(triples, app.dataset.prefixes), 201, headers)
        body = {"uri": minted.text, "path": upload_path, "localname": number}
        if target is not None:
            body["target"] = {"uri": target.text, "path": path_of(target.text, app.base_url)}
        return json_response(body, 201, headers)

    return handler


# --------------------------------------------------------------------- auth pages


def _credentials(req: Request) -> tuple[str, str]:
    if req.content_type == "application/json":
        data = req.json()
        if not isinstance(data, dict):
            raise HttpError(400, "expected a JSON object")
        username = data.get("username", "")
        password = data.get("password", "")
    else:
        form = req.form()
        username = form.get("username", "")
        password = form.get("password", "")
    if not isinstance(username, str) or not isinstance(password, str):
        raise HttpError(400, "username and password must be strings")
    return username, password


def _session_cookie(app: "LinkedDataApp", token: str, max_age: int) -> tuple[str, str]:
    value = f"{SESSION_COOKIE}={token}; Path=/; HttpOnly; SameSite=Lax; Max-Age={max_age}"
    return ("Set-Cookie", value)


def make_register_handler(app: "LinkedDataApp"):
    def handler(req: Request) -> Response:
        if req.method == "GET":
            if req.format == "html":
                return app.render_page("register.tpl", {"error": ""})
            return json_response({"status": 200, "message": "POST username and password to register"})
        if req.method != "POST":
            raise HttpError(405, "use GET or POST")
        username, password = _credentials(req)
        try:
            user = app.register_user(username, password)
        except HttpError as exc:
            if req.format == "html":
                return app.render_page("register.tpl", {"error": exc.message}, exc.status)
            raise
        if req.format == "html":
            return redirect("/login", 303)
        return json_response(
            {"uri": user.text, "path": path_of(user.text, app.base_url), "username": username.strip()},
            201,
            [("Location", path_of(user.text, app.base_url))],
        )

    return handler


def make_login_handler(app: "LinkedDataApp"):
    def handler(req: Request) -> Response:
        if req.method == "GET":
            if req.format == "html":
                return app.render_page("login.tpl", {"error": ""})
            return json_response({"status": 200, "message": "POST username and password to sign in"})
        if req.method != "POST":
            raise HttpError(405, "use GET or POST")
        username, password = _credentials(req)
        try:
            user = app.authenticate(username, password)
        except HttpError as exc:
            if req.format == "html":
                return app.render_page("login.tpl", {"error": exc.message}, exc.status)
            raise
        session = app.sessions.create(user)
        cookie = _session_cookie(app, session.token, app.sessions.ttl_seconds)
        if req.format == "html":
            response = redirect("/", 303)
            response.headers.append(cookie)
            return response
        return json_response(
            {"user": user.text, "path": path_of(user.text, app.base_url), "username": username.strip()},
            200,
            [cookie],
        )

    return handler


def make_logout_handler(app: "LinkedDataApp"):
    def handler(req: Request) -> Response:
        if req.method != "POST":
            raise HttpError(405, "POST to log out")
        app.sessions.revoke(req.session_token)
        cookie = ("Set-Cookie", f"{SESSION_COOKIE}=; Path=/; HttpOnly; SameSite=Lax; Max-Age=0")
        if req.format == "html":
            response = redirect("/login", 303)
            response.headers.append(cookie)
            return response
        return Response(204, [cookie], b"")

    return handler


# --------------------------------------------------------------------- static web UI


def make_static_handler(app: "LinkedDataApp"):
    def handler(req: Request) -> Response:
        if req.method != "GET":
            raise HttpError(405, "static files are read-only")
        root = app.config.webui_dir
        rel = req.path[len("/app") :].lstrip("/") or "index.html"
        base = root.resolve()
        target = (base / rel).resolve()
        if not str(target).startswith(str(base)):
            raise HttpError(404, "no such file")
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            raise HttpError(404, "no such file")
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        if ctype.startswith("text/") or ctype in ("application/javascript", "application/json"):
            ctype += "; charset=utf-8"
        return Response(200, [("Content-Type", ctype)], target.read_bytes())

    return handler


# --------------------------------------------------------------------- root catch-all


def make_root_handler(app: "LinkedDataApp"):
    def handler(req: Request) -> Response:
        if req.path == "/" or req.path == "":
            if req.method != "GET":
                raise HttpError(405, "unsupported method")
            base_iri = Iri(app.base_url)
            if req.user is not None and app.resource_visible(req.user, base_iri):
                return read_resource(app, req, base_iri)
            if req.format == "json":
                return json_response(
                    {
                        "base_url": app.base_url,
                        "collections": [
                            {"path": "/" + spec.path, "class": spec.class_iri}
                            for spec in app.config.collections
                        ],
                    }
                )
            if req.format == "html":
                if (app.config.webui_dir / "index.html").is_file():
                    return redirect("/app/", 303)
                return redirect("/search", 303)
            raise HttpError(404, "no data at the application root")
        iri = app.iri_for_path(req.path)
        if req.method == "GET":
            return read_resource(app, req, iri)
        if req.method == "PUT":
            return replace_resource(app, req, iri)
        if req.method == "PATCH":
            return patch_resource(app, req, iri)
        if req.method == "DELETE":
            return delete_resource(app, req, iri)
        if req.method == "POST" and len(split_path(req.path)) == 1:
            raise HttpError(404, f"unknown collection {req.path!r}")
        raise HttpError(405, "unsupported method")

    return handler


def register_default_resources(app: "LinkedDataApp") -> None:
    app.register_handler("/", make_root_handler(app))
    app.register_handler("/register", make_register_handler(app))
    app.register_handler("/login", make_login_handler(app))
    app.register_handler("/logout", make_logout_handler(app))
    app.register_handler("/sparql", make_sparql_handler(app))
    app.register_handler("/search", make_search_handler(app))
    app.register_handler("/ontology", make_ontology_handler(app))
    app.register_handler("/upload", make_upload_handler(app))
    app.register_handler("/app", make_static_handler(app))
    for spec in app.config.collections:
        app.register_handler("/" + spec.path, make_collection_handler(app, spec))
