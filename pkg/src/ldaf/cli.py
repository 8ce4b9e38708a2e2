"""Command line entry points: serve, init, import, export, adduser."""
from __future__ import annotations

import json
import logging
import sys
from importlib import resources as _resources
from pathlib import Path

import click

from .graph import UnknownGraphError
from .server.app import make_app, serve as _serve
from .server.config import ConfigError, load_config
from .storage import save_graph
from .terms import Iri
from .turtle import TurtleError, parse_turtle, serialize_turtle

DEFAULT_TEMPLATES = (
    "resource.tpl",
    "collection.tpl",
    "login.tpl",
    "register.tpl",
    "search.tpl",
    "sparql.tpl",
    "error.tpl",
)

SAMPLE_ONTOLOGY = """\
@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix app: <{base}/ontology/> .

app:Person a rdfs:Class ;
    rdfs:label "Person" ;
    rdfs:comment "A person known to this application." .

app:name a rdf:Property ;
    rdfs:label "name" .

app:knows a rdf:Property ;
    rdfs:label "knows" .
"""


def _load(config_path: str):
    try:
        return load_config(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))


@click.group()
def main() -> None:
    """Linked data application server."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default="0.0.0.0", show_default=True)
def serve(config_path: str, host: str) -> None:
    """Run the HTTP server."""
    config = _load(config_path)
    app = make_app(config)
    server = _serve(app, host=host)
    click.echo(f"serving {config.base_url} on port {server.server_port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        click.echo("bye")


@main.command()
@click.argument("directory", type=click.Path(file_okay=False))
@click.option("--base-url", default="http://localhost:8080", show_default=True)
@click.option("--port", default=8080, show_default=True, type=int)
def init(directory: str, base_url: str, port: int) -> None:
    """Scaffold a new application: config, templates, ontology, empty data."""
    root = Path(directory)
    if (root / "config.json").exists():
        raise click.ClickException(f"{root / 'config.json'} already exists")
    (root / "data").mkdir(parents=True, exist_ok=True)
    (root / "uploads").mkdir(exist_ok=True)
    (root / "templates").mkdir(exist_ok=True)
    (root / "webui").mkdir(exist_ok=True)
    for name in DEFAULT_TEMPLATES:
        source = _resources.files("ldaf").joinpath("defaults", name).read_text("utf-8")
        (root / "templates" / name).write_text(source, "utf-8")
    (root / "ontology.ttl").write_text(SAMPLE_ONTOLOGY.format(base=base_url), "utf-8")
    config = {
        "base_url": base_url,
        "port": port,
        "data_dir": "data",
        "ontology_file": "ontology.ttl",
        "app_dir": ".",
        "collections": [
            {"path": "person", "class": f"{base_url}/ontology/Person"},
        ],
    }
    (root / "config.json").write_text(json.dumps(config, indent=2) + "\n", "utf-8")
    click.echo(f"initialized {root}")
    click.echo(f"next: ldaf serve --config {root / 'config.json'}")


@main.command(name="import")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--graph", "graph_iri", required=True)
@click.option("--file", "file_path", required=True, type=click.Path(exists=True, dir_okay=False))
def import_graph(config_path: str, graph_iri: str, file_path: str) -> None:
    """Parse a Turtle file into a named graph and persist it."""
    config = _load(config_path)
    app = make_app(config)
    name = Iri(graph_iri)
    if name == app.ontology_graph_name:
        raise click.ClickException("the ontology graph is rebuilt from ontology_file; import elsewhere")
    try:
        triples = parse_turtle(Path(file_path).read_text("utf-8"), config.base_url)
    except TurtleError as exc:
        raise click.ClickException(f"{file_path}: {exc}")
    graph = app.dataset.ensure_graph(name)
    added = graph.insert_all(triples)
    save_graph(app.dataset, name)
    click.echo(f"imported {added} new triple(s) into {graph_iri}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--graph", "graph_iri", required=True)
@click.option("--file", "file_path", required=True, type=click.Path(dir_okay=False, writable=True))
def export(config_path: str, graph_iri: str, file_path: str) -> None:
    """Serialize a named graph to a Turtle file."""
    config = _load(config_path)
    app = make_app(config)
    try:
        graph = app.dataset.graph(Iri(graph_iri))
    except UnknownGraphError as exc:
        raise click.ClickException(str(exc))
    Path(file_path).write_text(serialize_turtle(graph.triples, app.dataset.prefixes), "utf-8")
    click.echo(f"exported {len(graph)} triple(s) to {file_path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--username", required=True)
@click.option(
    "--password",
    prompt=True,
    hide_input=True,
    confirmation_prompt=True,
    help="Prompted when omitted.",
)
def adduser(config_path: str, username: str, password: str) -> None:
    """Register a user account from the command line."""
    from .server.web import HttpError

    config = _load(config_path)
    app = make_app(config)
    try:
        user = app.register_user(username, password)
    except HttpError as exc:
        raise click.ClickException(exc.message)
    click.echo(f"created {user.text}")


if __name__ == "__main__":
    sys.exit(main())
