"""File persistence: one Turtle file per named graph plus prefixes.json."""
from __future__ import annotations

import json
import logging
import os
import tempfile
from pathlib import Path
from urllib.parse import quote, unquote

from .graph import Dataset, Graph
from .terms import Iri
from .turtle import TurtleError, parse_turtle, serialize_turtle

log = logging.getLogger("ldaf.storage")

PREFIXES_FILE = "prefixes.json"


class DatasetLoadError(Exception):
    pass


def graph_file_name(name: Iri) -> str:
    return quote(name.text, safe="") + ".ttl"


def _write_atomic(directory: Path, file_name: str, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=file_name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, directory / file_name)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def save_graph(dataset: Dataset, name: Iri) -> None:
    """Persist one graph (and the prefix map) atomically.

    Write failures are logged and swallowed: the in-memory state stays the
    source of truth and a later save can retry.
    """
    if dataset.data_dir is None:
        return
    graph = dataset.graph(name)
    text = serialize_turtle(graph.triples, dataset.prefixes)
    try:
        dataset.data_dir.mkdir(parents=True, exist_ok=True)
        _write_atomic(dataset.data_dir, graph_file_name(name), text.encode("utf-8"))
        save_prefixes(dataset)
    except OSError as exc:
        log.warning("could not persist graph %s: %s", name.text, exc)


def save_prefixes(dataset: Dataset) -> None:
    if dataset.data_dir is None:
        return
    data = json.dumps(dataset.prefixes, sort_keys=True, indent=2).encode("utf-8")
    _write_atomic(dataset.data_dir, PREFIXES_FILE, data)


def load_dataset(data_dir: Path | str) -> Dataset:
    """Rebuild a dataset from every ``.ttl`` file (plus prefixes.json) in a directory."""
    data_dir = Path(data_dir)
    dataset = Dataset(data_dir)
    prefixes_path = data_dir / PREFIXES_FILE
    if prefixes_path.exists():
        try:
            stored = json.loads(prefixes_path.read_text("utf-8"))
        except (OSError, ValueError) as exc:
            raise DatasetLoadError(f"{prefixes_path}: {exc}") from exc
        if not isinstance(stored, dict):
            raise DatasetLoadError(f"{prefixes_path}: expected a flat JSON object")
        dataset.prefixes.update(stored)
    if not data_dir.exists():
        return dataset
    for path in sorted(data_dir.glob("*.ttl")):
        name = Iri(unquote(path.stem))
        try:
            triples = parse_turtle(path.read_text("utf-8"), name.text)
        except (OSError, TurtleError) as exc:
            raise DatasetLoadError(f"{path.name}: {exc}") from exc
        dataset.graphs[name] = Graph(name, triples)
    return dataset
