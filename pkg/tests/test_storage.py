import random

import pytest

from ldaf.graph import Dataset
from ldaf.storage import DatasetLoadError, graph_file_name, load_dataset, save_graph
from ldaf.terms import Iri, Literal, Triple

from helpers import random_graph


def test_graph_file_name_percent_encodes_everything():
    assert graph_file_name(Iri("http://ex.org/g")) == "http%3A%2F%2Fex.org%2Fg.ttl"


def test_save_then_load_round_trip(tmp_path):
    rng = random.Random(7)
    ds = Dataset(tmp_path)
    ds.set_prefix("ex", "http://ex.org/")
    for name in ("http://ex.org/g1", "http://ex.org/g2"):
        graph = random_graph(rng, name=name, max_triples=30)
        ds.graphs[graph.name] = graph
        save_graph(ds, graph.name)
    loaded = load_dataset(tmp_path)
    assert loaded == ds


def test_empty_directory_loads_empty_dataset(tmp_path):
    ds = load_dataset(tmp_path)
    assert ds.graphs == {}
    assert set(ds.prefixes) >= {"rdf", "rdfs", "xsd"}


def test_missing_directory_loads_empty_dataset(tmp_path):
    ds = load_dataset(tmp_path / "nowhere")
    assert ds.graphs == {}


def test_prefixes_survive_round_trip(tmp_path):
    ds = Dataset(tmp_path)
    ds.set_prefix("foaf", "http://xmlns.com/foaf/0.1/")
    ds.ensure_graph(Iri("http://ex.org/g"))
    save_graph(ds, Iri("http://ex.org/g"))
    loaded = load_dataset(tmp_path)
    assert loaded.prefixes["foaf"] == "http://xmlns.com/foaf/0.1/"


def test_corrupt_file_aborts_load_with_file_name(tmp_path):
    bad = tmp_path / graph_file_name(Iri("http://ex.org/bad"))
    bad.write_text("this is not turtle", "utf-8")
    with pytest.raises(DatasetLoadError) as info:
        load_dataset(tmp_path)
    assert bad.name in str(info.value)


def test_save_failure_is_swallowed(tmp_path):
    target = tmp_path / "data"
    target.write_text("a file, not a directory")
    ds = Dataset(target)
    ds.ensure_graph(Iri("http://ex.org/g")).insert(
        Triple(Iri("http://ex.org/a"), Iri("http://ex.org/p"), Literal("x"))
    )
    save_graph(ds, Iri("http://ex.org/g"))  # logs, keeps data in memory
    assert len(ds.graph(Iri("http://ex.org/g"))) == 1


def test_no_stray_temp_files_after_save(tmp_path):
    ds = Dataset(tmp_path)
    ds.ensure_graph(Iri("http://ex.org/g"))
    save_graph(ds, Iri("http://ex.org/g"))
    leftovers = [p for p in tmp_path.iterdir() if p.suffix == ".tmp"]
    assert leftovers == []
    assert (tmp_path / graph_file_name(Iri("http://ex.org/g"))).exists()
