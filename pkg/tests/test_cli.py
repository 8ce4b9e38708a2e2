import json
import threading
import urllib.request

import pytest
from click.testing import CliRunner

from ldaf.cli import main
from ldaf.terms import Iri, Literal, Triple
from ldaf.turtle import parse_turtle


@pytest.fixture
def runner():
    return CliRunner()


def test_init_scaffolds_project(tmp_path, runner):
    result = runner.invoke(main, ["init", str(tmp_path / "demo")])
    assert result.exit_code == 0, result.output
    root = tmp_path / "demo"
    config = json.loads((root / "config.json").read_text())
    assert config["base_url"] == "http://localhost:8080"
    assert (root / "templates" / "resource.tpl").exists()
    assert (root / "templates" / "error.tpl").exists()
    assert (root / "ontology.ttl").exists()
    assert (root / "data").is_dir()
    # second init refuses to clobber
    again = runner.invoke(main, ["init", str(root)])
    assert again.exit_code != 0


def test_import_and_export_round_trip(tmp_path, runner):
    runner.invoke(main, ["init", str(tmp_path / "demo")])
    config = str(tmp_path / "demo" / "config.json")
    source = tmp_path / "in.ttl"
    source.write_text(
        '@prefix ex: <http://ex.org/> . ex:a ex:p ex:b ; ex:q "x" .',
        "utf-8",
    )
    result = runner.invoke(
        main,
        ["import", "--config", config, "--graph", "http://localhost:8080/graph/shared", "--file", str(source)],
    )
    assert result.exit_code == 0, result.output
    assert "2 new triple(s)" in result.output

    out = tmp_path / "out.ttl"
    result = runner.invoke(
        main,
        ["export", "--config", config, "--graph", "http://localhost:8080/graph/shared", "--file", str(out)],
    )
    assert result.exit_code == 0, result.output
    exported = parse_turtle(out.read_text("utf-8"), "http://localhost:8080")
    assert Triple(Iri("http://ex.org/a"), Iri("http://ex.org/p"), Iri("http://ex.org/b")) in exported
    assert Triple(Iri("http://ex.org/a"), Iri("http://ex.org/q"), Literal("x")) in exported


def test_import_bad_file_fails_cleanly(tmp_path, runner):
    runner.invoke(main, ["init", str(tmp_path / "demo")])
    config = str(tmp_path / "demo" / "config.json")
    bad = tmp_path / "bad.ttl"
    bad.write_text("not turtle at all", "utf-8")
    result = runner.invoke(
        main, ["import", "--config", config, "--graph", "http://ex.org/g", "--file", str(bad)]
    )
    assert result.exit_code != 0
    assert "bad.ttl" in result.output


def test_export_unknown_graph_fails(tmp_path, runner):
    runner.invoke(main, ["init", str(tmp_path / "demo")])
    config = str(tmp_path / "demo" / "config.json")
    result = runner.invoke(
        main, ["export", "--config", config, "--graph", "http://nope.example/g", "--file", str(tmp_path / "o.ttl")]
    )
    assert result.exit_code != 0


def test_adduser_registers_account(tmp_path, runner):
    runner.invoke(main, ["init", str(tmp_path / "demo")])
    config = str(tmp_path / "demo" / "config.json")
    result = runner.invoke(main, ["adduser", "--config", config, "--username", "ada", "--password", "longenough"])
    assert result.exit_code == 0, result.output
    assert "user/1" in result.output
    # prompt path: confirm mismatched entries abort
    result = runner.invoke(
        main, ["adduser", "--config", config, "--username", "ada", "--password", "longenough"]
    )
    assert result.exit_code != 0  # duplicate


def test_serve_answers_over_a_real_socket(tmp_path, runner):
    runner.invoke(main, ["init", str(tmp_path / "demo"), "--base-url", "http://localhost:0"])
    # port 0 in the config is invalid, so write a proper one with port picked by the OS
    config_path = tmp_path / "demo" / "config.json"
    config = json.loads(config_path.read_text())
    config["base_url"] = "http://localhost:8080"
    config["port"] = 8080
    config_path.write_text(json.dumps(config))

    from ldaf.server.app import make_app, serve
    from ldaf.server.config import load_config

    app = make_app(load_config(config_path))
    server = serve(app, host="127.0.0.1", port=0)
    port = server.server_port
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        request = urllib.request.Request(
            f"http://127.0.0.1:{port}/", headers={"Accept": "application/json"}
        )
        with urllib.request.urlopen(request, timeout=5) as response:
            assert response.status == 200
            doc = json.loads(response.read())
            assert doc["base_url"] == "http://localhost:8080"
        request = urllib.request.Request(f"http://127.0.0.1:{port}/ontology", headers={"Accept": "text/turtle"})
        with urllib.request.urlopen(request, timeout=5) as response:
            assert response.headers["Content-Type"] == "text/turtle; charset=utf-8"
    finally:
        server.shutdown()
        thread.join(timeout=5)
