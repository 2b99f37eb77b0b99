import json
import os
import shutil

import pytest
from fastapi.testclient import TestClient

from seqdep.service import create_app

DEMO = "Demo"


@pytest.fixture()
def workspace(tmp_path, corpus_dir):
    shutil.copy(corpus_dir.parent / "demo.esd", tmp_path / "demo.esd")
    return tmp_path


@pytest.fixture()
def client(workspace):
    with TestClient(create_app(workspace)) as c:
        yield c


def test_every_response_carries_schema_version(client):
    seen = [
        client.get("/api/usecases"),
        client.get(f"/api/usecase/{DEMO}"),
        client.get(f"/api/usecase/{DEMO}/edg"),
        client.get(f"/api/usecase/{DEMO}/prune", params={"target": "m2"}),
        client.post("/api/infer", json={"usecase": DEMO}),
        client.post("/api/parse", json={"text": "not a diagram"}),
        client.get("/api/usecase/Missing"),
        client.post("/api/infer", json={}),
    ]
    for response in seen:
        assert response.json()["schema_version"] == 1


def test_list_usecases(client):
    payload = client.get("/api/usecases").json()
    assert payload["usecases"] == [DEMO]


def test_get_usecase_document(client, workspace):
    response = client.get(f"/api/usecase/{DEMO}")
    assert response.status_code == 200
    payload = response.json()
    assert payload["usecase"]["name"] == DEMO
    assert sorted(payload["apis"]) == ["Debit", "QueryAccount"]
    assert list(payload["tables"]) == ["t1"]
    assert payload["text"] == (workspace / "demo.esd").read_text(encoding="utf-8")


def test_unknown_usecase_is_404(client):
    response = client.get("/api/usecase/Nope")
    assert response.status_code == 404
    diagnostic = response.json()["diagnostic"]
    assert diagnostic["code"] == "E_LOOKUP"
    assert diagnostic["message"] == "no use case named 'Nope'"


def test_edg_endpoint(client):
    payload = client.get(f"/api/usecase/{DEMO}/edg").json()
    assert [n["id"] for n in payload["nodes"]] == ["@input", "m1", "f1", "r_err", "m2", "r_ok"]
    assert ["f1", "m2"] in payload["hierarchy_edges"]
    assert payload["fragment_kinds"] == {"f1": "alt"}


def test_prune_endpoint(client):
    response = client.get(f"/api/usecase/{DEMO}/prune", params={"target": "m2"})
    payload = response.json()
    assert payload["usecase"] == DEMO
    assert payload["target"] == "m2"
    assert payload["members"] == ["@input", "m1", "f1"]
    assert payload["ratio"] == 0.6


def test_prune_requires_target(client):
    response = client.get(f"/api/usecase/{DEMO}/prune")
    assert response.status_code == 400
    assert response.json()["diagnostic"]["code"] == "E_USAGE"


def test_prune_unknown_node(client):
    response = client.get(f"/api/usecase/{DEMO}/prune", params={"target": "zz"})
    assert response.status_code == 400
    diagnostic = response.json()["diagnostic"]
    assert diagnostic["code"] == "E_LOOKUP"
    assert diagnostic["node"] == "zz"


def test_responses_are_byte_identical(client):
    for url in ("/api/usecases", f"/api/usecase/{DEMO}/edg", f"/api/usecase/{DEMO}"):
        assert client.get(url).content == client.get(url).content


def test_infer_whole_usecase(client):
    response = client.post("/api/infer", json={"usecase": DEMO})
    payload = response.json()
    assert response.status_code == 200
    assert payload["usecase"] == DEMO
    assert len(payload["edges"]) == 5
    assert [d["code"] for d in payload["diagnostics"]] == ["E_MISSING_SOURCE"]


def test_infer_single_target(client):
    response = client.post("/api/infer", json={"usecase": DEMO, "target": "m2"})
    payload = response.json()
    assert payload["edges"] == [
        {"source": "@input", "data": "amount", "target": "m2", "category": "api"},
        {"source": "@input", "data": "user_id", "target": "m2", "category": "api"},
    ]
    assert payload["diagnostics"] == []


def test_infer_rejects_bad_requests(client):
    assert client.post("/api/infer", json={}).status_code == 400
    assert client.post("/api/infer", json={"usecase": "Nope"}).status_code == 400
    assert (
        client.post("/api/infer", json={"usecase": DEMO, "target": "zz"}).status_code == 400
    )
    assert (
        client.post("/api/infer", json={"usecase": DEMO, "engine": "quantum"}).status_code
        == 400
    )
    response = client.post("/api/infer", json={"usecase": DEMO, "engine": "llm"})
    assert response.status_code == 400
    assert response.json()["diagnostic"]["message"] == "no llm transport configured on this server"


def test_parse_endpoint_round_trips(client, workspace):
    text = (workspace / "demo.esd").read_text(encoding="utf-8")
    payload = client.post("/api/parse", json={"text": text}).json()
    assert payload["diagnostics"] == []
    assert payload["document"]["usecases"][0]["name"] == DEMO


def test_parse_endpoint_reports_errors_with_200(client):
    payload = client.post("/api/parse", json={"text": "usecase {"}).json()
    assert payload["document"] is None
    assert payload["diagnostics"]
    assert all(d["code"] == "E_PARSE" for d in payload["diagnostics"])


def test_parse_endpoint_rejects_non_string_body(client):
    assert client.post("/api/parse", json={"text": 42}).status_code == 400
    assert client.post("/api/parse", content=b"not json").status_code == 400


def test_eval_endpoint(client):
    edges = [
        {"source": "@input", "data": "user_id", "target": "m1", "category": "api"},
    ]
    response = client.post(
        "/api/eval", json={"usecase": DEMO, "predicted": edges, "gold": edges}
    )
    payload = response.json()
    assert payload["macro"]["overall"]["f1"] == 1.0
    bad = client.post("/api/eval", json={"usecase": DEMO, "predicted": "x", "gold": []})
    assert bad.status_code == 400
    assert "'predicted' must be a list" in bad.json()["diagnostic"]["message"]


def test_workspace_cache_tracks_file_changes(client, workspace):
    target = workspace / "extra.esd"
    target.write_text(
        'usecase "Extra" {\n'
        "  input { field a: uint64 }\n"
        "  participant x\n"
        "  participant y\n"
        '  message m1 from x to y api "A"\n'
        "  return r1 { field b: uint64 }\n"
        "}\n"
        'api "A" { description "d" request { field a: uint64 } response { field b: uint64 } }\n',
        encoding="utf-8",
    )
    names = client.get("/api/usecases").json()["usecases"]
    assert names == [DEMO, "Extra"]

    # rewrite the file under a new name; mtime or size change must be seen
    text = target.read_text(encoding="utf-8").replace('"Extra"', '"Renamed"')
    target.write_text(text, encoding="utf-8")
    os.utime(target, ns=(1, 1))  # force an mtime change even on coarse clocks
    names = client.get("/api/usecases").json()["usecases"]
    assert names == [DEMO, "Renamed"]

    target.unlink()
    names = client.get("/api/usecases").json()["usecases"]
    assert names == [DEMO]


def test_unparseable_files_are_skipped(client, workspace):
    (workspace / "broken.esd").write_text("usecase {", encoding="utf-8")
    names = client.get("/api/usecases").json()["usecases"]
    assert names == [DEMO]


def test_static_ui_mount(tmp_path, workspace):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>console</title>", encoding="utf-8")
    with TestClient(create_app(workspace, ui_dir=ui)) as client:
        response = client.get("/")
        assert response.status_code == 200
        assert "console" in response.text
        # the API keeps working alongside the static mount
        assert client.get("/api/usecases").json()["usecases"] == [DEMO]
