import json

import pytest

from seqdep.cli import main

CLEAN_DOC = (
    'usecase "Case" {\n'
    "  input { field seed: uint32 }\n"
    "  participant a\n"
    "  participant b\n"
    '  message m1 from a to b api "MakeX"\n'
    '  message m2 from a to b api "UseX"\n'
    "  return r1 { field y: uint32 }\n"
    "}\n"
    'api "MakeX" { description "produce x" request { field seed: uint32 } response { field x: uint32 } }\n'
    'api "UseX" { description "consume x" request { field x: uint32 } response { field y: uint32 } }\n'
)

CLEAN_EDGES = [
    {"source": "@input", "data": "seed", "target": "m1", "category": "api"},
    {"source": "m1", "data": "x", "target": "m2", "category": "api"},
    {"source": "m2", "data": "y", "target": "r1", "category": "api"},
]


@pytest.fixture()
def demo_path(corpus_dir):
    return str(corpus_dir.parent / "demo.esd")


@pytest.fixture()
def clean_path(tmp_path):
    path = tmp_path / "clean.esd"
    path.write_text(CLEAN_DOC, encoding="utf-8")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_clean_document(capsys, demo_path):
    code, out, err = run(capsys, "parse", demo_path)
    assert code == 0
    assert out == "[]\n"
    assert err == ""


def test_parse_reports_errors_with_exit_one(capsys, tmp_path):
    bad = tmp_path / "bad.esd"
    bad.write_text("", encoding="utf-8")
    code, out, _ = run(capsys, "parse", str(bad))
    assert code == 1
    payload = json.loads(out)
    assert payload and payload[0]["code"] == "E_PARSE"
    assert payload[0]["severity"] == "error"


def test_missing_file_is_a_usage_error(capsys):
    code, out, err = run(capsys, "parse", "does-not-exist.esd")
    assert code == 2
    assert out == ""
    assert err.startswith("error:")


def test_prune_exact_output(capsys, demo_path):
    code, out, _ = run(capsys, "prune", demo_path, "--target", "m2")
    assert code == 0
    assert out == '{"members":["@input","m1","f1"],"ratio":0.6}\n'
    code, out, _ = run(capsys, "prune", demo_path, "--target", "r_ok")
    assert code == 0
    assert out == '{"members":["@input","m1","f1","m2"],"ratio":0.8}\n'


def test_prune_unknown_target(capsys, demo_path):
    code, out, err = run(capsys, "prune", demo_path, "--target", "zz")
    assert code == 2
    assert out == ""
    diagnostic = json.loads(err)
    assert diagnostic["code"] == "E_LOOKUP"
    assert diagnostic["message"] == "no node 'zz' in use case 'Demo'"


def test_prune_rejects_the_input_node(capsys, demo_path):
    code, _, err = run(capsys, "prune", demo_path, "--target", "@input")
    assert code == 2
    assert json.loads(err)["code"] == "E_USAGE"


def test_unknown_usecase_flag(capsys, demo_path):
    code, _, err = run(capsys, "edg", demo_path, "--usecase", "Nope")
    assert code == 2
    assert json.loads(err)["code"] == "E_LOOKUP"


def test_edg_json_export(capsys, demo_path):
    code, out, _ = run(capsys, "edg", demo_path)
    assert code == 0
    graph = json.loads(out)
    assert graph["usecase"] == "Demo"
    assert {n["id"] for n in graph["nodes"]} == {"@input", "m1", "f1", "r_err", "m2", "r_ok"}
    assert ["m1", "f1"] in graph["sequence_edges"]


def test_edg_dot_export(capsys, demo_path):
    code, out, _ = run(capsys, "edg", demo_path, "--format", "dot")
    assert code == 0
    assert out.startswith("digraph")
    assert "style=dashed" in out  # hierarchy edges are dashed
    assert "diamond" in out  # the input node shape


def test_infer_all_reports_missing_source(capsys, demo_path):
    code, out, _ = run(capsys, "infer", demo_path)
    assert code == 1
    ddg = json.loads(out)
    assert ddg["usecase"] == "Demo"
    assert len(ddg["edges"]) == 5
    assert [d["code"] for d in ddg["diagnostics"]] == ["E_MISSING_SOURCE"]


def test_infer_single_target_is_clean(capsys, demo_path):
    code, out, _ = run(capsys, "infer", demo_path, "--target", "m2")
    assert code == 0
    ddg = json.loads(out)
    assert ddg["edges"] == [
        {"source": "@input", "data": "amount", "target": "m2", "category": "api"},
        {"source": "@input", "data": "user_id", "target": "m2", "category": "api"},
    ]
    assert ddg["diagnostics"] == []


def test_infer_llm_requires_transport(capsys, demo_path):
    code, _, err = run(capsys, "infer", demo_path, "--engine", "llm")
    assert code == 2
    diagnostic = json.loads(err)
    assert diagnostic["code"] == "E_USAGE"
    assert "requires --transport" in diagnostic["message"]


def test_infer_llm_with_stub_file(capsys, demo_path, tmp_path):
    stub = tmp_path / "response.json"
    stub.write_text(
        json.dumps(
            {
                "edges": [
                    {"source": "@input", "data": "user_id", "target": "m2", "category": "api"},
                    {"source": "@input", "data": "amount", "target": "m2", "category": "api"},
                ]
            }
        ),
        encoding="utf-8",
    )
    code, out, _ = run(
        capsys, "infer", demo_path, "--target", "m2", "--engine", "llm", "--transport", f"stub:{stub}"
    )
    assert code == 0
    ddg = json.loads(out)
    assert len(ddg["edges"]) == 2
    assert ddg["diagnostics"] == []


def test_infer_unknown_transport(capsys, demo_path):
    code, _, err = run(capsys, "infer", demo_path, "--engine", "llm", "--transport", "bogus")
    assert code == 2
    assert "unknown transport 'bogus'" in json.loads(err)["message"]


def test_validate_self_check(capsys, demo_path):
    code, out, _ = run(capsys, "validate", demo_path)
    assert code == 1
    payload = json.loads(out)
    assert [d["code"] for d in payload] == ["E_MISSING_SOURCE"]


def test_validate_accepts_complete_annotation(capsys, clean_path, tmp_path):
    edges = tmp_path / "edges.json"
    edges.write_text(json.dumps({"usecase": "Case", "edges": CLEAN_EDGES}), encoding="utf-8")
    code, out, _ = run(capsys, "validate", clean_path, "--edges", str(edges))
    assert code == 0
    assert out == "[]\n"


def test_validate_flags_bad_annotation(capsys, clean_path, tmp_path):
    bad = CLEAN_EDGES + [{"source": "m2", "data": "x", "target": "m1", "category": "api"}]
    edges = tmp_path / "edges.json"
    edges.write_text(json.dumps({"usecase": "Case", "edges": bad}), encoding="utf-8")
    code, out, _ = run(capsys, "validate", clean_path, "--edges", str(edges))
    assert code == 1
    codes = {d["code"] for d in json.loads(out)}
    assert codes == {"E_EDGE_CONSTRAINT"}


def test_validate_rejects_wrong_usecase(capsys, clean_path, tmp_path):
    edges = tmp_path / "edges.json"
    edges.write_text(json.dumps({"usecase": "Other", "edges": []}), encoding="utf-8")
    code, _, err = run(capsys, "validate", clean_path, "--edges", str(edges))
    assert code == 2
    assert json.loads(err)["code"] == "E_USAGE"


def test_validate_rejects_malformed_json(capsys, clean_path, tmp_path):
    edges = tmp_path / "edges.json"
    edges.write_text("{not json", encoding="utf-8")
    code, _, err = run(capsys, "validate", clean_path, "--edges", str(edges))
    assert code == 2
    assert "is not valid JSON" in json.loads(err)["message"]


def test_eval_identity_scores_one(capsys, corpus_dir):
    esd = corpus_dir / "QueryAccount01.esd"
    gold = corpus_dir / "QueryAccount01.gold.json"
    code, out, _ = run(capsys, "eval", str(esd), "--pred", str(gold), "--gold", str(gold))
    assert code == 0
    report = json.loads(out)
    macro = report["macro"]["overall"]
    assert macro["precision"] == 1.0
    assert macro["recall"] == 1.0
    assert macro["f1"] == 1.0


def test_eval_table_format(capsys, corpus_dir):
    esd = corpus_dir / "QueryAccount01.esd"
    gold = corpus_dir / "QueryAccount01.gold.json"
    pred = corpus_dir / "QueryAccount01.pred.json"
    code, out, _ = run(
        capsys, "eval", str(esd), "--pred", str(pred), "--gold", str(gold), "--format", "table"
    )
    assert code == 0  # imperfect predictions still evaluate successfully
    assert "Average" in out
    assert "Overall" in out


def test_eval_rejects_usecase_mismatch(capsys, corpus_dir):
    esd = corpus_dir / "QueryAccount01.esd"
    gold = corpus_dir / "QueryAccount01.gold.json"
    other = corpus_dir / "SetLimit02.gold.json"
    code, _, err = run(capsys, "eval", str(esd), "--pred", str(other), "--gold", str(gold))
    assert code == 2
    assert json.loads(err)["code"] == "E_USAGE"


def test_prompt_prints_all_sections(capsys, demo_path):
    code, out, _ = run(capsys, "prompt", demo_path, "--target", "m2")
    assert code == 0
    assert out.startswith("# Formal Problem Specification\n")
    for heading in ("Contextual Information", "Inference Constraints", "Output Format"):
        assert f"# {heading}\n" in out


def test_prompt_is_stable_across_invocations(capsys, demo_path):
    _, first, _ = run(capsys, "prompt", demo_path, "--target", "m2")
    _, second, _ = run(capsys, "prompt", demo_path, "--target", "m2")
    assert first == second


def test_prompt_flags_nonconsuming_target(capsys, tmp_path):
    doc = tmp_path / "fire.esd"
    doc.write_text(
        'usecase "Fire" {\n'
        "  input { field seed: uint32 }\n"
        "  participant a\n"
        "  participant b\n"
        '  message m1 from a to b api "Ping"\n'
        "  return r1 { field ok: bool }\n"
        "}\n"
        'api "Ping" { description "fire and forget" request { } response { field ok: bool } }\n',
        encoding="utf-8",
    )
    code, out, _ = run(capsys, "prompt", str(doc), "--target", "m1")
    assert code == 1
    assert json.loads(out)["code"] == "E_NO_CONSUMPTION"


def test_gen_corpus_is_deterministic(capsys, tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    code, stdout, _ = run(
        capsys, "gen-corpus", "--seed", "7", "--out", str(out_a), "--n-usecases", "2"
    )
    assert code == 0
    listing = json.loads(stdout)
    assert listing["directory"] == str(out_a)
    assert len(listing["usecases"]) == 2
    run(capsys, "gen-corpus", "--seed", "7", "--out", str(out_b), "--n-usecases", "2")
    for name in listing["usecases"]:
        for suffix in (".esd", ".gold.json", ".pred.json"):
            assert (out_a / f"{name}{suffix}").read_bytes() == (out_b / f"{name}{suffix}").read_bytes()


def test_gen_corpus_validates_params(capsys, tmp_path):
    code, _, err = run(
        capsys, "gen-corpus", "--seed", "7", "--out", str(tmp_path / "x"), "--n-usecases", "0"
    )
    assert code == 2
    assert json.loads(err)["code"] == "E_USAGE"
