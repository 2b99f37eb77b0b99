import pytest

from seqdep import (
    DependencyEdge,
    Diagnostic,
    Fragment,
    INPUT_NODE,
    Message,
    NodeKind,
    ReturnMessage,
    make_diagnostic,
    node_kind,
    normalize_name,
)
from seqdep.model import walk_elements


def test_normalize_name_folds_case_and_separators():
    assert normalize_name("User-ID") == "user_id"
    assert normalize_name("  Card No ") == "card_no"
    assert normalize_name("already_fine") == "already_fine"
    # idempotent
    assert normalize_name(normalize_name("A-B C")) == normalize_name("A-B C")


def test_node_kind_partition(demo_usecase):
    assert node_kind(INPUT_NODE, demo_usecase) == NodeKind.INPUT
    assert node_kind("m1", demo_usecase) == NodeKind.FUNCTION
    assert node_kind("m2", demo_usecase) == NodeKind.FUNCTION
    assert node_kind("f1", demo_usecase) == NodeKind.CONTROL
    assert node_kind("r_ok", demo_usecase) == NodeKind.OUTPUT
    assert node_kind("r_err", demo_usecase) == NodeKind.OUTPUT
    with pytest.raises(KeyError):
        node_kind("nope", demo_usecase)


def test_make_diagnostic_derives_severity():
    err = make_diagnostic("E_MISSING_SOURCE", "x", node="m1", entity="a")
    assert err.severity == "error"
    warn = make_diagnostic("W_TYPE_COMPAT", "y")
    assert warn.severity == "warning"


def test_diagnostic_rejects_unknown_code():
    with pytest.raises(ValueError):
        make_diagnostic("E_NOT_A_CODE", "boom")
    with pytest.raises(ValueError):
        Diagnostic(severity="error", code="W_TYPE_COMPAT", message="severity mismatch")


def test_dependency_edge_constraints():
    edge = DependencyEdge("@input", "user_id", "m1", "api")
    assert edge.category == "api"
    with pytest.raises(ValueError):
        DependencyEdge("@input", "user_id", "m1", "bogus")
    with pytest.raises(ValueError):
        DependencyEdge("m1", "x", "m1", "api")


def test_walk_elements_is_preorder(demo_usecase):
    ids = [e.node_id for e, _, _, _ in walk_elements(demo_usecase.body)]
    assert ids == ["m1", "f1", "r_err", "m2", "r_ok"]
    by_id = {e.node_id: (parent, branch, depth) for e, parent, branch, depth in walk_elements(demo_usecase.body)}
    assert by_id["m1"] == (None, None, 0)
    parent, branch, depth = by_id["m2"]
    assert isinstance(parent, Fragment) and parent.node_id == "f1"
    assert branch == "active" and depth == 1


def test_node_index_covers_nested_nodes(demo_usecase):
    assert set(demo_usecase.node_index) == {"m1", "f1", "r_err", "m2", "r_ok"}
    assert isinstance(demo_usecase.node_index["r_err"], ReturnMessage)
    assert isinstance(demo_usecase.node_index["m2"], Message)


def test_document_lookup(demo_document):
    assert demo_document.usecase("Demo").name == "Demo"
    with pytest.raises(KeyError):
        demo_document.usecase("Missing")
