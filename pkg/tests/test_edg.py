import random

from seqdep import CorpusParams, NodeKind, build_edg, document_order, random_document
from seqdep.model import INPUT_NODE


def test_demo_graph_shape(demo_usecase):
    edg = build_edg(demo_usecase)
    assert document_order(edg) == ["@input", "m1", "f1", "r_err", "m2", "r_ok"]
    assert edg.hierarchy_edges == frozenset(
        {("@input", "m1"), ("@input", "f1"), ("@input", "r_ok"), ("f1", "r_err"), ("f1", "m2")}
    )
    assert edg.sequence_edges == frozenset({("m1", "f1"), ("f1", "r_ok")})
    assert edg.nodes["@input"] == NodeKind.INPUT
    assert edg.nodes["m1"] == NodeKind.FUNCTION
    assert edg.nodes["f1"] == NodeKind.CONTROL
    assert edg.nodes["r_ok"] == NodeKind.OUTPUT


def test_demo_parent_and_predecessor_lookups(demo_usecase):
    edg = build_edg(demo_usecase)
    assert edg.parent_of("@input") is None
    assert edg.parent_of("m1") == "@input"
    assert edg.parent_of("m2") == "f1"
    assert edg.sequence_predecessors("f1") == ("m1",)
    assert edg.sequence_predecessors("m1") == ()
    assert edg.sequence_predecessors("m2") == ()  # first in its branch


def test_demo_branch_metadata(demo_usecase):
    edg = build_edg(demo_usecase)
    assert edg.fragment_kinds == {"f1": "alt"}
    assert edg.branches["f1"] == (("frozen", ("r_err",)), ("active", ("m2",)))
    assert edg.branch_of["m2"] == ("f1", "active")
    assert edg.branch_of["m1"] is None


def test_graph_wellformedness_on_random_documents():
    params = CorpusParams(n_usecases=1, max_nodes=25, max_depth=4)
    for i in range(60):
        doc = random_document(random.Random(5200 + i), f"G{i}", params)
        uc = doc.usecases[0]
        edg = build_edg(uc)
        order = document_order(edg)
        assert order[0] == INPUT_NODE
        assert len(order) == len(set(order)) == len(edg.nodes)
        # every non-root node has exactly one hierarchy parent
        targets = [b for _, b in edg.hierarchy_edges]
        assert len(targets) == len(set(targets)) == len(order) - 1
        assert INPUT_NODE not in targets
        # sequence edges connect consecutive siblings of one scope
        for a, b in edg.sequence_edges:
            assert edg.parent_of(a) == edg.parent_of(b)
            assert edg.branch_of.get(a) == edg.branch_of.get(b)
            assert edg.doc_order[a] < edg.doc_order[b]
        # nothing sequences into the virtual input
        assert all(b != INPUT_NODE for _, b in edg.sequence_edges)
        # a fragment is one sibling: none of its children sequence to outside nodes
        for fragment, branches in edg.branches.items():
            for _, children in branches:
                for child in children:
                    assert edg.parent_of(child) == fragment
