import random

import pytest

from seqdep import (
    CorpusParams,
    OracleBudgetError,
    build_edg,
    enumerate_execution_paths,
    oracle_predecessor_map,
    oracle_reachable_predecessors,
    parse_document,
    random_document,
    reachable_predecessors,
)
from seqdep.reachability import ORACLE_PATH_BUDGET

_API_BLOCK = """
api "Ping" {
  description "round trip"
  request { field seed: uint32 }
  response { field pong: uint32 }
}
"""


def case_with(body: str):
    text = (
        'usecase "Case" {\n'
        "  input { field seed: uint32 }\n"
        "  participant a\n"
        "  participant b\n"
        f"{body}\n"
        "}\n" + _API_BLOCK
    )
    return parse_document(text).usecase("Case")


def test_demo_predecessor_sets(demo_usecase):
    edg = build_edg(demo_usecase)
    expected = {
        "m1": frozenset({"@input"}),
        "f1": frozenset({"@input", "m1"}),
        "r_err": frozenset({"@input", "m1", "f1"}),
        "m2": frozenset({"@input", "m1", "f1"}),
        "r_ok": frozenset({"@input", "m1", "f1", "m2"}),
    }
    for target, members in expected.items():
        result = reachable_predecessors(edg, target)
        assert result.target == target
        assert result.members == members
        assert result.reduction_ratio == len(members) / 5


def test_demo_reduction_ratios(demo_usecase):
    edg = build_edg(demo_usecase)
    assert reachable_predecessors(edg, "m2").reduction_ratio == 0.6
    assert reachable_predecessors(edg, "r_ok").reduction_ratio == 0.8
    assert reachable_predecessors(edg, "m1").reduction_ratio == 0.2


def test_input_node_rejected(demo_usecase):
    edg = build_edg(demo_usecase)
    with pytest.raises(ValueError):
        reachable_predecessors(edg, "@input")


def test_unknown_target_rejected(demo_usecase):
    edg = build_edg(demo_usecase)
    with pytest.raises(KeyError):
        reachable_predecessors(edg, "nope")
    with pytest.raises(KeyError):
        oracle_reachable_predecessors(demo_usecase, "nope")


def test_break_branch_is_skipped_for_later_targets():
    uc = case_with(
        """
  message m1 from a to b api "Ping"
  alt f1 {
    branch "stop" {
      break f2 {
        message m2 from a to b api "Ping"
      }
    }
    branch "go" {
      message m3 from a to b api "Ping"
    }
  }
  return r1 { }
"""
    )
    edg = build_edg(uc)
    assert reachable_predecessors(edg, "r1").members == frozenset({"@input", "m1", "f1", "m3"})
    # inside the break, everything on the way in is still a predecessor
    assert reachable_predecessors(edg, "m2").members == frozenset({"@input", "m1", "f1", "f2"})
    assert oracle_reachable_predecessors(uc, "r1") == frozenset({"@input", "m1", "f1", "m3"})


def test_loop_body_counts_once():
    uc = case_with(
        """
  message m1 from a to b api "Ping"
  loop f1 {
    message m2 from a to b api "Ping"
  }
  return r1 { }
"""
    )
    edg = build_edg(uc)
    assert reachable_predecessors(edg, "m2").members == frozenset({"@input", "m1", "f1"})
    assert reachable_predecessors(edg, "r1").members == frozenset({"@input", "m1", "f1", "m2"})
    # the loop body runs exactly once, so every path visits m2 exactly once
    for path in enumerate_execution_paths(uc):
        assert path.count("m2") == 1


def test_nested_alt_return_branch_filtered():
    uc = case_with(
        """
  alt f1 {
    branch "x" {
      alt f2 {
        branch "p" { return r2 { } }
        branch "q" { message m2 from a to b api "Ping" }
      }
    }
    branch "y" {
      message m3 from a to b api "Ping"
    }
  }
  return r1 { }
"""
    )
    edg = build_edg(uc)
    assert reachable_predecessors(edg, "r1").members == frozenset(
        {"@input", "f1", "f2", "m2", "m3"}
    )
    assert reachable_predecessors(edg, "r2").members == frozenset({"@input", "f1", "f2"})
    assert oracle_reachable_predecessors(uc, "r1") == frozenset({"@input", "f1", "f2", "m2", "m3"})


def test_opt_body_may_have_run():
    uc = case_with(
        """
  opt f1 {
    message m1 from a to b api "Ping"
  }
  return r1 { }
"""
    )
    edg = build_edg(uc)
    assert reachable_predecessors(edg, "r1").members == frozenset({"@input", "f1", "m1"})
    # unlike loop, opt also admits the skip path
    paths = enumerate_execution_paths(uc)
    assert sorted(paths) == [
        ("@input", "f1", "m1", "r1"),
        ("@input", "f1", "r1"),
    ]


def test_algorithm_matches_oracle_on_random_documents():
    params = CorpusParams(n_usecases=1, max_nodes=25, max_depth=4)
    for i in range(150):
        doc = random_document(random.Random(7300 + i), f"R{i}", params)
        uc = doc.usecases[0]
        edg = build_edg(uc)
        truth = oracle_predecessor_map(uc)
        for target in uc.node_index:
            got = reachable_predecessors(edg, target)
            assert got.members == truth[target], (i, target)
            assert got.reduction_ratio == len(got.members) / (len(edg.nodes) - 1)


def test_oracle_budget_is_enforced():
    lines = ['  message m0 from a to b api "Ping"']
    for i in range(1, 5):
        lines.append(f"  alt f{i} {{")
        lines.append(f'    branch "l" {{ message m{i}l from a to b api "Ping" }}')
        lines.append(f'    branch "r" {{ message m{i}r from a to b api "Ping" }}')
        lines.append("  }")
    lines.append("  return r1 { }")
    uc = case_with("\n".join(lines))
    assert len(enumerate_execution_paths(uc)) == 16
    with pytest.raises(OracleBudgetError) as exc:
        oracle_reachable_predecessors(uc, "r1", budget=8)
    assert exc.value.diagnostic.code == "E_ORACLE_BUDGET"
    assert exc.value.diagnostic.severity == "error"
    assert ORACLE_PATH_BUDGET == 2**20
