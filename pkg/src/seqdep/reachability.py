"""Reachable predecessor identification and its brute-force ground truth.

Two independent routes compute "which nodes can execute strictly before a
target". The fast route walks the execution dependency graph backwards over
hierarchy parents and sequence predecessors, exploring each sequential
predecessor's subtree while skipping return branches (branches whose last
element unavoidably terminates the use case). The slow route enumerates every
feasible execution path from the model itself and records what it visits; it
exists so the fast route can be checked against exact semantics.

Execution semantics shared by both routes: siblings run in order, alt takes
exactly one branch, opt either runs its body or skips it, loop runs its body
exactly once, and reaching a break fragment runs its body and then ends the
use case, exactly like a return message.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    INPUT_NODE,
    Branch,
    Diagnostic,
    Element,
    Fragment,
    Message,
    NodeKind,
    ReturnMessage,
    UseCase,
    make_diagnostic,
)
from .edg import ExecutionDependencyGraph

ORACLE_PATH_BUDGET = 2**20


@dataclass(frozen=True)
class PredecessorSet:
    target: str
    members: frozenset[str]
    reduction_ratio: float


class OracleBudgetError(Exception):
    """Raised when path enumeration would exceed the configured budget."""

    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(diagnostic.message)


# -- termination predicates (model level) ------------------------------------


def _always_terminates(element: Element) -> bool:
    if isinstance(element, ReturnMessage):
        return True
    if isinstance(element, Message):
        return False
    if element.kind == "break":
        return True
    if element.kind == "opt":
        return False
    # alt terminates iff every branch does; loop iff its single body does,
    # since the body always executes once.
    return all(is_return_branch(branch) for branch in element.branches)


def is_return_branch(branch: Branch) -> bool:
    """True iff executing this branch always terminates the use case."""
    return bool(branch.elements) and _always_terminates(branch.elements[-1])


# -- termination predicates (graph level) ------------------------------------


def _edg_always_terminates(edg: ExecutionDependencyGraph, node_id: str) -> bool:
    kind = edg.nodes[node_id]
    if kind == NodeKind.OUTPUT:
        return True
    if kind != NodeKind.CONTROL:
        return False
    fragment_kind = edg.fragment_kinds[node_id]
    if fragment_kind == "break":
        return True
    if fragment_kind == "opt":
        return False
    return all(_edg_branch_is_return(edg, node_id, label) for label, _ in edg.branches[node_id])


def _edg_branch_is_return(edg: ExecutionDependencyGraph, fragment_id: str, label: str) -> bool:
    for branch_label, children in edg.branches[fragment_id]:
        if branch_label == label:
            return bool(children) and _edg_always_terminates(edg, children[-1])
    raise KeyError(f"fragment {fragment_id!r} has no branch {label!r}")


# -- Algorithm: backward traversal with subtree exploration -------------------


def reachable_predecessors(edg: ExecutionDependencyGraph, target: str) -> PredecessorSet:
    """All nodes that can execute strictly before `target`, plus @input."""
    if target not in edg.nodes:
        raise KeyError(f"unknown target node {target!r}")
    if target == edg.root:
        raise ValueError("the virtual input node has no predecessors")

    reached: set[str] = set()
    visited: set[str] = set()
    seq_preds: dict[str, list[str]] = {}
    for a, b in edg.sequence_edges:
        seq_preds.setdefault(b, []).append(a)

    def backward(node: str) -> None:
        if node in visited:
            return
        visited.add(node)
        reached.add(node)
        parent = edg.parent_of(node)
        if parent is not None:
            backward(parent)
        for pred in seq_preds.get(node, ()):
            backward(pred)
            explore(pred)

    def explore(node: str) -> None:
        # Everything inside a sequential predecessor may have run, except
        # branches that would have ended the use case before the target.
        for label, children in edg.branches.get(node, ()):
            if _edg_branch_is_return(edg, node, label):
                continue
            for child in children:
                if child not in visited:
                    backward(child)
                    explore(child)

    backward(target)
    reached = _filter_return_branches(edg, reached, target)
    members = frozenset(reached - {target})
    ratio = len(members) / (len(edg.nodes) - 1)
    return PredecessorSet(target=target, members=members, reduction_ratio=ratio)


def _branch_chain(edg: ExecutionDependencyGraph, node_id: str) -> list[tuple[str, str]]:
    chain: list[tuple[str, str]] = []
    current: str | None = node_id
    while current is not None:
        membership = edg.branch_of.get(current)
        if membership is not None:
            chain.append(membership)
            current = membership[0]
        else:
            current = None
    return chain


def _filter_return_branches(edg: ExecutionDependencyGraph, reached: set[str], target: str) -> set[str]:
    """Drop nodes that lie on a return branch not containing the target."""
    target_chain = set(_branch_chain(edg, target))
    kept: set[str] = set()
    for node in reached:
        drop = False
        for membership in _branch_chain(edg, node):
            if membership in target_chain:
                continue
            fragment_id, label = membership
            if _edg_branch_is_return(edg, fragment_id, label):
                drop = True
                break
        if not drop:
            kept.add(node)
    return kept


def context_reduction_ratio(edg: ExecutionDependencyGraph, target: str) -> float:
    return reachable_predecessors(edg, target).reduction_ratio


# -- brute-force oracle -------------------------------------------------------

ExecutionPath = tuple[str, ...]


def enumerate_execution_paths(usecase: UseCase, budget: int = ORACLE_PATH_BUDGET) -> list[ExecutionPath]:
    """Every feasible visit sequence, each starting at @input.

    A path ends either at a terminating element (return message or break) or
    after the last top-level element. Raises OracleBudgetError when more than
    `budget` paths would be produced.
    """

    def guard(variants: list[tuple[ExecutionPath, bool]]) -> list[tuple[ExecutionPath, bool]]:
        if len(variants) > budget:
            raise OracleBudgetError(
                make_diagnostic(
                    "E_ORACLE_BUDGET",
                    f"use case {usecase.name!r} exceeds the oracle budget of {budget} execution paths",
                )
            )
        return variants

    def expand_scope(elements: tuple[Element, ...]) -> list[tuple[ExecutionPath, bool]]:
        variants: list[tuple[ExecutionPath, bool]] = [((), False)]
        for element in elements:
            step = expand_element(element)
            grown: list[tuple[ExecutionPath, bool]] = []
            for prefix, terminated in variants:
                if terminated:
                    grown.append((prefix, True))
                    continue
                for segment, seg_terminated in step:
                    grown.append((prefix + segment, seg_terminated))
            variants = guard(grown)
        return variants

    def expand_element(element: Element) -> list[tuple[ExecutionPath, bool]]:
        visit = (element.node_id,)
        if isinstance(element, Message):
            return [(visit, False)]
        if isinstance(element, ReturnMessage):
            return [(visit, True)]
        if element.kind == "opt":
            body = expand_scope(element.branches[0].elements)
            return [(visit, False)] + [(visit + seg, term) for seg, term in body]
        if element.kind == "loop":
            body = expand_scope(element.branches[0].elements)
            return [(visit + seg, term) for seg, term in body]
        if element.kind == "break":
            body = expand_scope(element.branches[0].elements)
            return [(visit + seg, True) for seg, _ in body]
        variants: list[tuple[ExecutionPath, bool]] = []
        for branch in element.branches:
            for seg, term in expand_scope(branch.elements):
                variants.append((visit + seg, term))
        return variants

    return [(INPUT_NODE,) + segment for segment, _ in expand_scope(usecase.body)]


def oracle_predecessor_map(
    usecase: UseCase, budget: int = ORACLE_PATH_BUDGET
) -> dict[str, frozenset[str]]:
    """For every node, the set of nodes some path visits strictly before it."""
    before: dict[str, set[str]] = {}
    for path in enumerate_execution_paths(usecase, budget):
        seen: set[str] = set()
        for node in path:
            before.setdefault(node, set()).update(seen)
            seen.add(node)
    result: dict[str, frozenset[str]] = {}
    for node in usecase.node_index:
        preds = before.get(node, set()) | {INPUT_NODE}
        preds.discard(node)
        result[node] = frozenset(preds)
    return result


def oracle_reachable_predecessors(
    usecase: UseCase, target: str, budget: int = ORACLE_PATH_BUDGET
) -> frozenset[str]:
    if target != INPUT_NODE and target not in usecase.node_index:
        raise KeyError(f"unknown target node {target!r}")
    return oracle_predecessor_map(usecase, budget)[target]
