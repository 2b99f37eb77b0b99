"""Execution dependency graph construction.

The graph combines two edge families over one node set: hierarchy edges from
a container (the virtual input root or a fragment) to each element directly
inside it, and sequence edges between consecutive siblings of the same scope.
A fragment participates in its scope as a single sibling, so no sequence edge
ever crosses into or out of a branch body.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import INPUT_NODE, Element, Fragment, Message, NodeKind, UseCase


@dataclass
class ExecutionDependencyGraph:
    usecase_name: str
    # node id -> kind, in document (pre-order) insertion order
    nodes: dict[str, NodeKind]
    hierarchy_edges: frozenset[tuple[str, str]]
    sequence_edges: frozenset[tuple[str, str]]
    doc_order: dict[str, int]
    # node id -> (fragment id, branch label) for nodes directly inside a fragment
    branch_of: dict[str, tuple[str, str] | None]
    # fragment id -> ((branch label, direct child ids in order), ...)
    branches: dict[str, tuple[tuple[str, tuple[str, ...]], ...]]
    fragment_kinds: dict[str, str]
    root: str = INPUT_NODE

    def parent_of(self, node_id: str) -> str | None:
        if node_id == self.root:
            return None
        membership = self.branch_of.get(node_id)
        return self.root if membership is None else membership[0]

    def sequence_predecessors(self, node_id: str) -> tuple[str, ...]:
        return tuple(a for a, b in self.sequence_edges if b == node_id)


def _node_kind_of(element: Element) -> NodeKind:
    if isinstance(element, Message):
        return NodeKind.FUNCTION
    if isinstance(element, Fragment):
        return NodeKind.CONTROL
    return NodeKind.OUTPUT


def build_edg(usecase: UseCase) -> ExecutionDependencyGraph:
    nodes: dict[str, NodeKind] = {INPUT_NODE: NodeKind.INPUT}
    hierarchy: set[tuple[str, str]] = set()
    sequence: set[tuple[str, str]] = set()
    branch_of: dict[str, tuple[str, str] | None] = {INPUT_NODE: None}
    branches: dict[str, tuple[tuple[str, tuple[str, ...]], ...]] = {}
    fragment_kinds: dict[str, str] = {}

    def add_scope(elements: tuple[Element, ...], parent: str, branch: tuple[str, str] | None) -> None:
        previous: str | None = None
        for element in elements:
            nodes[element.node_id] = _node_kind_of(element)
            branch_of[element.node_id] = branch
            hierarchy.add((parent, element.node_id))
            if previous is not None:
                sequence.add((previous, element.node_id))
            previous = element.node_id
            if isinstance(element, Fragment):
                fragment_kinds[element.node_id] = element.kind
                recorded = []
                for b in element.branches:
                    recorded.append((b.label, tuple(child.node_id for child in b.elements)))
                    add_scope(b.elements, element.node_id, (element.node_id, b.label))
                branches[element.node_id] = tuple(recorded)

    # add_scope inserts each element before descending into it, so the
    # insertion order of `nodes` is exactly the pre-order source order.
    add_scope(usecase.body, INPUT_NODE, None)
    doc_order = {node_id: i for i, node_id in enumerate(nodes)}
    return ExecutionDependencyGraph(
        usecase_name=usecase.name,
        nodes=nodes,
        hierarchy_edges=frozenset(hierarchy),
        sequence_edges=frozenset(sequence),
        doc_order=doc_order,
        branch_of=branch_of,
        branches=branches,
        fragment_kinds=fragment_kinds,
    )


def document_order(edg: ExecutionDependencyGraph) -> list[str]:
    """Node ids sorted by pre-order source position, @input first."""
    return sorted(edg.nodes, key=edg.doc_order.__getitem__)
