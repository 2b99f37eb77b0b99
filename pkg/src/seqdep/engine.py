"""Produce/consume sets, the deterministic rule-based inference baseline,
and dependency graph validation.

A node produces the response fields of its API plus whatever its bound
decision tables write; the virtual input node produces the use case inputs.
A node consumes its API request fields plus whatever its bound tables read;
return messages consume their own fields. The rule engine connects each
consumed entity to producers inside the target's reachable predecessor set,
keeping only the latest writers along the execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .edg import ExecutionDependencyGraph, build_edg, document_order
from .model import (
    INPUT_NODE,
    DependencyEdge,
    Diagnostic,
    Document,
    Fragment,
    Message,
    NodeKind,
    ReturnMessage,
    UseCase,
    make_diagnostic,
    node_kind,
)
from .reachability import PredecessorSet, reachable_predecessors

PRODUCER_SLOTS = ("api_response", "table_action_write", "input_field")
CONSUMER_SLOTS = ("api_request", "return_field", "table_condition_read", "table_action_read")

# Safe widening conversions, used only to phrase the hint in type warnings.
_WIDENINGS = {("uint32", "uint64"), ("int32", "int64")}


@dataclass(frozen=True)
class EntityOccurrence:
    entity: str
    slot: str
    node: str
    dtype: Optional[str] = None


@dataclass(frozen=True)
class DataDependencyGraph:
    usecase: str
    edges: frozenset[DependencyEdge]
    diagnostics: tuple[Diagnostic, ...] = ()


class EdgeConstraintError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(diagnostic.message)


def _bound_tables(node_id: str, usecase: UseCase, document: Document):
    element = usecase.node_index.get(node_id)
    bound = getattr(element, "tables", ()) if element is not None else ()
    return [document.tables[table_id] for table_id in bound]


def data_produced(node_id: str, usecase: UseCase, document: Document) -> frozenset[EntityOccurrence]:
    kind = node_kind(node_id, usecase)
    occurrences: set[EntityOccurrence] = set()
    if kind == NodeKind.INPUT:
        for f in usecase.input_fields:
            occurrences.add(EntityOccurrence(f.name, "input_field", node_id, f.dtype))
        return frozenset(occurrences)
    if kind == NodeKind.OUTPUT:
        return frozenset()
    if kind == NodeKind.FUNCTION:
        element = usecase.node_index[node_id]
        api = document.apis[element.api]
        for f in api.response:
            occurrences.add(EntityOccurrence(f.name, "api_response", node_id, f.dtype))
    for table in _bound_tables(node_id, usecase, document):
        for rule in table.rules:
            for f in rule.action_writes:
                occurrences.add(EntityOccurrence(f.name, "table_action_write", node_id, f.dtype))
    return frozenset(occurrences)


def data_consumed(node_id: str, usecase: UseCase, document: Document) -> frozenset[EntityOccurrence]:
    kind = node_kind(node_id, usecase)
    occurrences: set[EntityOccurrence] = set()
    if kind == NodeKind.INPUT:
        return frozenset()
    if kind == NodeKind.OUTPUT:
        element = usecase.node_index[node_id]
        for f in element.fields:
            occurrences.add(EntityOccurrence(f.name, "return_field", node_id, f.dtype))
        return frozenset(occurrences)
    if kind == NodeKind.FUNCTION:
        element = usecase.node_index[node_id]
        api = document.apis[element.api]
        for f in api.request:
            occurrences.add(EntityOccurrence(f.name, "api_request", node_id, f.dtype))
    for table in _bound_tables(node_id, usecase, document):
        for rule in table.rules:
            for name in rule.condition_reads:
                occurrences.add(EntityOccurrence(name, "table_condition_read", node_id, None))
            for name in rule.action_reads:
                occurrences.add(EntityOccurrence(name, "table_action_read", node_id, None))
    return frozenset(occurrences)


def classify_edge_category(
    data: str, target: str, usecase: UseCase, document: Document
) -> tuple[str, list[Diagnostic]]:
    """Category of an edge into `target` carrying `data`, by consumption slot.

    api beats condition beats action; consumption in slots of different
    categories additionally yields a W_AMBIGUOUS_SLOT warning.
    """
    slots = {occ.slot for occ in data_consumed(target, usecase, document) if occ.entity == data}
    if not slots:
        raise EdgeConstraintError(
            make_diagnostic(
                "E_EDGE_CONSTRAINT",
                f"'{data}' is not consumed by node '{target}'",
                node=target,
                entity=data,
            )
        )
    categories = []
    if slots & {"api_request", "return_field"}:
        categories.append("api")
    if "table_condition_read" in slots:
        categories.append("condition")
    if "table_action_read" in slots:
        categories.append("action")
    diagnostics: list[Diagnostic] = []
    if len(categories) > 1:
        diagnostics.append(
            make_diagnostic(
                "W_AMBIGUOUS_SLOT",
                f"'{data}' reaches '{target}' through multiple slot categories"
                f" ({', '.join(categories)}); keeping '{categories[0]}'",
                node=target,
                entity=data,
            )
        )
    return categories[0], diagnostics


def check_type_compatibility(
    producer: EntityOccurrence, consumer: EntityOccurrence
) -> Optional[Diagnostic]:
    if producer.entity != consumer.entity:
        raise ValueError("occurrences must refer to the same entity")
    if producer.dtype is None or consumer.dtype is None:
        return None
    if producer.dtype == consumer.dtype:
        return None
    pair = (producer.dtype, consumer.dtype)
    if pair in _WIDENINGS:
        hint = f"a widening conversion from {pair[0]} to {pair[1]} is safe"
    elif (pair[1], pair[0]) in _WIDENINGS:
        hint = f"a conversion from {pair[0]} to {pair[1]} narrows and may lose information"
    else:
        hint = "no implicit conversion exists; convert explicitly"
    return make_diagnostic(
        "W_TYPE_COMPAT",
        f"'{consumer.entity}' is produced by '{producer.node}' as {producer.dtype}"
        f" but consumed by '{consumer.node}' as {consumer.dtype}; {hint}",
        node=consumer.node,
        entity=consumer.entity,
    )


def _occurrence_for(
    occurrences: Iterable[EntityOccurrence], entity: str, precedence: tuple[str, ...]
) -> Optional[EntityOccurrence]:
    matching = [occ for occ in occurrences if occ.entity == entity]
    for slot in precedence:
        for occ in matching:
            if occ.slot == slot:
                return occ
    return matching[0] if matching else None


@dataclass
class _InferenceState:
    """Caches shared across the per-target runs of one use case."""

    edg: ExecutionDependencyGraph
    produced: dict[str, frozenset[EntityOccurrence]] = field(default_factory=dict)
    predecessors: dict[str, frozenset[str]] = field(default_factory=dict)

    def produced_by(self, node_id: str, usecase: UseCase, document: Document) -> frozenset[EntityOccurrence]:
        if node_id not in self.produced:
            self.produced[node_id] = data_produced(node_id, usecase, document)
        return self.produced[node_id]

    def reaches(self, source: str, destination: str) -> bool:
        """True iff `source` can execute strictly before `destination`."""
        if destination == INPUT_NODE:
            return False
        if destination not in self.predecessors:
            self.predecessors[destination] = reachable_predecessors(self.edg, destination).members
        return source in self.predecessors[destination]


def infer_rule_based(
    usecase: UseCase,
    document: Document,
    target: str,
    context: PredecessorSet,
    _state: _InferenceState | None = None,
) -> tuple[frozenset[DependencyEdge], list[Diagnostic]]:
    """Infer every incoming dependency edge of `target` from its context."""
    if context.target != target:
        raise ValueError(f"context was computed for {context.target!r}, not {target!r}")
    state = _state or _InferenceState(edg=build_edg(usecase))
    consumed = data_consumed(target, usecase, document)
    edges: set[DependencyEdge] = set()
    diagnostics: list[Diagnostic] = []
    order = state.edg.doc_order
    for entity in sorted({occ.entity for occ in consumed}):
        candidates = [
            s for s in context.members
            if any(occ.entity == entity for occ in state.produced_by(s, usecase, document))
        ]
        if not candidates:
            diagnostics.append(
                make_diagnostic(
                    "E_MISSING_SOURCE",
                    f"no reachable predecessor of '{target}' produces '{entity}'",
                    node=target,
                    entity=entity,
                )
            )
            continue
        survivors = [
            s1 for s1 in candidates
            if not any(s2 != s1 and state.reaches(s1, s2) for s2 in candidates)
        ]
        category, category_diags = classify_edge_category(entity, target, usecase, document)
        diagnostics.extend(category_diags)
        consumer = _occurrence_for(consumed, entity, CONSUMER_SLOTS)
        for source in sorted(survivors, key=order.__getitem__):
            edges.add(DependencyEdge(source=source, data=entity, target=target, category=category))
            producer = _occurrence_for(
                state.produced_by(source, usecase, document), entity, PRODUCER_SLOTS
            )
            if producer is not None and consumer is not None:
                warning = check_type_compatibility(producer, consumer)
                if warning is not None:
                    diagnostics.append(warning)
    return frozenset(edges), diagnostics


def inference_targets(usecase: UseCase, document: Document, edg: ExecutionDependencyGraph) -> list[str]:
    """Nodes with nonempty consumption, in document order."""
    return [
        node_id
        for node_id in document_order(edg)
        if node_id != INPUT_NODE and data_consumed(node_id, usecase, document)
    ]


def infer_all(usecase: UseCase, document: Document) -> DataDependencyGraph:
    edg = build_edg(usecase)
    state = _InferenceState(edg=edg)
    edges: set[DependencyEdge] = set()
    diagnostics: list[Diagnostic] = []
    for target in inference_targets(usecase, document, edg):
        context = reachable_predecessors(edg, target)
        target_edges, target_diags = infer_rule_based(usecase, document, target, context, state)
        edges.update(target_edges)
        diagnostics.extend(target_diags)
    return DataDependencyGraph(usecase=usecase.name, edges=frozenset(edges), diagnostics=tuple(diagnostics))


def validate_ddg(
    ddg: DataDependencyGraph,
    edg: ExecutionDependencyGraph,
    usecase: UseCase,
    document: Document,
) -> list[Diagnostic]:
    """Re-check a dependency graph against the structural admissibility rules."""
    if ddg.usecase != usecase.name or edg.usecase_name != usecase.name:
        raise ValueError("dependency graph, execution graph, and use case must agree on the name")
    diagnostics: list[Diagnostic] = []
    state = _InferenceState(edg=edg)
    order = edg.doc_order

    def sort_key(edge: DependencyEdge):
        big = len(order)
        return (order.get(edge.target, big), order.get(edge.source, big), edge.data)

    for edge in sorted(ddg.edges, key=sort_key):
        reasons: list[str] = []
        if edge.source not in edg.nodes:
            reasons.append(f"unknown source node '{edge.source}'")
        if edge.target not in edg.nodes:
            reasons.append(f"unknown target node '{edge.target}'")
        if not reasons:
            source_kind = node_kind(edge.source, usecase) if edge.source != INPUT_NODE else NodeKind.INPUT
            target_kind = node_kind(edge.target, usecase) if edge.target != INPUT_NODE else NodeKind.INPUT
            if source_kind == NodeKind.OUTPUT:
                reasons.append(f"source '{edge.source}' is an output node and cannot produce")
            if target_kind == NodeKind.INPUT:
                reasons.append(f"target '{edge.target}' is the input node and cannot consume")
            if not reasons and not state.reaches(edge.source, edge.target):
                reasons.append(f"'{edge.source}' cannot execute before '{edge.target}'")
        if reasons:
            diagnostics.append(
                make_diagnostic(
                    "E_EDGE_CONSTRAINT",
                    f"edge ({edge.source}, {edge.data}, {edge.target}): " + "; ".join(reasons),
                    node=edge.target,
                    entity=edge.data,
                )
            )
    incoming: dict[str, set[str]] = {}
    for edge in ddg.edges:
        incoming.setdefault(edge.target, set()).add(edge.data)
    for target in inference_targets(usecase, document, edg):
        consumed_names = sorted({occ.entity for occ in data_consumed(target, usecase, document)})
        for entity in consumed_names:
            if entity not in incoming.get(target, set()):
                diagnostics.append(
                    make_diagnostic(
                        "E_MISSING_SOURCE",
                        f"consumed entity '{entity}' of '{target}' has no incoming edge",
                        node=target,
                        entity=entity,
                    )
                )
    return diagnostics
