"""JSON codecs and graph exports shared by the CLI and the HTTP service.

Everything here is deterministic: lists carry a defined order (document
order for nodes, lexicographic for edge sets) and `canonical_json` renders
with sorted keys and compact separators, so equal values serialize to equal
bytes.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

from .edg import ExecutionDependencyGraph, document_order
from .engine import DataDependencyGraph
from .evaluation import EvaluationReport, GoldAnnotation, Metrics
from .model import (
    ApiSpec,
    Branch,
    CATEGORIES,
    DecisionTable,
    DependencyEdge,
    Diagnostic,
    Document,
    Element,
    Field,
    Fragment,
    Message,
    ReturnMessage,
    Rule,
    UseCase,
)
from .reachability import PredecessorSet

SCHEMA_VERSION = 1


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def diagnostic_to_json(diagnostic: Diagnostic) -> dict:
    return {
        "severity": diagnostic.severity,
        "code": diagnostic.code,
        "message": diagnostic.message,
        "node": diagnostic.node,
        "entity": diagnostic.entity,
    }


def diagnostics_to_json(diagnostics) -> list[dict]:
    return [diagnostic_to_json(d) for d in diagnostics]


def edge_to_json(edge: DependencyEdge) -> dict:
    return {
        "source": edge.source,
        "data": edge.data,
        "target": edge.target,
        "category": edge.category,
    }


def edge_from_json(value: Mapping) -> DependencyEdge:
    if not isinstance(value, Mapping):
        raise ValueError("edge must be an object")
    for key in ("source", "data", "target", "category"):
        if not isinstance(value.get(key), str):
            raise ValueError(f"edge field '{key}' must be a string")
    if value["category"] not in CATEGORIES:
        raise ValueError(f"unknown category '{value['category']}'")
    return DependencyEdge(
        source=value["source"],
        data=value["data"],
        target=value["target"],
        category=value["category"],
    )


def edges_to_json(edges) -> list[dict]:
    ordered = sorted(edges, key=lambda e: (e.target, e.data, e.source, e.category))
    return [edge_to_json(e) for e in ordered]


def field_to_json(f: Field) -> dict:
    return {"name": f.name, "dtype": f.dtype, "description": f.description}


def _element_to_json(element: Element) -> dict:
    if isinstance(element, Message):
        return {
            "type": "message",
            "id": element.node_id,
            "sender": element.sender,
            "receiver": element.receiver,
            "api": element.api,
            "tables": list(element.tables),
        }
    if isinstance(element, Fragment):
        return {
            "type": "fragment",
            "id": element.node_id,
            "kind": element.kind,
            "tables": list(element.tables),
            "branches": [
                {"label": b.label, "elements": [_element_to_json(e) for e in b.elements]}
                for b in element.branches
            ],
        }
    return {
        "type": "return",
        "id": element.node_id,
        "fields": [field_to_json(f) for f in element.fields],
    }


def usecase_to_json(usecase: UseCase) -> dict:
    return {
        "name": usecase.name,
        "input_fields": [field_to_json(f) for f in usecase.input_fields],
        "participants": list(usecase.participants),
        "body": [_element_to_json(e) for e in usecase.body],
        "spans": {node: list(span) for node, span in sorted(usecase.spans.items())},
    }


def api_to_json(api: ApiSpec) -> dict:
    return {
        "name": api.name,
        "description": api.description,
        "request": [field_to_json(f) for f in api.request],
        "response": [field_to_json(f) for f in api.response],
    }


def table_to_json(table: DecisionTable) -> dict:
    return {
        "id": table.table_id,
        "rules": [
            {
                "condition": rule.condition,
                "condition_reads": list(rule.condition_reads),
                "action": rule.action,
                "action_reads": list(rule.action_reads),
                "action_writes": [field_to_json(f) for f in rule.action_writes],
            }
            for rule in table.rules
        ],
    }


def document_to_json(document: Document) -> dict:
    return {
        "usecases": [usecase_to_json(uc) for uc in document.usecases],
        "apis": {name: api_to_json(document.apis[name]) for name in sorted(document.apis)},
        "tables": {tid: table_to_json(document.tables[tid]) for tid in sorted(document.tables)},
    }


def edg_to_json(edg: ExecutionDependencyGraph) -> dict:
    order = document_order(edg)
    return {
        "usecase": edg.usecase_name,
        "nodes": [{"id": node, "kind": edg.nodes[node].value} for node in order],
        "hierarchy_edges": sorted(list(e) for e in edg.hierarchy_edges),
        "sequence_edges": sorted(list(e) for e in edg.sequence_edges),
        "fragment_kinds": dict(sorted(edg.fragment_kinds.items())),
        "branches": {
            fragment: [{"label": label, "children": list(children)} for label, children in branches]
            for fragment, branches in sorted(edg.branches.items())
        },
    }


def ddg_to_json(ddg: DataDependencyGraph) -> dict:
    return {
        "usecase": ddg.usecase,
        "edges": edges_to_json(ddg.edges),
        "diagnostics": diagnostics_to_json(ddg.diagnostics),
    }


def prune_to_json(edg: ExecutionDependencyGraph, pruned: PredecessorSet) -> dict:
    members = [n for n in document_order(edg) if n in pruned.members]
    return {"members": members, "ratio": pruned.reduction_ratio}


def gold_to_json(gold: GoldAnnotation) -> dict:
    return {"usecase": gold.usecase, "edges": edges_to_json(gold.edges)}


def gold_from_json(value: Mapping) -> GoldAnnotation:
    if not isinstance(value, Mapping) or not isinstance(value.get("usecase"), str):
        raise ValueError("annotation must be an object with a 'usecase' string")
    edges = value.get("edges")
    if not isinstance(edges, list):
        raise ValueError("annotation must carry an 'edges' list")
    return GoldAnnotation(
        usecase=value["usecase"], edges=frozenset(edge_from_json(e) for e in edges)
    )


def metrics_to_json(metrics: Metrics) -> dict:
    return {
        "precision": metrics.precision,
        "recall": metrics.recall,
        "f1": metrics.f1,
        "tp": metrics.tp,
        "fp": metrics.fp,
        "fn": metrics.fn,
        "applicable": metrics.applicable,
    }


def report_to_json(report: EvaluationReport) -> dict:
    return {
        "per_usecase": {
            name: {row: metrics_to_json(m) for row, m in rows.items()}
            for name, rows in report.per_usecase.items()
        },
        "macro": {row: metrics_to_json(m) for row, m in report.macro.items()},
    }


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _edg_to_dot(edg: ExecutionDependencyGraph) -> str:
    shapes = {"input": "diamond", "function": "box", "control": "hexagon", "output": "ellipse"}
    lines = ["digraph edg {", "  rankdir=TB;"]
    for node in document_order(edg):
        kind = edg.nodes[node].value
        lines.append(f"  {_dot_quote(node)} [shape={shapes[kind]}];")
    for a, b in sorted(edg.hierarchy_edges):
        lines.append(f"  {_dot_quote(a)} -> {_dot_quote(b)} [style=dashed];")
    for a, b in sorted(edg.sequence_edges):
        lines.append(f"  {_dot_quote(a)} -> {_dot_quote(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _ddg_to_dot(ddg: DataDependencyGraph) -> str:
    lines = ["digraph ddg {", "  rankdir=LR;"]
    nodes = sorted({e.source for e in ddg.edges} | {e.target for e in ddg.edges})
    for node in nodes:
        lines.append(f"  {_dot_quote(node)};")
    for e in sorted(ddg.edges, key=lambda e: (e.target, e.data, e.source)):
        label = _dot_quote(f"{e.data} ({e.category})")
        lines.append(f"  {_dot_quote(e.source)} -> {_dot_quote(e.target)} [label={label}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(graph, fmt: str) -> str:
    """Render an execution or dependency graph as `dot` text or JSON."""
    if fmt not in ("dot", "json"):
        raise ValueError(f"unknown export format '{fmt}'")
    if isinstance(graph, ExecutionDependencyGraph):
        return _edg_to_dot(graph) if fmt == "dot" else canonical_json(edg_to_json(graph))
    if isinstance(graph, DataDependencyGraph):
        return _ddg_to_dot(graph) if fmt == "dot" else canonical_json(ddg_to_json(graph))
    raise ValueError("graph must be an execution or data dependency graph")
