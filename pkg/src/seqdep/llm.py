"""Prompt construction, transports, and response parsing for model-assisted
inference.

The prompt has four fixed sections. Section two carries only the target and
its reachable predecessors, so everything the model sees is admissible as an
edge source. Responses are parsed leniently (prose and code fences around the
JSON are tolerated) but validated strictly: edges from outside the context,
kind violations, and entities the target never consumes are dropped with
diagnostics, and categories are recomputed locally because model labels are
advisory.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol

from .edg import build_edg, document_order
from .engine import EdgeConstraintError, classify_edge_category, data_consumed
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

PROMPT_HEADINGS = (
    "Formal Problem Specification",
    "Contextual Information",
    "Inference Constraints",
    "Output Format",
)

_WIRE_SCHEMA = '{"edges": [{"source": str, "data": str, "target": str, "category": "api" | "condition" | "action"}]}'


@dataclass(frozen=True)
class LlmParams:
    temperature: float = 0.1
    max_tokens: int = 2048
    model: Optional[str] = None


@dataclass(frozen=True)
class PromptDocument:
    """The four prompt sections plus their deterministic rendering."""

    sections: tuple[tuple[str, str], ...]
    rendered: str


class PromptBuildError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(diagnostic.message)


class TransportError(Exception):
    """The transport could not obtain a response at all."""


class Transport(Protocol):
    def send(self, prompt: str, params: LlmParams) -> str: ...


def _field_lines(label: str, fields) -> list[str]:
    if not fields:
        return [f"- {label}: none"]
    lines = [f"- {label}:"]
    for f in fields:
        suffix = f" ({f.description})" if f.description else ""
        lines.append(f"  - {f.name}: {f.dtype}{suffix}")
    return lines


def _table_lines(element, document: Document) -> list[str]:
    lines: list[str] = []
    for table_id in getattr(element, "tables", ()):
        table = document.tables[table_id]
        lines.append(f"- decision table {table.table_id}:")
        for rule in table.rules:
            condition = rule.condition if rule.condition else "(unconditional)"
            lines.append(f'  - when "{condition}" then "{rule.action}"')
            if rule.condition_reads:
                lines.append(f"    reads (condition): {', '.join(rule.condition_reads)}")
            if rule.action_reads:
                lines.append(f"    reads (action): {', '.join(rule.action_reads)}")
            if rule.action_writes:
                lines.append(
                    "    writes: " + ", ".join(f"{f.name}: {f.dtype}" for f in rule.action_writes)
                )
    return lines


def _node_block(node_id: str, usecase: UseCase, document: Document) -> str:
    kind = node_kind(node_id, usecase)
    lines = [f"### Node {node_id} ({kind.value})"]
    if kind == NodeKind.INPUT:
        lines.append("- virtual entry point carrying the use case inputs")
        lines.extend(_field_lines("provides", usecase.input_fields))
        return "\n".join(lines)
    element = usecase.node_index[node_id]
    if isinstance(element, Message):
        api = document.apis[element.api]
        lines.append(f"- calls API {api.name}: {api.description}" if api.description else f"- calls API {api.name}")
        lines.extend(_field_lines("request", api.request))
        lines.extend(_field_lines("response", api.response))
        lines.extend(_table_lines(element, document))
    elif isinstance(element, Fragment):
        lines.append(f"- {element.kind} fragment guarding {len(element.branches)} branch(es)")
        lines.extend(_table_lines(element, document))
    elif isinstance(element, ReturnMessage):
        lines.extend(_field_lines("returns", element.fields))
    return "\n".join(lines)


def build_prompt(
    usecase: UseCase, document: Document, target: str, context: PredecessorSet
) -> PromptDocument:
    if context.target != target:
        raise ValueError(f"context was computed for {context.target!r}, not {target!r}")
    consumed = data_consumed(target, usecase, document)
    if not consumed:
        raise PromptBuildError(
            make_diagnostic(
                "E_NO_CONSUMPTION",
                f"node '{target}' consumes no data entities; nothing to infer",
                node=target,
            )
        )
    edg = build_edg(usecase)
    member_order = [n for n in document_order(edg) if n in context.members]

    problem = "\n".join(
        [
            "Infer the data dependency graph G_DD = (V, E_DD, D) for one target node of a",
            "sequence diagram. V holds an input node, function nodes (messages calling",
            "APIs), control nodes (opt/alt/loop/break fragments), and output nodes (return",
            "messages). Each edge (s, d, t) in E_DD states that node t consumes data",
            "entity d produced by node s. A node produces its API response fields plus the",
            "fields written by its bound decision tables; the input node produces the use",
            "case inputs. A node consumes its API request fields plus the fields read by",
            "its bound decision tables; output nodes consume their return fields.",
        ]
    )

    context_lines = [f"Use case: {usecase.name}", f"Target node t: {target}", ""]
    context_lines.append("Reachable predecessor nodes P(t), in document order:")
    context_lines.append("")
    for node_id in member_order:
        context_lines.append(_node_block(node_id, usecase, document))
        context_lines.append("")
    context_lines.append("Target node:")
    context_lines.append("")
    context_lines.append(_node_block(target, usecase, document))
    context_lines.append("")
    consumed_names = sorted({occ.entity for occ in consumed})
    context_lines.append(f"The target consumes: {', '.join(consumed_names)}.")
    context_body = "\n".join(context_lines)

    constraints = "\n".join(
        [
            "1. Completeness: emit one edge for every entity the target consumes whose",
            "   producer appears among the reachable predecessor nodes listed above.",
            "2. Path validity: the source of every edge must be one of the listed",
            "   predecessor nodes; nodes outside that list can never feed the target.",
            "3. Consistency: prefer the producer closest to the target along execution",
            "   order; fall back to the input node only when no other producer exists.",
            "4. Category: use \"api\" for entities consumed through API request or return",
            "   fields, \"condition\" for decision-table condition reads, \"action\" for",
            "   decision-table action reads.",
        ]
    )

    output_format = "\n".join(
        [
            "Reply with JSON only, no commentary, matching this schema:",
            "",
            "```json",
            _WIRE_SCHEMA,
            "```",
            "",
            "A bare top-level array of edge objects is also accepted.",
        ]
    )

    sections = (
        (PROMPT_HEADINGS[0], problem),
        (PROMPT_HEADINGS[1], context_body),
        (PROMPT_HEADINGS[2], constraints),
        (PROMPT_HEADINGS[3], output_format),
    )
    rendered = "\n\n".join(f"# {heading}\n\n{body}" for heading, body in sections) + "\n"
    return PromptDocument(sections=sections, rendered=rendered)


def _extract_payload(text: str) -> Optional[list]:
    """First JSON value in `text` that matches the edge wire schema."""
    decoder = json.JSONDecoder()
    for i, ch in enumerate(text):
        if ch not in "{[":
            continue
        try:
            value, _ = decoder.raw_decode(text, i)
        except ValueError:
            continue
        entries = value.get("edges") if isinstance(value, dict) else value
        if not isinstance(entries, list):
            continue
        if all(
            isinstance(e, dict)
            and all(isinstance(e.get(k), str) for k in ("source", "data", "target"))
            for e in entries
        ):
            return entries
    return None


def parse_response(
    text: str,
    target: str,
    context: PredecessorSet,
    usecase: UseCase,
    document: Document,
) -> tuple[frozenset[DependencyEdge], list[Diagnostic]]:
    entries = _extract_payload(text)
    if entries is None:
        return frozenset(), [
            make_diagnostic(
                "E_RESPONSE_FORMAT",
                f"no JSON edge payload found in response: {text!r}",
                node=target,
            )
        ]
    edges: set[DependencyEdge] = set()
    diagnostics: list[Diagnostic] = []

    def drop(entry: dict, reason: str) -> None:
        diagnostics.append(
            make_diagnostic(
                "E_EDGE_CONSTRAINT",
                f"dropped edge ({entry['source']}, {entry['data']}, {entry['target']}): {reason}",
                node=target,
                entity=entry["data"],
            )
        )

    for entry in entries:
        source, data, stated_target = entry["source"], entry["data"], entry["target"]
        if stated_target != target:
            drop(entry, f"response is for target '{target}'")
            continue
        if source not in context.members:
            drop(entry, f"'{source}' is not a reachable predecessor of '{target}'")
            continue
        if source != INPUT_NODE and node_kind(source, usecase) == NodeKind.OUTPUT:
            drop(entry, f"source '{source}' is an output node and cannot produce")
            continue
        try:
            category, category_diags = classify_edge_category(data, target, usecase, document)
        except EdgeConstraintError as exc:
            diagnostics.append(exc.diagnostic)
            continue
        diagnostics.extend(category_diags)
        edges.add(DependencyEdge(source=source, data=data, target=target, category=category))
    return frozenset(edges), diagnostics


@dataclass
class StubTransport:
    """Replays a fixed list of responses; the last one repeats."""

    responses: tuple[str, ...] = ()
    fail: bool = False
    calls: list[tuple[str, LlmParams]] = field(default_factory=list)

    def send(self, prompt: str, params: LlmParams) -> str:
        self.calls.append((prompt, params))
        if self.fail:
            raise TransportError("stub transport configured to fail")
        if not self.responses:
            raise TransportError("stub transport has no responses")
        index = min(len(self.calls) - 1, len(self.responses) - 1)
        return self.responses[index]


def _replay_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16] + ".txt"


@dataclass
class ReplayTransport:
    """Serves responses recorded on disk, keyed by a hash of the prompt."""

    directory: Path

    def send(self, prompt: str, params: LlmParams) -> str:
        path = Path(self.directory) / _replay_key(prompt)
        if not path.exists():
            raise TransportError(f"no recorded response for this prompt under {self.directory}")
        return path.read_text(encoding="utf-8")


def save_replay_response(directory: Path, prompt: str, response: str) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / _replay_key(prompt)
    path.write_text(response, encoding="utf-8")
    return path


class RemoteTransport:
    """Chat-completion endpoint configured through the environment.

    Reads SEQDEP_LLM_URL and SEQDEP_LLM_TOKEN unless given explicitly. Kept
    out of the test suite; evaluation runs use replay fixtures instead.
    """

    def __init__(
        self,
        url: Optional[str] = None,
        token: Optional[str] = None,
        timeout: float = 60.0,
    ):
        self.url = url or os.environ.get("SEQDEP_LLM_URL", "")
        self.token = token or os.environ.get("SEQDEP_LLM_TOKEN", "")
        self.timeout = timeout
        if not self.url:
            raise TransportError("no endpoint URL; set SEQDEP_LLM_URL")

    def send(self, prompt: str, params: LlmParams) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        body = {
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        if params.model:
            body["model"] = params.model
        try:
            response = requests.post(self.url, json=body, headers=headers, timeout=self.timeout)
            response.raise_for_status()
            payload = response.json()
            return payload["choices"][0]["message"]["content"]
        except Exception as exc:
            raise TransportError(f"remote endpoint failed: {exc}") from exc


def infer_with_llm(
    usecase: UseCase,
    document: Document,
    target: str,
    transport: Transport,
    params: Optional[LlmParams] = None,
    context: Optional[PredecessorSet] = None,
) -> tuple[frozenset[DependencyEdge], list[Diagnostic]]:
    params = params or LlmParams()
    if context is None:
        context = reachable_predecessors(build_edg(usecase), target)
    try:
        prompt = build_prompt(usecase, document, target, context)
    except PromptBuildError as exc:
        return frozenset(), [exc.diagnostic]

    last: tuple[frozenset[DependencyEdge], list[Diagnostic]] = (frozenset(), [])
    for attempt in range(2):
        try:
            text = transport.send(prompt.rendered, params)
        except TransportError as exc:
            return frozenset(), [
                make_diagnostic("E_TRANSPORT", f"transport failed: {exc}", node=target)
            ]
        last = parse_response(text, target, context, usecase, document)
        malformed = any(d.code == "E_RESPONSE_FORMAT" for d in last[1])
        if not malformed:
            return last
    return last
