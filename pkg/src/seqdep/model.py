"""Core domain model for enhanced sequence diagrams.

Defines the parsed document types (use cases, messages, fragments, return
messages, API specs, decision tables), the node kind partition, dependency
edges, and the diagnostic record shared by every other module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Union

INPUT_NODE = "@input"

CATEGORIES = ("api", "condition", "action")

FRAGMENT_KINDS = ("opt", "alt", "loop", "break")

BUILTIN_TYPES = ("uint32", "uint64", "int32", "int64", "string", "bool", "decimal")

# Fixed diagnostic code registry. Severity is encoded in the prefix.
DIAGNOSTIC_CODES = frozenset(
    {
        "E_PARSE",
        "E_DESIGN_RULE",
        "W_DESIGN_RULE",
        "E_MISSING_SOURCE",
        "W_TYPE_COMPAT",
        "E_EDGE_CONSTRAINT",
        "W_AMBIGUOUS_SLOT",
        "E_ORACLE_BUDGET",
        "E_NO_CONSUMPTION",
        "E_RESPONSE_FORMAT",
        "E_TRANSPORT",
        "E_LOOKUP",
        "E_USAGE",
    }
)


def normalize_name(name: str) -> str:
    """Normalize an entity or node name for matching purposes."""
    return name.strip().lower().replace("-", "_").replace(" ", "_")


class NodeKind(str, Enum):
    INPUT = "input"
    FUNCTION = "function"
    CONTROL = "control"
    OUTPUT = "output"


@dataclass(frozen=True)
class Diagnostic:
    """A single finding: parse problem, design-rule hit, inference issue."""

    severity: str
    code: str
    message: str
    node: Optional[str] = None
    entity: Optional[str] = None

    def __post_init__(self) -> None:
        if self.code not in DIAGNOSTIC_CODES:
            raise ValueError(f"unknown diagnostic code: {self.code}")
        expected = "error" if self.code.startswith("E_") else "warning"
        if self.severity != expected:
            raise ValueError(f"{self.code} requires severity {expected!r}, got {self.severity!r}")


def make_diagnostic(code: str, message: str, node: str | None = None, entity: str | None = None) -> Diagnostic:
    severity = "error" if code.startswith("E_") else "warning"
    return Diagnostic(severity=severity, code=code, message=message, node=node, entity=entity)


@dataclass(frozen=True)
class Field:
    """A typed data field. dtype keeps the literal spelling, e.g. "uint64" or "item[]"."""

    name: str
    dtype: str
    description: str = ""


@dataclass(frozen=True)
class ApiSpec:
    name: str
    description: str
    request: tuple[Field, ...]
    response: tuple[Field, ...]


@dataclass(frozen=True)
class Rule:
    """One decision-table rule: optional condition plus an action."""

    action: str
    condition: Optional[str] = None
    condition_reads: tuple[str, ...] = ()
    action_reads: tuple[str, ...] = ()
    action_writes: tuple[Field, ...] = ()


@dataclass(frozen=True)
class DecisionTable:
    table_id: str
    rules: tuple[Rule, ...]


@dataclass(frozen=True)
class Message:
    """A synchronous call between two participants, refined by one API."""

    node_id: str
    sender: str
    receiver: str
    api: str
    tables: tuple[str, ...] = ()


@dataclass(frozen=True)
class ReturnMessage:
    node_id: str
    fields: tuple[Field, ...]


@dataclass(frozen=True)
class Branch:
    label: str
    elements: tuple["Element", ...]


@dataclass(frozen=True)
class Fragment:
    """A control fragment (opt, alt, loop, break) holding one or more branches."""

    node_id: str
    kind: str
    branches: tuple[Branch, ...]
    tables: tuple[str, ...] = ()


Element = Union[Message, Fragment, ReturnMessage]


def walk_elements(
    body: tuple[Element, ...],
    parent: Fragment | None = None,
    branch: str | None = None,
    depth: int = 0,
) -> Iterator[tuple[Element, Fragment | None, str | None, int]]:
    """Yield (element, enclosing fragment, branch label, depth) in document order."""
    for element in body:
        yield element, parent, branch, depth
        if isinstance(element, Fragment):
            for b in element.branches:
                yield from walk_elements(b.elements, element, b.label, depth + 1)


@dataclass
class UseCase:
    name: str
    input_fields: tuple[Field, ...]
    participants: tuple[str, ...]
    body: tuple[Element, ...]
    # node id -> (start line, end line); informational, excluded from equality
    spans: dict[str, tuple[int, int]] = field(default_factory=dict, compare=False, repr=False)
    node_index: dict[str, Element] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        index: dict[str, Element] = {}
        for element, _, _, _ in walk_elements(self.body):
            index[element.node_id] = element
        self.node_index = index


@dataclass
class Document:
    usecases: tuple[UseCase, ...]
    apis: dict[str, ApiSpec] = field(default_factory=dict)
    tables: dict[str, DecisionTable] = field(default_factory=dict)
    source_path: str = field(default="<memory>", compare=False)

    def usecase(self, name: str) -> UseCase:
        for uc in self.usecases:
            if uc.name == name:
                return uc
        raise KeyError(f"no use case named {name!r}")


def node_kind(node_id: str, usecase: UseCase) -> NodeKind:
    """Map a node id to its kind in the input/function/control/output partition."""
    if node_id == INPUT_NODE:
        return NodeKind.INPUT
    element = usecase.node_index.get(node_id)
    if element is None:
        raise KeyError(f"unknown node {node_id!r} in use case {usecase.name!r}")
    if isinstance(element, Message):
        return NodeKind.FUNCTION
    if isinstance(element, Fragment):
        return NodeKind.CONTROL
    return NodeKind.OUTPUT


@dataclass(frozen=True)
class DependencyEdge:
    """Directed data dependency: source produces data, target consumes it."""

    source: str
    data: str
    target: str
    category: str

    def __post_init__(self) -> None:
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown edge category: {self.category}")
        if self.source == self.target:
            raise ValueError(f"dependency edge may not be a self loop: {self.source}")
