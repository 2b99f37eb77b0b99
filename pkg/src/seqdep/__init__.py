"""Dependency analysis over enhanced UML sequence diagrams.

Parse diagram files with decision tables and API specifications, build
execution dependency graphs, prune inference context to reachable
predecessors, infer and validate data dependency edges (rule engine or a
model transport), and score predictions with per-category precision,
recall, and F1.
"""

from .corpus import CorpusEntry, CorpusParams, gen_corpus, random_document, random_usecase, write_corpus
from .edg import ExecutionDependencyGraph, build_edg, document_order
from .engine import (
    DataDependencyGraph,
    EdgeConstraintError,
    EntityOccurrence,
    check_type_compatibility,
    classify_edge_category,
    data_consumed,
    data_produced,
    infer_all,
    infer_rule_based,
    inference_targets,
    validate_ddg,
)
from .evaluation import (
    EvaluationReport,
    GoldAnnotation,
    Metrics,
    aggregate_macro,
    compute_metrics,
    evaluate,
    match_edges,
    render_report_table,
    score_usecase,
)
from .llm import (
    LlmParams,
    PROMPT_HEADINGS,
    PromptBuildError,
    PromptDocument,
    RemoteTransport,
    ReplayTransport,
    StubTransport,
    TransportError,
    build_prompt,
    infer_with_llm,
    parse_response,
    save_replay_response,
)
from .model import (
    ApiSpec,
    Branch,
    DecisionTable,
    DependencyEdge,
    Diagnostic,
    Document,
    Field,
    Fragment,
    INPUT_NODE,
    Message,
    NodeKind,
    ReturnMessage,
    Rule,
    UseCase,
    make_diagnostic,
    node_kind,
    normalize_name,
    walk_elements,
)
from .parser import EsdParseError, ParseError, check_design_rules, parse_document, serialize_document
from .reachability import (
    OracleBudgetError,
    PredecessorSet,
    context_reduction_ratio,
    enumerate_execution_paths,
    oracle_predecessor_map,
    oracle_reachable_predecessors,
    reachable_predecessors,
)
from .wire import (
    SCHEMA_VERSION,
    canonical_json,
    ddg_to_json,
    document_to_json,
    edg_to_json,
    edge_from_json,
    edge_to_json,
    edges_to_json,
    export_graph,
    gold_from_json,
    gold_to_json,
    metrics_to_json,
    prune_to_json,
    report_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "ApiSpec",
    "Branch",
    "CorpusEntry",
    "CorpusParams",
    "DataDependencyGraph",
    "DecisionTable",
    "DependencyEdge",
    "Diagnostic",
    "Document",
    "EdgeConstraintError",
    "EntityOccurrence",
    "EsdParseError",
    "EvaluationReport",
    "ExecutionDependencyGraph",
    "Field",
    "Fragment",
    "GoldAnnotation",
    "INPUT_NODE",
    "LlmParams",
    "Message",
    "Metrics",
    "NodeKind",
    "OracleBudgetError",
    "PROMPT_HEADINGS",
    "ParseError",
    "PredecessorSet",
    "PromptBuildError",
    "PromptDocument",
    "RemoteTransport",
    "ReplayTransport",
    "ReturnMessage",
    "Rule",
    "SCHEMA_VERSION",
    "StubTransport",
    "TransportError",
    "UseCase",
    "aggregate_macro",
    "build_edg",
    "build_prompt",
    "canonical_json",
    "check_design_rules",
    "check_type_compatibility",
    "classify_edge_category",
    "compute_metrics",
    "context_reduction_ratio",
    "data_consumed",
    "data_produced",
    "ddg_to_json",
    "document_order",
    "document_to_json",
    "edg_to_json",
    "edge_from_json",
    "edge_to_json",
    "edges_to_json",
    "enumerate_execution_paths",
    "evaluate",
    "export_graph",
    "gen_corpus",
    "gold_from_json",
    "gold_to_json",
    "infer_all",
    "infer_rule_based",
    "infer_with_llm",
    "inference_targets",
    "make_diagnostic",
    "match_edges",
    "metrics_to_json",
    "node_kind",
    "normalize_name",
    "oracle_predecessor_map",
    "oracle_reachable_predecessors",
    "parse_document",
    "parse_response",
    "prune_to_json",
    "random_document",
    "random_usecase",
    "reachable_predecessors",
    "render_report_table",
    "report_to_json",
    "save_replay_response",
    "score_usecase",
    "serialize_document",
    "validate_ddg",
    "walk_elements",
    "write_corpus",
]
