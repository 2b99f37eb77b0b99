"""Scoring of predicted dependency edges against gold annotations.

Edges match on the exact (source, data, target, category) tuple after name
normalization, so a correct triple with the wrong category counts against
both precision and recall. Per-category rows bucket each side by its own
category label. Macro averaging is the arithmetic mean of per-use-case
metrics over the use cases where a category is applicable; a category with
no true positives, false positives, or false negatives is not applicable
and rendered as "-".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .model import CATEGORIES, DependencyEdge, normalize_name

CATEGORY_ROWS = ("overall",) + CATEGORIES

MatchTuple = tuple[str, str, str, str]


@dataclass(frozen=True)
class GoldAnnotation:
    usecase: str
    edges: frozenset[DependencyEdge]


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    tp: int = 0
    fp: int = 0
    fn: int = 0
    applicable: bool = True


def _normalize(edge: DependencyEdge) -> MatchTuple:
    return (
        normalize_name(edge.source),
        normalize_name(edge.data),
        normalize_name(edge.target),
        edge.category,
    )


def match_edges(
    predicted: Iterable[DependencyEdge], gold: Iterable[DependencyEdge]
) -> tuple[frozenset[MatchTuple], frozenset[MatchTuple], frozenset[MatchTuple]]:
    predicted_set = {_normalize(e) for e in predicted}
    gold_set = {_normalize(e) for e in gold}
    return (
        frozenset(predicted_set & gold_set),
        frozenset(predicted_set - gold_set),
        frozenset(gold_set - predicted_set),
    )


def compute_metrics(tp: int, fp: int, fn: int) -> Metrics:
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    applicable = bool(tp or fp or fn)
    return Metrics(precision, recall, f1, tp=tp, fp=fp, fn=fn, applicable=applicable)


def score_usecase(
    predicted: Iterable[DependencyEdge], gold: Iterable[DependencyEdge]
) -> dict[str, Metrics]:
    predicted = list(predicted)
    gold = list(gold)
    rows: dict[str, Metrics] = {}
    for row in CATEGORY_ROWS:
        if row == "overall":
            p, g = predicted, gold
        else:
            p = [e for e in predicted if e.category == row]
            g = [e for e in gold if e.category == row]
        tp, fp, fn = match_edges(p, g)
        rows[row] = compute_metrics(len(tp), len(fp), len(fn))
    return rows


def aggregate_macro(rows: Sequence[Mapping[str, Metrics]]) -> dict[str, Metrics]:
    """Arithmetic mean of each metric over the rows where it applies.

    Works on the metric values as given, whatever their scale, so published
    percentage tables average exactly as printed.
    """
    if not rows:
        raise ValueError("need at least one row to average")
    macro: dict[str, Metrics] = {}
    keys = [k for k in CATEGORY_ROWS if any(k in row for row in rows)]
    for key in keys:
        applicable = [row[key] for row in rows if key in row and row[key].applicable]
        if not applicable:
            macro[key] = Metrics(0.0, 0.0, 0.0, applicable=False)
            continue
        n = len(applicable)
        macro[key] = Metrics(
            precision=sum(m.precision for m in applicable) / n,
            recall=sum(m.recall for m in applicable) / n,
            f1=sum(m.f1 for m in applicable) / n,
            tp=sum(m.tp for m in applicable),
            fp=sum(m.fp for m in applicable),
            fn=sum(m.fn for m in applicable),
        )
    return macro


@dataclass(frozen=True)
class EvaluationReport:
    per_usecase: dict[str, dict[str, Metrics]]
    macro: dict[str, Metrics]


def evaluate(
    pairs: Mapping[str, tuple[Iterable[DependencyEdge], Iterable[DependencyEdge]]]
) -> EvaluationReport:
    """Score (predicted, gold) edge sets per use case and macro-average them."""
    per_usecase = {name: score_usecase(*pairs[name]) for name in sorted(pairs)}
    macro = aggregate_macro(list(per_usecase.values()))
    return EvaluationReport(per_usecase=per_usecase, macro=macro)


def _cell(metrics: Metrics, attr: str) -> str:
    if not metrics.applicable:
        return "-"
    return f"{getattr(metrics, attr) * 100:.2f}"


def render_report_table(report: EvaluationReport) -> str:
    names = list(report.per_usecase) + ["Average"]
    name_width = max(len("Use Case"), *(len(n) for n in names))
    cell_width = 11

    def fmt_row(name: str, cells: list[str]) -> str:
        return name.ljust(name_width) + "".join(c.rjust(cell_width) for c in cells)

    titles = {"overall": "Overall", "api": "API", "condition": "Condition", "action": "Action"}
    group_header = "".join(titles[row].center(cell_width * 3) for row in CATEGORY_ROWS)
    lines = [
        " " * name_width + group_header,
        fmt_row("Use Case", ["Precision", "Recall", "F1"] * len(CATEGORY_ROWS)),
    ]
    lines.append("-" * (name_width + cell_width * 3 * len(CATEGORY_ROWS)))
    for name, rows in report.per_usecase.items():
        cells = [
            _cell(rows[key], attr)
            for key in CATEGORY_ROWS
            for attr in ("precision", "recall", "f1")
        ]
        lines.append(fmt_row(name, cells))
    macro_cells = [
        _cell(report.macro[key], attr)
        for key in CATEGORY_ROWS
        for attr in ("precision", "recall", "f1")
    ]
    lines.append(fmt_row("Average", macro_cells))
    return "\n".join(lines) + "\n"
