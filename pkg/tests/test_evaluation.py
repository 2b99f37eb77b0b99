import random

import pytest

from seqdep import (
    DependencyEdge,
    Metrics,
    aggregate_macro,
    compute_metrics,
    evaluate,
    match_edges,
    render_report_table,
    score_usecase,
)

CATEGORIES = ("api", "condition", "action")


def edge(source, data, target, category="api"):
    return DependencyEdge(source=source, data=data, target=target, category=category)


def test_match_is_exact_after_normalization():
    predicted = [edge("m1", "User ID", "m2"), edge("m1", "extra", "m2")]
    gold = [edge("m1", "user_id", "m2"), edge("m1", "missing", "m2")]
    tp, fp, fn = match_edges(predicted, gold)
    assert tp == frozenset({("m1", "user_id", "m2", "api")})
    assert fp == frozenset({("m1", "extra", "m2", "api")})
    assert fn == frozenset({("m1", "missing", "m2", "api")})


def test_wrong_category_counts_twice():
    predicted = [edge("m1", "x", "m2", "api")]
    gold = [edge("m1", "x", "m2", "condition")]
    tp, fp, fn = match_edges(predicted, gold)
    assert not tp and len(fp) == 1 and len(fn) == 1


def test_compute_metrics_known_values():
    m = compute_metrics(8, 2, 4)
    assert m.precision == 0.8
    assert m.recall == pytest.approx(8 / 12)
    assert m.f1 == pytest.approx(2 * 0.8 * (8 / 12) / (0.8 + 8 / 12))
    assert (m.tp, m.fp, m.fn) == (8, 2, 4)
    assert m.applicable


def test_compute_metrics_edge_cases():
    empty = compute_metrics(0, 0, 0)
    assert not empty.applicable
    assert empty.precision == empty.recall == empty.f1 == 0.0
    assert compute_metrics(0, 3, 0).applicable
    with pytest.raises(ValueError):
        compute_metrics(-1, 0, 0)


def test_metrics_bounds_property():
    rng = random.Random(88)
    for _ in range(300):
        tp, fp, fn = rng.randint(0, 20), rng.randint(0, 20), rng.randint(0, 20)
        m = compute_metrics(tp, fp, fn)
        assert 0.0 <= m.precision <= 1.0
        assert 0.0 <= m.recall <= 1.0
        assert min(m.precision, m.recall) - 1e-12 <= m.f1 <= max(m.precision, m.recall) + 1e-12


def test_precision_recall_swap_symmetry():
    # swapping predicted and gold swaps precision and recall
    rng = random.Random(99)
    pool = [
        edge(f"m{i}", f"e{j}", f"t{k}", CATEGORIES[c])
        for i in range(3)
        for j in range(3)
        for k in range(3)
        for c in range(3)
        if f"m{i}" != f"t{k}"
    ]
    for _ in range(50):
        predicted = rng.sample(pool, rng.randint(0, 12))
        gold = rng.sample(pool, rng.randint(1, 12))
        forward = score_usecase(predicted, gold)["overall"]
        backward = score_usecase(gold, predicted)["overall"]
        assert forward.precision == pytest.approx(backward.recall)
        assert forward.recall == pytest.approx(backward.precision)
        assert forward.f1 == pytest.approx(backward.f1)


def test_score_usecase_buckets_by_each_sides_category():
    predicted = [edge("m1", "x", "m2", "api")]
    gold = [edge("m1", "x", "m2", "condition")]
    rows = score_usecase(predicted, gold)
    assert (rows["overall"].tp, rows["overall"].fp, rows["overall"].fn) == (0, 1, 1)
    assert (rows["api"].tp, rows["api"].fp, rows["api"].fn) == (0, 1, 0)
    assert (rows["condition"].tp, rows["condition"].fp, rows["condition"].fn) == (0, 0, 1)
    assert not rows["action"].applicable


def test_perfect_prediction_scores_one():
    gold = [edge("m1", "x", "m2", "api"), edge("@input", "y", "f1", "condition")]
    rows = score_usecase(list(gold), gold)
    for key in ("overall", "api", "condition"):
        m = rows[key]
        assert m.precision == m.recall == m.f1 == 1.0


def test_macro_single_row_is_identity():
    rows = [score_usecase([edge("m1", "x", "m2")], [edge("m1", "x", "m2")])]
    macro = aggregate_macro(rows)
    assert macro["overall"].precision == 1.0
    assert macro["overall"].f1 == 1.0


def test_macro_averages_only_applicable_rows():
    perfect = Metrics(1.0, 1.0, 1.0, tp=4, fp=0, fn=0)
    zero = Metrics(0.0, 0.0, 0.0, tp=0, fp=2, fn=2)
    silent = Metrics(0.0, 0.0, 0.0, applicable=False)
    macro = aggregate_macro([{"overall": perfect, "api": perfect}, {"overall": zero, "api": silent}])
    assert macro["overall"].precision == 0.5
    assert macro["overall"].tp == 4
    # the api column averages over the single applicable row
    assert macro["api"].precision == 1.0
    macro_none = aggregate_macro([{"api": silent}, {"api": silent}])
    assert not macro_none["api"].applicable


def test_macro_rejects_empty_input():
    with pytest.raises(ValueError):
        aggregate_macro([])


def test_evaluate_sorts_usecases_and_averages():
    pairs = {
        "Beta": ([edge("m1", "x", "m2")], [edge("m1", "x", "m2")]),
        "Alpha": ([edge("m1", "x", "m2")], [edge("m1", "y", "m2")]),
    }
    report = evaluate(pairs)
    assert list(report.per_usecase) == ["Alpha", "Beta"]
    assert report.macro["overall"].precision == 0.5
    assert report.macro["overall"].recall == 0.5


def test_render_report_table_shape():
    pairs = {
        "Demo": ([edge("m1", "x", "m2")], [edge("m1", "x", "m2")]),
        "Empty": ([], [edge("f1", "y", "m3", "condition")]),
    }
    report = evaluate(pairs)
    table = render_report_table(report)
    lines = table.splitlines()
    assert "Overall" in lines[0] and "Condition" in lines[0]
    assert lines[1].count("Precision") == 4
    assert lines[-1].startswith("Average")
    demo_line = next(line for line in lines if line.startswith("Demo"))
    assert "100.00" in demo_line
    # categories absent from a use case render as dashes
    empty_line = next(line for line in lines if line.startswith("Empty"))
    assert "-" in empty_line.split()
    assert table.endswith("\n")


def test_render_uses_two_decimal_percentages():
    predicted = [edge("m1", "x", "m2"), edge("m1", "y", "m2"), edge("m1", "z", "m2")]
    gold = predicted[:2] + [edge("m1", "w", "m2")]
    report = evaluate({"Mixed": (predicted, gold)})
    table = render_report_table(report)
    assert "66.67" in table
