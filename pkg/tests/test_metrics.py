"""Evaluation metrics against hand-computed confusion fixtures."""

from __future__ import annotations

from random import Random

import pytest

from atc_icl.corpus import LABELS, Label
from atc_icl.ensemble import PredictionRecord
from atc_icl.metrics import (
    ConfusionMatrix,
    EmptyEvaluation,
    LengthMismatch,
    MissingEssay,
    SplitViolation,
    aggregate_runs,
    evaluate,
    render_report,
)

MC, C, P = Label.MAJOR_CLAIM, Label.CLAIM, Label.PREMISE


def naive_class_metrics(pred, gold, label):
    """Independent oracle with plain loops, no confusion matrix."""
    tp = sum(1 for p, g in zip(pred, gold) if p is label and g is label)
    predicted = sum(1 for p in pred if p is label)
    actual = sum(1 for g in gold if g is label)
    precision = tp / predicted if predicted else 0.0
    recall = tp / actual if actual else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


# Five fixed fixtures, hand-computed.
FIXTURES = [
    # (gold, pred, expected per-class F1 in MC/C/P order, expected macro)
    ([MC, C, P, MC, C, P], [MC, C, P, MC, C, P], (1.0, 1.0, 1.0), 1.0),
    ([MC, MC, C, C, P, P, P, P], [P] * 8, (0.0, 0.0, 2 / 3), 2 / 9),
    ([MC, MC, C, P], [MC, C, C, P], (2 / 3, 2 / 3, 1.0), 7 / 9),
    ([C, C, P, P], [MC, C, P, P], (0.0, 2 / 3, 1.0), 5 / 9),
    ([MC, C, P], [C, P, MC], (0.0, 0.0, 0.0), 0.0),
    ([P], [P], (0.0, 0.0, 1.0), 1 / 3),
]


@pytest.mark.parametrize("gold,pred,f1s,macro", FIXTURES)
def test_evaluate_matches_hand_computed_fixtures(gold, pred, f1s, macro):
    report = evaluate(pred, gold)
    for label, expected in zip(LABELS, f1s):
        assert report.per_label[label].f1 == pytest.approx(expected, abs=1e-9)
    assert report.macro_f1 == pytest.approx(macro, abs=1e-9)


def test_all_premise_macro_value():
    report = evaluate([P] * 8, [MC, MC, C, C, P, P, P, P])
    assert report.per_label[P].f1 == pytest.approx(0.6667, abs=1e-4)
    assert report.macro_f1 == pytest.approx(0.2222, abs=1e-4)


def test_evaluate_agrees_with_naive_oracle_on_random_pairs():
    rng = Random(99)
    for _ in range(50):
        size = rng.randint(1, 60)
        gold = [rng.choice(LABELS) for _ in range(size)]
        pred = [rng.choice(LABELS) for _ in range(size)]
        report = evaluate(pred, gold)
        for label in LABELS:
            precision, recall, f1 = naive_class_metrics(pred, gold, label)
            assert report.per_label[label].precision == pytest.approx(precision, abs=1e-12)
            assert report.per_label[label].recall == pytest.approx(recall, abs=1e-12)
            assert report.per_label[label].f1 == pytest.approx(f1, abs=1e-12)


def test_evaluate_errors():
    with pytest.raises(LengthMismatch):
        evaluate([P], [P, C])
    with pytest.raises(EmptyEvaluation):
        evaluate([], [])


def test_permutation_equivariance_100_shuffles():
    rng = Random(7)
    gold = [rng.choice(LABELS) for _ in range(40)]
    pred = [rng.choice(LABELS) for _ in range(40)]
    baseline = evaluate(pred, gold)
    for _ in range(100):
        order = list(range(len(gold)))
        rng.shuffle(order)
        report = evaluate([pred[i] for i in order], [gold[i] for i in order])
        assert report.macro_f1 == pytest.approx(baseline.macro_f1, abs=1e-12)
        for label in LABELS:
            assert report.per_label[label].f1 == pytest.approx(
                baseline.per_label[label].f1, abs=1e-12
            )


def test_macro_bounded_by_class_f1s():
    rng = Random(31)
    for _ in range(30):
        size = rng.randint(1, 30)
        gold = [rng.choice(LABELS) for _ in range(size)]
        pred = [rng.choice(LABELS) for _ in range(size)]
        report = evaluate(pred, gold)
        f1s = [report.per_label[label].f1 for label in LABELS]
        assert min(f1s) - 1e-12 <= report.macro_f1 <= max(f1s) + 1e-12


def test_confusion_matrix_marginals():
    gold = [MC, MC, C, P, P, P]
    pred = [MC, C, C, P, MC, P]
    cm = ConfusionMatrix.from_pairs(gold, pred)
    assert cm.total == 6
    assert [cm.support(label) for label in LABELS] == [2, 1, 3]
    assert [cm.predicted_count(label) for label in LABELS] == [2, 2, 2]
    assert sum(cm.support(label) for label in LABELS) == cm.total


def record_for(essay, labels=None):
    final = tuple(labels if labels is not None else [c.gold_label for c in essay.components])
    return PredictionRecord(
        essay_id=essay.essay_id,
        rounds=(final,),
        final=final,
        vote_counts=tuple({label.value: 1} for label in final),
        selections=(),
    )


def test_aggregate_runs_concatenation_oracle(small_corpus):
    test_essays = small_corpus.test_essays()
    rng = Random(5)
    records, preds, golds = [], [], []
    for essay in test_essays:
        predicted = [rng.choice(LABELS) for _ in essay.components]
        records.append(record_for(essay, predicted))
        preds.extend(predicted)
        golds.extend(c.gold_label for c in essay.components)
    combined = aggregate_runs(records, small_corpus)
    direct = evaluate(preds, golds)
    assert combined.macro_f1 == pytest.approx(direct.macro_f1, abs=1e-12)
    assert combined.confusion == direct.confusion


def test_aggregate_runs_gold_echo_is_perfect(small_corpus):
    records = [record_for(essay) for essay in small_corpus.test_essays()]
    report = aggregate_runs(records, small_corpus)
    assert report.macro_f1 == 1.0


def test_aggregate_runs_split_violation(small_corpus):
    train_essay = small_corpus.train_essays()[0]
    with pytest.raises(SplitViolation):
        aggregate_runs([record_for(train_essay)], small_corpus)


def test_aggregate_runs_missing_essay(small_corpus):
    essay = small_corpus.test_essays()[0]
    record = record_for(essay)
    ghost = PredictionRecord(
        essay_id="essay999",
        rounds=record.rounds,
        final=record.final,
        vote_counts=record.vote_counts,
        selections=(),
    )
    with pytest.raises(MissingEssay):
        aggregate_runs([ghost], small_corpus)


def test_aggregate_runs_length_mismatch(small_corpus):
    essay = small_corpus.test_essays()[0]
    with pytest.raises(LengthMismatch):
        aggregate_runs([record_for(essay, [P])], small_corpus)


def test_render_report_column_order():
    report = evaluate([MC, C, P], [MC, C, P], run_label="info + essay + 5NN + 5Ens")
    text = render_report(report)
    header, row = text.splitlines()[0], text.splitlines()[1]
    assert header.split() == ["Run", "MC", "C", "P", "F1"]
    assert "info + essay + 5NN + 5Ens" in row
