import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feedbackclf.metrics import EvalReport, accuracy, fbeta, micro_scores

LABELS = ("neutral", "negative", "positive")


def direct_f(p, r, beta):
    return ((beta ** 2 + 1) * p * r) / (beta ** 2 * p + r)


class TestFbeta:
    def test_known_value(self):
        assert fbeta(0.8, 0.6) == pytest.approx(0.6857142857142857, abs=1e-12)

    def test_zero_denominator(self):
        assert fbeta(0.0, 0.0) == 0.0

    @given(st.floats(0.001, 1), st.floats(0.001, 1), st.floats(0.1, 5))
    def test_matches_direct_formula(self, p, r, beta):
        assert abs(fbeta(p, r, beta) - direct_f(p, r, beta)) <= 1e-12

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_bounded_by_min_and_max(self, p, r):
        f = fbeta(p, r)
        assert min(p, r) - 1e-12 <= f <= max(p, r) + 1e-12 or f == 0.0


class TestMicro:
    def test_half_correct(self):
        rep = micro_scores(["neutral", "neutral", "negative", "positive"],
                           ["neutral", "negative", "negative", "neutral"], LABELS)
        assert rep.micro_f1 == 0.5
        assert rep.micro_precision == rep.micro_recall == 0.5

    def test_perfect(self):
        rep = micro_scores(list(LABELS), list(LABELS), LABELS)
        assert rep.micro_f1 == 1.0
        np.testing.assert_array_equal(rep.confusion, np.eye(3, dtype=int))

    @given(st.lists(st.tuples(st.sampled_from(LABELS), st.sampled_from(LABELS)), min_size=1, max_size=200))
    @settings(max_examples=200)
    def test_micro_f1_equals_accuracy(self, pairs):
        preds, golds = map(list, zip(*pairs))
        rep = micro_scores(preds, golds, LABELS)
        assert rep.micro_f1 == accuracy(preds, golds)
        assert rep.n == len(pairs)

    def test_confusion_orientation(self):
        rep = micro_scores(["negative"], ["neutral"], LABELS)
        assert rep.confusion[0, 1] == 1  # gold row, predicted column

    def test_per_class(self):
        rep = micro_scores(["neutral", "neutral"], ["neutral", "negative"], LABELS)
        pc = rep.per_class
        assert pc["neutral"]["precision"] == 0.5 and pc["neutral"]["recall"] == 1.0
        assert pc["positive"] == {"precision": 0.0, "recall": 0.0, "f1": 0.0}

    def test_degenerate_empty_confusion(self):
        rep = EvalReport(LABELS, np.zeros((3, 3), dtype=int))
        assert rep.degenerate and rep.micro_f1 == 0.0

    @pytest.mark.parametrize("preds, golds", [([], []), (["neutral"], []), (["x"], ["neutral"])])
    def test_errors(self, preds, golds):
        with pytest.raises(ValueError):
            micro_scores(preds, golds, LABELS)

    def test_as_dict(self):
        d = micro_scores(["neutral"], ["neutral"], LABELS).as_dict()
        assert d["micro_f1"] == 1.0 and d["labels"] == list(LABELS)
