"""Confusion counts, per-class and macro metrics, report rendering."""

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fatiguenet as fn

# rounded reference values for three fixed confusion matrices, checked by
# hand from the raw counts; tests accept them within half a rounding unit
EYE_BASELINE = fn.ConfusionMatrix2(((455, 15), (33, 459)))
EYE_AUGMENTED = fn.ConfusionMatrix2(((424, 46), (21, 471)))
FACE_HOLDOUT = fn.ConfusionMatrix2(((223, 16), (19, 227)))


class TestConfusion:
    def test_small_example(self):
        cm = fn.confusion(np.array([0, 0, 1]), np.array([0, 1, 1]))
        assert cm.counts == ((1, 1), (0, 1))
        assert cm.total == 3

    def test_perfect_predictions_fill_diagonal(self):
        labels = np.array([0, 1, 1, 0, 1])
        cm = fn.confusion(labels, labels)
        assert cm.counts == ((2, 0), (0, 3))

    def test_synthetic_stream_rebuilds_counts(self):
        target = EYE_BASELINE
        labels, preds = [], []
        for t in (0, 1):
            for p in (0, 1):
                n = target.counts[t][p]
                labels += [t] * n
                preds += [p] * n
        cm = fn.confusion(np.array(labels), np.array(preds))
        assert cm.counts == target.counts
        assert cm.total == 962

    def test_rows_are_true_columns_predicted(self):
        cm = fn.confusion(np.array([0]), np.array([1]))
        assert cm.row(0) == (0, 1)
        assert cm.col(1) == (1, 0)

    def test_label_validation(self):
        with pytest.raises(fn.InvalidLabelError):
            fn.confusion(np.array([0, 2]), np.array([0, 1]))
        with pytest.raises(fn.InvalidLabelError):
            fn.confusion(np.array([0, 1]), np.array([0, -1]))
        with pytest.raises(fn.ShapeError):
            fn.confusion(np.array([0, 1]), np.array([0]))
        with pytest.raises(fn.ShapeError):
            fn.confusion(np.array([]), np.array([]))

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            fn.ConfusionMatrix2(((1, -1), (0, 1)))


class TestPerClassMetrics:
    def test_eye_baseline_exact_ratios(self):
        c0, c1 = fn.per_class_metrics(EYE_BASELINE)
        assert c0.accuracy == c1.accuracy == (455 + 459) / 962
        assert c0.precision == 455 / (455 + 33)
        assert c0.recall == 455 / (455 + 15)
        assert c0.f1 == 2 * c0.precision * c0.recall / (c0.precision + c0.recall)
        assert c0.support == 470 and c1.support == 492
        assert c1.precision == 459 / (459 + 15)
        assert c1.recall == 459 / (459 + 33)
        assert not c0.degenerate and not c1.degenerate

    @pytest.mark.parametrize("cm,rounded", [
        # (accuracy, precision0, recall0, precision1, recall1)
        (EYE_BASELINE, (0.9501, 0.9324, 0.9681, 0.9684, 0.9329)),
        (EYE_AUGMENTED, (0.9311, 0.9528, 0.9021, 0.9110, 0.9573)),
        (FACE_HOLDOUT, (0.9278, 0.9215, 0.9331, 0.9342, 0.9228)),
    ])
    def test_rounded_reference_values(self, cm, rounded):
        c0, c1 = fn.per_class_metrics(cm)
        acc, p0, r0, p1, r1 = rounded
        assert abs(c0.accuracy - acc) <= 0.005
        assert abs(c0.precision - p0) <= 0.005
        assert abs(c0.recall - r0) <= 0.005
        assert abs(c1.precision - p1) <= 0.005
        assert abs(c1.recall - r1) <= 0.005

    def test_diagonal_matrix_scores_one(self):
        c0, c1 = fn.per_class_metrics(fn.ConfusionMatrix2(((7, 0), (0, 9))))
        for m in (c0, c1):
            assert m.accuracy == m.precision == m.recall == m.f1 == 1.0
            assert not m.degenerate

    def test_degenerate_precision_flagged(self):
        # nothing predicted as class 1: precision1 has a zero denominator
        c0, c1 = fn.per_class_metrics(fn.ConfusionMatrix2(((5, 0), (3, 0))))
        assert c1.precision == 0.0 and c1.degenerate
        assert c1.recall == 0.0  # 0 / 3
        assert c1.f1 == 0.0

    def test_degenerate_recall_flagged(self):
        # no true class-1 samples at all
        c0, c1 = fn.per_class_metrics(fn.ConfusionMatrix2(((5, 2), (0, 0))))
        assert c1.support == 0
        assert c1.degenerate
        assert c1.recall == 0.0

    def test_all_wrong(self):
        c0, c1 = fn.per_class_metrics(fn.ConfusionMatrix2(((0, 4), (6, 0))))
        assert c0.accuracy == 0.0
        assert c0.precision == c0.recall == c0.f1 == 0.0
        assert c0.degenerate  # f1 denominator collapses


class TestMacroMetrics:
    def test_eye_baseline_macro_precision(self):
        macro = fn.macro_metrics(EYE_BASELINE)
        expected = (455 / 488 + 459 / 474) / 2
        assert macro.precision == expected
        assert abs(macro.precision - 0.9504) <= 0.005
        assert macro.support == 962

    def test_macro_is_unweighted_mean(self):
        cm = fn.ConfusionMatrix2(((90, 10), (1, 1)))
        c0, c1 = fn.per_class_metrics(cm)
        macro = fn.macro_metrics(cm)
        assert macro.recall == (c0.recall + c1.recall) / 2
        assert macro.f1 == (c0.f1 + c1.f1) / 2

    def test_diagonal_scores_one(self):
        macro = fn.macro_metrics(fn.ConfusionMatrix2(((3, 0), (0, 3))))
        assert macro.precision == macro.recall == macro.f1 == 1.0

    @given(st.integers(1, 500), st.integers(0, 500))
    @settings(max_examples=50, deadline=None)
    def test_symmetric_matrix_symmetric_metrics(self, diag, off):
        cm = fn.ConfusionMatrix2(((diag, off), (off, diag)))
        c0, c1 = fn.per_class_metrics(cm)
        assert c0.precision == c1.precision
        assert c0.recall == c1.recall
        assert c0.f1 == c1.f1
        macro = fn.macro_metrics(cm)
        assert macro.precision == c0.precision


class TestReports:
    def test_text_contains_rounded_values_and_counts(self):
        text, _ = fn.classification_report(EYE_BASELINE)
        for token in ("0 (closed)", "1 (open)", "macro",
                      "0.95", "0.93", "0.97", "470", "492",
                      "455", "15", "33", "459"):
            assert token in text

    def test_csv_parses_back_to_six_sig_digits(self):
        _, csv = fn.classification_report(EYE_BASELINE)
        block = csv.split("\n\n")[0].splitlines()
        assert block[0] == "class,accuracy,precision,recall,f1,support"
        c0, c1 = fn.per_class_metrics(EYE_BASELINE)
        macro = fn.macro_metrics(EYE_BASELINE)
        for line, m in zip(block[1:], (c0, c1, macro)):
            cells = line.split(",")
            assert float(cells[1]) == float(f"{m.accuracy:.6g}")
            assert float(cells[2]) == float(f"{m.precision:.6g}")
            assert float(cells[3]) == float(f"{m.recall:.6g}")
            assert float(cells[4]) == float(f"{m.f1:.6g}")
            assert int(cells[5]) == m.support

    def test_csv_confusion_block(self):
        _, csv = fn.classification_report(EYE_BASELINE)
        tail = csv.split("\n\n")[1].splitlines()
        assert tail == ["true\\pred,0,1", "0,455,15", "1,33,459"]

    def test_lf_endings_only(self):
        text, csv = fn.classification_report(EYE_BASELINE)
        assert "\r" not in text and "\r" not in csv
        assert text.endswith("\n") and csv.endswith("\n")


class TestCurveExport:
    def make_records(self, n):
        return [
            fn.EpochRecord(epoch=i + 1, train_loss=0.5 / (i + 1),
                           train_acc=0.5 + 0.01 * i, test_loss=0.6 / (i + 1),
                           test_acc=0.5 + 0.009 * i)
            for i in range(n)
        ]

    def test_forty_epochs_give_forty_one_lines(self):
        out = fn.curve_export(self.make_records(40))
        lines = out.splitlines()
        assert len(lines) == 41
        assert lines[0] == "epoch,train_loss,train_acc,test_loss,test_acc"
        assert "\r" not in out and out.endswith("\n")

    def test_roundtrip_at_six_sig_digits(self):
        records = self.make_records(3)
        lines = fn.curve_export(records).splitlines()[1:]
        for line, r in zip(lines, records):
            cells = line.split(",")
            assert int(cells[0]) == r.epoch
            assert float(cells[1]) == float(f"{r.train_loss:.6g}")
            assert float(cells[4]) == float(f"{r.test_acc:.6g}")

    def test_empty_records(self):
        assert fn.curve_export([]) == "epoch,train_loss,train_acc,test_loss,test_acc\n"
