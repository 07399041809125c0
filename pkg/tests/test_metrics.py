"""Detection/diagnosis tally and metric algebra tests."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phonemdd import (
    MddTally,
    ValidationError,
    aggregate,
    classify_positions,
    compute_metrics,
    format_percent,
    sum_tallies,
)
from phonemdd.metrics import report_text, report_to_dict, tally_to_dict


class TestClassifyPositions:
    def test_worked_example(self):
        canonical = ["ae", "d", "v", "ay", "s"]
        annotated = ["ae", "t", "v", "ey", "sh"]
        predicted = ["ae", "d", "f", "ey", "z"]
        tally = classify_positions(canonical, annotated, predicted)
        assert (tally.ta, tally.fa, tally.fr) == (1, 1, 1)
        assert tally.tr == 2 and (tally.cd, tally.de) == (1, 1)
        assert (tally.subs, tally.dels, tally.ins, tally.n_ann) == (3, 0, 0, 5)

    def test_all_identical_is_pure_true_acceptance(self):
        seq = [1, 2, 3, 4]
        tally = classify_positions(seq, seq, seq)
        assert tally.ta == 4
        assert (tally.fa, tally.fr, tally.cd, tally.de) == (0, 0, 0, 0)

    def test_shared_substitution_is_correct_diagnosis(self):
        tally = classify_positions([1, 2], [1, 9], [1, 9])
        assert tally.ta == 1 and tally.cd == 1 and tally.de == 0

    def test_deletion_counts_against_canonical(self):
        # annotated deleted position 1; prediction said canonical -> FA
        tally = classify_positions([1, 2], [1], [1, 2])
        assert tally.ta == 1 and tally.fa == 1

    def test_two_absences_compare_equal(self):
        # both annotated and predicted drop canonical position 1 -> TR/CD
        tally = classify_positions([1, 2], [1], [1])
        assert tally.ta == 1 and tally.cd == 1 and tally.de == 0

    def test_annotated_deletion_predicted_substitution_is_diagnosis_error(self):
        tally = classify_positions([1, 2], [1], [1, 3])
        assert tally.ta == 1 and tally.de == 1

    def test_predicted_insertions_do_not_enter_tally(self):
        tally = classify_positions([1, 2], [1, 2], [1, 3, 3, 3, 2])
        assert tally.ta == 2
        assert (tally.fa, tally.fr, tally.cd, tally.de) == (0, 0, 0, 0)
        assert tally.ins == 3  # they do count toward the error rate

    def test_every_canonical_position_classified_once(self):
        canonical = [1, 2, 3, 4, 5, 1, 2]
        tally = classify_positions(canonical, [1, 3, 3, 5, 1], [2, 2, 3, 1, 4, 1, 2, 9])
        assert tally.ta + tally.fa + tally.fr + tally.tr == len(canonical)

    def test_empty_sequences(self):
        tally = classify_positions([], [], [])
        assert tally == MddTally()


class TestComputeMetrics:
    def test_metric_algebra_on_uniform_tally(self):
        report = compute_metrics(MddTally(ta=1, fa=1, fr=1, cd=1, de=1))
        assert report.frr == pytest.approx(50.0)
        assert report.far == pytest.approx(100 / 3)
        assert report.pre == pytest.approx(200 / 3)
        assert report.rec == pytest.approx(200 / 3)
        assert report.f1 == pytest.approx(200 / 3)
        assert report.der == pytest.approx(50.0)
        assert report.da == pytest.approx(60.0)

    def test_perfect_system(self):
        report = compute_metrics(MddTally(ta=7, cd=3))
        assert report.frr == 0.0
        assert report.far == 0.0
        assert report.f1 == pytest.approx(100.0)
        assert report.da == pytest.approx(100.0)
        assert report.der == 0.0

    def test_per_and_cor_from_edit_counts(self):
        report = compute_metrics(MddTally(subs=3, dels=0, ins=0, n_ann=5))
        assert report.per == pytest.approx(60.0)
        assert report.cor == pytest.approx(40.0)

    def test_per_can_exceed_100(self):
        report = compute_metrics(MddTally(subs=1, dels=1, ins=8, n_ann=4))
        assert report.per == pytest.approx(250.0)
        assert report.cor == pytest.approx(50.0)

    def test_zero_denominators_are_undefined(self):
        report = compute_metrics(MddTally())
        assert report.frr is None
        assert report.far is None
        assert report.der is None
        assert report.da is None
        assert report.pre is None
        assert report.rec is None
        assert report.f1 is None
        assert report.per is None
        assert report.cor is None

    def test_cor_is_insertion_insensitive(self):
        with_ins = compute_metrics(MddTally(subs=2, dels=1, ins=50, n_ann=10))
        without = compute_metrics(MddTally(subs=2, dels=1, ins=0, n_ann=10))
        assert with_ins.cor == without.cor

    def test_negative_counts_rejected(self):
        with pytest.raises(ValidationError):
            MddTally(ta=-1)


class TestAggregate:
    def test_single_tally_equals_compute_metrics(self):
        tally = MddTally(ta=3, fa=1, fr=2, cd=2, de=1, subs=1, n_ann=9)
        assert aggregate([tally]) == compute_metrics(tally)

    def test_scaling_invariance(self):
        tally = MddTally(ta=3, fa=1, fr=2, cd=2, de=1, subs=1, n_ann=9)
        assert aggregate([tally, tally]) == compute_metrics(tally)

    def test_summed_counts(self):
        report = aggregate([MddTally(ta=1), MddTally(fr=1)])
        assert report.frr == pytest.approx(50.0)

    def test_empty_input_rejected(self):
        with pytest.raises(ValidationError, match="zero tallies"):
            aggregate([])

    @given(st.lists(st.tuples(*[st.integers(0, 6)] * 5), min_size=2, max_size=8))
    @settings(max_examples=200, deadline=None)
    def test_sharding_invariance(self, rows):
        tallies = [MddTally(ta=a, fa=b, fr=c, cd=d, de=e) for a, b, c, d, e in rows]
        whole = aggregate(tallies)
        split = len(tallies) // 2
        merged = sum_tallies([sum_tallies(tallies[:split] or [MddTally()]),
                              sum_tallies(tallies[split:])])
        assert compute_metrics(merged) == whole


@given(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20), st.integers(0, 20),
       st.integers(0, 20))
@settings(max_examples=300, deadline=None)
def test_f1_between_precision_and_recall(ta, fa, fr, cd, de):
    report = compute_metrics(MddTally(ta=ta, fa=fa, fr=fr, cd=cd, de=de))
    if report.f1 is not None:
        assert min(report.pre, report.rec) - 1e-9 <= report.f1 <= max(report.pre, report.rec) + 1e-9


class TestFormatting:
    def test_two_decimals_half_even(self):
        assert format_percent(100 / 3) == "33.33"
        assert format_percent(200 / 3) == "66.67"
        assert format_percent(0.0) == "0.00"

    def test_undefined_distinct_from_zero(self):
        assert format_percent(None) == "undefined"

    def test_report_text_flat_keys(self):
        tally = MddTally(ta=1, fa=1, fr=1, cd=1, de=1)
        text = report_text(compute_metrics(tally), tally)
        assert "FRR: 50.00" in text
        assert "FAR: 33.33" in text
        assert "F1: 66.67" in text
        assert "tr: 2" in text

    def test_dict_round_trip_keys(self):
        tally = MddTally(ta=1, fa=1, fr=1, cd=1, de=1, subs=1, dels=2, ins=3, n_ann=6)
        assert set(report_to_dict(compute_metrics(tally))) == {
            "frr", "far", "der", "pre", "rec", "f1", "da", "per", "cor"
        }
        d = tally_to_dict(tally)
        assert d["tr"] == 2 and d["n_ann"] == 6
