import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyberagg.errors import DataError, ValidationError
from cyberagg.labeling import (
    AggressionScores,
    SurveyResponse,
    TrisectionThresholds,
    assign_label,
    fit_thresholds,
    label_cohort,
    read_labels_csv,
    read_survey_csv,
    score_survey,
    write_labels_csv,
    write_survey_csv,
)


def make_response(user_id="u1", se=None, mh=None, gi=None):
    return SurveyResponse(
        user_id=user_id,
        social_exclusion_items=tuple(se or [4] * 10),
        malicious_humour_items=tuple(mh or [4] * 9),
        guilt_induction_items=tuple(gi or [4] * 6),
    )


class TestScoreSurvey:
    def test_constant_items(self):
        scores = score_survey(make_response(se=[7] * 10))
        assert scores.social_exclusion == 7.0

    def test_hand_summed_mean(self):
        scores = score_survey(make_response(se=[1, 2, 3, 4, 5, 6, 7, 1, 2, 3]))
        assert scores.social_exclusion == pytest.approx(3.4, abs=1e-12)

    def test_item_out_of_range_names_index(self):
        with pytest.raises(ValidationError, match="item 3"):
            score_survey(make_response(mh=[4, 4, 8, 4, 4, 4, 4, 4, 4]))

    def test_wrong_item_count(self):
        with pytest.raises(ValidationError, match="10 items"):
            score_survey(make_response(se=[4] * 9))

    def test_cohort_means_recoverable(self, rng):
        # cohort built to have subscale means near the reference profile
        responses = []
        for i in range(200):
            base = rng.normal(2.44, 1.11)
            items = np.clip(np.rint(base + rng.normal(0, 0.4, size=10)), 1, 7)
            responses.append(make_response(f"u{i}", se=[int(v) for v in items]))
        mean = np.mean([score_survey(r).social_exclusion for r in responses])
        assert mean == pytest.approx(2.44, abs=0.25)


class TestFitThresholds:
    def test_reference_breakpoints_social_exclusion(self):
        scores = [2.44 - 1.11, 2.44, 2.44 + 1.11]  # mean 2.44, sample SD 1.11
        th = fit_thresholds(scores, "social_exclusion")
        assert th.lo == pytest.approx(1.88, abs=0.01)
        assert th.hi == pytest.approx(3.00, abs=0.01)

    def test_reference_breakpoints_malicious_humour(self):
        scores = [1.69 - 0.77, 1.69, 1.69 + 0.77]
        th = fit_thresholds(scores, "malicious_humour")
        assert th.lo == pytest.approx(1.30, abs=0.01)
        assert th.hi == pytest.approx(2.08, abs=0.01)

    def test_degenerate_constant_scores(self):
        th = fit_thresholds([3.0, 3.0, 3.0], "guilt_induction")
        assert th.sd == 0.0
        assert th.lo == th.hi == 3.0

    def test_too_few_scores(self):
        with pytest.raises(ValidationError):
            fit_thresholds([2.0], "social_exclusion")

    def test_unknown_target(self):
        with pytest.raises(ValidationError):
            fit_thresholds([1.0, 2.0], "nope")

    def test_sample_sd_convention(self):
        th = fit_thresholds([1.0, 2.0, 3.0, 4.0, 5.0], "social_exclusion")
        assert th.mean == 3.0
        assert th.sd == pytest.approx(math.sqrt(2.5), rel=1e-12)


class TestAssignLabel:
    TH = TrisectionThresholds("social_exclusion", 2.44, 1.11, 1.88, 3.00)

    def test_high(self):
        assert assign_label(3.5, self.TH) == 1

    def test_boundary_is_neutral(self):
        assert assign_label(3.00, self.TH) == 0
        assert assign_label(1.88, self.TH) == 0

    def test_low(self):
        assert assign_label(1.5, self.TH) == -1

    def test_hand_computed_five_scores(self):
        scores = [1.0, 2.0, 3.0, 4.0, 5.0]
        th = fit_thresholds(scores, "social_exclusion")
        assert th.lo == pytest.approx(2.2094, abs=1e-4)
        assert th.hi == pytest.approx(3.7906, abs=1e-4)
        assert [assign_label(s, th) for s in scores] == [-1, -1, 0, 1, 1]


class TestLabelCohort:
    def test_partition_counts(self, rng):
        scores = [
            (f"u{i}", AggressionScores(*(rng.uniform(1, 7, size=3))))
            for i in range(50)
        ]
        _, label_sets, counts = label_cohort(scores)
        for target, c in counts.items():
            assert c["high"] + c["neutral"] + c["low"] == 50

    def test_spread_cohort_hits_all_classes(self, rng):
        values = list(rng.uniform(2.5, 4.5, size=30)) + [1.0, 7.0]
        scores = [(f"u{i}", AggressionScores(v, v, v)) for i, v in enumerate(values)]
        thresholds, label_sets, counts = label_cohort(scores)
        by_user = {ls.user_id: ls.labels["social_exclusion"] for ls in label_sets}
        assert by_user[f"u{len(values) - 2}"] == -1  # score 1.0
        assert by_user[f"u{len(values) - 1}"] == 1   # score 7.0


finite_scores = st.lists(
    st.floats(min_value=1.0, max_value=7.0, allow_nan=False), min_size=2, max_size=60
)


class TestProperties:
    @given(finite_scores)
    @settings(max_examples=200, deadline=None)
    def test_thresholds_exact_and_ordered(self, scores):
        th = fit_thresholds(scores, "social_exclusion")
        assert th.lo == th.mean - th.sd / 2
        assert th.hi == th.mean + th.sd / 2
        assert th.lo <= th.hi
        assert th.hi - th.lo == pytest.approx(th.sd, rel=1e-12, abs=1e-12)

    @given(finite_scores, st.floats(1.0, 7.0), st.floats(1.0, 7.0))
    @settings(max_examples=200, deadline=None)
    def test_monotonicity(self, scores, a, b):
        th = fit_thresholds(scores, "social_exclusion")
        lo_score, hi_score = min(a, b), max(a, b)
        assert assign_label(lo_score, th) <= assign_label(hi_score, th)

    @given(finite_scores)
    @settings(max_examples=200, deadline=None)
    def test_partition(self, scores):
        th = fit_thresholds(scores, "social_exclusion")
        labels = [assign_label(s, th) for s in scores]
        assert len(labels) == len(scores)
        assert set(labels) <= {-1, 0, 1}

    @given(
        finite_scores,
        st.floats(min_value=0.25, max_value=4.0),
        st.floats(min_value=-5.0, max_value=5.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_affine_equivariance(self, scores, a, b):
        th = fit_thresholds(scores, "social_exclusion")
        mapped = [a * s + b for s in scores]
        th2 = fit_thresholds(mapped, "social_exclusion")
        assert th2.lo == pytest.approx(a * th.lo + b, rel=1e-9, abs=1e-9)
        assert th2.hi == pytest.approx(a * th.hi + b, rel=1e-9, abs=1e-9)
        for s, m in zip(scores, mapped):
            # avoid scores so close to a threshold that rounding can flip them
            if min(abs(s - th.lo), abs(s - th.hi)) > 1e-6 * max(1.0, abs(s), abs(a)):
                assert assign_label(s, th) == assign_label(m, th2)


class TestFiles:
    def test_survey_csv_round_trip(self, tmp_path, rng):
        responses = [
            make_response(
                f"u{i}",
                se=[int(v) for v in rng.integers(1, 8, size=10)],
                mh=[int(v) for v in rng.integers(1, 8, size=9)],
                gi=[int(v) for v in rng.integers(1, 8, size=6)],
            )
            for i in range(5)
        ]
        path = tmp_path / "survey.csv"
        write_survey_csv(responses, path)
        assert read_survey_csv(path) == responses

    def test_survey_bad_header(self, tmp_path):
        path = tmp_path / "survey.csv"
        path.write_text("user_id,a,b\nu1,1,2\n")
        with pytest.raises(DataError, match="header"):
            read_survey_csv(path)

    def test_labels_csv_round_trip(self, tmp_path, rng):
        scores = [
            (f"u{i}", AggressionScores(*(rng.uniform(1, 7, size=3))))
            for i in range(10)
        ]
        _, label_sets, _ = label_cohort(scores)
        path = tmp_path / "labels.csv"
        write_labels_csv(label_sets, path)
        assert read_labels_csv(path) == label_sets
