"""Survey scoring and trisection labeling.

Each of the three indirect-aggression subscales (social exclusion, malicious
humour, guilt induction) is scored as the plain mean of its 7-point Likert
items.  A cohort is then trisected per target at mean +/- SD/2: scores above
the upper threshold are labeled +1 (high), below the lower threshold -1
(low), and anything on or between the thresholds 0 (neutral).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

from .errors import DataError, ValidationError

TARGETS = ("social_exclusion", "malicious_humour", "guilt_induction")
TARGET_CODES = {"social_exclusion": "se", "malicious_humour": "mh", "guilt_induction": "gi"}
ITEM_COUNTS = {"social_exclusion": 10, "malicious_humour": 9, "guilt_induction": 6}


@dataclass(frozen=True)
class SurveyResponse:
    user_id: str
    social_exclusion_items: tuple[int, ...]
    malicious_humour_items: tuple[int, ...]
    guilt_induction_items: tuple[int, ...]

    def items_for(self, target: str) -> tuple[int, ...]:
        return getattr(self, f"{target}_items")

    def validate(self) -> None:
        for target in TARGETS:
            items = self.items_for(target)
            expected = ITEM_COUNTS[target]
            if len(items) != expected:
                raise ValidationError(
                    f"user {self.user_id!r}: {target} needs {expected} items, got {len(items)}"
                )
            for idx, value in enumerate(items, start=1):
                if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 7:
                    raise ValidationError(
                        f"user {self.user_id!r}: {target} item {idx} out of [1,7]: {value!r}"
                    )


@dataclass(frozen=True)
class AggressionScores:
    social_exclusion: float
    malicious_humour: float
    guilt_induction: float

    def score_for(self, target: str) -> float:
        return getattr(self, target)


@dataclass(frozen=True)
class TrisectionThresholds:
    target: str
    mean: float
    sd: float
    lo: float
    hi: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "sd": self.sd, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class LabelSet:
    user_id: str
    labels: dict[str, int]  # target -> {-1, 0, +1}


def score_survey(resp: SurveyResponse) -> AggressionScores:
    """Mean of each subscale's items, unrounded."""
    resp.validate()
    return AggressionScores(
        **{target: math.fsum(resp.items_for(target)) / ITEM_COUNTS[target] for target in TARGETS}
    )


def fit_thresholds(scores: list[float], target: str) -> TrisectionThresholds:
    """Cohort mean and sample SD (n-1 denominator) -> mean +/- SD/2 cut points."""
    if target not in TARGETS:
        raise ValidationError(f"unknown target {target!r}")
    n = len(scores)
    if n < 2:
        raise ValidationError(f"need >= 2 scores to fit thresholds, got {n}")
    mean = math.fsum(scores) / n
    var = math.fsum((s - mean) ** 2 for s in scores) / (n - 1)
    sd = math.sqrt(var)
    half = sd / 2
    return TrisectionThresholds(target=target, mean=mean, sd=sd, lo=mean - half, hi=mean + half)


def assign_label(score: float, th: TrisectionThresholds) -> int:
    """+1 above hi, -1 below lo, 0 on or between the thresholds."""
    if score > th.hi:
        return 1
    if score < th.lo:
        return -1
    return 0


def label_cohort(
    scores: list[tuple[str, AggressionScores]],
) -> tuple[dict[str, TrisectionThresholds], list[LabelSet], dict[str, dict[str, int]]]:
    """Fit per-target thresholds on a cohort and assign every user's labels.

    Returns (thresholds per target, label sets in input order, group counts
    per target keyed 'high'/'neutral'/'low').
    """
    thresholds = {
        target: fit_thresholds([s.score_for(target) for _, s in scores], target)
        for target in TARGETS
    }
    label_sets = [
        LabelSet(
            user_id=user_id,
            labels={t: assign_label(s.score_for(t), thresholds[t]) for t in TARGETS},
        )
        for user_id, s in scores
    ]
    counts = {
        target: {
            "high": sum(1 for ls in label_sets if ls.labels[target] == 1),
            "neutral": sum(1 for ls in label_sets if ls.labels[target] == 0),
            "low": sum(1 for ls in label_sets if ls.labels[target] == -1),
        }
        for target in TARGETS
    }
    return thresholds, label_sets, counts


# --- survey / labels file formats ---

SURVEY_COLUMNS = (
    ["user_id"]
    + [f"se{i}" for i in range(1, 11)]
    + [f"mh{i}" for i in range(1, 10)]
    + [f"gi{i}" for i in range(1, 7)]
)


def read_survey_csv(path) -> list[SurveyResponse]:
    """Survey CSV with header user_id,se1..se10,mh1..mh9,gi1..gi6."""
    responses = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SURVEY_COLUMNS:
            raise DataError(f"{path}: bad survey header, expected {','.join(SURVEY_COLUMNS)}")
        seen = set()
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(SURVEY_COLUMNS):
                raise DataError(f"{path}:{row_no}: expected {len(SURVEY_COLUMNS)} fields")
            user_id = row[0]
            if user_id in seen:
                raise DataError(f"{path}:{row_no}: duplicate user_id {user_id!r}")
            seen.add(user_id)
            try:
                values = [int(v) for v in row[1:]]
            except ValueError as exc:
                raise DataError(f"{path}:{row_no}: non-integer item: {exc}") from exc
            responses.append(
                SurveyResponse(
                    user_id=user_id,
                    social_exclusion_items=tuple(values[0:10]),
                    malicious_humour_items=tuple(values[10:19]),
                    guilt_induction_items=tuple(values[19:25]),
                )
            )
    return responses


def write_survey_csv(responses: list[SurveyResponse], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SURVEY_COLUMNS)
        for resp in responses:
            writer.writerow(
                [resp.user_id]
                + list(resp.social_exclusion_items)
                + list(resp.malicious_humour_items)
                + list(resp.guilt_induction_items)
            )


LABEL_COLUMNS = ["user_id", "se_label", "mh_label", "gi_label"]


def write_labels_csv(label_sets: list[LabelSet], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LABEL_COLUMNS)
        for ls in label_sets:
            writer.writerow([ls.user_id] + [ls.labels[t] for t in TARGETS])


def read_labels_csv(path) -> list[LabelSet]:
    label_sets = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != LABEL_COLUMNS:
            raise DataError(f"{path}: bad labels header, expected {','.join(LABEL_COLUMNS)}")
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            labels = {}
            for target, raw in zip(TARGETS, row[1:]):
                value = int(raw)
                if value not in (-1, 0, 1):
                    raise DataError(f"{path}:{row_no}: label must be -1, 0 or 1")
                labels[target] = value
            label_sets.append(LabelSet(user_id=row[0], labels=labels))
    return label_sets


def write_thresholds_json(thresholds: dict[str, TrisectionThresholds], path) -> None:
    payload = {target: th.to_dict() for target, th in thresholds.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
