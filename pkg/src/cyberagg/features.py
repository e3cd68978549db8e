"""Per-user feature extraction: behavior, content, and emotion blocks.

Block registry (version 1), canonical order and widths:

  basic       41   profile scalars, posting tempo, post composition,
                   text form, diurnal summary
  dynamic     93   hour-of-day (24) and day-of-week (7) average interaction
                   rates for posting / mentioning / retweeting
  content    300   mean of per-document mean word vectors
  emotion      5   fraction of posts classified to each of five emotions
  transformer 512  externally produced user embedding, joined by user_id

All extractors are pure per-user functions of the stored UTC timestamps and
are order-independent given them.  Proportions lie in [0,1]; histogram
entropies use natural log.  Standardization is deliberately not applied
here; it belongs to model-side preprocessing so stored features stay raw.
"""

from __future__ import annotations

import json
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ValidationError
from .records import UserRecord
from .resources import EMOTIONS, EmotionLexicon, WordVectorTable

REGISTRY_VERSION = "1"

BLOCK_ORDER = ("basic", "dynamic", "content", "emotion", "transformer")
BLOCK_WIDTHS = {"basic": 41, "dynamic": 93, "content": 300, "emotion": 5, "transformer": 512}

INTERACTIONS = ("post", "mention", "retweet")

BASIC_FEATURE_NAMES = [
    # profile (8)
    "gender_code",
    "verified",
    "log1p_followers",
    "log1p_followees",
    "log_follow_ratio",
    "description_chars",
    "has_description",
    "log1p_post_count",
    # tempo (9)
    "span_days",
    "posts_per_day",
    "active_days",
    "active_day_ratio",
    "longest_gap_days",
    "mean_gap_hours",
    "sd_gap_hours",
    "max_posts_one_day",
    "mean_posts_per_active_day",
    # composition (10)
    "originals_ratio",
    "retweets_ratio",
    "picture_posts",
    "picture_ratio",
    "mention_post_ratio",
    "mean_mentions",
    "hashtag_post_ratio",
    "mean_hashtags",
    "url_post_ratio",
    "emoticon_post_ratio",
    # text form (7)
    "mean_text_len",
    "sd_text_len",
    "max_text_len",
    "min_text_len",
    "mean_punctuation",
    "question_post_ratio",
    "exclaim_post_ratio",
    # diurnal summary (7)
    "prop_hours_00_06",
    "prop_hours_06_12",
    "prop_hours_12_18",
    "prop_hours_18_24",
    "weekend_ratio",
    "hour_entropy",
    "weekday_entropy",
]

assert len(BASIC_FEATURE_NAMES) == BLOCK_WIDTHS["basic"]

_GENDER_CODE = {"male": 0.0, "female": 1.0, "unknown": 0.5}


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log(p)).sum())


def _is_punctuation(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _inclusive_span_days(user: UserRecord) -> int:
    if not user.posts:
        return 1
    first = user.posts[0].timestamp.date()
    last = user.posts[-1].timestamp.date()
    return max(1, (last - first).days + 1)


def extract_basic(user: UserRecord) -> np.ndarray:
    """41 profile, tempo, composition, text-form and diurnal scalars."""
    prof = user.profile
    posts = user.posts
    n = len(posts)
    out = np.zeros(BLOCK_WIDTHS["basic"], dtype=np.float64)

    out[0] = _GENDER_CODE[prof.gender]
    out[1] = 1.0 if prof.verified else 0.0
    out[2] = math.log1p(prof.follower_count)
    out[3] = math.log1p(prof.followee_count)
    out[4] = math.log((prof.follower_count + 1) / (prof.followee_count + 1))
    out[5] = float(len(prof.description))
    out[6] = 1.0 if prof.description else 0.0
    out[7] = math.log1p(n)

    if n > 0:
        first = posts[0].timestamp
        last = posts[-1].timestamp
        span_incl = _inclusive_span_days(user)
        dates = [p.timestamp.date() for p in posts]
        date_counts = Counter(dates)
        gaps_h = [
            (b.timestamp - a.timestamp).total_seconds() / 3600.0
            for a, b in zip(posts, posts[1:])
        ]
        out[8] = float((last.date() - first.date()).days)
        out[9] = n / span_incl
        out[10] = float(len(date_counts))
        out[11] = len(date_counts) / span_incl
        if gaps_h:
            out[12] = max(gaps_h) / 24.0
            out[13] = float(np.mean(gaps_h))
            out[14] = float(np.std(gaps_h))
        out[15] = float(max(date_counts.values()))
        out[16] = n / len(date_counts)

        out[17] = sum(1 for p in posts if not p.is_retweet) / n
        out[18] = sum(1 for p in posts if p.is_retweet) / n
        pictures = sum(1 for p in posts if p.has_picture)
        out[19] = float(pictures)
        out[20] = pictures / n
        out[21] = sum(1 for p in posts if p.mention_count > 0) / n
        out[22] = sum(p.mention_count for p in posts) / n
        out[23] = sum(1 for p in posts if p.hashtag_count > 0) / n
        out[24] = sum(p.hashtag_count for p in posts) / n
        out[25] = sum(1 for p in posts if p.url_count > 0) / n
        out[26] = sum(1 for p in posts if p.emoticon_tokens) / n

        lengths = np.array([len(p.text) for p in posts], dtype=np.float64)
        out[27] = float(lengths.mean())
        out[28] = float(lengths.std())
        out[29] = float(lengths.max())
        out[30] = float(lengths.min())
        out[31] = sum(sum(1 for ch in p.text if _is_punctuation(ch)) for p in posts) / n
        out[32] = sum(1 for p in posts if "?" in p.text or "？" in p.text) / n
        out[33] = sum(1 for p in posts if "!" in p.text or "！" in p.text) / n

        hours = np.array([p.timestamp.hour for p in posts])
        weekdays = np.array([p.timestamp.weekday() for p in posts])
        out[34] = float((hours < 6).sum()) / n
        out[35] = float(((hours >= 6) & (hours < 12)).sum()) / n
        out[36] = float(((hours >= 12) & (hours < 18)).sum()) / n
        out[37] = float((hours >= 18).sum()) / n
        out[38] = float((weekdays >= 5).sum()) / n
        out[39] = _entropy(np.bincount(hours, minlength=24))
        out[40] = _entropy(np.bincount(weekdays, minlength=7))

    return out


def extract_dynamic(user: UserRecord) -> np.ndarray:
    """Average daily hour-of-day and average weekly day-of-week occurrence
    rates, for all posts, posts with mentions, and retweets (93 values).

    Hour slot h holds count(hour == h) / span_days; weekday slot d holds
    count(weekday == d) / span_weeks with span_weeks = span_days / 7 and
    span_days = max(1, inclusive day span).  Weekdays run Monday=0..Sunday=6.
    """
    span_days = _inclusive_span_days(user)
    span_weeks = span_days / 7.0
    out = np.zeros(BLOCK_WIDTHS["dynamic"], dtype=np.float64)
    subsets = {
        "post": user.posts,
        "mention": [p for p in user.posts if p.mention_count > 0],
        "retweet": [p for p in user.posts if p.is_retweet],
    }
    offset = 0
    for itype in INTERACTIONS:
        posts = subsets[itype]
        hour_counts = np.zeros(24)
        day_counts = np.zeros(7)
        for p in posts:
            hour_counts[p.timestamp.hour] += 1
            day_counts[p.timestamp.weekday()] += 1
        out[offset : offset + 24] = hour_counts / span_days
        out[offset + 24 : offset + 31] = day_counts / span_weeks
        offset += 31
    return out


@dataclass
class OovStats:
    total_docs: int = 0
    oov_docs: int = 0
    total_tokens: int = 0
    oov_tokens: int = 0

    def to_dict(self) -> dict:
        return {
            "total_docs": self.total_docs,
            "oov_docs": self.oov_docs,
            "total_tokens": self.total_tokens,
            "oov_tokens": self.oov_tokens,
        }


def extract_content(
    user: UserRecord, table: WordVectorTable
) -> tuple[np.ndarray, OovStats]:
    """Mean over documents of per-document mean in-vocabulary word vectors.

    Documents are the user's post texts plus the profile description when
    nonempty.  A document with no in-vocabulary token contributes a zero
    vector and is counted in the OOV stats, keeping the denominator stable.
    """
    if len(table) == 0:
        raise ValidationError("word-vector table is empty")
    docs = [p.text for p in user.posts]
    if user.profile.description:
        docs.append(user.profile.description)
    stats = OovStats(total_docs=len(docs))
    if not docs:
        return np.zeros(table.dimension, dtype=np.float64), stats
    acc = np.zeros(table.dimension, dtype=np.float64)
    for doc in docs:
        tokens = table.tokenize(doc)
        stats.total_tokens += len(tokens)
        hits = [table.entries[t] for t in tokens if t in table]
        stats.oov_tokens += len(tokens) - len(hits)
        if hits:
            acc += np.mean(hits, axis=0)
        else:
            stats.oov_docs += 1
    return acc / len(docs), stats


def classify_post_emotion(text: str, lex: EmotionLexicon) -> str | None:
    """Emotion with the most lexicon-token hits in `text` (non-overlapping
    substring occurrences); ties resolve in fixed emotion order; no hits
    -> None."""
    hits = {e: 0 for e in EMOTIONS}
    for token, emotion in lex.mapping.items():
        if token:
            hits[emotion] += text.count(token)
    best_count = max(hits.values())
    if best_count == 0:
        return None
    for emotion in EMOTIONS:  # fixed order doubles as the tie-break
        if hits[emotion] == best_count:
            return emotion


def extract_emotion(user: UserRecord, lex: EmotionLexicon) -> np.ndarray:
    """Fraction of the user's posts classified to each emotion; posts with
    no lexicon hit stay unclassified, so the five values sum to <= 1."""
    out = np.zeros(BLOCK_WIDTHS["emotion"], dtype=np.float64)
    n = len(user.posts)
    if n == 0 or len(lex) == 0:
        return out
    for post in user.posts:
        emotion = classify_post_emotion(post.text, lex)
        if emotion is not None:
            out[EMOTIONS.index(emotion)] += 1
    return out / n


@dataclass
class FeatureVector:
    """Named fixed-width feature blocks for one user, in canonical order."""

    user_id: str
    blocks: dict[str, np.ndarray]

    def __post_init__(self):
        ordered = {}
        for name in BLOCK_ORDER:
            if name in self.blocks:
                block = np.asarray(self.blocks[name], dtype=np.float64)
                if block.shape != (BLOCK_WIDTHS[name],):
                    raise ValidationError(
                        f"block {name!r} must have width {BLOCK_WIDTHS[name]}, "
                        f"got {block.shape}"
                    )
                ordered[name] = block
        unknown = set(self.blocks) - set(ordered)
        if unknown:
            raise ValidationError(f"unknown blocks: {sorted(unknown)}")
        self.blocks = ordered

    @property
    def width(self) -> int:
        return sum(BLOCK_WIDTHS[b] for b in self.blocks)

    def concat(self) -> np.ndarray:
        return np.concatenate([self.blocks[b] for b in self.blocks])


def assemble(
    user: UserRecord,
    blocks: tuple[str, ...],
    word_vectors: WordVectorTable | None = None,
    lexicon: EmotionLexicon | None = None,
    embedding: np.ndarray | None = None,
) -> FeatureVector:
    """Extract the requested blocks for one user, in canonical order."""
    requested = set(blocks)
    unknown = requested - set(BLOCK_ORDER)
    if unknown:
        raise ValidationError(f"unknown blocks requested: {sorted(unknown)}")
    built: dict[str, np.ndarray] = {}
    if "basic" in requested:
        built["basic"] = extract_basic(user)
    if "dynamic" in requested:
        built["dynamic"] = extract_dynamic(user)
    if "content" in requested:
        if word_vectors is None:
            raise ValidationError("content block requested but no word vectors loaded")
        built["content"], _ = extract_content(user, word_vectors)
    if "emotion" in requested:
        if lexicon is None:
            raise ValidationError("emotion block requested but no lexicon loaded")
        built["emotion"] = extract_emotion(user, lexicon)
    if "transformer" in requested:
        if embedding is None:
            raise DataError(f"no transformer embedding for user {user.user_id!r}")
        built["transformer"] = np.asarray(embedding, dtype=np.float64)
    return FeatureVector(user_id=user.user_id, blocks=built)


class FeatureExtractor:
    """Stateless users -> feature-matrix transformer.

    fit() is a no-op (resources are read-only); transform() maps a list of
    UserRecords to a dense (n_users, width) array with rows in input order.
    """

    def __init__(self, blocks=("basic", "dynamic"), word_vectors=None, lexicon=None,
                 embeddings=None):
        self.blocks = tuple(blocks)
        self.word_vectors = word_vectors
        self.lexicon = lexicon
        self.embeddings = embeddings

    def get_params(self, deep=True):
        return {
            "blocks": self.blocks,
            "word_vectors": self.word_vectors,
            "lexicon": self.lexicon,
            "embeddings": self.embeddings,
        }

    def fit(self, users, y=None):
        return self

    def extract(self, user: UserRecord) -> FeatureVector:
        embedding = None
        if "transformer" in self.blocks:
            if self.embeddings is None:
                raise ValidationError("transformer block requested but no embeddings loaded")
            embedding = self.embeddings.get(user.user_id)
        return assemble(
            user,
            self.blocks,
            word_vectors=self.word_vectors,
            lexicon=self.lexicon,
            embedding=embedding,
        )

    def transform(self, users) -> np.ndarray:
        if not users:
            return np.zeros((0, sum(BLOCK_WIDTHS[b] for b in self.blocks)))
        return np.vstack([self.extract(u).concat() for u in users])

    def fit_transform(self, users, y=None):
        return self.fit(users, y).transform(users)


# --- feature CSV + schema sidecar ---

def column_names(blocks: tuple[str, ...]) -> list[str]:
    cols: list[str] = []
    for name in BLOCK_ORDER:
        if name not in blocks:
            continue
        if name == "basic":
            cols += [f"basic_{i:02d}" for i in range(BLOCK_WIDTHS["basic"])]
        elif name == "dynamic":
            for itype in INTERACTIONS:
                cols += [f"dyn_{itype}_h{h:02d}" for h in range(24)]
                cols += [f"dyn_{itype}_d{d}" for d in range(7)]
        elif name == "content":
            cols += [f"content_{i:03d}" for i in range(BLOCK_WIDTHS["content"])]
        elif name == "emotion":
            cols += [f"emotion_{e}" for e in EMOTIONS]
        elif name == "transformer":
            cols += [f"trans_{i:03d}" for i in range(BLOCK_WIDTHS["transformer"])]
    return cols


def write_features_csv(features: list[FeatureVector], path) -> None:
    """CSV with a trailing '.schema.json' sidecar recording the registry."""
    if not features:
        raise ValidationError("no feature vectors to write")
    blocks = tuple(features[0].blocks)
    for fv in features:
        if tuple(fv.blocks) != blocks:
            raise ValidationError("feature vectors disagree on block sets")
    cols = column_names(blocks)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(["user_id"] + cols) + "\n")
        for fv in features:
            values = fv.concat()
            fh.write(fv.user_id + "," + ",".join(f"{v:.17g}" for v in values) + "\n")
    schema = {
        "registry_version": REGISTRY_VERSION,
        "blocks": {b: BLOCK_WIDTHS[b] for b in blocks},
        "columns": cols,
        "basic_names": BASIC_FEATURE_NAMES if "basic" in blocks else [],
    }
    with open(str(path) + ".schema.json", "w", encoding="utf-8") as fh:
        json.dump(schema, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_features_csv(path) -> list[FeatureVector]:
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if not header or header[0] != "user_id":
            raise DataError(f"{path}: first column must be user_id")
        blocks = _blocks_from_columns(header[1:], path)
        widths = [BLOCK_WIDTHS[b] for b in blocks]
        features = []
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(header):
                raise DataError(f"{path}:{line_no}: expected {len(header)} fields")
            values = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            split_points = np.cumsum(widths)[:-1]
            pieces = np.split(values, split_points)
            features.append(
                FeatureVector(user_id=parts[0], blocks=dict(zip(blocks, pieces)))
            )
    return features


def _blocks_from_columns(cols: list[str], path) -> tuple[str, ...]:
    expected_by_block = {
        "basic": [f"basic_{i:02d}" for i in range(BLOCK_WIDTHS["basic"])],
        "dynamic": column_names(("dynamic",)),
        "content": [f"content_{i:03d}" for i in range(BLOCK_WIDTHS["content"])],
        "emotion": [f"emotion_{e}" for e in EMOTIONS],
        "transformer": [f"trans_{i:03d}" for i in range(BLOCK_WIDTHS["transformer"])],
    }
    blocks: list[str] = []
    i = 0
    while i < len(cols):
        for name in BLOCK_ORDER:
            expected = expected_by_block[name]
            if cols[i : i + len(expected)] == expected:
                blocks.append(name)
                i += len(expected)
                break
        else:
            raise DataError(f"{path}: unrecognized column layout at {cols[i]!r}")
    return tuple(blocks)


def stack_features(
    features: list[FeatureVector], blocks: tuple[str, ...]
) -> tuple[list[str], np.ndarray]:
    """Select `blocks` from stored feature vectors -> (user_ids, matrix)."""
    ordered = tuple(b for b in BLOCK_ORDER if b in blocks)
    missing = set(blocks) - set(ordered)
    if missing:
        raise ValidationError(f"unknown blocks: {sorted(missing)}")
    rows = []
    ids = []
    for fv in features:
        absent = [b for b in ordered if b not in fv.blocks]
        if absent:
            raise DataError(
                f"user {fv.user_id!r} is missing blocks {absent}; re-run featurize"
            )
        rows.append(np.concatenate([fv.blocks[b] for b in ordered]))
        ids.append(fv.user_id)
    if not rows:
        return [], np.zeros((0, sum(BLOCK_WIDTHS[b] for b in ordered)))
    return ids, np.vstack(rows)
