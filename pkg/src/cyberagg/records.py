"""Domain records and ingestion for social-media activity logs.

Input arrives as two line-delimited JSON streams (posts and profiles, UTF-8).
Ingestion joins posts onto profiles by user_id, drops malformed lines with
their line numbers, and produces one UserRecord per profile.  Naive
timestamps are interpreted as UTC+8 (the source platform's local time) and
converted to UTC; all downstream date arithmetic is UTC.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone

from .errors import DataError

GENDERS = ("male", "female", "unknown")

_SOURCE_TZ = timezone(timedelta(hours=8))
_MIN_TIMESTAMP = datetime(2009, 1, 1, tzinfo=timezone.utc)

_MENTION_RE = re.compile(r"@\S+")
_HASHTAG_RE = re.compile(r"#([^#]+)#")
_EMOTICON_RE = re.compile(r"\[[^\[\]]{1,8}\]")

TIMEZONE_NOTE = "naive timestamps interpreted as UTC+8 and converted to UTC"


def count_mentions(text: str) -> int:
    """Occurrences of '@' followed by a non-space run."""
    return len(_MENTION_RE.findall(text))


def count_hashtags(text: str) -> int:
    """Occurrences of text enclosed between paired '#' marks."""
    return len(_HASHTAG_RE.findall(text))


def count_urls(text: str) -> int:
    return text.count("http://") + text.count("https://")


def extract_emoticon_tokens(text: str) -> list[str]:
    """Bracketed emoticon tokens such as '[doge]', brackets included."""
    return _EMOTICON_RE.findall(text)


@dataclass(frozen=True)
class Post:
    post_id: str
    timestamp: datetime  # tz-aware UTC, second resolution
    text: str
    has_picture: bool
    is_retweet: bool
    mention_count: int
    hashtag_count: int
    url_count: int
    emoticon_tokens: tuple[str, ...] = ()


@dataclass(frozen=True)
class Profile:
    user_id: str
    gender: str  # one of GENDERS
    verified: bool
    follower_count: int
    followee_count: int
    description: str = ""


@dataclass
class UserRecord:
    profile: Profile
    posts: list[Post] = field(default_factory=list)

    @property
    def user_id(self) -> str:
        return self.profile.user_id


@dataclass(frozen=True)
class ActivityFilterPolicy:
    """Keep users with > min_posts posts, enough active months, and a
    recent-enough latest post.

    months_mode 'calendar' counts distinct UTC calendar months;
    'span' requires an inclusive day span of at least 30 days per month.
    """

    min_posts: int = 20
    min_active_calendar_months: int = 2
    latest_post_not_before: date = date(2020, 1, 1)
    months_mode: str = "calendar"

    def __post_init__(self):
        if self.min_posts < 0:
            raise ValueError("min_posts must be >= 0")
        if self.min_active_calendar_months < 1:
            raise ValueError("min_active_calendar_months must be >= 1")
        if self.months_mode not in ("calendar", "span"):
            raise ValueError("months_mode must be 'calendar' or 'span'")


@dataclass
class DroppedLine:
    stream: str
    line_no: int
    reason: str


@dataclass
class IngestReport:
    profiles_read: int = 0
    posts_read: int = 0
    users: int = 0
    posts_kept: int = 0
    dropped: list[DroppedLine] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    timezone_note: str = TIMEZONE_NOTE

    def to_dict(self) -> dict:
        return {
            "profiles_read": self.profiles_read,
            "posts_read": self.posts_read,
            "users": self.users,
            "posts_kept": self.posts_kept,
            "dropped": [
                {"stream": d.stream, "line_no": d.line_no, "reason": d.reason}
                for d in self.dropped
            ],
            "warnings": list(self.warnings),
            "timezone_note": self.timezone_note,
        }

    def to_text(self) -> str:
        lines = [
            "ingest report",
            f"  profiles read : {self.profiles_read}",
            f"  posts read    : {self.posts_read}",
            f"  users         : {self.users}",
            f"  posts kept    : {self.posts_kept}",
            f"  dropped lines : {len(self.dropped)}",
        ]
        for d in self.dropped:
            lines.append(f"    {d.stream}:{d.line_no}: {d.reason}")
        if self.warnings:
            lines.append(f"  warnings      : {len(self.warnings)}")
            lines.extend(f"    {w}" for w in self.warnings)
        lines.append(f"  note: {self.timezone_note}")
        return "\n".join(lines) + "\n"


def parse_timestamp(raw: str) -> datetime:
    """ISO-8601 string -> tz-aware UTC datetime truncated to seconds."""
    ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=_SOURCE_TZ)
    ts = ts.astimezone(timezone.utc).replace(microsecond=0)
    if ts < _MIN_TIMESTAMP:
        raise ValueError(f"timestamp {raw!r} before 2009-01-01")
    return ts


def _require(obj: dict, key: str):
    if key not in obj:
        raise ValueError(f"missing key {key!r}")
    return obj[key]


def _as_bool(value, key: str) -> bool:
    if not isinstance(value, bool):
        raise ValueError(f"{key} must be a boolean")
    return value


def _as_nonneg_int(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ValueError(f"{key} must be a non-negative integer")
    return value


def parse_post_line(line: str) -> tuple[str, Post]:
    """One posts-stream JSON line -> (user_id, Post). Raises ValueError."""
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("post line is not a JSON object")
    user_id = str(_require(obj, "user_id"))
    if not user_id:
        raise ValueError("empty user_id")
    text = _require(obj, "text")
    if not isinstance(text, str):
        raise ValueError("text must be a string")
    ts = parse_timestamp(str(_require(obj, "timestamp")))
    if "mention_count" in obj:
        mentions = _as_nonneg_int(obj["mention_count"], "mention_count")
    else:
        mentions = count_mentions(text)
    if "hashtag_count" in obj:
        hashtags = _as_nonneg_int(obj["hashtag_count"], "hashtag_count")
    else:
        hashtags = count_hashtags(text)
    if "url_count" in obj:
        urls = _as_nonneg_int(obj["url_count"], "url_count")
    else:
        urls = count_urls(text)
    if "emoticon_tokens" in obj:
        raw = obj["emoticon_tokens"]
        if not isinstance(raw, list) or not all(isinstance(t, str) for t in raw):
            raise ValueError("emoticon_tokens must be a list of strings")
        emoticons = tuple(raw)
    else:
        emoticons = tuple(extract_emoticon_tokens(text))
    post = Post(
        post_id=str(_require(obj, "post_id")),
        timestamp=ts,
        text=text,
        has_picture=_as_bool(_require(obj, "has_picture"), "has_picture"),
        is_retweet=_as_bool(_require(obj, "is_retweet"), "is_retweet"),
        mention_count=mentions,
        hashtag_count=hashtags,
        url_count=urls,
        emoticon_tokens=emoticons,
    )
    return user_id, post


_GENDER_CODES = {"m": "male", "f": "female", "": "unknown"}


def parse_profile_line(line: str) -> Profile:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("profile line is not a JSON object")
    user_id = str(_require(obj, "user_id"))
    if not user_id:
        raise ValueError("empty user_id")
    gender_raw = _require(obj, "gender")
    if gender_raw not in _GENDER_CODES:
        raise ValueError(f"gender must be one of 'm', 'f', '' (got {gender_raw!r})")
    description = obj.get("description", "")
    if not isinstance(description, str):
        raise ValueError("description must be a string")
    return Profile(
        user_id=user_id,
        gender=_GENDER_CODES[gender_raw],
        verified=_as_bool(_require(obj, "verified"), "verified"),
        follower_count=_as_nonneg_int(_require(obj, "follower_count"), "follower_count"),
        followee_count=_as_nonneg_int(_require(obj, "followee_count"), "followee_count"),
        description=description,
    )


def ingest_dataset(posts_stream, profiles_stream) -> tuple[list[UserRecord], IngestReport]:
    """Join line-delimited post and profile streams into UserRecords.

    Both arguments are iterables of text lines.  Malformed lines are skipped
    and recorded with their 1-based line number; posts referencing an unknown
    user_id are skipped and recorded.  Posts are sorted by (timestamp,
    post_id); a duplicate post_id within a user keeps the first occurrence
    and records a warning.
    """
    report = IngestReport()
    users: dict[str, UserRecord] = {}

    try:
        for line_no, line in enumerate(profiles_stream, start=1):
            if not line.strip():
                continue
            report.profiles_read += 1
            try:
                profile = parse_profile_line(line)
            except ValueError as exc:
                report.dropped.append(DroppedLine("profiles", line_no, str(exc)))
                continue
            if profile.user_id in users:
                report.dropped.append(
                    DroppedLine("profiles", line_no, f"duplicate user_id {profile.user_id!r}")
                )
                continue
            users[profile.user_id] = UserRecord(profile=profile)
    except UnicodeDecodeError as exc:
        raise DataError(f"profiles stream is not valid UTF-8: {exc}") from exc

    seen_post_ids: dict[str, set[str]] = {uid: set() for uid in users}
    any_posts = False
    try:
        for line_no, line in enumerate(posts_stream, start=1):
            if not line.strip():
                continue
            any_posts = True
            report.posts_read += 1
            try:
                user_id, post = parse_post_line(line)
            except ValueError as exc:
                report.dropped.append(DroppedLine("posts", line_no, str(exc)))
                continue
            if user_id not in users:
                report.dropped.append(
                    DroppedLine("posts", line_no, f"unknown user_id {user_id!r}")
                )
                continue
            if post.post_id in seen_post_ids[user_id]:
                report.warnings.append(
                    f"duplicate post_id {post.post_id!r} for user {user_id!r}; kept first"
                )
                continue
            seen_post_ids[user_id].add(post.post_id)
            users[user_id].posts.append(post)
            report.posts_kept += 1
    except UnicodeDecodeError as exc:
        raise DataError(f"posts stream is not valid UTF-8: {exc}") from exc

    if not any_posts and users:
        report.warnings.append("posts stream is empty")

    records = list(users.values())
    for record in records:
        record.posts.sort(key=lambda p: (p.timestamp, p.post_id))
    report.users = len(records)
    return records, report


def active_months(user: UserRecord) -> int:
    return len({(p.timestamp.year, p.timestamp.month) for p in user.posts})


def apply_activity_filter(
    users: list[UserRecord], policy: ActivityFilterPolicy = ActivityFilterPolicy()
) -> tuple[list[UserRecord], list[tuple[str, str]]]:
    """Partition users into (kept, dropped); dropped carries the first
    failing rule name: 'post count', 'active months', or 'recency'."""
    kept: list[UserRecord] = []
    dropped: list[tuple[str, str]] = []
    for user in users:
        reason = _first_failing_rule(user, policy)
        if reason is None:
            kept.append(user)
        else:
            dropped.append((user.user_id, reason))
    return kept, dropped


def _first_failing_rule(user: UserRecord, policy: ActivityFilterPolicy) -> str | None:
    if len(user.posts) <= policy.min_posts:
        return "post count"
    if policy.months_mode == "calendar":
        if active_months(user) < policy.min_active_calendar_months:
            return "active months"
    else:
        first = user.posts[0].timestamp.date()
        last = user.posts[-1].timestamp.date()
        if (last - first).days + 1 < 30 * policy.min_active_calendar_months:
            return "active months"
    if user.posts[-1].timestamp.date() < policy.latest_post_not_before:
        return "recency"
    return None


@dataclass
class Summary:
    n_users: int
    gender_counts: dict[str, int]
    n_posts: int
    posts_per_user: dict[str, float]
    span_days: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "n_users": self.n_users,
            "gender_counts": dict(self.gender_counts),
            "n_posts": self.n_posts,
            "posts_per_user": dict(self.posts_per_user),
            "span_days": dict(self.span_days),
        }


def _stats(values: list[float]) -> dict[str, float]:
    if not values:
        return {"mean": 0.0, "min": 0.0, "max": 0.0}
    return {
        "mean": math.fsum(values) / len(values),
        "min": min(values),
        "max": max(values),
    }


def dataset_summary(users: list[UserRecord]) -> Summary:
    genders = {g: 0 for g in GENDERS}
    for user in users:
        genders[user.profile.gender] += 1
    post_counts = [float(len(u.posts)) for u in users]
    spans = [
        float((u.posts[-1].timestamp.date() - u.posts[0].timestamp.date()).days)
        for u in users
        if u.posts
    ]
    return Summary(
        n_users=len(users),
        gender_counts=genders,
        n_posts=int(sum(post_counts)),
        posts_per_user=_stats(post_counts),
        span_days=_stats(spans),
    )


# --- UserRecord JSONL serialization (the inter-stage "users file") ---

def post_to_dict(post: Post) -> dict:
    return {
        "post_id": post.post_id,
        "timestamp": post.timestamp.isoformat(),
        "text": post.text,
        "has_picture": post.has_picture,
        "is_retweet": post.is_retweet,
        "mention_count": post.mention_count,
        "hashtag_count": post.hashtag_count,
        "url_count": post.url_count,
        "emoticon_tokens": list(post.emoticon_tokens),
    }


def user_to_dict(user: UserRecord) -> dict:
    return {
        "profile": {
            "user_id": user.profile.user_id,
            "gender": user.profile.gender,
            "verified": user.profile.verified,
            "follower_count": user.profile.follower_count,
            "followee_count": user.profile.followee_count,
            "description": user.profile.description,
        },
        "posts": [post_to_dict(p) for p in user.posts],
    }


def user_from_dict(obj: dict) -> UserRecord:
    prof = obj["profile"]
    if prof["gender"] not in GENDERS:
        raise ValueError(f"bad gender {prof['gender']!r}")
    profile = Profile(
        user_id=prof["user_id"],
        gender=prof["gender"],
        verified=bool(prof["verified"]),
        follower_count=int(prof["follower_count"]),
        followee_count=int(prof["followee_count"]),
        description=prof.get("description", ""),
    )
    posts = [
        Post(
            post_id=p["post_id"],
            timestamp=datetime.fromisoformat(p["timestamp"]).astimezone(timezone.utc),
            text=p["text"],
            has_picture=bool(p["has_picture"]),
            is_retweet=bool(p["is_retweet"]),
            mention_count=int(p["mention_count"]),
            hashtag_count=int(p["hashtag_count"]),
            url_count=int(p["url_count"]),
            emoticon_tokens=tuple(p.get("emoticon_tokens", ())),
        )
        for p in obj["posts"]
    ]
    return UserRecord(profile=profile, posts=posts)


def save_users(users: list[UserRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for user in users:
            fh.write(json.dumps(user_to_dict(user), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def load_users(path) -> list[UserRecord]:
    users = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                users.append(user_from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{line_no}: bad user record: {exc}") from exc
    return users
