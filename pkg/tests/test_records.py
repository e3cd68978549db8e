import io
import json
from datetime import date

import pytest

from cyberagg.records import (
    ActivityFilterPolicy,
    apply_activity_filter,
    count_hashtags,
    count_mentions,
    count_urls,
    dataset_summary,
    extract_emoticon_tokens,
    ingest_dataset,
    load_users,
    parse_timestamp,
    save_users,
)

from .conftest import make_post, make_user


def post_line(user_id="u1", post_id="p1", timestamp="2020-03-02T10:17:00+00:00",
              text="hello", **extra):
    obj = {
        "user_id": user_id,
        "post_id": post_id,
        "timestamp": timestamp,
        "text": text,
        "has_picture": False,
        "is_retweet": False,
    }
    obj.update(extra)
    return json.dumps(obj)


def profile_line(user_id="u1", gender="f", **extra):
    obj = {
        "user_id": user_id,
        "gender": gender,
        "verified": False,
        "follower_count": 10,
        "followee_count": 5,
        "description": "",
    }
    obj.update(extra)
    return json.dumps(obj)


def run_ingest(post_lines, profile_lines):
    return ingest_dataset(
        io.StringIO("\n".join(post_lines)), io.StringIO("\n".join(profile_lines))
    )


class TestIngest:
    def test_profiles_with_posts_join(self):
        n = 320
        profiles = [profile_line(f"u{i:04d}") for i in range(n)]
        posts = [post_line(f"u{i:04d}", f"p{i}") for i in range(n)]
        users, report = run_ingest(posts, profiles)
        assert len(users) == n
        assert report.users == n
        assert report.posts_kept == n

    def test_empty_posts_stream(self):
        users, report = run_ingest([], [profile_line("u1")])
        assert len(users) == 1
        assert users[0].posts == []
        assert any("empty" in w for w in report.warnings)

    def test_unparseable_timestamp_dropped_with_line_number(self):
        posts = [
            post_line(post_id="p1"),
            post_line(post_id="p2", timestamp="not-a-date"),
            post_line(post_id="p3"),
        ]
        users, report = run_ingest(posts, [profile_line()])
        assert len(users[0].posts) == 2
        assert len(report.dropped) == 1
        assert report.dropped[0].line_no == 2
        assert report.dropped[0].stream == "posts"

    def test_unknown_user_post_skipped(self):
        users, report = run_ingest([post_line(user_id="ghost")], [profile_line("u1")])
        assert users[0].posts == []
        assert "unknown user_id" in report.dropped[0].reason

    def test_duplicate_post_id_keeps_first(self):
        posts = [
            post_line(post_id="p1", text="first"),
            post_line(post_id="p1", text="second"),
        ]
        users, report = run_ingest(posts, [profile_line()])
        assert len(users[0].posts) == 1
        assert users[0].posts[0].text == "first"
        assert any("duplicate post_id" in w for w in report.warnings)

    def test_duplicate_profile_dropped(self):
        users, report = run_ingest([], [profile_line("u1"), profile_line("u1")])
        assert len(users) == 1
        assert any("duplicate user_id" in d.reason for d in report.dropped)

    def test_bad_gender_is_malformed(self):
        users, report = run_ingest([], [profile_line("u1", gender="x")])
        assert users == []
        assert "gender" in report.dropped[0].reason

    def test_posts_sorted_by_timestamp(self):
        posts = [
            post_line(post_id="p2", timestamp="2020-05-01T00:00:00+00:00"),
            post_line(post_id="p1", timestamp="2020-03-01T00:00:00+00:00"),
        ]
        users, _ = run_ingest(posts, [profile_line()])
        assert [p.post_id for p in users[0].posts] == ["p1", "p2"]

    def test_counts_used_when_present_derived_when_absent(self):
        text = "hi @alice check #topic# at http://a.cn and https://b.cn [doge]"
        users, _ = run_ingest(
            [post_line(text=text), post_line(post_id="p2", text=text, mention_count=9)],
            [profile_line()],
        )
        derived, explicit = users[0].posts
        assert derived.mention_count == 1
        assert derived.hashtag_count == 1
        assert derived.url_count == 2
        assert derived.emoticon_tokens == ("[doge]",)
        assert explicit.mention_count == 9

    def test_pre_2009_timestamp_rejected(self):
        users, report = run_ingest(
            [post_line(timestamp="2008-12-31T00:00:00+00:00")], [profile_line()]
        )
        assert users[0].posts == []
        assert "2009" in report.dropped[0].reason


class TestTimestamps:
    def test_naive_interpreted_as_utc8(self):
        ts = parse_timestamp("2020-03-02T10:17:00")
        assert ts.hour == 2          # 10:17 UTC+8 == 02:17 UTC
        assert ts.utcoffset().total_seconds() == 0

    def test_aware_converted(self):
        ts = parse_timestamp("2020-03-02T10:17:00Z")
        assert ts.hour == 10

    def test_truncated_to_seconds(self):
        ts = parse_timestamp("2020-03-02T10:17:00.654321+00:00")
        assert ts.microsecond == 0


class TestDerivation:
    def test_mentions(self):
        assert count_mentions("@a hi @b") == 2
        assert count_mentions("email a@b") == 1
        assert count_mentions("@ space") == 0

    def test_hashtags_are_paired(self):
        assert count_hashtags("#one# and #two#") == 2
        assert count_hashtags("#unpaired") == 0

    def test_urls(self):
        assert count_urls("http://a https://b http://c") == 3

    def test_emoticons(self):
        assert extract_emoticon_tokens("hey [doge] [泪] [[bad]") == ["[doge]", "[泪]", "[bad]"]


class TestActivityFilter:
    def test_two_month_user_kept(self):
        posts = [
            make_post(f"p{i}", f"2020-03-{i + 1:02d}T08:00:00") for i in range(15)
        ] + [make_post(f"q{i}", f"2020-04-{i + 1:02d}T08:00:00") for i in range(6)]
        kept, dropped = apply_activity_filter([make_user(posts=posts)])
        assert len(kept) == 1 and not dropped

    def test_exactly_twenty_posts_dropped(self):
        posts = [
            make_post(f"p{i}", f"2020-03-{i + 1:02d}T08:00:00") for i in range(10)
        ] + [make_post(f"q{i}", f"2020-04-{i + 1:02d}T08:00:00") for i in range(10)]
        assert len(posts) == 20
        kept, dropped = apply_activity_filter([make_user(posts=posts)])
        assert not kept
        assert dropped[0][1] == "post count"

    def test_single_month_dropped(self):
        posts = [
            make_post(f"p{i}", f"2020-03-01T{i % 24:02d}:00:00") for i in range(50)
        ]
        kept, dropped = apply_activity_filter([make_user(posts=posts)])
        assert dropped[0][1] == "active months"

    def test_stale_user_dropped(self):
        posts = [
            make_post(f"p{i}", f"2019-0{1 + i % 2}-{i + 1:02d}T08:00:00")
            for i in range(21)
        ]
        kept, dropped = apply_activity_filter([make_user(posts=posts)])
        assert dropped[0][1] == "recency"

    def test_span_mode(self):
        posts = [
            make_post(f"p{i}", f"2020-03-{(i % 28) + 1:02d}T08:00:00")
            for i in range(25)
        ] + [make_post("late", "2020-04-02T08:00:00")]
        policy = ActivityFilterPolicy(months_mode="span")
        kept, dropped = apply_activity_filter([make_user(posts=posts)], policy)
        assert dropped[0][1] == "active months"  # 33-day span < 60

    def test_partition_and_idempotence(self, rng):
        users = []
        for i in range(40):
            n_posts = int(rng.integers(1, 40))
            months = rng.choice([1, 2, 3])
            posts = [
                make_post(
                    f"p{j}",
                    f"20{rng.integers(19, 22)}-{rng.integers(1, 1 + months):02d}-"
                    f"{rng.integers(1, 28):02d}T{rng.integers(0, 24):02d}:00:00",
                )
                for j in range(n_posts)
            ]
            users.append(make_user(f"u{i}", posts))
        kept, dropped = apply_activity_filter(users)
        assert len(kept) + len(dropped) == len(users)
        kept_ids = {u.user_id for u in kept}
        assert kept_ids.isdisjoint({uid for uid, _ in dropped})
        kept_again, dropped_again = apply_activity_filter(kept)
        assert len(kept_again) == len(kept) and not dropped_again

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            ActivityFilterPolicy(min_posts=-1)
        with pytest.raises(ValueError):
            ActivityFilterPolicy(min_active_calendar_months=0)


class TestSummary:
    def test_counts(self):
        users = [
            make_user("u1", [make_post()], gender="male"),
            make_user("u2", [], gender="unknown"),
        ]
        summary = dataset_summary(users)
        assert summary.gender_counts == {"male": 1, "female": 0, "unknown": 1}
        assert summary.n_posts == 1

    def test_empty(self):
        summary = dataset_summary([])
        assert summary.n_users == 0
        assert summary.n_posts == 0
        assert summary.posts_per_user["mean"] == 0.0

    def test_gender_sum_matches_user_count(self, rng):
        users = [
            make_user(f"u{i}", [], gender=str(rng.choice(["male", "female", "unknown"])))
            for i in range(25)
        ]
        summary = dataset_summary(users)
        assert sum(summary.gender_counts.values()) == 25


class TestRoundTrip:
    def test_ingest_serialize_reingest(self, tmp_path):
        posts = [
            post_line(text="hi @a #x# [doge] https://t.cn"),
            post_line(post_id="p2", timestamp="2020-04-01T09:00:00"),
        ]
        profiles = [profile_line("u1", gender="m", description="desc here")]
        users, _ = run_ingest(posts, profiles)
        path = tmp_path / "users.jsonl"
        save_users(users, path)
        reloaded = load_users(path)
        assert reloaded == users
        save_users(reloaded, tmp_path / "users2.jsonl")
        assert (tmp_path / "users.jsonl").read_bytes() == (tmp_path / "users2.jsonl").read_bytes()
