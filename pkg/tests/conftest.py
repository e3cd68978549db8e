from datetime import datetime, timezone

import numpy as np
import pytest

from cyberagg.records import Post, Profile, UserRecord


def ts(raw: str) -> datetime:
    return datetime.fromisoformat(raw).replace(tzinfo=timezone.utc)


def make_post(post_id="p1", when="2020-03-02T10:17:00", text="hello", *,
              has_picture=False, is_retweet=False, mentions=0, hashtags=0,
              urls=0, emoticons=()):
    return Post(
        post_id=post_id,
        timestamp=ts(when),
        text=text,
        has_picture=has_picture,
        is_retweet=is_retweet,
        mention_count=mentions,
        hashtag_count=hashtags,
        url_count=urls,
        emoticon_tokens=tuple(emoticons),
    )


def make_user(user_id="u1", posts=(), *, gender="female", verified=False,
              followers=100, followees=50, description=""):
    return UserRecord(
        profile=Profile(
            user_id=user_id,
            gender=gender,
            verified=verified,
            follower_count=followers,
            followee_count=followees,
            description=description,
        ),
        posts=sorted(posts, key=lambda p: (p.timestamp, p.post_id)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
