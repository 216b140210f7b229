"""Per-user content-based recommendations.

Candidates are the graph neighbors of every article the user rated
relevant, scored by the maximum similarity any relevant article assigns
them (maximum, not average: a user interested in several unrelated topics
should not see scores diluted across them). Every article the user has
rated, with either verdict, is removed from the output; irrelevant
ratings never contribute candidates or scores.
"""
from __future__ import annotations

import datetime as dt
import json
import logging
from dataclasses import dataclass, field, replace

from .errors import UnknownDocument
from .similarity import SimilarityGraph

log = logging.getLogger(__name__)

VERDICTS = ("relevant", "irrelevant")


@dataclass(frozen=True)
class Rating:
    user_id: str
    doc_id: str
    verdict: str
    rated_at: dt.datetime | None = None

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")


@dataclass(frozen=True)
class UserProfile:
    """One current verdict per rated document; a new rating replaces the old."""

    user_id: str
    ratings: dict[str, str] = field(default_factory=dict)

    def relevant_ids(self) -> list[str]:
        return [d for d, v in self.ratings.items() if v == "relevant"]


def rate(
    profile: UserProfile,
    doc_id: str,
    verdict: str,
    corpus_ids: set[str] | None = None,
) -> UserProfile:
    """Store the verdict, replacing any previous one; idempotent per verdict."""
    if verdict not in VERDICTS:
        raise ValueError(f"verdict must be one of {VERDICTS}, got {verdict!r}")
    if corpus_ids is not None and doc_id not in corpus_ids:
        raise UnknownDocument(doc_id)
    ratings = dict(profile.ratings)
    ratings[doc_id] = verdict
    return replace(profile, ratings=ratings)


def recommend(
    profile: UserProfile,
    graph: SimilarityGraph,
    n: int = 20,
) -> list[tuple[str, float]]:
    """Top n unrated neighbors of the user's relevant articles, max-scored.

    Returns an empty list when the user has no relevant ratings. Ratings
    pointing at documents no longer in the graph are ignored with a log
    note (stale ids after a corpus rebuild).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    scores: dict[str, float] = {}
    for doc_id in profile.relevant_ids():
        if doc_id not in graph:
            log.info("ignoring stale rating for %s (not in current corpus)", doc_id)
            continue
        for neighbor, score in graph.neighbors[doc_id]:
            if neighbor not in scores or score > scores[neighbor]:
                scores[neighbor] = score
    for rated in profile.ratings:
        scores.pop(rated, None)
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:n]


def profile_to_json(profile: UserProfile) -> dict:
    return {"user_id": profile.user_id, "ratings": dict(profile.ratings)}


def profile_from_json(record: dict) -> UserProfile:
    return UserProfile(user_id=record["user_id"], ratings=dict(record["ratings"]))


def write_profiles_jsonl(profiles: dict[str, UserProfile], fh) -> None:
    for user_id in sorted(profiles):
        fh.write(json.dumps(profile_to_json(profiles[user_id]), sort_keys=True) + "\n")


def read_profiles_jsonl(fh) -> dict[str, UserProfile]:
    out: dict[str, UserProfile] = {}
    for line in fh:
        line = line.strip()
        if line:
            profile = profile_from_json(json.loads(line))
            out[profile.user_id] = profile
    return out
