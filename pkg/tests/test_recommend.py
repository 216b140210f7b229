import numpy as np
import pytest

from litatlas.errors import UnknownDocument
from litatlas.recommend import (
    Rating,
    UserProfile,
    profile_from_json,
    profile_to_json,
    rate,
    recommend,
)
from litatlas.similarity import SimilarityGraph, build_similarity_graph


def graph_from_dict(neighbors: dict, k: int = 20) -> SimilarityGraph:
    return SimilarityGraph(neighbors=neighbors, k_neighbors=k)


def brute_force_recommend(profile: UserProfile, graph: SimilarityGraph, n: int):
    """Independent oracle: scan every (relevant, candidate) edge pair."""
    relevant = [d for d, v in profile.ratings.items() if v == "relevant" and d in graph.neighbors]
    candidates = {}
    for c in {nbr for r in relevant for nbr, _ in graph.neighbors[r]}:
        best = max(
            (score for r in relevant for nbr, score in graph.neighbors[r] if nbr == c),
            default=None,
        )
        if best is not None and c not in profile.ratings:
            candidates[c] = best
    return sorted(candidates.items(), key=lambda kv: (-kv[1], kv[0]))[:n]


def random_graph(n_docs: int, k: int, seed: int) -> SimilarityGraph:
    rng = np.random.default_rng(seed)
    vectors = {f"doc{i:03d}": rng.standard_normal(6) for i in range(n_docs)}
    return build_similarity_graph(vectors, k)


class TestRate:
    def test_last_write_wins(self):
        profile = UserProfile(user_id="u")
        profile = rate(profile, "d1", "relevant")
        profile = rate(profile, "d1", "irrelevant")
        assert profile.ratings == {"d1": "irrelevant"}

    def test_idempotent(self):
        profile = UserProfile(user_id="u")
        profile = rate(profile, "d1", "relevant")
        profile = rate(profile, "d1", "relevant")
        assert profile.ratings == {"d1": "relevant"}

    def test_unknown_document_leaves_profile_unchanged(self):
        profile = rate(UserProfile(user_id="u"), "d1", "relevant", corpus_ids={"d1"})
        with pytest.raises(UnknownDocument):
            rate(profile, "ghost", "relevant", corpus_ids={"d1"})
        assert profile.ratings == {"d1": "relevant"}

    def test_invalid_verdict(self):
        with pytest.raises(ValueError):
            rate(UserProfile(user_id="u"), "d1", "meh")

    def test_rating_type_validation(self):
        with pytest.raises(ValueError):
            Rating(user_id="u", doc_id="d", verdict="nope")


class TestRecommend:
    def test_no_relevant_ratings_yields_empty(self):
        graph = random_graph(10, 3, seed=0)
        profile = rate(UserProfile(user_id="u"), "doc001", "irrelevant")
        assert recommend(profile, graph) == []

    def test_single_source_mirrors_neighbor_list(self):
        graph = random_graph(10, 4, seed=1)
        profile = rate(UserProfile(user_id="u"), "doc000", "relevant")
        got = recommend(profile, graph)
        expected = [(n, s) for n, s in graph.neighbors["doc000"] if n != "doc000"]
        assert got == sorted(expected, key=lambda kv: (-kv[1], kv[0]))

    def test_max_not_average_aggregation(self):
        graph = graph_from_dict(
            {
                "r1": [("c", 0.4), ("x", 0.2)],
                "r2": [("c", 0.7), ("y", 0.1)],
                "c": [("r1", 0.4)],
                "x": [("r1", 0.2)],
                "y": [("r2", 0.1)],
            }
        )
        profile = UserProfile(user_id="u", ratings={"r1": "relevant", "r2": "relevant"})
        got = dict(recommend(profile, graph))
        assert got["c"] == 0.7  # the max, not (0.4 + 0.7) / 2

    def test_irrelevant_removed_but_not_used_for_candidates(self):
        graph = graph_from_dict(
            {
                "r": [("a", 0.9), ("b", 0.8)],
                "i": [("z", 0.99)],  # neighbors of an irrelevant doc must not appear
                "a": [("r", 0.9)],
                "b": [("r", 0.8)],
                "z": [("i", 0.99)],
            }
        )
        profile = UserProfile(user_id="u", ratings={"r": "relevant", "i": "irrelevant", "b": "irrelevant"})
        got = recommend(profile, graph)
        assert got == [("a", 0.9)]  # b removed, z never generated

    def test_rated_docs_never_recommended(self):
        graph = random_graph(30, 8, seed=2)
        profile = UserProfile(user_id="u")
        for doc, verdict in [("doc000", "relevant"), ("doc001", "relevant"),
                             ("doc002", "irrelevant"), ("doc003", "relevant")]:
            profile = rate(profile, doc, verdict)
        got = recommend(profile, graph, n=30)
        assert not set(d for d, _ in got) & set(profile.ratings)

    def test_marking_irrelevant_removes_only_that_doc(self):
        graph = random_graph(30, 8, seed=3)
        profile = rate(UserProfile(user_id="u"), "doc010", "relevant")
        before = recommend(profile, graph, n=30)
        victim = before[2][0]
        after = recommend(rate(profile, victim, "irrelevant"), graph, n=30)
        assert dict(after) == {d: s for d, s in before if d != victim}

    def test_matches_brute_force_oracle_on_random_profiles(self):
        graph = random_graph(40, 10, seed=4)
        doc_ids = sorted(graph.neighbors)
        rng = np.random.default_rng(5)
        for trial in range(60):
            n_rated = int(rng.integers(0, 10))
            profile = UserProfile(user_id=f"u{trial}")
            for doc in rng.choice(doc_ids, size=n_rated, replace=False):
                verdict = "relevant" if rng.random() < 0.6 else "irrelevant"
                profile = rate(profile, str(doc), verdict)
            got = recommend(profile, graph, n=15)
            want = brute_force_recommend(profile, graph, 15)
            assert got == want

    def test_stale_rating_ignored(self):
        graph = random_graph(10, 3, seed=6)
        profile = UserProfile(user_id="u", ratings={"gone:doc": "relevant"})
        assert recommend(profile, graph) == []

    def test_n_validation(self):
        graph = random_graph(5, 2, seed=7)
        with pytest.raises(ValueError):
            recommend(UserProfile(user_id="u"), graph, n=0)


def test_profile_json_round_trip():
    profile = UserProfile(user_id="u", ratings={"a": "relevant", "b": "irrelevant"})
    assert profile_from_json(profile_to_json(profile)) == profile
