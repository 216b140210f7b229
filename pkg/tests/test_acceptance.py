"""Acceptance suite: one test per release criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Every tolerance is pinned here; nothing is deferred to later
calibration.
"""
import math
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from litatlas.documents import Document
from litatlas.lsa import _randomized_svd
from litatlas.recommend import UserProfile, rate, recommend
from litatlas.search import build_index, search_text
from litatlas.similarity import SimilarityGraph, build_similarity_graph
from litatlas.store import load_snapshot, save_snapshot
from litatlas.textpipe import (
    TokenizerConfig,
    Vocabulary,
    build_vocabulary,
    idf,
    tfidf_text,
    tfidf_vector,
)
from litatlas.tsne import (
    TsneConfig,
    calibrate_sigma,
    gradient,
    kl_divergence,
    low_dim_affinities,
    pairwise_affinities,
    run_tsne,
    squared_distances,
)


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE FAIL: {name}", flush=True)
        raise
    print(f"ACCEPTANCE PASS: {name}", flush=True)


def rich_corpus(n: int, seed: int = 0, n_topics: int = 10, vocab_per_topic: int = 200):
    """Invented-word corpus with topical structure and a realistic vocabulary size."""
    rng = np.random.default_rng(seed)
    topic_words = [
        [f"topic{t}term{i}" for i in range(vocab_per_topic)] for t in range(n_topics)
    ]
    shared = [f"shared{i}" for i in range(60)]
    docs = []
    for i in range(n):
        t = i % n_topics
        pool = topic_words[t] + topic_words[(t + 1) % n_topics][:40] + shared
        words = rng.choice(pool, size=int(rng.integers(60, 120)))
        docs.append(
            Document(
                doc_id=f"custom:{i:05d}",
                source="custom",
                title=f"Synthetic abstract {i}",
                abstract_text=" ".join(words),
                venue=f"Venue {t}",
                published_year=2005 + t,
            )
        )
    return docs


def test_idf_formula():
    with criterion("idf formula: ln(|D|/df) at (4,1), (10,10), (1000,10) within 1e-12"):
        config = TokenizerConfig(min_document_frequency=1, max_document_fraction=1.0)
        cases = [((4, 1), math.log(4)), ((10, 10), 0.0), ((1000, 10), math.log(100))]
        for (corpus_size, df), expected in cases:
            vocab = Vocabulary(["t"], [df], corpus_size, config)
            assert abs(idf(vocab, "t") - expected) <= 1e-12


def test_search_oracle_equivalence():
    with criterion(
        "search oracle: 200 docs x 50 queries match brute-force cosine exactly, "
        "self-abstract scores 1.0, in under 10 s"
    ):
        start = time.monotonic()
        docs = rich_corpus(200, seed=1)
        config = TokenizerConfig(min_document_frequency=1)
        vocabulary = build_vocabulary(docs, config)
        vectors = {d.doc_id: tfidf_vector(d, vocabulary) for d in docs}
        index = build_index(vectors, vocabulary, corpus_version=1)

        dim = len(vocabulary)
        dense = {}
        for doc_id, vec in vectors.items():
            row = np.zeros(dim)
            row[vec.indices] = vec.weights
            dense[doc_id] = row

        rng = np.random.default_rng(2)
        for _ in range(50):
            words = list(rng.choice(vocabulary.terms, size=int(rng.integers(3, 25))))
            words += ["notinvocabulary"] * int(rng.integers(0, 3))
            text = " ".join(words)
            got = search_text(index, vocabulary, text, limit=30)

            query = tfidf_text(text, vocabulary)
            q = np.zeros(dim)
            q[query.indices] = query.weights
            brute = []
            for doc_id, row in dense.items():
                if np.any(row[query.indices] > 0):
                    brute.append((doc_id, float(q @ row)))
            brute.sort(key=lambda kv: (-kv[1], kv[0]))
            brute = brute[:30]
            assert [d for d, _ in got.ranked] == [d for d, _ in brute]
            for (_, s_got), (_, s_brute) in zip(got.ranked, brute):
                assert abs(s_got - s_brute) <= 1e-9

        for doc in docs[::40]:
            result = search_text(index, vocabulary, doc.abstract_text, limit=5)
            assert result.ranked[0][0] == doc.doc_id
            assert abs(result.ranked[0][1] - 1.0) <= 1e-9

        elapsed = time.monotonic() - start
        assert elapsed < 10.0, f"search criterion took {elapsed:.1f}s"


def test_svd_oracle():
    with criterion(
        "SVD oracle: top-5 singular values on 25 random matrices up to 50x80 "
        "within 1e-6 of dense SVD; components orthonormal within 1e-6"
    ):
        import scipy.sparse as sp

        rng = np.random.default_rng(3)
        for trial in range(25):
            m = int(rng.integers(8, 51))
            n = int(rng.integers(8, 81))
            a = rng.uniform(0.0, 1.0, size=(m, n))
            k = min(5, min(m, n))
            u, s, vt = _randomized_svd(sp.csr_matrix(a), k, seed=trial)
            s_oracle = np.linalg.svd(a, compute_uv=False)[:k]
            assert np.abs(s - s_oracle).max() <= 1e-6
            assert np.abs(vt @ vt.T - np.eye(k)).max() <= 1e-6


def test_tsne_calibration():
    with criterion(
        "t-SNE calibration: 100 random 150-D points at perplexity 15, every "
        "row entropy within 1e-5 of ln 15"
    ):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((100, 150))
        d2 = squared_distances(x)
        target = math.log(15.0)
        for i in range(100):
            row = d2[i, np.arange(100) != i]
            cal = calibrate_sigma(row, perplexity=15.0, tolerance=1e-5, max_iters=50)
            # entropy recomputed independently of the search
            p = cal.conditional
            entropy = float(-np.sum(p[p > 0] * np.log(p[p > 0])))
            assert abs(entropy - target) <= 1e-5


def test_tsne_gradient():
    with criterion(
        "t-SNE gradient: analytic vs central finite differences on 10 points, "
        "max component error <= 1e-4"
    ):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((10, 6))
        aff = pairwise_affinities(x, TsneConfig(perplexity=4))
        y = rng.standard_normal((10, 2))
        q, w = low_dim_affinities(y)
        analytic = gradient(aff.p, q, w, y)
        eps = 1e-5
        fd = np.zeros_like(y)
        for i in range(10):
            for d in range(2):
                yp = y.copy()
                yp[i, d] += eps
                ym = y.copy()
                ym[i, d] -= eps
                fd[i, d] = (
                    kl_divergence(aff.p, low_dim_affinities(yp)[0])
                    - kl_divergence(aff.p, low_dim_affinities(ym)[0])
                ) / (2 * eps)
        assert np.abs(analytic - fd).max() <= 1e-4


def test_tsne_descent_and_quality():
    with criterion(
        "t-SNE descent + quality: 150 points from 3 Gaussians, window-averaged "
        "KL non-increasing after iteration 250 (1e-3) and 10-NN purity >= 0.9, "
        "in under 60 s"
    ):
        start = time.monotonic()
        rng = np.random.default_rng(6)
        centers = rng.standard_normal((3, 150)) * 10.0
        x = np.vstack([c + rng.standard_normal((50, 150)) for c in centers])
        labels = np.repeat([0, 1, 2], 50)

        config = TsneConfig(perplexity=15.0)  # defaults: 1000 iterations, EE to 250
        emb = run_tsne(pairwise_affinities(x, config), config)

        trace = emb.kl_trace
        windows = [trace[i : i + 50].mean() for i in range(250, len(trace) - 49, 50)]
        assert np.all(np.diff(windows) <= 1e-3)

        points = emb.points
        purity = 0.0
        for i in range(150):
            d = np.sum((points - points[i]) ** 2, axis=1)
            d[i] = np.inf
            nn = np.argsort(d)[:10]
            purity += float(np.mean(labels[nn] == labels[i]))
        purity /= 150
        assert purity >= 0.9, f"purity {purity:.3f}"

        elapsed = time.monotonic() - start
        assert elapsed < 60.0, f"descent criterion took {elapsed:.1f}s"


def test_recommendation_oracle():
    with criterion(
        "recommendation oracle: 100-doc graph x 200 random profiles equal "
        "brute-force max-aggregation; 0.4/0.7 scores 0.7; irrelevant removed"
    ):
        rng = np.random.default_rng(7)
        vectors = {f"doc{i:03d}": rng.standard_normal(8) for i in range(100)}
        graph = build_similarity_graph(vectors, 20)
        doc_ids = sorted(graph.neighbors)

        def oracle(profile: UserProfile, n: int):
            relevant = [d for d, v in profile.ratings.items()
                        if v == "relevant" and d in graph.neighbors]
            scores = {}
            for r in relevant:
                for c, s in graph.neighbors[r]:
                    if c not in scores or s > scores[c]:
                        scores[c] = s
            for rated in profile.ratings:
                scores.pop(rated, None)
            return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:n]

        for trial in range(200):
            profile = UserProfile(user_id=f"u{trial}")
            for doc in rng.choice(doc_ids, size=int(rng.integers(0, 12)), replace=False):
                verdict = "relevant" if rng.random() < 0.6 else "irrelevant"
                profile = rate(profile, str(doc), verdict)
            assert recommend(profile, graph, n=20) == oracle(profile, 20)

        # shared candidate scored by the max of 0.4 and 0.7, never the average
        star = SimilarityGraph(
            neighbors={
                "r1": [("c", 0.4)], "r2": [("c", 0.7)],
                "c": [("r1", 0.4)],
            },
            k_neighbors=20,
        )
        profile = UserProfile(user_id="u", ratings={"r1": "relevant", "r2": "relevant"})
        assert recommend(profile, star) == [("c", 0.7)]

        # irrelevant marks remove, and never generate candidates
        profile2 = rate(profile, "c", "irrelevant")
        assert recommend(profile2, star) == []


def test_end_to_end_pipeline_scale(tmp_path):
    with criterion(
        "end-to-end scale: ingest -> build -> serve on 1,000 synthetic "
        "abstracts in under 5 minutes and under 4 GB"
    ):
        import psutil
        from fastapi.testclient import TestClient

        from litatlas.cli import main
        from litatlas.documents import write_jsonl
        from litatlas.service import create_app

        start = time.monotonic()
        docs = rich_corpus(1000, seed=8)
        docs_file = tmp_path / "docs.jsonl"
        with open(docs_file, "w", encoding="utf-8") as fh:
            write_jsonl(docs, fh)

        corpus = tmp_path / "corpus.jsonl"
        store = tmp_path / "snapshot"
        assert main(["ingest", "--jsonl", str(docs_file), "--corpus", str(corpus)]) == 0
        # paper-scale defaults: 150 LSA components, perplexity 15, 1000 iterations
        assert main(["build", "--corpus", str(corpus), "--store", str(store)]) == 0

        snapshot = load_snapshot(store)
        assert len(snapshot.documents) == 1000
        assert len(snapshot.embedding.ids) == 1000
        assert snapshot.lsa_model.n_components == 150

        app = create_app(store)
        with TestClient(app) as client:
            assert client.get("/api/health").json()["n_documents"] == 1000
            assert len(client.get("/api/map").json()) == 1000
            hit = client.post(
                "/api/search", json={"text": docs[17].abstract_text, "limit": 3}
            ).json()
            assert hit["results"][0]["doc_id"] == docs[17].doc_id

        elapsed = time.monotonic() - start
        rss_gb = psutil.Process().memory_info().rss / 2**30
        assert elapsed < 300.0, f"pipeline took {elapsed:.0f}s"
        assert rss_gb < 4.0, f"rss {rss_gb:.2f} GB"
        print(f"  (pipeline on 1,000 abstracts: {elapsed:.0f}s, rss {rss_gb:.2f} GB)")


def test_search_privacy(tmp_path, snapshot12):
    with criterion(
        "privacy: POST /api/search leaves the persisted store byte-identical"
    ):
        import hashlib

        from fastapi.testclient import TestClient

        from litatlas.service import create_app

        data_dir = tmp_path / "data"
        save_snapshot(snapshot12, data_dir / "snapshot")

        def fingerprint():
            return {
                str(p.relative_to(data_dir)): hashlib.sha256(p.read_bytes()).hexdigest()
                for p in sorted(data_dir.rglob("*"))
                if p.is_file()
            }

        app = create_app(data_dir / "snapshot", state_dir=data_dir)
        with TestClient(app) as client:
            before = fingerprint()
            for doc in snapshot12.documents:
                body = client.post(
                    "/api/search", json={"text": doc.abstract_text, "limit": 10}
                )
                assert body.status_code == 200
            after = fingerprint()
        assert before == after


def test_runs_without_ui(snapshot_dir):
    with criterion("all primary criteria run with no UI component built"):
        import sys

        from fastapi.testclient import TestClient

        from litatlas.service import create_app

        # no frontend bundle anywhere near the package, and the service is
        # fully functional without one
        package_root = Path(__import__("litatlas").__file__).parent
        assert not list(package_root.rglob("*.js"))
        assert not list(package_root.rglob("*.html"))
        app = create_app(snapshot_dir, static_dir=None)
        with TestClient(app) as client:
            assert client.get("/api/health").status_code == 200
        assert not any(name.startswith("node") for name in sys.modules)


def test_barnes_hut_theta_zero_gradient_optional():
    with criterion(
        "(secondary, optional) Barnes-Hut theta=0 gradient equals the exact "
        "gradient within 1e-6 on 50 points"
    ):
        from litatlas.bh import bh_gradient, sparse_affinities

        rng = np.random.default_rng(9)
        x = rng.standard_normal((50, 12))
        config = TsneConfig(perplexity=8)
        sparse = sparse_affinities(x, config)
        y = rng.standard_normal((50, 2))
        approx = bh_gradient(sparse.p, y, theta=0.0)
        q, w = low_dim_affinities(y)
        exact = gradient(sparse.p.toarray(), q, w, y)
        assert np.abs(approx - exact).max() <= 1e-6
