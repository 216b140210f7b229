"""Regenerate tests/fixture.json from the real backend.

Builds a 5-document snapshot with the Python package, serves it
in-process, and records the payloads the UI tests replay. Run from the
repository root:

    python frontend/scripts/record_fixture.py
"""
import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from litatlas.config import PipelineConfig
from litatlas.documents import Document
from litatlas.pipeline import build_snapshot
from litatlas.service import create_app
from litatlas.store import save_snapshot
from litatlas.textpipe import TokenizerConfig
from litatlas.tsne import TsneConfig

TEXTS = {
    "custom:0001": ("Tumor suppressor pathways",
                    "tumor suppressor pathway regulates cell cycle checkpoints and apoptosis in carcinoma"),
    "custom:0002": ("Checkpoint kinases in carcinoma",
                    "checkpoint kinases coordinate cell cycle arrest and apoptosis in tumor cells"),
    "custom:0003": ("Synaptic plasticity and memory",
                    "synaptic plasticity in hippocampus supports memory consolidation and learning"),
    "custom:0004": ("Hippocampal learning circuits",
                    "hippocampus circuits drive learning and memory through synaptic plasticity"),
    "custom:0005": ("Apoptosis signaling in neurons",
                    "apoptosis signaling interacts with synaptic pruning in neurons and cell cycle exit"),
}


def main() -> None:
    docs = [
        Document(doc_id=doc_id, source="custom", title=title, abstract_text=abstract,
                 authors=("Fixture Author",), venue="Fixture Journal", published_year=2021)
        for doc_id, (title, abstract) in TEXTS.items()
    ]
    config = PipelineConfig(
        tokenizer=TokenizerConfig(min_document_frequency=1),
        lsa_components=4,
        tsne=TsneConfig(perplexity=3, n_iterations=120, early_exaggeration_iters=30,
                        momentum_switch_iter=30, seed=5),
        k_neighbors=4,
    )
    snapshot = build_snapshot(docs, config, corpus_version=1)
    with tempfile.TemporaryDirectory() as staging:
        path = Path(staging) / "snap"
        save_snapshot(snapshot, path)
        client = TestClient(create_app(path))
        fixture = {
            "map": client.get("/api/map").json(),
            "papers": {d.doc_id: client.get(f"/api/papers/{d.doc_id}").json() for d in docs},
            "health": client.get("/api/health").json(),
            "graph": {k: [[n, s] for n, s in v]
                      for k, v in snapshot.similarity_graph.neighbors.items()},
            "search_self": client.post(
                "/api/search", json={"text": TEXTS["custom:0003"][1], "limit": 20}
            ).json(),
            "search_stopwords": client.post(
                "/api/search", json={"text": "the of and is", "limit": 20}
            ).json(),
        }
    out = Path(__file__).parent.parent / "tests" / "fixture.json"
    out.write_text(json.dumps(fixture, indent=1))
    print(f"wrote {out} ({len(fixture['map'])} map rows)")


if __name__ == "__main__":
    main()
