import json
from pathlib import Path

import httpx
from fastapi.testclient import TestClient

from litatlas.cli import main
from litatlas.documents import write_jsonl
from litatlas.service import create_app
from litatlas.store import load_snapshot, save_snapshot

from conftest import fast_config, synthetic_corpus

FIXTURES = Path(__file__).parent / "fixtures"


def write_corpus_jsonl(path: Path, docs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_jsonl(docs, fh)


def write_config(path: Path) -> Path:
    cfg = fast_config()
    path.write_text(json.dumps(cfg.to_json()))
    return path


class TestIngestCommand:
    def test_ingest_from_jsonl(self, tmp_path, capsys):
        docs_file = tmp_path / "docs.jsonl"
        write_corpus_jsonl(docs_file, synthetic_corpus(5, seed=0))
        corpus = tmp_path / "corpus.jsonl"
        code = main(["ingest", "--jsonl", str(docs_file), "--corpus", str(corpus)])
        assert code == 0
        out = capsys.readouterr().out
        assert "5 inserted" in out
        assert corpus.exists()

    def test_ingest_invalid_document_rejects_batch(self, tmp_path):
        docs_file = tmp_path / "docs.jsonl"
        good = synthetic_corpus(2, seed=1)
        with open(docs_file, "w") as fh:
            write_jsonl(good, fh)
            fh.write(json.dumps({"doc_id": "custom:bad", "source": "custom",
                                 "title": "", "abstract_text": "   "}) + "\n")
        corpus = tmp_path / "corpus.jsonl"
        code = main(["ingest", "--jsonl", str(docs_file), "--corpus", str(corpus)])
        assert code == 1
        assert not corpus.exists()

    def test_ingest_requires_a_source(self, tmp_path):
        code = main(["ingest", "--corpus", str(tmp_path / "c.jsonl")])
        assert code == 2


class TestBuildCommand:
    def test_build_writes_versioned_snapshot(self, tmp_path, capsys):
        corpus = tmp_path / "corpus.jsonl"
        write_corpus_jsonl(corpus, synthetic_corpus(8, seed=2))
        config = write_config(tmp_path / "config.json")
        store = tmp_path / "snapshot"
        code = main(["build", "--config", str(config), "--corpus", str(corpus),
                     "--store", str(store)])
        assert code == 0
        snapshot = load_snapshot(store)
        assert snapshot.corpus_version == 1
        assert len(snapshot.documents) == 8
        # a second build bumps the version
        main(["build", "--config", str(config), "--corpus", str(corpus),
              "--store", str(store)])
        assert load_snapshot(store).corpus_version == 2

    def test_build_empty_corpus_fails_without_snapshot(self, tmp_path, capsys):
        store = tmp_path / "snapshot"
        code = main(["build", "--corpus", str(tmp_path / "missing.jsonl"),
                     "--store", str(store)])
        assert code == 1
        assert "EmptyCorpus" in capsys.readouterr().err or not store.exists()
        assert not store.exists()

    def test_build_determinism_modulo_version_and_timestamp(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        write_corpus_jsonl(corpus, synthetic_corpus(8, seed=3))
        config = write_config(tmp_path / "config.json")
        store_a, store_b = tmp_path / "a", tmp_path / "b"
        main(["build", "--config", str(config), "--corpus", str(corpus), "--store", str(store_a)])
        main(["build", "--config", str(config), "--corpus", str(corpus), "--store", str(store_b)])
        a, b = load_snapshot(store_a), load_snapshot(store_b)
        assert a.vocabulary == b.vocabulary
        assert a.lsa_model == b.lsa_model
        assert a.doc_vectors == b.doc_vectors
        assert a.similarity_graph == b.similarity_graph
        assert a.inverted_index == b.inverted_index
        assert a.embedding == b.embedding
        assert a.documents == b.documents

    def test_store_env_var_override(self, tmp_path, monkeypatch):
        corpus = tmp_path / "corpus.jsonl"
        write_corpus_jsonl(corpus, synthetic_corpus(8, seed=4))
        config = write_config(tmp_path / "config.json")
        target = tmp_path / "env-snapshot"
        monkeypatch.setenv("LITATLAS_STORE", str(target))
        main(["build", "--config", str(config), "--corpus", str(corpus),
              "--store", str(tmp_path / "ignored")])
        assert target.exists()
        assert not (tmp_path / "ignored").exists()

    def test_remote_store_uploads_snapshot(self, tmp_path, monkeypatch, snapshot12):
        # a running service backed by an initial snapshot
        serve_dir = tmp_path / "served"
        save_snapshot(snapshot12, serve_dir)
        app = create_app(serve_dir)
        client = TestClient(app)

        def fake_get(url, **kw):
            assert url.startswith("http://remote-store")
            return client.get(url.replace("http://remote-store", ""))

        def fake_post(url, content=None, headers=None, timeout=None):
            assert url.startswith("http://remote-store")
            return client.post(url.replace("http://remote-store", ""),
                               content=content, headers=headers)

        monkeypatch.setattr(httpx, "get", fake_get)
        monkeypatch.setattr(httpx, "post", fake_post)

        corpus = tmp_path / "corpus.jsonl"
        write_corpus_jsonl(corpus, synthetic_corpus(9, seed=5))
        config = write_config(tmp_path / "config.json")
        code = main(["build", "--config", str(config), "--corpus", str(corpus),
                     "--store", "http://remote-store"])
        assert code == 0
        health = client.get("/api/health").json()
        assert health["corpus_version"] == snapshot12.corpus_version + 1
        assert health["n_documents"] == 9


def test_ingest_then_build_end_to_end(tmp_path):
    # ingest a 5-document fixture, build, and expect 5 embedding rows
    docs_file = tmp_path / "docs.jsonl"
    write_corpus_jsonl(docs_file, synthetic_corpus(5, seed=6))
    corpus = tmp_path / "corpus.jsonl"
    config = write_config(tmp_path / "config.json")
    store = tmp_path / "snapshot"
    assert main(["ingest", "--jsonl", str(docs_file), "--corpus", str(corpus)]) == 0
    assert main(["build", "--config", str(config), "--corpus", str(corpus),
                 "--store", str(store)]) == 0
    snapshot = load_snapshot(store)
    assert len(snapshot.embedding.ids) == 5
    assert (store / "embedding.csv").read_text().count("\n") == 6  # header + 5 rows
