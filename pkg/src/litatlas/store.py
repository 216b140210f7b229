"""Corpus storage and atomic snapshot persistence.

A snapshot is an immutable directory bundling the corpus with every
derived model: human-readable metadata as JSON/JSONL/CSV, numeric arrays
as flat little-endian binaries beside JSON headers (dtype, shape, doc_id
order). Saves go through a temp directory plus rename, so a partially
written snapshot is never visible; loads verify per-file checksums and
cross-references and reject rather than repair.
"""
from __future__ import annotations

import datetime as dt
import hashlib
import json
import os
import shutil
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .documents import Document, document_from_json, document_to_json, validate_document
from .errors import CorruptSnapshot, InvalidDocument, IoFailure, MissingSnapshot
from .lsa import LsaModel, VectorTable
from .recommend import UserProfile, read_profiles_jsonl, write_profiles_jsonl
from .search import InvertedIndex
from .similarity import SimilarityGraph, graph_from_jsonl, graph_to_jsonl
from .textpipe import Vocabulary
from .tsne import EmbeddingResult, TsneConfig

MANIFEST = "manifest.json"
SNAPSHOT_FILES = (
    "corpus.jsonl",
    "vocabulary.json",
    "lsa.bin",
    "lsa.json",
    "vectors.bin",
    "vectors.json",
    "graph.jsonl",
    "index.bin",
    "index.json",
    "embedding.csv",
    "embedding_diag.json",
)


@dataclass(frozen=True)
class ModelSnapshot:
    """Corpus plus all derived structures built from one corpus version."""

    corpus_version: int
    documents: tuple[Document, ...]
    vocabulary: Vocabulary
    lsa_model: LsaModel
    doc_vectors: VectorTable
    similarity_graph: SimilarityGraph
    inverted_index: InvertedIndex
    embedding: EmbeddingResult
    build_config: PipelineConfig
    build_timestamp: dt.datetime
    build_warnings: tuple[str, ...] = ()
    checksum: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "documents", tuple(self.documents))
        object.__setattr__(self, "build_warnings", tuple(self.build_warnings))

    def doc_ids(self) -> set[str]:
        return {d.doc_id for d in self.documents}

    def validate(self) -> None:
        """Cross-reference integrity; raises ValueError on violation."""
        ids = self.doc_ids()
        if len(ids) != len(self.documents):
            raise ValueError("duplicate doc_ids in corpus")
        for doc_id, neighbors in self.similarity_graph.neighbors.items():
            if doc_id not in ids:
                raise ValueError(f"graph doc {doc_id} not in corpus")
            for n, _ in neighbors:
                if n not in ids:
                    raise ValueError(f"graph neighbor {n} not in corpus")
        for doc_id in self.embedding.ids:
            if doc_id not in ids:
                raise ValueError(f"embedded doc {doc_id} not in corpus")
        for doc_id in self.doc_vectors.ids:
            if doc_id not in ids:
                raise ValueError(f"vector doc {doc_id} not in corpus")
        for term, postings in self.inverted_index.postings.items():
            for doc_id, _ in postings:
                if doc_id not in ids:
                    raise ValueError(f"indexed doc {doc_id} not in corpus")
        if self.inverted_index.vocabulary_checksum != self.vocabulary.checksum():
            raise ValueError("index was built against a different vocabulary")
        if self.inverted_index.corpus_version != self.corpus_version:
            raise ValueError("index corpus_version mismatch")


class CorpusStore:
    """Single-writer JSONL corpus keyed by doc_id."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def load(self) -> list[Document]:
        if not self.path.exists():
            return []
        with open(self.path, encoding="utf-8") as fh:
            return [document_from_json(json.loads(line)) for line in fh if line.strip()]

    def upsert(self, docs: list[Document]) -> tuple[int, int]:
        """Insert or overwrite by doc_id; the whole batch is validated first."""
        for doc in docs:
            validate_document(doc)  # rejects the batch before any write
        current = {d.doc_id: d for d in self.load()}
        inserted = updated = 0
        for doc in docs:
            if doc.doc_id in current:
                updated += 1
            else:
                inserted += 1
            current[doc.doc_id] = doc
        if docs:
            self._write(current)
        return inserted, updated

    def _write(self, current: dict[str, Document]) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".corpus-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                for doc_id in sorted(current):
                    fh.write(json.dumps(document_to_json(current[doc_id]), sort_keys=True) + "\n")
            os.replace(tmp, self.path)
        except OSError as exc:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise IoFailure(self.path, str(exc)) from exc


# -- flat binary array files -------------------------------------------------


def _write_arrays(bin_path: Path, arrays: list[tuple[str, np.ndarray]]) -> list[dict]:
    meta = []
    offset = 0
    with open(bin_path, "wb") as fh:
        for name, arr in arrays:
            arr = np.ascontiguousarray(arr)
            dtype = "<i8" if arr.dtype.kind == "i" else "<f8"
            arr = arr.astype(dtype, copy=False)
            fh.write(arr.tobytes())
            meta.append(
                {"name": name, "dtype": dtype, "shape": list(arr.shape), "offset": offset}
            )
            offset += arr.nbytes
    return meta


def _read_arrays(bin_path: Path, meta: list[dict]) -> dict[str, np.ndarray]:
    blob = bin_path.read_bytes()
    out = {}
    for entry in meta:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        end = start + count * dtype.itemsize
        if end > len(blob):
            raise CorruptSnapshot(f"{bin_path.name}: array {entry['name']} out of bounds")
        out[entry["name"]] = np.frombuffer(blob[start:end], dtype=dtype).reshape(shape).copy()
    return out


def _file_checksum(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


# -- per-file writers (module-level so tests can inject faults) ---------------


def _write_corpus(directory: Path, snapshot: ModelSnapshot) -> None:
    with open(directory / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for doc in snapshot.documents:
            fh.write(json.dumps(document_to_json(doc), sort_keys=True) + "\n")


def _write_vocabulary(directory: Path, snapshot: ModelSnapshot) -> None:
    payload = snapshot.vocabulary.to_json()
    payload["corpus_version"] = snapshot.corpus_version
    (directory / "vocabulary.json").write_text(json.dumps(payload, sort_keys=True))


def _write_lsa(directory: Path, snapshot: ModelSnapshot) -> None:
    meta = _write_arrays(
        directory / "lsa.bin",
        [
            ("components", snapshot.lsa_model.components),
            ("singular_values", snapshot.lsa_model.singular_values),
        ],
    )
    header = {"arrays": meta, "corpus_version": snapshot.corpus_version}
    (directory / "lsa.json").write_text(json.dumps(header, sort_keys=True))


def _write_vectors(directory: Path, snapshot: ModelSnapshot) -> None:
    meta = _write_arrays(directory / "vectors.bin", [("vectors", snapshot.doc_vectors.matrix)])
    header = {
        "arrays": meta,
        "doc_ids": snapshot.doc_vectors.ids,
        "corpus_version": snapshot.corpus_version,
    }
    (directory / "vectors.json").write_text(json.dumps(header, sort_keys=True))


def _write_graph(directory: Path, snapshot: ModelSnapshot) -> None:
    with open(directory / "graph.jsonl", "w", encoding="utf-8") as fh:
        graph_to_jsonl(snapshot.similarity_graph, fh)


def _write_index(directory: Path, snapshot: ModelSnapshot) -> None:
    index = snapshot.inverted_index
    doc_ids = sorted({d for lst in index.postings.values() for d, _ in lst})
    doc_pos = {d: i for i, d in enumerate(doc_ids)}
    terms = sorted(index.postings)
    offsets = [0]
    docs_flat: list[int] = []
    weights_flat: list[float] = []
    for term in terms:
        for doc_id, weight in index.postings[term]:
            docs_flat.append(doc_pos[doc_id])
            weights_flat.append(weight)
        offsets.append(len(docs_flat))
    meta = _write_arrays(
        directory / "index.bin",
        [
            ("terms", np.asarray(terms, dtype=np.int64)),
            ("offsets", np.asarray(offsets, dtype=np.int64)),
            ("doc_positions", np.asarray(docs_flat, dtype=np.int64)),
            ("weights", np.asarray(weights_flat, dtype=np.float64)),
        ],
    )
    header = {
        "arrays": meta,
        "doc_ids": doc_ids,
        "n_terms": index.n_terms,
        "corpus_version": index.corpus_version,
        "vocabulary_checksum": index.vocabulary_checksum,
    }
    (directory / "index.json").write_text(json.dumps(header, sort_keys=True))


def _write_embedding(directory: Path, snapshot: ModelSnapshot) -> None:
    emb = snapshot.embedding
    with open(directory / "embedding.csv", "w", encoding="utf-8") as fh:
        fh.write("doc_id,x,y\n")
        for doc_id, (x, y) in zip(emb.ids, emb.points):
            fh.write(f"{doc_id},{float(x)!r},{float(y)!r}\n")
    diag = {
        "final_kl": emb.final_kl,
        "flagged_rows": list(emb.flagged_rows),
        "config": emb.config.to_json(),
        "kl_trace": [float(v) for v in emb.kl_trace],
        "corpus_version": snapshot.corpus_version,
    }
    (directory / "embedding_diag.json").write_text(json.dumps(diag, sort_keys=True))


def save_snapshot(snapshot: ModelSnapshot, path: str | Path) -> str:
    """Write the snapshot atomically; returns its content checksum.

    All files land in a temp directory first; the final rename makes the
    snapshot visible only once complete. An existing snapshot at the path
    stays loadable until the replacement is fully in place.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(dir=path.parent, prefix=f".{path.name}-incoming-"))
    except OSError as exc:
        raise IoFailure(path, str(exc)) from exc
    try:
        _write_corpus(tmp, snapshot)
        _write_vocabulary(tmp, snapshot)
        _write_lsa(tmp, snapshot)
        _write_vectors(tmp, snapshot)
        _write_graph(tmp, snapshot)
        _write_index(tmp, snapshot)
        _write_embedding(tmp, snapshot)
        checksums = {name: _file_checksum(tmp / name) for name in SNAPSHOT_FILES}
        content_checksum = _content_checksum(checksums)
        manifest = {
            "corpus_version": snapshot.corpus_version,
            "build_timestamp": snapshot.build_timestamp.isoformat(),
            "build_config": snapshot.build_config.to_json(),
            "build_warnings": list(snapshot.build_warnings),
            "checksums": checksums,
            "snapshot_checksum": content_checksum,
        }
        (tmp / MANIFEST).write_text(json.dumps(manifest, sort_keys=True, indent=1))
    except OSError as exc:
        shutil.rmtree(tmp, ignore_errors=True)
        raise IoFailure(path, str(exc)) from exc
    except Exception:
        shutil.rmtree(tmp, ignore_errors=True)
        raise

    try:
        if path.exists():
            old = Path(tempfile.mkdtemp(dir=path.parent, prefix=f".{path.name}-old-"))
            os.rename(path, old / "snapshot")
            os.rename(tmp, path)
            shutil.rmtree(old, ignore_errors=True)
        else:
            os.rename(tmp, path)
    except OSError as exc:
        shutil.rmtree(tmp, ignore_errors=True)
        raise IoFailure(path, str(exc)) from exc
    return content_checksum


def _content_checksum(checksums: dict[str, str]) -> str:
    canon = "\n".join(f"{name}:{checksums[name]}" for name in sorted(checksums))
    return hashlib.sha256(canon.encode()).hexdigest()


def load_snapshot(path: str | Path) -> ModelSnapshot:
    """Load and fully validate a snapshot; corruption is rejected, never repaired."""
    path = Path(path)
    manifest_path = path / MANIFEST
    if not path.is_dir() or not manifest_path.exists():
        raise MissingSnapshot(path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except ValueError as exc:
        raise CorruptSnapshot(f"manifest unreadable: {exc}") from exc

    checksums = manifest.get("checksums", {})
    for name in SNAPSHOT_FILES:
        target = path / name
        if not target.exists():
            raise CorruptSnapshot(f"missing file {name}")
        if name not in checksums:
            raise CorruptSnapshot(f"manifest lacks a checksum for {name}")
        actual = _file_checksum(target)
        if actual != checksums[name]:
            raise CorruptSnapshot(f"checksum mismatch for {name}")
    if manifest.get("snapshot_checksum") != _content_checksum(checksums):
        raise CorruptSnapshot("snapshot checksum does not match file checksums")

    version = manifest["corpus_version"]
    try:
        documents = tuple(
            document_from_json(json.loads(line))
            for line in (path / "corpus.jsonl").read_text(encoding="utf-8").splitlines()
            if line.strip()
        )

        vocab_payload = json.loads((path / "vocabulary.json").read_text())
        _check_version(vocab_payload, version, "vocabulary.json")
        vocab_payload.pop("corpus_version", None)
        vocabulary = Vocabulary.from_json(vocab_payload)

        lsa_header = json.loads((path / "lsa.json").read_text())
        _check_version(lsa_header, version, "lsa.json")
        lsa_arrays = _read_arrays(path / "lsa.bin", lsa_header["arrays"])
        lsa_model = LsaModel(
            components=lsa_arrays["components"],
            singular_values=lsa_arrays["singular_values"],
        )

        vec_header = json.loads((path / "vectors.json").read_text())
        _check_version(vec_header, version, "vectors.json")
        vec_arrays = _read_arrays(path / "vectors.bin", vec_header["arrays"])
        doc_vectors = VectorTable(vec_header["doc_ids"], vec_arrays["vectors"])

        config = PipelineConfig.from_json(manifest["build_config"])
        with open(path / "graph.jsonl", encoding="utf-8") as fh:
            graph = graph_from_jsonl(fh, k_neighbors=config.k_neighbors)
        graph.validate()

        index_header = json.loads((path / "index.json").read_text())
        _check_version(index_header, version, "index.json")
        index_arrays = _read_arrays(path / "index.bin", index_header["arrays"])
        index_doc_ids = index_header["doc_ids"]
        postings: dict[int, list[tuple[str, float]]] = {}
        offsets = index_arrays["offsets"]
        for t, term in enumerate(index_arrays["terms"]):
            lo, hi = int(offsets[t]), int(offsets[t + 1])
            postings[int(term)] = [
                (index_doc_ids[int(d)], float(w))
                for d, w in zip(index_arrays["doc_positions"][lo:hi], index_arrays["weights"][lo:hi])
            ]
        index = InvertedIndex(
            postings=postings,
            n_terms=index_header["n_terms"],
            corpus_version=index_header["corpus_version"],
            vocabulary_checksum=index_header["vocabulary_checksum"],
        )
        index.validate()

        embedding = _read_embedding(path, version)

        snapshot = ModelSnapshot(
            corpus_version=version,
            documents=documents,
            vocabulary=vocabulary,
            lsa_model=lsa_model,
            doc_vectors=doc_vectors,
            similarity_graph=graph,
            inverted_index=index,
            embedding=embedding,
            build_config=config,
            build_timestamp=dt.datetime.fromisoformat(manifest["build_timestamp"]),
            build_warnings=tuple(manifest.get("build_warnings", ())),
            checksum=manifest["snapshot_checksum"],
        )
        snapshot.validate()
    except CorruptSnapshot:
        raise
    except (KeyError, ValueError, IndexError, InvalidDocument) as exc:
        raise CorruptSnapshot(str(exc)) from exc
    return snapshot


def _check_version(header: dict, version: int, name: str) -> None:
    if header.get("corpus_version") != version:
        raise CorruptSnapshot(
            f"{name} was built from corpus_version {header.get('corpus_version')}, "
            f"manifest says {version}"
        )


def _read_embedding(path: Path, version: int) -> EmbeddingResult:
    diag = json.loads((path / "embedding_diag.json").read_text())
    _check_version(diag, version, "embedding_diag.json")
    ids = []
    points = []
    with open(path / "embedding.csv", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "doc_id,x,y":
            raise CorruptSnapshot(f"unexpected embedding.csv header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc_id, x, y = line.rsplit(",", 2)
            ids.append(doc_id)
            points.append((float(x), float(y)))
    return EmbeddingResult(
        ids=tuple(ids),
        points=np.asarray(points, dtype=np.float64).reshape(len(ids), 2),
        final_kl=float(diag["final_kl"]),
        kl_trace=np.asarray(diag["kl_trace"], dtype=np.float64),
        config=TsneConfig.from_json(diag["config"]),
        flagged_rows=tuple(diag["flagged_rows"]),
    )


def snapshot_version(path: str | Path) -> int | None:
    """corpus_version of the snapshot at path, or None if there is none."""
    manifest_path = Path(path) / MANIFEST
    if not manifest_path.exists():
        return None
    try:
        return int(json.loads(manifest_path.read_text())["corpus_version"])
    except (ValueError, KeyError):
        return None


class UserStore:
    """users.jsonl persistence, rewritten atomically on every change batch."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.profiles: dict[str, UserProfile] = {}
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                self.profiles = read_profiles_jsonl(fh)

    def get(self, user_id: str) -> UserProfile:
        return self.profiles.get(user_id, UserProfile(user_id=user_id))

    def put(self, profile: UserProfile) -> None:
        self.profiles[profile.user_id] = profile
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".users-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                write_profiles_jsonl(self.profiles, fh)
            os.replace(tmp, self.path)
        except OSError as exc:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise IoFailure(self.path, str(exc)) from exc
