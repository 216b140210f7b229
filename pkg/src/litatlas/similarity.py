"""Cosine similarity over LSA vectors and the precomputed neighbor graph.

Every document gets its k highest-cosine neighbors, computed exhaustively
(the operating scale is ~10^4 documents, where O(n^2) is fine). Ties are
broken lexicographically by doc_id so graph construction is deterministic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, UnknownDocument
from .lsa import VectorTable


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """<a,b>/(|a||b|), clamped to [-1, 1]; 0 if either vector is zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(float(a @ b) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class SimilarityGraph:
    """doc_id -> ordered (neighbor_id, score) lists, scores non-increasing."""

    neighbors: dict[str, list[tuple[str, float]]]
    k_neighbors: int

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.neighbors

    def __len__(self) -> int:
        return len(self.neighbors)

    def validate(self) -> None:
        for doc_id, lst in self.neighbors.items():
            if len(lst) > self.k_neighbors:
                raise ValueError(f"{doc_id}: more than k_neighbors entries")
            scores = [s for _, s in lst]
            if any(n == doc_id for n, _ in lst):
                raise ValueError(f"{doc_id}: self-loop")
            if any(s1 < s2 for s1, s2 in zip(scores, scores[1:])):
                raise ValueError(f"{doc_id}: scores not non-increasing")
            for n, _ in lst:
                if n not in self.neighbors:
                    raise ValueError(f"{doc_id}: neighbor {n} not in graph")


def build_similarity_graph(vectors: VectorTable | dict, k_neighbors: int) -> SimilarityGraph:
    """k nearest neighbors by cosine for every document, exhaustive O(n^2)."""
    if isinstance(vectors, dict):
        ids = list(vectors)
        matrix = np.vstack([np.asarray(vectors[i], dtype=np.float64) for i in ids])
        vectors = VectorTable(ids, matrix)
    n = len(vectors)
    if n < 2:
        raise ValueError("need at least 2 documents")
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be >= 1")
    norms = np.linalg.norm(vectors.matrix, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    unit = vectors.matrix / safe[:, None]
    sims = np.clip(unit @ unit.T, -1.0, 1.0)

    # rank of each doc_id in lexicographic order, for deterministic ties
    id_rank = np.empty(n, dtype=np.int64)
    id_rank[np.argsort(np.asarray(vectors.ids, dtype=object))] = np.arange(n)

    k = min(k_neighbors, n - 1)
    neighbors: dict[str, list[tuple[str, float]]] = {}
    for i in range(n):
        row = sims[i].copy()
        row[i] = -np.inf  # no self-loop
        order = np.lexsort((id_rank, -row))[:k]
        neighbors[vectors.ids[i]] = [(vectors.ids[j], float(sims[i, j])) for j in order]
    return SimilarityGraph(neighbors=neighbors, k_neighbors=k_neighbors)


def top_k_similar(graph: SimilarityGraph, doc_id: str) -> list[tuple[str, float]]:
    """The stored neighbor list, unchanged."""
    if doc_id not in graph.neighbors:
        raise UnknownDocument(doc_id)
    return list(graph.neighbors[doc_id])


def graph_to_jsonl(graph: SimilarityGraph, fh) -> None:
    for doc_id in graph.neighbors:
        line = {"doc_id": doc_id, "neighbors": [[n, s] for n, s in graph.neighbors[doc_id]]}
        fh.write(json.dumps(line) + "\n")


def graph_from_jsonl(fh, k_neighbors: int) -> SimilarityGraph:
    neighbors: dict[str, list[tuple[str, float]]] = {}
    for line in fh:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        neighbors[record["doc_id"]] = [(n, float(s)) for n, s in record["neighbors"]]
    return SimilarityGraph(neighbors=neighbors, k_neighbors=k_neighbors)
