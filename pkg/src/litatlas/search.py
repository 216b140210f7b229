"""Inverted index over tf-idf vectors and cosine scoring against it.

The index is the exact transpose of the document vectors: every (term,
weight) entry of every vector appears as (doc, weight) in that term's
posting list and vice versa. Keyword queries and whole-abstract queries
are the same operation; a query is vectorized with the document pipeline
and its score against each candidate is the cosine, accumulated over
posting lists so only documents sharing at least one term are touched.
Submitted query text is never persisted.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .textpipe import SparseVector, Vocabulary, tfidf_text


@dataclass(frozen=True)
class InvertedIndex:
    """term index -> (doc_ids sorted, weights aligned); exact vector transpose."""

    postings: dict[int, list[tuple[str, float]]]
    n_terms: int
    corpus_version: int
    vocabulary_checksum: str

    def validate(self) -> None:
        for term, lst in self.postings.items():
            if not lst:
                raise ValueError(f"empty posting list for term {term}")
            if not (0 <= term < self.n_terms):
                raise ValueError(f"term index {term} out of range")
            ids = [d for d, _ in lst]
            if ids != sorted(ids):
                raise ValueError(f"posting list for term {term} not doc_id-sorted")
            if any(w <= 0 for _, w in lst):
                raise ValueError(f"non-positive weight in postings of term {term}")


@dataclass(frozen=True)
class SearchResult:
    ranked: list[tuple[str, float]]
    query_terms_matched: int
    truncated_at: int  # total number of matching documents before the cut


def build_index(
    doc_vectors: dict[str, SparseVector],
    vocabulary: Vocabulary,
    corpus_version: int = 0,
) -> InvertedIndex:
    """Transpose document vectors into per-term posting lists."""
    postings: dict[int, list[tuple[str, float]]] = {}
    for doc_id in sorted(doc_vectors):
        vec = doc_vectors[doc_id]
        if vec.dimensionality != len(vocabulary):
            raise DimensionMismatch(
                f"vector of {doc_id} has dimensionality {vec.dimensionality}, "
                f"vocabulary has {len(vocabulary)}"
            )
        for dim, weight in zip(vec.indices, vec.weights):
            postings.setdefault(int(dim), []).append((doc_id, float(weight)))
    return InvertedIndex(
        postings=postings,
        n_terms=len(vocabulary),
        corpus_version=corpus_version,
        vocabulary_checksum=vocabulary.checksum(),
    )


def vectors_from_index(index: InvertedIndex) -> dict[str, SparseVector]:
    """Inverse transposition, mainly for integrity checks."""
    per_doc: dict[str, list[tuple[int, float]]] = {}
    for term, lst in index.postings.items():
        for doc_id, weight in lst:
            per_doc.setdefault(doc_id, []).append((term, weight))
    out = {}
    for doc_id, entries in per_doc.items():
        entries.sort()
        out[doc_id] = SparseVector(
            np.array([t for t, _ in entries], dtype=np.int64),
            np.array([w for _, w in entries]),
            index.n_terms,
        )
    return out


def accumulate_scores(index: InvertedIndex, query: SparseVector) -> dict[str, float]:
    """sum_t q_t * w_td accumulated over posting lists, for any query weights.

    With an L2-normalized query this is the exact cosine against every
    document sharing a term. With raw (un-normalized) query weights the
    accumulation is monotone: adding an occurrence of a term a document
    contains never decreases that document's score.
    """
    scores: dict[str, float] = {}
    for dim, q_weight in zip(query.indices, query.weights):
        for doc_id, d_weight in index.postings.get(int(dim), ()):
            scores[doc_id] = scores.get(doc_id, 0.0) + q_weight * float(d_weight)
    return scores


def search_text(
    index: InvertedIndex,
    vocabulary: Vocabulary,
    text: str,
    limit: int = 20,
) -> SearchResult:
    """Cosine ranking of every document sharing at least one term with the text.

    The query is tokenized and tf-idf weighted exactly like a document.
    A query with no in-vocabulary token yields an empty result (matched
    count 0), not an error.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    query = tfidf_text(text, vocabulary)
    if query.nnz == 0:
        return SearchResult(ranked=[], query_terms_matched=0, truncated_at=0)
    scores = accumulate_scores(index, query)
    matched = sum(1 for dim in query.indices if int(dim) in index.postings)
    ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    total = len(ranked)
    return SearchResult(
        ranked=ranked[:limit],
        query_terms_matched=matched,
        truncated_at=total,
    )
