"""Abstracts to L2-normalized tf-idf vectors.

Weights are raw in-document term counts times idf(t) = ln(|D| / df(t)),
then the vector is normalized to unit Euclidean length. The natural log
is used throughout the project; df counts documents, not occurrences.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from .documents import Document
from .errors import EmptyCorpus, UnknownTerm

# Maximal runs of Unicode alphanumerics; underscores are separators.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    text = resources.files("litatlas.data").joinpath("stopwords_en.txt").read_text()
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    min_token_length: int = 2
    stopword_list: frozenset[str] = field(default_factory=default_stopwords)
    min_document_frequency: int = 2
    max_document_fraction: float = 0.9

    def __post_init__(self):
        if self.min_token_length < 1:
            raise ValueError("min_token_length must be >= 1")
        if self.min_document_frequency < 1:
            raise ValueError("min_document_frequency must be >= 1")
        if not (0.0 < self.max_document_fraction <= 1.0):
            raise ValueError("max_document_fraction must be in (0, 1]")
        object.__setattr__(self, "stopword_list", frozenset(self.stopword_list))

    def to_json(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "min_token_length": self.min_token_length,
            "stopword_list": sorted(self.stopword_list),
            "min_document_frequency": self.min_document_frequency,
            "max_document_fraction": self.max_document_fraction,
        }

    @classmethod
    def from_json(cls, record: dict) -> "TokenizerConfig":
        record = dict(record)
        if "stopword_list" in record:
            record["stopword_list"] = frozenset(record["stopword_list"])
        return cls(**record)


def tokenize(text: str, config: TokenizerConfig) -> list[str]:
    """Split on non-alphanumeric boundaries, fold case, drop short tokens and stopwords."""
    tokens = _TOKEN_RE.findall(text)
    if config.lowercase:
        tokens = [t.lower() for t in tokens]
    return [
        t
        for t in tokens
        if len(t) >= config.min_token_length and t not in config.stopword_list
    ]


class Vocabulary:
    """Term-to-dimension map plus per-term document frequencies.

    Terms are unique and sorted lexicographically so that vector
    dimensions are deterministic regardless of corpus order.
    """

    def __init__(
        self,
        terms: list[str],
        document_frequency: list[int],
        corpus_size: int,
        build_params: TokenizerConfig,
    ):
        if len(terms) != len(document_frequency):
            raise ValueError("terms and document_frequency lengths differ")
        if sorted(set(terms)) != list(terms):
            raise ValueError("terms must be unique and sorted")
        for t, df in zip(terms, document_frequency):
            if not (1 <= df <= corpus_size):
                raise ValueError(f"df out of range for {t!r}: {df}")
        self.terms = list(terms)
        self.document_frequency = list(document_frequency)
        self.corpus_size = corpus_size
        self.build_params = build_params
        self._index = {t: i for i, t in enumerate(terms)}
        self._idf = np.log(corpus_size / np.asarray(document_frequency, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self._index

    def index_of(self, term: str) -> int:
        try:
            return self._index[term]
        except KeyError:
            raise UnknownTerm(term) from None

    @property
    def idf_values(self) -> np.ndarray:
        return self._idf

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Vocabulary)
            and self.terms == other.terms
            and self.document_frequency == other.document_frequency
            and self.corpus_size == other.corpus_size
            and self.build_params == other.build_params
        )

    def to_json(self) -> dict:
        return {
            "terms": self.terms,
            "document_frequency": self.document_frequency,
            "corpus_size": self.corpus_size,
            "build_params": self.build_params.to_json(),
        }

    @classmethod
    def from_json(cls, record: dict) -> "Vocabulary":
        return cls(
            terms=record["terms"],
            document_frequency=record["document_frequency"],
            corpus_size=record["corpus_size"],
            build_params=TokenizerConfig.from_json(record["build_params"]),
        )

    def checksum(self) -> str:
        import hashlib

        payload = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


@dataclass(frozen=True)
class SparseVector:
    """Sorted (dimension, weight) pairs over a fixed dimensionality.

    Weights are non-negative and finite; a normalized vector has unit
    Euclidean norm unless it is the zero vector (no retained terms).
    """

    indices: np.ndarray
    weights: np.ndarray
    dimensionality: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        w = np.asarray(self.weights, dtype=np.float64)
        if idx.shape != w.shape or idx.ndim != 1:
            raise ValueError("indices and weights must be 1-D and aligned")
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[-1] >= self.dimensionality or idx[0] < 0):
            raise ValueError("indices must be strictly increasing and < dimensionality")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and non-negative")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "weights", w)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.weights**2)))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseVector)
            and self.dimensionality == other.dimensionality
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.weights, other.weights)
        )


def build_vocabulary(corpus: list[Document], config: TokenizerConfig) -> Vocabulary:
    """Count document frequencies and retain terms inside the df thresholds.

    corpus_size counts every document, including ones that end up with no
    retained terms.
    """
    if not corpus:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    n_docs = len(corpus)
    df: dict[str, int] = {}
    for doc in corpus:
        for term in set(tokenize(doc.abstract_text, config)):
            df[term] = df.get(term, 0) + 1
    max_df = config.max_document_fraction * n_docs
    kept = sorted(
        t
        for t, count in df.items()
        if count >= config.min_document_frequency and count <= max_df
    )
    return Vocabulary(
        terms=kept,
        document_frequency=[df[t] for t in kept],
        corpus_size=n_docs,
        build_params=config,
    )


def idf(vocabulary: Vocabulary, term: str) -> float:
    """ln(corpus_size / document_frequency); zero iff the term is in every document."""
    return float(vocabulary.idf_values[vocabulary.index_of(term)])


def tfidf_text(text: str, vocabulary: Vocabulary) -> SparseVector:
    """tf-idf vector of arbitrary text, L2-normalized; OOV tokens are ignored."""
    counts: dict[int, int] = {}
    for token in tokenize(text, vocabulary.build_params):
        dim = vocabulary._index.get(token)
        if dim is not None:
            counts[dim] = counts.get(dim, 0) + 1
    if not counts:
        return SparseVector(
            np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64), len(vocabulary)
        )
    dims = np.array(sorted(counts), dtype=np.int64)
    tf = np.array([counts[d] for d in dims], dtype=np.float64)
    weights = tf * vocabulary.idf_values[dims]
    # idf-0 terms (present in every document) carry no signal; drop them so
    # every stored entry is strictly positive
    keep = weights > 0.0
    dims, weights = dims[keep], weights[keep]
    norm = math.sqrt(float(np.sum(weights**2)))
    if norm > 0.0:
        weights = weights / norm
    return SparseVector(dims, weights, len(vocabulary))


def tfidf_vector(doc: Document, vocabulary: Vocabulary) -> SparseVector:
    """tf-idf vector of a document's abstract."""
    return tfidf_text(doc.abstract_text, vocabulary)
