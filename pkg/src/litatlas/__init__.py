"""litatlas: self-hosted exploration of scientific literature.

Abstracts become tf-idf vectors, LSA reduces them to dense document
vectors, cosine similarity links related papers, t-SNE lays the corpus
out as a 2-D map, and an inverted index serves keyword and whole-abstract
search. A REST service exposes it all, with per-user content-based
recommendations on top.
"""

from .config import PipelineConfig
from .documents import Document
from .ingest import SourceQuery, fetch, parse_arxiv_atom, parse_pubmed_xml
from .lsa import LsaModel, VectorTable, fit_lsa, project
from .pipeline import build_snapshot
from .recommend import Rating, UserProfile, rate, recommend
from .search import InvertedIndex, SearchResult, build_index, search_text
from .similarity import SimilarityGraph, build_similarity_graph, cosine, top_k_similar
from .store import CorpusStore, ModelSnapshot, load_snapshot, save_snapshot
from .textpipe import (
    SparseVector,
    TokenizerConfig,
    Vocabulary,
    build_vocabulary,
    idf,
    tfidf_vector,
    tokenize,
)
from .tsne import (
    AffinityMatrix,
    EmbeddingResult,
    TsneConfig,
    calibrate_sigma,
    kl_divergence,
    pairwise_affinities,
    run_tsne,
)

__version__ = "0.1.0"

__all__ = [
    "AffinityMatrix",
    "CorpusStore",
    "Document",
    "EmbeddingResult",
    "InvertedIndex",
    "LsaModel",
    "ModelSnapshot",
    "PipelineConfig",
    "Rating",
    "SearchResult",
    "SimilarityGraph",
    "SourceQuery",
    "SparseVector",
    "TokenizerConfig",
    "TsneConfig",
    "UserProfile",
    "VectorTable",
    "Vocabulary",
    "build_index",
    "build_similarity_graph",
    "build_snapshot",
    "build_vocabulary",
    "calibrate_sigma",
    "cosine",
    "fetch",
    "fit_lsa",
    "idf",
    "kl_divergence",
    "load_snapshot",
    "pairwise_affinities",
    "parse_arxiv_atom",
    "parse_pubmed_xml",
    "project",
    "rate",
    "recommend",
    "run_tsne",
    "save_snapshot",
    "search_text",
    "tfidf_vector",
    "tokenize",
    "top_k_similar",
]
