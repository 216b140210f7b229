"""Full model build: corpus -> vectors -> LSA -> graph -> map -> index.

Documents are processed in sorted doc_id order so a build is a pure
function of (corpus content, config, seeds): rebuilding the same corpus
with the same config yields an identical snapshot up to version and
timestamp. Hyperparameters the build had to adjust (perplexity larger
than the corpus, more LSA components than documents) are clamped and
recorded as build warnings rather than failing the whole run.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import replace

from .config import PipelineConfig
from .documents import Document, utc_now
from .errors import EmptyCorpus
from .lsa import fit_lsa, project_all
from .search import build_index
from .similarity import build_similarity_graph
from .store import ModelSnapshot
from .textpipe import build_vocabulary, tfidf_vector
from .tsne import pairwise_affinities, run_tsne

log = logging.getLogger(__name__)


def build_snapshot(
    documents: list[Document],
    config: PipelineConfig,
    corpus_version: int = 1,
) -> ModelSnapshot:
    """Run every pipeline stage over the corpus and assemble a snapshot."""
    if not documents:
        raise EmptyCorpus("cannot build a snapshot from an empty corpus")
    docs = sorted(documents, key=lambda d: d.doc_id)
    ids = [d.doc_id for d in docs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate doc_ids in corpus")
    n = len(docs)
    build_warnings: list[str] = []

    vocabulary = build_vocabulary(docs, config.tokenizer)
    if len(vocabulary) == 0:
        raise EmptyCorpus(
            "no terms survive the document-frequency thresholds; "
            "corpus too small or too heterogeneous for the configured tokenizer"
        )
    log.info("vocabulary: %d terms over %d documents", len(vocabulary), n)

    vectors = [tfidf_vector(d, vocabulary) for d in docs]
    empty = [i for i, v in enumerate(vectors) if v.nnz == 0]
    if empty:
        build_warnings.append(
            f"{len(empty)} documents have no retained terms (zero tf-idf vectors): "
            + ", ".join(ids[i] for i in empty[:5])
            + ("..." if len(empty) > 5 else "")
        )

    k = min(config.lsa_components, n, max(len(vocabulary), 1))
    if k < config.lsa_components:
        build_warnings.append(
            f"lsa_components clamped from {config.lsa_components} to {k} "
            f"(corpus has {n} documents, {len(vocabulary)} terms)"
        )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lsa_model = fit_lsa(vectors, k, seed=config.lsa_seed)
    for w in caught:
        build_warnings.append(str(w.message))
    doc_vectors = project_all(lsa_model, ids, vectors)

    graph = build_similarity_graph(doc_vectors, config.k_neighbors)

    tsne_config = config.tsne
    max_perplexity = max(n - 1, 1)
    if not tsne_config.perplexity < n:
        tsne_config = replace(tsne_config, perplexity=float(max_perplexity))
        build_warnings.append(
            f"perplexity clamped from {config.tsne.perplexity} to {max_perplexity} "
            f"for a corpus of {n} documents"
        )
    affinities = pairwise_affinities(doc_vectors.matrix, tsne_config)
    if affinities.flagged_rows:
        build_warnings.append(
            f"{len(affinities.flagged_rows)} affinity rows flagged during calibration"
        )
    embedding = run_tsne(affinities, tsne_config, ids=ids)
    log.info("embedding done, final KL divergence %.4f", embedding.final_kl)

    index = build_index(
        {doc_id: vec for doc_id, vec in zip(ids, vectors)},
        vocabulary,
        corpus_version=corpus_version,
    )

    return ModelSnapshot(
        corpus_version=corpus_version,
        documents=tuple(docs),
        vocabulary=vocabulary,
        lsa_model=lsa_model,
        doc_vectors=doc_vectors,
        similarity_graph=graph,
        inverted_index=index,
        embedding=embedding,
        build_config=config,
        build_timestamp=utc_now(),
        build_warnings=tuple(build_warnings),
    )
