"""Truncated SVD of the tf-idf document-term matrix.

The model keeps the top-k right singular vectors (rows of `components`)
and singular values of the n x V matrix whose rows are the document
vectors; documents are represented by their projection U*Sigma, obtained
as components @ v. Rows are not centered, so sparsity is preserved.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, RankDeficientWarning
from .textpipe import SparseVector

_RESIDUAL_TOL = 1e-7
_MAX_POWER_ITERS = 200


@dataclass(frozen=True)
class LsaModel:
    """k x V component rows (orthonormal) and non-increasing singular values."""

    components: np.ndarray
    singular_values: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.components, dtype=np.float64)
        s = np.asarray(self.singular_values, dtype=np.float64)
        if c.ndim != 2 or s.ndim != 1 or c.shape[0] != s.shape[0]:
            raise ValueError("components must be k x V with k singular values")
        if np.any(s <= 0) or np.any(np.diff(s) > 0):
            raise ValueError("singular values must be positive and non-increasing")
        object.__setattr__(self, "components", c)
        object.__setattr__(self, "singular_values", s)

    @property
    def n_components(self) -> int:
        return int(self.singular_values.size)

    @property
    def vocabulary_size(self) -> int:
        return int(self.components.shape[1])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LsaModel)
            and np.array_equal(self.components, other.components)
            and np.array_equal(self.singular_values, other.singular_values)
        )


class VectorTable:
    """Dense per-document vectors in a fixed doc_id order, dict-like by id."""

    def __init__(self, ids: list[str], matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(ids):
            raise ValueError("matrix rows must align with ids")
        self.ids = list(ids)
        self.matrix = matrix
        self._row = {doc_id: i for i, doc_id in enumerate(self.ids)}

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._row

    def __getitem__(self, doc_id: str) -> np.ndarray:
        return self.matrix[self._row[doc_id]]

    def items(self):
        for doc_id in self.ids:
            yield doc_id, self.matrix[self._row[doc_id]]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, VectorTable)
            and self.ids == other.ids
            and np.array_equal(self.matrix, other.matrix)
        )


def to_csr(doc_vectors: list[SparseVector]) -> sp.csr_matrix:
    """Stack sparse vectors into an n x V CSR matrix."""
    if not doc_vectors:
        raise ValueError("no vectors to stack")
    dim = doc_vectors[0].dimensionality
    if any(v.dimensionality != dim for v in doc_vectors):
        raise DimensionMismatch("vectors have differing dimensionality")
    indptr = np.zeros(len(doc_vectors) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([v.nnz for v in doc_vectors])
    indices = (
        np.concatenate([v.indices for v in doc_vectors])
        if indptr[-1]
        else np.empty(0, dtype=np.int64)
    )
    data = (
        np.concatenate([v.weights for v in doc_vectors])
        if indptr[-1]
        else np.empty(0, dtype=np.float64)
    )
    return sp.csr_matrix((data, indices, indptr), shape=(len(doc_vectors), dim))


def _apply_sign_convention(u: np.ndarray, vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # largest-|.|-entry of each component row made non-negative for run-to-run
    # determinism
    pivot = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(vt.shape[0]), pivot])
    signs[signs == 0] = 1.0
    return u * signs, vt * signs[:, None]


def _triplet_residuals(a, u: np.ndarray, s: np.ndarray, vt: np.ndarray) -> np.ndarray:
    """Relative residuals ||A v_i - s_i u_i|| / s_i per retained triplet."""
    av = a @ vt.T
    return np.linalg.norm(av - u * s, axis=0) / s


def fit_lsa(doc_vectors: list[SparseVector], n_components: int, seed: int = 0) -> LsaModel:
    """Top-k singular triplets of the stacked document matrix.

    Uses a seeded randomized range finder with power iterations, continued
    until every retained triplet's relative residual is below 1e-7 (dense
    fallback if iteration stalls). If the matrix has fewer than
    n_components numerically nonzero singular values, the model truncates
    to the numerical rank and emits a RankDeficientWarning.
    """
    if len(doc_vectors) < 2:
        raise ValueError("need at least 2 documents")
    a = to_csr(doc_vectors)
    n, v = a.shape
    if n_components > min(n, v):
        raise ValueError(
            f"n_components={n_components} exceeds min(n_docs, vocab)={min(n, v)}"
        )
    u, s, vt = _randomized_svd(a, n_components, seed=seed)

    # numerical rank cut
    if s.size:
        tol = s[0] * max(n, v) * np.finfo(np.float64).eps
    else:
        tol = 0.0
    rank = int(np.sum(s > tol))
    if rank < n_components:
        warnings.warn(
            f"requested {n_components} components but numerical rank is {rank}; truncating",
            RankDeficientWarning,
            stacklevel=2,
        )
        u, s, vt = u[:, :rank], s[:rank], vt[:rank]

    u, vt = _apply_sign_convention(u, vt)
    return LsaModel(components=vt, singular_values=s)


def _randomized_svd(
    a,
    k: int,
    seed: int = 0,
    oversample: int = 10,
    min_power_iters: int = 2,
    residual_tol: float = _RESIDUAL_TOL,
    max_power_iters: int = _MAX_POWER_ITERS,
):
    """Range-finder SVD with subspace iteration until triplet residuals converge.

    Slowly decaying spectra (where the fixed two power iterations of the
    textbook scheme are not enough) keep iterating; a dense SVD fallback
    covers pathological cases on small matrices.
    """
    n, v = a.shape
    p = min(k + oversample, min(n, v))
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(a @ rng.standard_normal((v, p)))
    iters = 0
    converged = False
    while True:
        z, _ = np.linalg.qr(a.T @ q)
        q, _ = np.linalg.qr(a @ z)
        iters += 1
        if iters < min_power_iters:
            continue
        b = np.asarray(a.T @ q).T  # q^T A as p x v, works for sparse and dense a
        ub, s, vt = np.linalg.svd(b, full_matrices=False)
        u = q @ ub
        u, s, vt = u[:, :k], s[:k], vt[:k]
        # residuals are meaningful only for numerically nonzero triplets; zero
        # ones are truncated by the caller
        rank_tol = s[0] * max(n, v) * np.finfo(np.float64).eps if s.size else 0.0
        nonzero = s > rank_tol
        if not nonzero.any():
            converged = True
            break
        res = _triplet_residuals(a, u[:, nonzero], s[nonzero], vt[nonzero])
        if np.all(res <= residual_tol):
            converged = True
            break
        if iters >= max_power_iters:
            break
    if not converged and min(n, v) <= 2000:
        dense = a.toarray() if sp.issparse(a) else np.asarray(a)
        u, s, vt = np.linalg.svd(dense, full_matrices=False)
        u, s, vt = u[:, :k], s[:k], vt[:k]
    return u, s, vt


def project(model: LsaModel, v: SparseVector) -> np.ndarray:
    """components @ v; equals the document's U*Sigma row for training vectors."""
    if v.dimensionality != model.vocabulary_size:
        raise DimensionMismatch(
            f"vector dimensionality {v.dimensionality} != vocabulary {model.vocabulary_size}"
        )
    if v.nnz == 0:
        return np.zeros(model.n_components)
    return model.components[:, v.indices] @ v.weights


def project_all(model: LsaModel, ids: list[str], doc_vectors: list[SparseVector]) -> VectorTable:
    a = to_csr(doc_vectors)
    if a.shape[1] != model.vocabulary_size:
        raise DimensionMismatch("matrix columns do not match vocabulary size")
    return VectorTable(ids, np.asarray(a @ model.components.T))
