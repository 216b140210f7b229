"""Barnes-Hut approximation of the t-SNE gradient.

Affinities are restricted to each point's floor(3 * perplexity) nearest
neighbors and stored sparse; the repulsive force sum is approximated with
a quadtree whose cells are summarized by their center of mass when
cell_width < theta * distance. theta = 0 never summarizes a multi-point
cell, so the gradient degenerates to the exact one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, NumericalDivergence
from .tsne import (
    PROB_FLOOR,
    EmbeddingResult,
    TsneConfig,
    calibrate_sigma,
    squared_distances,
)


@dataclass(frozen=True)
class SparseAffinityMatrix:
    """kNN-restricted symmetric joint affinities (CSR), sum 1."""

    p: sp.csr_matrix
    sigmas: np.ndarray
    flagged_rows: tuple[int, ...] = ()

    @property
    def n(self) -> int:
        return int(self.p.shape[0])


_MAX_DEPTH = 60  # beyond this, points are numerically coincident


class QuadNode:
    """One quadtree cell: point count, center of mass, four children."""

    __slots__ = ("count", "center_of_mass", "width", "children")

    def __init__(self, points: np.ndarray, center: np.ndarray, width: float, depth: int = 0):
        self.count = points.shape[0]
        self.width = width
        self.children: list["QuadNode"] | None = None
        if self.count == 0:
            self.center_of_mass = None
            return
        self.center_of_mass = points.mean(axis=0)
        if self.count > 1 and depth < _MAX_DEPTH and np.any(points != points[0]):
            east = points[:, 0] > center[0]
            north = points[:, 1] > center[1]
            shift = width / 4.0
            half = width / 2.0
            d = depth + 1
            self.children = [
                QuadNode(points[east & north], center + [shift, shift], half, d),
                QuadNode(points[~east & north], center + [-shift, shift], half, d),
                QuadNode(points[~east & ~north], center + [-shift, -shift], half, d),
                QuadNode(points[east & ~north], center + [shift, -shift], half, d),
            ]
        # else: single point, or coincident points kept as one exact leaf


def build_quadtree(points: np.ndarray) -> QuadNode:
    points = np.asarray(points, dtype=np.float64)
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    center = (lo + hi) / 2.0
    width = float(max(hi[0] - lo[0], hi[1] - lo[1])) or 1.0
    return QuadNode(points, center, width)


def _accumulate_repulsion(node: QuadNode, yi: np.ndarray, theta: float, out: list) -> None:
    # out = [num_x, num_y, z]; cells are summarized when width < theta * dist
    if node.count == 0:
        return
    dx = yi[0] - node.center_of_mass[0]
    dy = yi[1] - node.center_of_mass[1]
    dist2 = dx * dx + dy * dy
    if node.children is None or node.width * node.width < theta * theta * dist2:
        w = 1.0 / (1.0 + dist2)
        cw = node.count * w
        out[0] += cw * w * dx
        out[1] += cw * w * dy
        out[2] += cw
    else:
        for child in node.children:
            _accumulate_repulsion(child, yi, theta, out)


def repulsion_and_z(y: np.ndarray, theta: float) -> tuple[np.ndarray, float]:
    """Per-point sum_j w^2 (y_i - y_j) and the partition value Z = sum_{i!=j} w.

    The query point itself contributes w = 1 and a zero displacement; that
    self term is subtracted from Z.
    """
    tree = build_quadtree(y)
    n = y.shape[0]
    num = np.zeros((n, 2))
    z = 0.0
    for i in range(n):
        acc = [0.0, 0.0, 0.0]
        _accumulate_repulsion(tree, y[i], theta, acc)
        num[i, 0] = acc[0]
        num[i, 1] = acc[1]
        z += acc[2] - 1.0  # remove self (w = 1, displacement 0)
    return num, z


def sparse_affinities(vectors: np.ndarray, config: TsneConfig) -> SparseAffinityMatrix:
    """Joint affinities over each point's floor(3 * perplexity) nearest neighbors."""
    x = np.asarray(vectors, dtype=np.float64)
    n = x.shape[0]
    if not config.perplexity < n:
        raise ValueError(f"perplexity {config.perplexity} must be < n = {n}")
    k = min(int(math.floor(3 * config.perplexity)), n - 1)
    d2 = squared_distances(x)
    rows = np.repeat(np.arange(n), k)
    cols = np.zeros(n * k, dtype=np.int64)
    vals = np.zeros(n * k)
    sigmas = np.zeros(n)
    flagged = []
    for i in range(n):
        order = np.argsort(d2[i])
        nn = order[order != i][:k]
        cal = calibrate_sigma(
            d2[i, nn],
            config.perplexity,
            tolerance=config.calibration_tolerance,
            max_iters=config.calibration_max_iters,
        )
        cols[i * k : (i + 1) * k] = nn
        vals[i * k : (i + 1) * k] = cal.conditional
        sigmas[i] = cal.sigma
        if cal.degenerate or not cal.converged:
            flagged.append(i)
    cond = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    p = (cond + cond.T) / (2.0 * n)
    return SparseAffinityMatrix(p=p.tocsr(), sigmas=sigmas, flagged_rows=tuple(flagged))


def bh_gradient(p: sp.csr_matrix, y: np.ndarray, theta: float) -> np.ndarray:
    """4 * (attractive - repulsive/Z); attraction exact over the sparse P."""
    coo = p.tocoo()
    diff = y[coo.row] - y[coo.col]
    w = 1.0 / (1.0 + np.sum(diff * diff, axis=1))
    attract = np.zeros_like(y)
    np.add.at(attract, coo.row, (coo.data * w)[:, None] * diff)
    num, z = repulsion_and_z(y, theta)
    return 4.0 * (attract - num / z)


def _sparse_kl(p: sp.csr_matrix, y: np.ndarray, z: float) -> float:
    # only nonzero p entries contribute; q for those pairs is computed directly
    coo = p.tocoo()
    diff = y[coo.row] - y[coo.col]
    w = 1.0 / (1.0 + np.sum(diff * diff, axis=1))
    q = np.maximum(w / z, PROB_FLOOR)
    pv = np.maximum(coo.data, PROB_FLOOR)
    return float(np.sum(coo.data * np.log(pv / q)))


def run_tsne_barnes_hut(
    p: SparseAffinityMatrix,
    config: TsneConfig,
    theta: float = 0.5,
    ids: Sequence[str] | None = None,
) -> EmbeddingResult:
    """Same optimization loop as the exact path, with tree-approximated forces."""
    if not (0.0 <= theta <= 1.0):
        raise ValueError("theta must be in [0, 1]")
    n = p.n
    pm = p.p
    if ids is None:
        ids = [str(i) for i in range(n)]
    if len(ids) != n:
        raise DimensionMismatch(f"{len(ids)} ids for {n} points")
    rng = np.random.default_rng(config.seed)
    y = rng.standard_normal((n, 2)) * config.init_std
    velocity = np.zeros_like(y)
    kl_trace = np.zeros(config.n_iterations)

    for it in range(config.n_iterations):
        exaggeration = (
            config.early_exaggeration_factor
            if it < config.early_exaggeration_iters
            else 1.0
        )
        coo = (exaggeration * pm).tocoo()
        diff = y[coo.row] - y[coo.col]
        w = 1.0 / (1.0 + np.sum(diff * diff, axis=1))
        attract = np.zeros_like(y)
        np.add.at(attract, coo.row, (coo.data * w)[:, None] * diff)
        num, z = repulsion_and_z(y, theta)
        kl_trace[it] = _sparse_kl(pm, y, z)
        grad = 4.0 * (attract - num / z)
        momentum = (
            config.momentum_initial
            if it < config.momentum_switch_iter
            else config.momentum_final
        )
        velocity = momentum * velocity - config.learning_rate * grad
        y = y + velocity
        y = y - y.mean(axis=0)
        if not np.all(np.isfinite(y)):
            raise NumericalDivergence(
                f"non-finite coordinates at iteration {it}", kl_trace=kl_trace[: it + 1]
            )

    _, z = repulsion_and_z(y, theta)
    final_kl = _sparse_kl(pm, y, z)
    return EmbeddingResult(
        ids=tuple(ids),
        points=y,
        final_kl=final_kl,
        kl_trace=kl_trace,
        config=config,
        flagged_rows=p.flagged_rows,
    )
