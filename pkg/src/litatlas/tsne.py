"""From-scratch t-SNE over LSA vectors.

High-dimensional affinities are Gaussian conditionals calibrated per
point so each row's entropy matches ln(perplexity), symmetrized to the
joint p_ij = (p_j|i + p_i|j) / 2n. Low-dimensional similarities are
Student-t with one degree of freedom, and the map is found by gradient
descent on KL(P||Q) with momentum, early exaggeration and per-iteration
mean centering.

The affinity and q matrices are kept exactly normalized (they sum to 1);
the 1e-12 floor is applied only inside log terms, where it protects the
divergence computation, so the distribution invariants hold at any n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NumericalDivergence

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 15.0
    n_iterations: int = 1000
    learning_rate: float = 200.0
    early_exaggeration_factor: float = 12.0
    early_exaggeration_iters: int = 250
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    momentum_switch_iter: int = 250
    init_std: float = 1e-4
    seed: int = 0
    calibration_tolerance: float = 1e-5
    calibration_max_iters: int = 50

    def __post_init__(self):
        positive = (
            "perplexity",
            "n_iterations",
            "learning_rate",
            "early_exaggeration_factor",
            "momentum_initial",
            "momentum_final",
            "init_std",
            "calibration_tolerance",
            "calibration_max_iters",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, record: dict) -> "TsneConfig":
        return cls(**record)


@dataclass(frozen=True)
class SigmaCalibration:
    sigma: float
    conditional: np.ndarray
    entropy: float
    converged: bool
    degenerate: bool = False


@dataclass(frozen=True)
class AffinityMatrix:
    """Symmetric joint probabilities p (sum 1, zero diagonal) and bandwidths."""

    p: np.ndarray
    sigmas: np.ndarray
    flagged_rows: tuple[int, ...] = ()

    @property
    def n(self) -> int:
        return int(self.p.shape[0])

    def validate(self, atol: float = 1e-9) -> None:
        p = self.p
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("p must be square")
        if np.any(p < 0):
            raise ValueError("negative affinity")
        if np.any(np.diag(p) != 0):
            raise ValueError("nonzero diagonal")
        if abs(float(p.sum()) - 1.0) > atol:
            raise ValueError(f"affinities sum to {p.sum()}, not 1")
        if not np.array_equal(p, p.T):
            raise ValueError("p is not exactly symmetric")


@dataclass(frozen=True)
class EmbeddingResult:
    """2-D coordinates per document plus optimization diagnostics."""

    ids: tuple[str, ...]
    points: np.ndarray
    final_kl: float
    kl_trace: np.ndarray
    config: TsneConfig
    flagged_rows: tuple[int, ...] = ()

    @property
    def coords(self) -> dict[str, tuple[float, float]]:
        return {i: (float(x), float(y)) for i, (x, y) in zip(self.ids, self.points)}

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EmbeddingResult)
            and self.ids == other.ids
            and np.array_equal(self.points, other.points)
            and self.final_kl == other.final_kl
            and np.array_equal(self.kl_trace, other.kl_trace)
            and self.config == other.config
            and self.flagged_rows == other.flagged_rows
        )


def squared_distances(x: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, clipped at 0, zero diagonal."""
    sq = np.sum(x * x, axis=1, keepdims=True)
    d2 = sq + sq.T - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, 0.0)
    return np.clip(d2, 0.0, None)


def calibrate_sigma(
    squared_distances_row: np.ndarray,
    perplexity: float,
    tolerance: float = 1e-5,
    max_iters: int = 50,
) -> SigmaCalibration:
    """Binary search for the bandwidth whose conditional hits the target entropy.

    The row excludes the self distance. The search runs on the precision
    beta = 1/(2 sigma^2); entropy is monotone decreasing in beta, so
    bracketing by doubling/halving then bisection converges. An all-zero
    row is degenerate: the uniform distribution is returned, flagged.
    """
    d = np.asarray(squared_distances_row, dtype=np.float64)
    m = d.size
    if m < 2:
        raise ValueError("need at least 2 neighbors to calibrate")
    if not perplexity < m + 1:
        raise ValueError(f"perplexity {perplexity} too large for row of {m} neighbors")
    target = math.log(perplexity)

    if np.all(d == 0.0):
        uniform = np.full(m, 1.0 / m)
        return SigmaCalibration(
            sigma=float("inf"),
            conditional=uniform,
            entropy=math.log(m),
            converged=False,
            degenerate=True,
        )

    d_shift = d - d.min()  # entropy is invariant to shifting, exp() stays tame
    beta, beta_min, beta_max = 1.0, 0.0, float("inf")
    best = None
    best_gap = float("inf")
    for _ in range(max_iters):
        w = np.exp(-d_shift * beta)
        z = float(w.sum())
        cond = w / z
        entropy = math.log(z) + beta * float(np.dot(d_shift, cond))
        gap = entropy - target
        if abs(gap) < best_gap:
            best_gap = abs(gap)
            best = (beta, cond, entropy)
        if abs(gap) <= tolerance:
            return SigmaCalibration(
                sigma=math.sqrt(1.0 / (2.0 * beta)),
                conditional=cond,
                entropy=entropy,
                converged=True,
            )
        if gap > 0:  # entropy too high: sharpen the kernel
            beta_min = beta
            beta = beta * 2.0 if beta_max == float("inf") else (beta + beta_max) / 2.0
        else:
            beta_max = beta
            beta = beta / 2.0 if beta_min == 0.0 else (beta + beta_min) / 2.0
    beta, cond, entropy = best
    return SigmaCalibration(
        sigma=math.sqrt(1.0 / (2.0 * beta)),
        conditional=cond,
        entropy=entropy,
        converged=False,
    )


def pairwise_affinities(vectors: np.ndarray, config: TsneConfig) -> AffinityMatrix:
    """Joint affinities from per-row calibrated Gaussian conditionals."""
    x = np.asarray(vectors, dtype=np.float64)
    n = x.shape[0]
    if n < 3:
        raise ValueError("need at least 3 points")
    if not config.perplexity < n:
        raise ValueError(f"perplexity {config.perplexity} must be < n = {n}")
    d2 = squared_distances(x)
    conditional = np.zeros((n, n))
    sigmas = np.zeros(n)
    flagged = []
    others = np.arange(n)
    for i in range(n):
        row = d2[i, others != i]
        cal = calibrate_sigma(
            row,
            config.perplexity,
            tolerance=config.calibration_tolerance,
            max_iters=config.calibration_max_iters,
        )
        conditional[i, others != i] = cal.conditional
        sigmas[i] = cal.sigma
        if cal.degenerate or not cal.converged:
            flagged.append(i)
    p = (conditional + conditional.T) / (2.0 * n)
    np.fill_diagonal(p, 0.0)
    return AffinityMatrix(p=p, sigmas=sigmas, flagged_rows=tuple(flagged))


def low_dim_affinities(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Student-t joint q matrix and the unnormalized kernel w = 1/(1+d^2)."""
    w = 1.0 / (1.0 + squared_distances(y))
    np.fill_diagonal(w, 0.0)
    return w / w.sum(), w


def kl_divergence(p: np.ndarray | AffinityMatrix, q: np.ndarray) -> float:
    """sum_{i != j} p log(p/q), natural log, with 1e-12 floors inside the logs."""
    pm = p.p if isinstance(p, AffinityMatrix) else np.asarray(p)
    qm = np.asarray(q)
    if pm.shape != qm.shape:
        raise DimensionMismatch(f"shapes {pm.shape} vs {qm.shape}")
    mask = ~np.eye(pm.shape[0], dtype=bool)
    pv = pm[mask]
    qv = np.maximum(qm[mask], PROB_FLOOR)
    nonzero = pv > 0
    pv = np.maximum(pv[nonzero], PROB_FLOOR)
    return float(np.sum(pv * np.log(pv / qv[nonzero])))


def gradient(p: np.ndarray, q: np.ndarray, w: np.ndarray, y: np.ndarray) -> np.ndarray:
    """dKL/dy_i = 4 sum_j (p_ij - q_ij) w_ij (y_i - y_j), fully vectorized."""
    m = (p - q) * w
    return 4.0 * (m.sum(axis=1)[:, None] * y - m @ y)


def run_tsne(
    p: AffinityMatrix,
    config: TsneConfig,
    ids: Sequence[str] | None = None,
) -> EmbeddingResult:
    """Gradient descent on KL(P||Q) to 2-D coordinates.

    kl_trace[i] is the divergence of the configuration entering iteration
    i, always against the un-exaggerated P; final_kl is the divergence of
    the returned coordinates. Deterministic for a fixed config and seed.
    """
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
        q, w = low_dim_affinities(y)
        kl_trace[it] = kl_divergence(pm, q)
        exaggeration = (
            config.early_exaggeration_factor
            if it < config.early_exaggeration_iters
            else 1.0
        )
        grad = gradient(exaggeration * pm, q, w, y)
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

    q, _ = low_dim_affinities(y)
    final_kl = kl_divergence(pm, q)
    return EmbeddingResult(
        ids=tuple(ids),
        points=y,
        final_kl=final_kl,
        kl_trace=kl_trace,
        config=config,
        flagged_rows=p.flagged_rows,
    )
