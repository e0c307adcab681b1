"""l1 Lewis weights, l1 leverage scores, and sampled l1 subspace embeddings."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .config import DEFAULT, Constants
from .errors import ConditioningError, DimensionError, EmbeddingError, ParameterError, SamplingError
from .rng import as_generator
from .sketching import DenseSketch, cauchy_sketch

__all__ = [
    "SamplingMatrix",
    "LewisState",
    "L1LeverageScores",
    "reduce_columns",
    "default_lewis_iterations",
    "lewis_weights",
    "lewis_residual",
    "lewis_sample",
    "lewis_count",
    "l1_leverage_scores",
    "leverage_sample",
    "l1_embedding",
    "certify_l1",
]


def _dense(M) -> np.ndarray:
    if sp.issparse(M):
        return M.toarray()
    return np.asarray(M, dtype=float)


@dataclass(frozen=True)
class SamplingMatrix:
    """Sampling-and-scaling sketch: output row ``j`` is ``scales[j] * M[indices[j]]``.

    Repeated indices are kept; the sample is a multiset.
    """

    indices: np.ndarray
    scales: np.ndarray
    source_rows: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        sc = np.asarray(self.scales, dtype=float)
        if idx.shape != sc.shape or idx.ndim != 1:
            raise DimensionError("indices and scales must be 1-d arrays of equal length")
        if idx.size and (idx.min() < 0 or idx.max() >= self.source_rows):
            raise DimensionError("row index out of range")
        if not np.all(np.isfinite(sc) & (sc > 0)):
            raise SamplingError("scales must be finite and positive")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "scales", sc)

    @classmethod
    def identity(cls, n: int) -> "SamplingMatrix":
        return cls(np.arange(n), np.ones(n), n)

    @property
    def rows(self) -> int:
        return len(self.indices)

    @property
    def picks(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.scales.tolist()))

    def apply(self, M):
        if M.shape[0] != self.source_rows:
            raise DimensionError(f"sampling matrix expects {self.source_rows} rows, got {M.shape[0]}")
        if sp.issparse(M):
            return sp.diags(self.scales) @ sp.csr_matrix(M)[self.indices]
        M = np.asarray(M, dtype=float)
        if M.ndim == 1:
            return self.scales * M[self.indices]
        return self.scales[:, None] * M[self.indices]

    def to_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.scales, (np.arange(self.rows), self.indices)),
            shape=(self.rows, self.source_rows),
        )


@dataclass(frozen=True)
class LewisState:
    weights: np.ndarray
    iterations: int
    residual: float = float("nan")


@dataclass(frozen=True)
class L1LeverageScores:
    scores: np.ndarray
    conditioner: np.ndarray


def reduce_columns(M, tol: float = 1e-10) -> np.ndarray:
    """Keep a maximal well-conditioned subset of columns of ``M``.

    Columns are chosen by QR with column pivoting; a pivot is kept while
    ``|R_jj| > tol * |R_00|``. The column space is unchanged up to the
    dropped near-dependent directions.
    """
    M = _dense(M)
    if M.shape[1] == 0 or not np.any(M):
        return M[:, :0]
    _, R, piv = sla.qr(M, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    r = int(np.sum(diag > tol * diag[0]))
    return M[:, np.sort(piv[:r])]


def default_lewis_iterations(n: int) -> int:
    return math.ceil(math.log2(math.log2(n + 4))) + 4


def _leverage(M) -> np.ndarray:
    Q, R = np.linalg.qr(M)
    d = np.abs(np.diag(R))
    if d.size and d.min() <= 1e-12 * d.max():
        raise ConditioningError("matrix is numerically rank deficient")
    return np.einsum("ij,ij->i", Q, Q)


def lewis_residual(M, weights) -> float:
    """``max_i |w_i^2 - m_i^T (M^T W^-1 M)^-1 m_i| / w_i^2`` over nonzero rows."""
    M = _dense(M)
    w = np.asarray(weights, dtype=float)
    live = w > 0
    tau = _leverage(M[live] / np.sqrt(w[live])[:, None])
    # m_i^T (M^T W^-1 M)^-1 m_i = w_i * tau_i
    return float(np.max(np.abs(1.0 - tau / w[live])))


def lewis_weights(M, iterations: int | None = None, constants: Constants = DEFAULT) -> LewisState:
    """Approximate l1 Lewis weights of a full-column-rank matrix.

    Runs the fixed-point map ``w <- sqrt(w * tau(W^{-1/2} M))`` from the
    all-ones vector for ``iterations`` steps (default
    ``ceil(log2 log2(n + 4)) + 4``), then keeps iterating until the
    fixed-point residual drops below ``constants.lewis_tol`` or
    ``constants.lewis_max_iterations`` is reached. An explicit
    ``iterations`` disables the residual check.
    """
    M = _dense(M)
    n, m = M.shape
    if m == 0 or m > n:
        raise ConditioningError(f"need 1 <= columns <= rows, got {n}x{m}")
    explicit = iterations is not None
    if explicit and iterations < 1:
        raise ParameterError("iterations must be at least 1")
    steps = iterations if explicit else default_lewis_iterations(n)
    # all-zero rows have weight zero and take no part in the iteration
    live = np.any(M != 0, axis=1)
    Ml = M[live]
    if Ml.shape[0] < m:
        raise ConditioningError("matrix is numerically rank deficient")
    w = np.ones(Ml.shape[0])
    it = 0
    while True:
        tau = _leverage(Ml / np.sqrt(w)[:, None])
        res = float(np.max(np.abs(1.0 - tau / w)))
        if it >= steps and (explicit or res <= constants.lewis_tol or it >= constants.lewis_max_iterations):
            break
        w = np.sqrt(w * tau)
        it += 1
    full = np.zeros(n)
    full[live] = w
    return LewisState(full, it, res)


def lewis_count(m: int, constants: Constants = DEFAULT) -> int:
    return max(1, math.ceil(constants.c_L * m * math.log2(m + 2)))


def lewis_sample(M, state: LewisState, count: int, rng=None) -> SamplingMatrix:
    """``count`` i.i.d. rows with ``p_i = w_i / sum(w)``, scaled by ``1/(count p_i)``."""
    if count < 1:
        raise ParameterError("count must be at least 1")
    w = np.asarray(state.weights, dtype=float)
    if M is not None and M.shape[0] != len(w):
        raise DimensionError("weights do not match the matrix")
    total = w.sum()
    if not total > 0:
        raise SamplingError("all Lewis weights are zero")
    p = w / total
    idx = as_generator(rng).choice(len(w), size=count, p=p)
    return SamplingMatrix(idx, 1.0 / (count * p[idx]), len(w))


def _apply_embedding(Pi, M):
    if Pi is None:
        return M
    if isinstance(Pi, (SamplingMatrix, DenseSketch)):
        return Pi.apply(M)
    return np.asarray(Pi) @ M


def l1_leverage_scores(M, Pi=None, tol: float = 1e-10) -> L1LeverageScores:
    """Row l1 norms of ``M R^{-1}`` where ``QR = Pi M``.

    ``Pi`` is a :class:`SamplingMatrix`, a :class:`DenseSketch`, an array,
    or ``None`` for the identity.
    """
    M = _dense(M)
    PM = _dense(_apply_embedding(Pi, M))
    if PM.shape[0] < M.shape[1]:
        raise ConditioningError("embedding has fewer rows than the matrix has columns")
    _, R = np.linalg.qr(PM)
    d = np.abs(np.diag(R))
    if d.size == 0 or d.min() <= tol * d.max():
        raise ConditioningError("embedded matrix is rank deficient")
    Rinv = sla.solve_triangular(R, np.eye(R.shape[0]))
    scores = np.abs(M @ Rinv).sum(axis=1)
    return L1LeverageScores(scores, Rinv)


def leverage_sample(M, scores: L1LeverageScores, N: int, gamma: float = 1.0, rng=None) -> SamplingMatrix:
    """``N`` i.i.d. rows with ``p_i = gamma l_i / sum(l) + (1 - gamma) / n``."""
    if N < 1:
        raise ParameterError("N must be at least 1")
    if not 0 < gamma <= 1:
        raise ParameterError("gamma must lie in (0, 1]")
    s = np.asarray(scores.scores, dtype=float)
    total = s.sum()
    if not total > 0 or not np.isfinite(total):
        raise SamplingError("leverage scores have no mass")
    n = len(s)
    p = gamma * s / total + (1 - gamma) / n
    p = p / p.sum()
    idx = as_generator(rng).choice(n, size=N, p=p)
    return SamplingMatrix(idx, 1.0 / (N * p[idx]), n)


def certify_l1(Pi, M, directions: int = 50, rng=None) -> tuple[float, float]:
    """Smallest and largest ``||Pi M x||_1 / ||M x||_1`` over random ``x``."""
    M = _dense(M)
    X = as_generator(rng).standard_normal((M.shape[1], directions))
    MX = M @ X
    denom = np.abs(MX).sum(axis=0)
    keep = denom > 0
    if not np.any(keep):
        return 1.0, 1.0
    num = np.abs(_dense(_apply_embedding(Pi, MX[:, keep]))).sum(axis=0)
    ratio = num / denom[keep]
    return float(ratio.min()), float(ratio.max())


def l1_embedding(M, rng=None, kind: str = "lewis", constants: Constants = DEFAULT):
    """Build an l1 subspace embedding for the column space of ``M``.

    Returns ``(embedding, alpha, beta)`` where ``alpha`` and ``beta`` are the
    extreme distortions measured on random test directions. The Lewis path
    samples ``ceil(c_L m log2(m + 2))`` rows and requires
    ``(alpha, beta)`` within ``(1/2, 3/2)``; the Cauchy path draws a dense
    Cauchy sketch, rescales it so that ``alpha = 1``, and requires
    ``beta <= m log2(m + 2) + 2``. Either path retries up to
    ``constants.embed_retries`` times before raising
    :class:`EmbeddingError`.
    """
    M = _dense(M)
    n = M.shape[0]
    g = as_generator(rng)
    R = reduce_columns(M, constants.rank_tol)
    m = R.shape[1]
    if m == 0:
        return SamplingMatrix.identity(n), 1.0, 1.0
    ndir = constants.embed_test_directions
    if kind == "lewis":
        count = lewis_count(m, constants)
        if count >= n:
            return SamplingMatrix.identity(n), 1.0, 1.0
        state = lewis_weights(R, constants=constants)
        for _ in range(constants.embed_retries):
            L = lewis_sample(R, state, count, g)
            a, b = certify_l1(L, R, ndir, g)
            if a >= 0.5 and b <= 1.5:
                return L, a, b
        raise EmbeddingError(f"Lewis sample failed certification after {constants.embed_retries} tries")
    if kind == "cauchy":
        rows = max(m, math.ceil(constants.c_W * m * math.log2(m + 2)))
        bound = m * math.log2(m + 2) + 2
        for _ in range(constants.embed_retries):
            C = cauchy_sketch(rows, n, g)
            a, b = certify_l1(C, R, ndir, g)
            if a <= 0:
                continue
            W = DenseSketch(C.entries / a, "cauchy", 1.0 / a)
            if b / a <= bound:
                return W, 1.0, b / a
        raise EmbeddingError(f"Cauchy sketch failed certification after {constants.embed_retries} tries")
    raise ParameterError(f"unknown embedding kind {kind!r}")
