"""Bicriteria solvers for (k,1)-subspace approximation relative to a frozen basis.

:func:`poly_approx` returns a small basis whose residual cost is within a
constant factor of the best ``k``-dimensional subspace; :func:`eps_approx`
refines it by residual sampling to a ``(1 + eps)`` factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Constants
from .embeddings import l1_embedding
from .errors import ParameterError
from .linalg import empty_basis, extend_basis, matmul, residual_apply, residual_cost, rowspace_basis
from .rng import as_generator
from .sketching import gaussian_sketch, log_size

__all__ = [
    "BicriteriaResult",
    "CostSketch",
    "poly_approx",
    "eps_approx",
    "residual_probabilities",
    "sketch_columns",
    "residual_sample_count",
    "trial_count",
]


@dataclass(frozen=True)
class BicriteriaResult:
    basis: np.ndarray
    cost_estimate: float
    trials_run: int


def _check(A, B, k):
    n, d = A.shape
    if k < 1:
        raise ParameterError("k must be at least 1")
    if k > d:
        raise ParameterError(f"k={k} exceeds the ambient dimension {d}")
    if B.shape[0] != d:
        raise ParameterError(f"basis has {B.shape[0]} rows, points have {d} columns")


def sketch_columns(k: int, delta: float, d: int, constants: Constants = DEFAULT) -> int:
    """Column count of the Gaussian sketch, ``ceil(c_S (k + 1/delta^2))`` after capping."""
    cols = math.ceil(constants.c_S * (k + 1.0 / delta**2))
    cap = constants.sketch_cols_cap
    if cap is None:
        cap = math.ceil(2 * constants.c_S * k)
    return max(1, min(cols, cap, d))


def trial_count(delta: float) -> int:
    return math.ceil(math.log2(1.0 / delta)) + 1


def residual_sample_count(n, k, K, eps, delta, constants: Constants = DEFAULT) -> int:
    s = math.ceil(constants.c_s * K * k**3 / eps**2 * math.log2(1.0 / delta + 2))
    cap = n if constants.residual_samples_cap is None else min(n, constants.residual_samples_cap)
    return max(1, min(s, cap))


class CostSketch:
    """Estimates ``||A (I - Q Q^T)||_{1,2}`` for many ``Q`` through one Gaussian ``G``.

    ``A G`` is formed once; each query then costs one product ``A Q``.
    """

    def __init__(self, A, t: int, rng=None, exact: bool = False):
        self.A = A
        self.exact = exact
        d = A.shape[1]
        self.G = gaussian_sketch(d, t, 1.0 / math.sqrt(t), rng).entries
        self.AG = matmul(A, self.G)

    def rows(self, Q) -> np.ndarray:
        """Sketched residual rows ``A (I - Q Q^T) G``."""
        if Q.shape[1] == 0:
            return self.AG
        return self.AG - matmul(self.A, Q) @ (Q.T @ self.G)

    def cost(self, Q) -> float:
        if self.exact:
            return residual_cost(self.A, Q)
        return float(np.linalg.norm(self.rows(Q), axis=1).sum())


def _sketch_norm(M) -> float:
    return float(np.linalg.norm(M, axis=1).sum())


def poly_approx(A, B, k: int, delta: float, rng=None, constants: Constants = DEFAULT,
                embedding: str = "lewis") -> BicriteriaResult:
    """Constant-factor bicriteria basis for the residual ``A (I - B B^T)``.

    Each trial draws a Gaussian ``S^T`` with :func:`sketch_columns` columns,
    builds an l1 embedding ``L`` of ``A (I - B B^T) S^T``, and takes the
    singular-value-ordered row space of ``L A (I - B B^T)``. The trial with
    the smallest sketched residual cost is returned. The basis is orthogonal
    to ``B``.
    """
    B = np.asarray(B, dtype=float)
    _check(A, B, k)
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    n, d = A.shape
    g = as_generator(rng)
    est = CostSketch(A, log_size(constants.c_g, n), g, constants.exact_cost)
    if B.shape[1] >= d or _sketch_norm(est.rows(B)) <= 1e-10 * _sketch_norm(est.AG):
        return BicriteriaResult(empty_basis(d), 0.0, 0)
    cols = sketch_columns(k, delta, d, constants)
    trials = trial_count(delta)
    best = None
    for _ in range(trials):
        S = gaussian_sketch(d, cols, 1.0, g).entries
        L, _, _ = l1_embedding(residual_apply(A, B, S), g, embedding, constants)
        LA = L.apply(A)
        LA = LA.toarray() if hasattr(LA, "toarray") else LA
        R = LA - (LA @ B) @ B.T if B.shape[1] else LA
        X = rowspace_basis(R, constants.rank_tol)
        X = extend_basis(B, X)[:, B.shape[1]:]
        cost = est.cost(np.hstack([B, X]))
        if best is None or cost < best[1]:
            best = (X, cost)
    return BicriteriaResult(best[0], best[1], trials)


def residual_probabilities(A, Q, G) -> np.ndarray:
    """``p_i = ||(A (I - Q Q^T) G)_i||_2 / ||A (I - Q Q^T) G||_{1,2}``.

    Returns all zeros when the sketched residual vanishes.
    """
    M = matmul(A, G)
    if Q.shape[1]:
        M = M - matmul(A, Q) @ (Q.T @ G)
    r = np.linalg.norm(M, axis=1)
    total = r.sum()
    return r / total if total > 0 else r


def eps_approx(A, B, Xhat, k: int, K: float, eps: float, delta: float, rng=None,
               constants: Constants = DEFAULT) -> BicriteriaResult:
    """Refine ``Xhat`` by residual sampling.

    Rows are sampled with probability proportional to their sketched
    distance from ``[B | Xhat]``. The returned basis ``U`` spans the
    ``B``-orthogonal parts of ``Xhat`` and of the sampled rows; its
    leading columns are ``Xhat`` followed by the singular-value-ordered
    row space of the residualized sample.
    """
    B = np.asarray(B, dtype=float)
    Xhat = np.asarray(Xhat, dtype=float)
    _check(A, B, k)
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    n, d = A.shape
    g = as_generator(rng)
    X = extend_basis(B, Xhat)[:, B.shape[1]:]
    Q = np.hstack([B, X])
    if Q.shape[1] >= d:
        return BicriteriaResult(X, 0.0, 1)
    t = log_size(constants.c_t, n)
    G = gaussian_sketch(d, t, 1.0 / math.sqrt(t), g).entries
    p = residual_probabilities(A, Q, G)
    if not p.sum() > 0:
        return BicriteriaResult(X, 0.0, 1)
    s = residual_sample_count(n, k, K, eps, delta, constants)
    picked = np.unique(g.choice(n, size=s, p=p / p.sum()))
    rows = A[picked]
    rows = rows.toarray() if hasattr(rows, "toarray") else np.asarray(rows, dtype=float)
    R = rows - (rows @ Q) @ Q.T
    scale = np.linalg.norm(rows, axis=1).max()
    V = rowspace_basis(R, constants.rank_tol, scale)
    U = extend_basis(Q, V)[:, B.shape[1]:]
    Qu = np.hstack([B, U])
    if constants.exact_cost:
        cost = residual_cost(A, Qu)
    else:
        M = matmul(A, G) - matmul(A, Qu) @ (Qu.T @ G)
        cost = float(np.linalg.norm(M, axis=1).sum())
    return BicriteriaResult(U, cost, 1)
