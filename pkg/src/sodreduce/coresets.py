"""Weighted coresets on a reduced representation.

A point ``i`` of a :class:`~sodreduce.dimreduce.ReducedRep` is lifted to
``(B x_i, v_i)`` in ``R^{d+1}`` and a shape ``S`` to ``S x {0}``, so the
lifted distance is ``sqrt(dist(B x_i, S)^2 + v_i^2)``. Since ``B`` is
orthonormal, distances between lifted points can be computed on the
``(c + 1)``-dimensional rows ``[x_i | v_i]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import DEFAULT, Constants
from .dimreduce import ReducedRep
from .embeddings import lewis_sample, lewis_weights, reduce_columns
from .errors import ParameterError
from .rng import as_generator
from .shapes import lifted_distances
from .sketching import gaussian_sketch, log_size

__all__ = [
    "LiftedRep",
    "WeightedCoreset",
    "subspace_coreset",
    "kmedian_coreset",
    "kmedian_seed",
    "coreset_query_cost",
    "effective_budget",
]


@dataclass(frozen=True)
class LiftedRep:
    """Rows ``[x_i | v_i]`` with the basis they are expressed in."""

    points: np.ndarray
    basis: np.ndarray

    @classmethod
    def from_rep(cls, rep: ReducedRep) -> "LiftedRep":
        return cls(rep.lifted(), rep.basis)

    def distances(self, S) -> np.ndarray:
        return lifted_distances(self.basis, self.points[:, :-1], self.points[:, -1], S)


@dataclass(frozen=True)
class WeightedCoreset:
    indices: np.ndarray
    weights: np.ndarray
    coords: np.ndarray
    residuals: np.ndarray
    basis: np.ndarray
    kind: str = ""

    def __post_init__(self):
        if not np.all(np.isfinite(self.weights) & (self.weights > 0)):
            raise ParameterError("coreset weights must be finite and positive")

    @property
    def size(self) -> int:
        return len(self.indices)


def _from_sample(rep: ReducedRep, idx, scales, kind) -> WeightedCoreset:
    """Merge repeated picks into one row carrying the summed weight."""
    uniq, inv = np.unique(idx, return_inverse=True)
    w = np.bincount(inv, weights=scales, minlength=len(uniq))
    return WeightedCoreset(uniq, w, rep.coords[uniq], rep.residuals[uniq], rep.basis, kind)


def _full(rep: ReducedRep, kind) -> WeightedCoreset:
    n = rep.n
    return WeightedCoreset(np.arange(n), np.ones(n), rep.coords, rep.residuals, rep.basis, kind)


def effective_budget(budget: float, n: int, constants: Constants = DEFAULT) -> int:
    """``min(budget, ceil(coreset_fraction * n))``, at least one."""
    return max(1, min(math.ceil(budget), math.ceil(constants.coreset_fraction * n)))


def subspace_coreset(rep: ReducedRep, k: int, eps: float, rng=None,
                     constants: Constants = DEFAULT) -> WeightedCoreset:
    """Lewis-weight sample of the rows of ``[X | v]`` with importance weights."""
    if k < 1 or not 0 < eps < 1:
        raise ParameterError("need k >= 1 and eps in (0, 1)")
    n = rep.n
    budget = constants.c_T * k**3 / eps**8 * math.log2(n + 2)
    m = effective_budget(budget, n, constants)
    if m >= n:
        return _full(rep, "subspace")
    M = reduce_columns(rep.lifted(), constants.rank_tol)
    if M.shape[1] == 0:
        return WeightedCoreset(np.array([0]), np.array([float(n)]), rep.coords[:1],
                               rep.residuals[:1], rep.basis, "subspace")
    state = lewis_weights(M, constants=constants)
    L = lewis_sample(M, state, m, rng)
    return _from_sample(rep, L.indices, L.scales, "subspace")


def kmedian_seed(points, k: int, rng=None, candidates: int | None = None, jl_factor: float = 8.0):
    """Constant-factor k-median solution with centers restricted to input rows.

    Points are projected to ``ceil(jl_factor * log2(n + 2))`` dimensions by
    a Gaussian map when that is smaller than their dimension. In the
    projected space, centers are seeded one at a time with probability
    proportional to the distance to the nearest chosen center, then one
    sweep of single swaps against sampled candidates keeps any swap that
    lowers the cost.

    Returns:
        (centers, assignment, cost): center row indices, nearest-center
        index per point, and the cost in the original space.
    """
    P = np.asarray(points, dtype=float)
    n, dim = P.shape
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    g = as_generator(rng)
    r = log_size(jl_factor, n)
    Z = P @ gaussian_sketch(dim, r, 1.0 / math.sqrt(r), g).entries if r < dim else P

    chosen = [int(g.integers(n))]
    d2, _ = kernels.min_sqdist(Z, Z[chosen])
    for _ in range(1, k):
        w = np.sqrt(d2)
        if w.sum() > 0:
            nxt = int(g.choice(n, p=w / w.sum()))
        else:
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(g.choice(rest))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((Z - Z[nxt]) ** 2).sum(axis=1))

    def cost_of(cs):
        dd, _ = kernels.min_sqdist(Z, Z[cs])
        return np.sqrt(dd).sum()

    best = cost_of(chosen)
    m = candidates or min(n, 2 * k + 10)
    w = np.sqrt(kernels.min_sqdist(Z, Z[chosen])[0])
    pool = g.choice(n, size=m, replace=False, p=w / w.sum()) if np.count_nonzero(w) >= m else np.arange(n)[w > 0]
    for cand in pool:
        cand = int(cand)
        if cand in chosen:
            continue
        for pos in range(k):
            trial = chosen.copy()
            trial[pos] = cand
            c = cost_of(trial)
            if c < best:
                best, chosen = c, trial
                break
    d2, assign = kernels.min_sqdist(P, P[chosen])
    return np.asarray(chosen), assign, float(np.sqrt(d2).sum())


def kmedian_coreset(rep: ReducedRep, k: int, eps: float, rng=None,
                    constants: Constants = DEFAULT) -> WeightedCoreset:
    """Sensitivity-sampling coreset for k-median queries on lifted points.

    Sensitivities are ``dist(p_i, c(p_i)) / total + 2 / |cluster(p_i)|``
    from a :func:`kmedian_seed` solution; rows are drawn proportional to
    them and weighted by ``1 / (m p_i)``.
    """
    if k < 1 or not 0 < eps < 1:
        raise ParameterError("need k >= 1 and eps in (0, 1)")
    n = rep.n
    g = as_generator(rng)
    P = rep.lifted()
    if np.all(P == P[0]):
        return WeightedCoreset(np.array([0]), np.array([float(n)]), rep.coords[:1],
                               rep.residuals[:1], rep.basis, "kmedian")
    centers, assign, _ = kmedian_seed(P, min(k, n), g)
    dist = np.sqrt(kernels.min_sqdist(P, P[centers])[0])
    sizes = np.bincount(assign, minlength=len(centers))
    total = dist.sum()
    sens = 2.0 / sizes[assign]
    if total > 0:
        sens = sens + dist / total
    budget = constants.c_m * k / eps**2 * sens.sum() * math.log2(n + 2)
    m = effective_budget(budget, n, constants)
    if m >= n:
        return _full(rep, "kmedian")
    p = sens / sens.sum()
    idx = g.choice(n, size=m, p=p)
    return _from_sample(rep, idx, 1.0 / (m * p[idx]), "kmedian")


def coreset_query_cost(cs: WeightedCoreset, S) -> float:
    """``sum_i w_i sqrt(dist(B x_i, S)^2 + v_i^2)`` over the coreset rows."""
    if cs.size == 0:
        return 0.0
    return float(np.dot(cs.weights, lifted_distances(cs.basis, cs.coords, cs.residuals, S)))
