"""Query shapes and their sum-of-distances costs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError, ParameterError
from .linalg import is_orthonormal, row_chunks

__all__ = [
    "Centers",
    "Subspace",
    "UnionOfSubspaces",
    "shape_distance",
    "exact_cost",
    "lifted_distances",
    "random_shape",
]


@dataclass(frozen=True)
class Centers:
    """A finite set of points; distance is to the nearest one."""

    points: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.points, dtype=float))
        if P.shape[0] == 0 or not np.all(np.isfinite(P)):
            raise ParameterError("centers must be a nonempty set of finite points")
        object.__setattr__(self, "points", P)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def k(self) -> int:
        return self.points.shape[0]

    def distances(self, X) -> np.ndarray:
        d2, _ = kernels.min_sqdist(X, self.points)
        return np.sqrt(d2)


@dataclass(frozen=True)
class Subspace:
    """A linear subspace given by a ``d x l`` orthonormal basis."""

    basis: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.basis, dtype=float)
        if V.ndim != 2 or not is_orthonormal(V):
            raise ParameterError("subspace basis must have orthonormal columns")
        object.__setattr__(self, "basis", V)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    def distances(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        V = self.basis
        return np.linalg.norm(X - (X @ V) @ V.T, axis=1)


@dataclass(frozen=True)
class UnionOfSubspaces:
    """Union of ``j`` subspaces of dimension at most ``l``."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(p if isinstance(p, Subspace) else Subspace(p) for p in self.parts)
        if not parts:
            raise ParameterError("union needs at least one subspace")
        if len({p.dim for p in parts}) != 1:
            raise DimensionError("subspaces live in different ambient spaces")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self) -> int:
        return self.parts[0].dim

    @property
    def k(self) -> int:
        """``j * l``, the dimension budget the union occupies."""
        return len(self.parts) * max(p.k for p in self.parts)

    def distances(self, X) -> np.ndarray:
        return np.min([p.distances(X) for p in self.parts], axis=0)


def _check_dim(d, S):
    if d != S.dim:
        raise DimensionError(f"points have dimension {d}, shape lives in dimension {S.dim}")


def shape_distance(point, S) -> float:
    x = np.asarray(point, dtype=float).ravel()
    _check_dim(x.shape[0], S)
    return float(S.distances(x[None, :])[0])


def exact_cost(A, S) -> float:
    """Sum over rows of ``A`` of the distance to ``S``."""
    _check_dim(A.shape[1], S)
    return float(sum(S.distances(blk).sum() for _, blk in row_chunks(A)))


def lifted_distances(B, X, v, S, chunk: int = 4096) -> np.ndarray:
    """``sqrt(dist(B x_i, S)^2 + v_i^2)`` for every row ``x_i`` of ``X``."""
    B = np.asarray(B, dtype=float)
    X = np.asarray(X, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_dim(B.shape[0], S)
    out = np.empty(X.shape[0])
    for s in range(0, X.shape[0], chunk):
        P = X[s:s + chunk] @ B.T
        out[s:s + chunk] = np.hypot(S.distances(P), v[s:s + chunk])
    return out


def random_shape(kind: str, d: int, k: int, rng, scale: float = 1.0):
    """A random query: ``"centers"`` (Gaussian points times ``scale``),
    ``"subspace"`` (uniform ``k``-dimensional), or ``"union"`` (two lines)."""
    if kind == "centers":
        return Centers(rng.standard_normal((k, d)) * scale)
    if kind == "subspace":
        Q, _ = np.linalg.qr(rng.standard_normal((d, k)))
        return Subspace(Q)
    if kind == "union":
        lines = []
        for _ in range(2):
            u = rng.standard_normal((d, 1))
            lines.append(Subspace(u / np.linalg.norm(u)))
        return UnionOfSubspaces(tuple(lines))
    raise ParameterError(f"unknown shape kind {kind!r}")
