"""Random sketches and norm estimators.

Dense Gaussian and Cauchy sketches, CountSketch, and the three scalar
estimators built on them: the Cauchy median estimator of an l1 norm and
two Gaussian estimators of an l2 norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import DimensionError, ParameterError
from .rng import as_generator

__all__ = [
    "DenseSketch",
    "CountSketch",
    "gaussian_sketch",
    "cauchy_sketch",
    "countsketch",
    "countsketch_apply",
    "median_abs_l1",
    "gaussian_l2_estimate",
    "gaussian_l1_to_l2",
    "norm_p2",
    "row_norms",
    "log_size",
]


def log_size(c: float, n: int) -> int:
    """``ceil(c * log2(n + 2))``, the usual O(log n) sketch size."""
    return max(1, math.ceil(c * math.log2(n + 2)))


def _check_dims(rows, cols):
    if rows < 1 or cols < 1:
        raise DimensionError(f"sketch dimensions must be positive, got {rows}x{cols}")


@dataclass(frozen=True)
class DenseSketch:
    """A dense random matrix of shape ``rows x cols``.

    ``kind`` is ``"gaussian"`` or ``"cauchy"``; ``scale`` is the standard
    deviation used for Gaussian entries (1 for Cauchy).
    """

    entries: np.ndarray
    kind: str
    scale: float = 1.0

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def apply(self, M):
        """``entries @ M``; ``M`` may be dense or scipy-sparse."""
        if M.shape[0] != self.cols:
            raise DimensionError(f"sketch has {self.cols} columns, input has {M.shape[0]} rows")
        out = self.entries @ M
        return np.asarray(out)


def gaussian_sketch(rows: int, cols: int, scale: float = 1.0, rng=None) -> DenseSketch:
    """I.i.d. ``N(0, scale^2)`` entries."""
    _check_dims(rows, cols)
    if not scale > 0:
        raise ParameterError("scale must be positive")
    g = as_generator(rng)
    entries = g.standard_normal((rows, cols)) * scale
    entries.setflags(write=False)
    return DenseSketch(entries, "gaussian", float(scale))


def cauchy_sketch(rows: int, cols: int, rng=None) -> DenseSketch:
    """I.i.d. standard Cauchy entries, generated as a ratio of two normals."""
    _check_dims(rows, cols)
    g = as_generator(rng)
    num = g.standard_normal((rows, cols))
    den = g.standard_normal((rows, cols))
    entries = num / den
    entries.setflags(write=False)
    return DenseSketch(entries, "cauchy", 1.0)


@dataclass(frozen=True)
class CountSketch:
    """Sparse sign-hash sketch from ``len(hash)`` coordinates into ``rows`` buckets."""

    rows: int
    hash: np.ndarray
    sign: np.ndarray

    @property
    def cols(self) -> int:
        return len(self.hash)

    def compact(self) -> "CountSketch":
        """The same sketch restricted to occupied buckets.

        Dropping all-zero output rows leaves every norm and Gram matrix of
        sketched vectors unchanged, so a sketch with far more buckets than
        inputs costs no more than one with ``min(rows, cols)`` buckets.
        """
        used, inverse = np.unique(self.hash, return_inverse=True)
        return CountSketch(len(used), inverse.astype(np.int64), self.sign)


def countsketch(rows: int, cols: int, rng=None) -> CountSketch:
    _check_dims(rows, cols)
    g = as_generator(rng)
    h = g.integers(0, rows, size=cols, dtype=np.int64)
    s = g.choice(np.array([-1.0, 1.0]), size=cols)
    return CountSketch(int(rows), h, s)


def countsketch_apply(sk: CountSketch, M) -> np.ndarray:
    """``S @ M`` for ``M`` with ``sk.cols`` rows, in time O(nnz(M))."""
    if M.ndim != 2 or M.shape[0] != sk.cols:
        raise DimensionError(f"CountSketch expects {sk.cols} input rows, got shape {M.shape}")
    return kernels.countsketch_rows(sk.hash, sk.sign, M, sk.rows)


def _unwrap(S):
    return S.entries if isinstance(S, DenseSketch) else np.asarray(S)


def median_abs_l1(C, x) -> float | np.ndarray:
    """Median of ``|C x|``: estimates ``||x||_1`` when ``C`` is standard Cauchy.

    With a matrix ``x`` the estimate is taken column by column.
    """
    C = _unwrap(C)
    x = np.asarray(x, dtype=float)
    if C.shape[1] != x.shape[0]:
        raise DimensionError(f"sketch has {C.shape[1]} columns, vector has length {x.shape[0]}")
    return np.median(np.abs(C @ x), axis=0)


def gaussian_l2_estimate(G, x) -> float | np.ndarray:
    """``||x^T G||_2``; with ``G`` scaled by ``1/sqrt(t)`` this tracks ``||x||_2``.

    A 2-d ``x`` is treated as a stack of row vectors.
    """
    G = _unwrap(G)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != G.shape[0]:
        raise DimensionError(f"sketch has {G.shape[0]} rows, vector has length {x.shape[-1]}")
    return np.linalg.norm(x @ G, axis=-1)


def gaussian_l1_to_l2(G, x, t: int | None = None) -> float | np.ndarray:
    """``sqrt(pi/2) / t * ||x^T G||_1`` for an unscaled Gaussian ``G`` with ``t`` columns."""
    G = _unwrap(G)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != G.shape[0]:
        raise DimensionError(f"sketch has {G.shape[0]} rows, vector has length {x.shape[-1]}")
    t = G.shape[1] if t is None else t
    if t != G.shape[1]:
        raise DimensionError(f"t={t} does not match the {G.shape[1]} sketch columns")
    return math.sqrt(math.pi / 2) / t * np.abs(x @ G).sum(axis=-1)


def row_norms(M) -> np.ndarray:
    """Euclidean norm of every row of a dense or sparse matrix."""
    if sp.issparse(M):
        return np.sqrt(np.asarray(M.multiply(M).sum(axis=1)).ravel())
    return np.linalg.norm(np.asarray(M, dtype=float), axis=1)


def norm_p2(M, p: float = 1.0) -> float:
    """The (p,2)-norm ``(sum_i ||M_i||_2^p)^(1/p)``."""
    if p < 1:
        raise ParameterError("p must be at least 1")
    if M.shape[0] == 0:
        return 0.0
    r = row_norms(M)
    if p == 1:
        return float(r.sum())
    return float(np.sum(r ** p) ** (1.0 / p))
