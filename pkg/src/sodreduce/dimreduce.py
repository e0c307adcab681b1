"""Adaptive dimension reduction and per-row reduced representations.

:func:`dimension_reduction` grows a basis ``B`` by alternating the two
bicriteria solvers on the current residual. :func:`complete_dim_reduce`
then stores, for every point, coordinates in ``B`` and the distance to
``B``, both read off CountSketch regressions that are cross-checked
against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .bicriteria import eps_approx, poly_approx
from .config import DEFAULT, Constants
from .errors import ParameterError
from .linalg import empty_basis, row_chunks
from .rng import as_generator
from .shapes import lifted_distances
from .sketching import countsketch, countsketch_apply, log_size

__all__ = [
    "ReducedRep",
    "draw_istar",
    "dimension_reduction",
    "approximate_projections",
    "exact_projections",
    "complete_dim_reduce",
    "reduce_with_basis",
    "reduced_cost",
]


@dataclass
class ReducedRep:
    """Per-point coordinates in ``basis`` plus the residual distance to it.

    Attributes:
        basis: ``d x c`` orthonormal columns.
        coords: ``n x c``; row ``i`` approximates ``basis^T a_i``.
        residuals: length ``n``; entry ``i`` approximates ``dist(a_i, span(basis))``.
        eps: accuracy parameter the representation was built for.
        seed: seed of the run, or ``None``.
        stats: counters describing how the representation was built.
    """

    basis: np.ndarray
    coords: np.ndarray
    residuals: np.ndarray
    eps: float = 0.0
    seed: Optional[int] = None
    stats: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @property
    def c(self) -> int:
        return self.basis.shape[1]

    def lifted(self) -> np.ndarray:
        """The ``n x (c + 1)`` matrix ``[coords | residuals]``."""
        return np.hstack([self.coords, self.residuals[:, None]])


def draw_istar(eps: float, rng, deterministic: bool = False) -> int:
    """Iteration count, uniform on ``{1, ..., floor(10/eps) + 1}``."""
    top = math.floor(10.0 / eps) + 1
    if deterministic:
        return top
    return int(rng.integers(1, top + 1))


def _sparse_step(A, B, k, eps, rng, constants):
    delta = eps / 100.0
    X = poly_approx(A, B, k, delta, rng, constants).basis
    return eps_approx(A, B, X, k, constants.K_default, eps, delta, rng, constants).basis


def dimension_reduction(A, k: int, eps: float, rng=None, constants: Constants = DEFAULT,
                        history: list | None = None, step: Callable | None = None,
                        stats: dict | None = None) -> np.ndarray:
    """Basis ``B`` whose span has the extension property for ``k``-dim subspaces.

    Runs ``i*`` rounds (see :func:`draw_istar`); each round appends the
    output of ``eps_approx(poly_approx(...))`` computed on the residual
    ``A (I - B B^T)``. Stops early once the residual vanishes or ``B``
    spans the whole space. When ``history`` is a list, a copy of ``B``
    is appended after every round.

    ``step(A, B, k, eps, rng, constants)`` replaces the per-round solver.
    """
    if k < 1:
        raise ParameterError("k must be at least 1")
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    n, d = A.shape
    if k > d:
        raise ParameterError(f"k={k} exceeds the ambient dimension {d}")
    g = as_generator(rng)
    step = step or _sparse_step
    istar = draw_istar(eps, g, constants.deterministic_istar)
    B = empty_basis(d)
    rounds = 0
    for _ in range(istar):
        if B.shape[1] >= d:
            break
        U = step(A, B, k, eps, g, constants)
        rounds += 1
        if U.shape[1] == 0:
            break
        B = np.hstack([B, U])
        if history is not None:
            history.append(B.copy())
    if stats is not None:
        stats.update(istar=istar, rounds=rounds, dim=B.shape[1])
    return B


def exact_projections(A, B) -> tuple[np.ndarray, np.ndarray]:
    """``x_i = B^T a_i`` and ``v_i = ||a_i - B x_i||_2`` for every row."""
    n = A.shape[0]
    X = np.empty((n, B.shape[1]))
    v = np.empty(n)
    for s, blk in row_chunks(A):
        x = blk @ B
        X[s:s + len(blk)] = x
        v[s:s + len(blk)] = np.linalg.norm(blk - x @ B.T, axis=1)
    return X, v


@dataclass
class _SketchedRegression:
    """One CountSketch ``S`` applied to ``B`` and to every point.

    ``S B = Q R``; ``Y = Q^T S A^T`` and ``rho`` are the residual column
    norms of ``S A^T``, so ``S [B | a_i] = [Q | q_i] [[R, y_i], [0, rho_i]]``.
    """

    R: np.ndarray
    Y: np.ndarray
    rho: np.ndarray
    flat: np.ndarray
    ok: bool


def _regress(B, At, sk, tol) -> _SketchedRegression:
    SB = countsketch_apply(sk, B)
    SA = countsketch_apply(sk, At)
    c = B.shape[1]
    if SB.shape[0] < c:
        return _SketchedRegression(None, None, None, None, False)
    Q, R = np.linalg.qr(SB)
    dg = np.abs(np.diag(R))
    if c and dg.min() <= tol * dg.max():
        return _SketchedRegression(None, None, None, None, False)
    Y = Q.T @ SA
    rho = np.linalg.norm(SA - Q @ Y, axis=0)
    scale = np.linalg.norm(SA, axis=0)
    flat = rho <= tol * scale
    return _SketchedRegression(R, Y, rho, flat, True)


def _pair_passes(sj: _SketchedRegression, sl: _SketchedRegression, rows, lo, hi) -> np.ndarray:
    """Whether every singular value of ``T_j T_l^{-1}`` lies in ``[sqrt(lo), sqrt(hi)]``.

    With ``T = [[R, y], [0, rho]]`` the product is ``F = [[Phi, u], [0, gamma]]``
    where ``Phi = R_j R_l^{-1}``. The spectrum of ``F^T F`` lies in
    ``[lo, hi]`` exactly when both ``F^T F - lo I`` and ``hi I - F^T F`` are
    positive semidefinite, which is tested through Schur complements
    against the eigendecomposition of ``Phi^T Phi``.
    """
    c = sj.R.shape[0]
    m = len(rows)
    if c:
        Phi = sla.solve_triangular(sl.R, sj.R.T, trans="T").T
        lam, V = np.linalg.eigh(Phi.T @ Phi)
        if lam.min() <= lo or lam.max() >= hi:
            return np.zeros(m, dtype=bool)
    fj, fl = sj.flat[rows], sl.flat[rows]
    out = np.zeros(m, dtype=bool)
    both = fj & fl
    out[both] = True
    live = ~fj & ~fl
    if not np.any(live):
        return out
    idx = rows[live]
    rl = sl.rho[idx]
    gamma2 = (sj.rho[idx] / rl) ** 2
    if c:
        Ud = (sj.Y[:, idx] - Phi @ sl.Y[:, idx]) / rl
        u2 = np.einsum("ij,ij->j", Ud, Ud)
        Z = V.T @ (Phi.T @ Ud)
        Z2 = Z * Z
        lower = (u2 + gamma2 - lo) - (Z2 / (lam - lo)[:, None]).sum(axis=0)
        upper = (hi - u2 - gamma2) - (Z2 / (hi - lam)[:, None]).sum(axis=0)
    else:
        lower = gamma2 - lo
        upper = hi - gamma2
    out[live] = (lower >= 0) & (upper >= 0)
    return out


def approximate_projections(A, B, theta: float, rng=None, constants: Constants = DEFAULT):
    """Per-row coordinates and residuals read off cross-checked CountSketches.

    ``t = ceil(c_cst log2(n + 2))`` CountSketches with
    ``ceil(c_cs (c + 1)^2 / theta^2)`` buckets are drawn. For row ``a_i``
    the first sketch ``S_j`` is accepted whose regression agrees with at
    least half of the others, meaning every singular value of
    ``T_j T_l^{-1}`` lies in ``[1 - theta, 1 + theta]``. Rows without an
    accepted sketch fall back to exact projection.

    Returns ``(coords, residuals, fallback_mask)``.
    """
    n, d = A.shape
    c = B.shape[1]
    g = as_generator(rng)
    t = log_size(constants.c_cst, n)
    r = math.ceil(constants.c_cs * (c + 1) ** 2 / theta**2)
    At = A.T.tocsr() if sp.issparse(A) else np.ascontiguousarray(np.asarray(A, dtype=float).T)
    regs = [_regress(B, At, countsketch(r, d, g).compact(), constants.rank_tol) for _ in range(t)]
    lo, hi = (1 - theta) ** 2, (1 + theta) ** 2
    need = math.ceil((t - 1) / 2)
    X = np.zeros((n, c))
    v = np.zeros(n)
    pending = np.arange(n)
    for j, sj in enumerate(regs):
        if pending.size == 0:
            break
        if not sj.ok:
            continue
        votes = np.zeros(pending.size, dtype=int)
        for l, sl in enumerate(regs):
            if l == j or not sl.ok:
                continue
            votes += _pair_passes(sj, sl, pending, lo, hi)
            if np.all(votes >= need):
                break
        acc = pending[votes >= need]
        if acc.size:
            if c:
                X[acc] = sla.solve_triangular(sj.R, sj.Y[:, acc]).T
            v[acc] = sj.rho[acc]
        pending = pending[votes < need]
    fallback = np.zeros(n, dtype=bool)
    if pending.size:
        fallback[pending] = True
        Xe, ve = exact_projections(A[pending], B)
        X[pending] = Xe
        v[pending] = ve
    return X, v, fallback


def reduce_with_basis(A, B, eps: float, rng=None, constants: Constants = DEFAULT, seed=None) -> ReducedRep:
    """Reduced representation of ``A`` in a given basis ``B``."""
    eps_p = eps**2 / constants.c_q
    theta = constants.theta_factor * eps_p
    X, v, fb = approximate_projections(A, B, theta, rng, constants)
    stats = {"dim": B.shape[1], "fallback_rows": int(fb.sum()), "theta": theta}
    return ReducedRep(B, X, v, eps, seed, stats)


def complete_dim_reduce(A, k: int, eps: float, rng=None, constants: Constants = DEFAULT,
                        path: str = "sparse", blocks: int | None = None,
                        history: list | None = None, seed=None) -> ReducedRep:
    """Basis from :func:`dimension_reduction` at ``eps' = eps^2 / c_q`` plus per-row projections.

    ``path="dense"`` grows the basis with the block-sampling solvers.
    """
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    g = as_generator(rng)
    eps_p = eps**2 / constants.c_q
    info = {}
    if path == "sparse":
        B = dimension_reduction(A, k, eps_p, g, constants, history, stats=info)
    elif path == "dense":
        from .densefast import dimension_reduction_dense

        B = dimension_reduction_dense(A, k, eps_p, g, constants, history, blocks=blocks, stats=info)
    else:
        raise ParameterError(f"unknown path {path!r}")
    rep = reduce_with_basis(A, B, eps, g, constants, seed)
    rep.stats.update(info)
    rep.stats["path"] = path
    return rep


def reduced_cost(rep: ReducedRep, S) -> float:
    """``sum_i sqrt(dist(B x_i, S)^2 + v_i^2)``."""
    return float(lifted_distances(rep.basis, rep.coords, rep.residuals, S).sum())
