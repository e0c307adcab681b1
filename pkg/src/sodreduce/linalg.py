"""Small dense linear-algebra helpers shared by the solvers.

A basis is a ``d x c`` array with orthonormal columns; ``c`` may be zero.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import DimensionError

CHUNK = 4096


def empty_basis(d: int) -> np.ndarray:
    return np.zeros((d, 0))


def is_orthonormal(B, tol: float = 1e-8) -> bool:
    B = np.asarray(B)
    if B.shape[1] == 0:
        return True
    return bool(np.max(np.abs(B.T @ B - np.eye(B.shape[1]))) <= tol)


def orthonormal_basis(M, tol: float = 1e-10, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of the column space of ``M`` by pivoted QR.

    Columns whose pivot falls below ``tol * scale`` are dropped; ``scale``
    defaults to the largest pivot.
    """
    M = np.asarray(M, dtype=float)
    if M.shape[1] == 0:
        return M[:, :0].copy()
    Q, R, _ = sla.qr(M, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    ref = diag[0] if scale is None else max(scale, diag[0] if diag.size else 0.0)
    if ref == 0:
        return M[:, :0].copy()
    r = int(np.sum(diag > tol * ref))
    return Q[:, :r]


def rowspace_basis(M, tol: float = 1e-10, scale: float | None = None) -> np.ndarray:
    """Right singular vectors of ``M`` ordered by singular value, as columns.

    Directions with singular value at most ``tol * scale`` are dropped.
    """
    M = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=float)
    d = M.shape[1]
    if M.shape[0] == 0 or not np.any(M):
        return empty_basis(d)
    _, s, Vt = np.linalg.svd(M, full_matrices=False)
    ref = s[0] if scale is None else max(scale, s[0])
    r = int(np.sum(s > tol * ref))
    return Vt[:r].T.copy()


def project_out(M, Q) -> np.ndarray:
    """``(I - Q Q^T) M`` applied twice for stability."""
    M = np.asarray(M, dtype=float)
    if Q.shape[1] == 0:
        return M.copy()
    for _ in range(2):
        M = M - Q @ (Q.T @ M)
    return M


def extend_basis(Q, V, tol: float = 1e-10) -> np.ndarray:
    """Append to ``Q`` the part of ``V``'s columns orthogonal to it, keeping order.

    Columns of ``V`` are taken one at a time (Gram-Schmidt with
    reorthogonalization), so an ordered ``V`` yields an ordered extension.
    A column is dropped when less than ``tol`` of its norm survives.
    """
    Q = np.asarray(Q, dtype=float)
    V = np.asarray(V, dtype=float)
    if V.shape[1] == 0:
        return Q
    d, q = Q.shape
    out = np.empty((d, q + V.shape[1]))
    out[:, :q] = Q
    r = q
    for j in range(V.shape[1]):
        v = V[:, j]
        ref = np.linalg.norm(v)
        if ref == 0:
            continue
        for _ in range(2):
            C = out[:, :r]
            v = v - C @ (C.T @ v)
        nrm = np.linalg.norm(v)
        if nrm > max(tol, 1e-8) * ref:
            out[:, r] = v / nrm
            r += 1
            if r == d:
                break
    return out[:, :r].copy()


def matmul(A, M) -> np.ndarray:
    """``A @ M`` as a dense array for dense or sparse ``A``."""
    out = A @ M
    return out.toarray() if sp.issparse(out) else np.asarray(out)


def residual_apply(A, B, M) -> np.ndarray:
    """``A (I - B B^T) M`` computed as ``A M - (A B)(B^T M)``."""
    B = np.asarray(B, dtype=float)
    M = np.asarray(M, dtype=float)
    if A.shape[1] != B.shape[0] or B.shape[0] != M.shape[0]:
        raise DimensionError(f"shapes {A.shape}, {B.shape}, {M.shape} do not line up")
    out = matmul(A, M)
    if B.shape[1]:
        out = out - matmul(A, B) @ (B.T @ M)
    return out


def row_chunks(A, chunk: int = CHUNK):
    """Yield ``(start, dense_block)`` over row blocks of ``A``."""
    n = A.shape[0]
    for s in range(0, n, chunk):
        blk = A[s:s + chunk]
        yield s, blk.toarray() if sp.issparse(blk) else np.asarray(blk, dtype=float)


def residual_norms(A, Q) -> np.ndarray:
    """Row norms of ``A (I - Q Q^T)`` with the difference formed explicitly."""
    Q = np.asarray(Q, dtype=float)
    out = np.empty(A.shape[0])
    for s, blk in row_chunks(A):
        R = blk - (blk @ Q) @ Q.T if Q.shape[1] else blk
        out[s:s + len(blk)] = np.linalg.norm(R, axis=1)
    return out


def residual_cost(A, Q) -> float:
    """``||A (I - Q Q^T)||_{1,2}``."""
    return float(residual_norms(A, Q).sum())
