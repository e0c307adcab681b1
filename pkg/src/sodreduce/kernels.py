"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting
``SODREDUCE_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

import numpy as np
import scipy.sparse as sp

from . import _kernels_py

if os.environ.get("SODREDUCE_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"


def countsketch_rows(buckets, signs, M, rows, impl=None):
    """Scatter-add ``signs[i] * M[i]`` into output row ``buckets[i]``."""
    impl = impl or _impl
    buckets = np.ascontiguousarray(buckets, dtype=np.int64)
    signs = np.ascontiguousarray(signs, dtype=np.float64)
    if sp.issparse(M):
        M = sp.csr_matrix(M)
        return impl.countsketch_csr(
            buckets, signs,
            M.indptr.astype(np.int32, copy=False),
            M.indices.astype(np.int32, copy=False),
            M.data.astype(np.float64, copy=False),
            rows, M.shape[1],
        )
    M = np.asarray(M, dtype=np.float64)
    return impl.countsketch_dense(buckets, signs, M, rows)


def min_sqdist(X, C, impl=None):
    """Row-wise minimum squared distance from ``X`` to the rows of ``C``.

    Returns ``(d2, argmin)``; with no centers every distance is ``inf``.
    """
    impl = impl or _impl
    X = np.asarray(X, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    if C.shape[0] == 0:
        return _kernels_py.min_sqdist(X, C)
    return impl.min_sqdist(X, C)
