"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def countsketch_dense(buckets, signs, M, rows):
    out = np.zeros((rows, M.shape[1]))
    np.add.at(out, buckets, signs[:, None] * M)
    return out


def countsketch_csr(buckets, signs, indptr, indices, data, rows, m):
    out = np.zeros((rows, m))
    row_of = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    np.add.at(out, (buckets[row_of], indices), signs[row_of] * data)
    return out


def min_sqdist(X, C, chunk=2048):
    n = X.shape[0]
    d2 = np.empty(n)
    idx = np.empty(n, dtype=np.int64)
    if C.shape[0] == 0:
        d2.fill(np.inf)
        idx.fill(-1)
        return d2, idx
    for lo in range(0, n, chunk):
        diff = X[lo:lo + chunk, None, :] - C[None, :, :]
        block = np.einsum("ijk,ijk->ij", diff, diff)
        idx[lo:lo + chunk] = np.argmin(block, axis=1)
        d2[lo:lo + chunk] = block[np.arange(block.shape[0]), idx[lo:lo + chunk]]
    return d2, idx
