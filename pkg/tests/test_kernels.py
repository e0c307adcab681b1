import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from sodreduce import _kernels_py, kernels

compiled = pytest.importorskip("sodreduce._kernels")
IMPLS = [_kernels_py, compiled]


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 40), m=st.integers(1, 6), rows=st.integers(1, 8), seed=st.integers(0, 2**31))
def test_countsketch_backends_agree(n, m, rows, seed):
    g = np.random.default_rng(seed)
    h, s = g.integers(rows, size=n), g.choice([-1.0, 1.0], size=n)
    M = g.standard_normal((n, m))
    outs = [kernels.countsketch_rows(h, s, M, rows, impl) for impl in IMPLS]
    ref = np.zeros((rows, m))
    np.add.at(ref, h, s[:, None] * M)
    for out in outs:
        np.testing.assert_allclose(out, ref, atol=1e-12)
    S = sp.random(n, m, density=0.4, random_state=seed % 1000, format="csr")
    for impl in IMPLS:
        np.testing.assert_allclose(kernels.countsketch_rows(h, s, S, rows, impl),
                                   kernels.countsketch_rows(h, s, S.toarray(), rows, _kernels_py), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 30), k=st.integers(1, 5), d=st.integers(1, 5), seed=st.integers(0, 2**31))
def test_min_sqdist_backends_agree(n, k, d, seed):
    g = np.random.default_rng(seed)
    X, C = g.standard_normal((n, d)), g.standard_normal((k, d))
    ref = ((X[:, None, :] - C[None]) ** 2).sum(-1)
    for impl in IMPLS:
        d2, arg = kernels.min_sqdist(X, C, impl)
        np.testing.assert_allclose(d2, ref.min(1), rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(ref[np.arange(n), arg], ref.min(1), rtol=1e-12, atol=1e-12)


def test_min_sqdist_no_centers():
    d2, _ = kernels.min_sqdist(np.ones((3, 2)), np.zeros((0, 2)))
    assert np.all(np.isinf(d2))


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
