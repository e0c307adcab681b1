import numpy as np
import pytest


def planted(n, d, k, noise, rng, signal=5.0):
    """Rank-``k`` signal plus Gaussian noise; returns ``(A, V, noise_bound)``.

    ``noise_bound = ||N||_{1,2}`` upper-bounds the optimal k-subspace cost
    because the planted span is feasible.
    """
    V, _ = np.linalg.qr(rng.standard_normal((d, k)))
    S = rng.standard_normal((n, k)) * signal @ V.T
    N = noise * rng.standard_normal((n, d))
    return S + N, V, float(np.linalg.norm(N, axis=1).sum())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
