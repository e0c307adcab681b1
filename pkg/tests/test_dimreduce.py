import math

import numpy as np
import pytest
import scipy.sparse as sp
from conftest import planted
from oracles import residual_cost

from sodreduce.config import DEFAULT
from sodreduce.dimreduce import (
    ReducedRep,
    approximate_projections,
    complete_dim_reduce,
    dimension_reduction,
    draw_istar,
    exact_projections,
    reduce_with_basis,
    reduced_cost,
)
from sodreduce.errors import DimensionError, ParameterError
from sodreduce.linalg import is_orthonormal, orthonormal_basis
from sodreduce.shapes import Centers, Subspace, UnionOfSubspaces, exact_cost, random_shape, shape_distance
from sodreduce.sketching import countsketch, countsketch_apply

# few rounds of small bases, so that the loop does not saturate at once
NARROW = DEFAULT.replace(sketch_cols_cap=2, residual_samples_cap=2, deterministic_istar=True)


def exact_dist(A, B):
    return np.linalg.norm(A - A @ B @ B.T, axis=1)


def test_shape_distance_examples():
    assert shape_distance([1, 0], Centers([[0, 0]])) == 1
    assert shape_distance([3, 4], Subspace(np.array([[1.0], [0.0]]))) == 4
    u = UnionOfSubspaces((np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]])))
    assert shape_distance([1, 1], u) == 1
    with pytest.raises(DimensionError):
        shape_distance([1, 0, 0], Centers([[0, 0]]))
    with pytest.raises(ParameterError):
        Subspace(np.array([[1.0], [1.0]]))


def test_exact_cost_examples(rng):
    assert exact_cost(np.array([[1.0, 0], [0, 1]]), Centers([[0, 0]])) == 2
    V = orthonormal_basis(rng.standard_normal((6, 2)))
    A = rng.standard_normal((10, 2)) @ V.T
    assert exact_cost(A, Subspace(V)) <= 1e-12 * np.abs(A).sum()
    A = rng.standard_normal((50, 8))
    C = rng.standard_normal((2, 8))
    slow = sum(min(math.dist(a, c) for c in C) for a in A)
    assert exact_cost(A, Centers(C)) == pytest.approx(slow, rel=1e-12)
    assert exact_cost(sp.csr_matrix(A), Centers(C)) == pytest.approx(slow, rel=1e-12)


def test_draw_istar_range(rng):
    vals = {draw_istar(0.5, rng) for _ in range(500)}
    assert vals == set(range(1, 22))
    assert draw_istar(0.5, rng, deterministic=True) == 21


def test_dimension_reduction_rank_k():
    g = np.random.default_rng(0)
    A = g.standard_normal((100, 3)) @ g.standard_normal((3, 20))
    hist = []
    B = dimension_reduction(A, 3, 0.5, g, history=hist)
    assert is_orthonormal(B)
    assert residual_cost(A, hist[0]) <= 1e-6 * np.linalg.norm(A, axis=1).sum()


def test_dimension_reduction_zero_matrix():
    B = dimension_reduction(np.zeros((10, 4)), 1, 0.5, 0)
    assert B.shape[1] == 0


def test_dimension_reduction_rejects_bad_args():
    with pytest.raises(ParameterError):
        dimension_reduction(np.ones((5, 3)), 0, 0.5, 0)
    with pytest.raises(ParameterError):
        dimension_reduction(np.ones((5, 3)), 1, 1.0, 0)


def test_nesting_residual_non_increasing():
    g = np.random.default_rng(3)
    A, _, _ = planted(120, 40, 2, 0.5, g)
    hist = []
    dimension_reduction(A, 2, 0.3, g, NARROW, hist)
    assert len(hist) >= 3
    costs = [residual_cost(A, B) for B in hist]
    assert all(b <= a + 1e-8 for a, b in zip(costs, costs[1:]))
    assert all(is_orthonormal(B) for B in hist)


def test_extension_property_planted():
    good = 0
    for seed in range(5):
        g = np.random.default_rng(seed)
        A, _, bound = planted(300, 25, 2, 0.2, g)
        eps = 0.4
        B = dimension_reduction(A, 2, eps, g)
        base = residual_cost(A, B)
        worst = 0.0
        for _ in range(50):
            W = orthonormal_basis(np.hstack([B, g.standard_normal((25, 2))]))
            worst = max(worst, base - residual_cost(A, W))
        good += worst <= 4 * eps * bound
    assert good >= 4


def literal_check(SB, SA_col, SB2, SA2_col, theta):
    """Singular values of ``D_j V_j^T V_l D_l^{-1}`` from the two SVDs."""
    _, D1, V1t = np.linalg.svd(np.hstack([SB, SA_col[:, None]]), full_matrices=False)
    _, D2, V2t = np.linalg.svd(np.hstack([SB2, SA2_col[:, None]]), full_matrices=False)
    F = np.diag(D1) @ V1t @ V2t.T @ np.diag(1 / D2)
    s = np.linalg.svd(F, compute_uv=False)
    return bool(np.all((s >= 1 - theta) & (s <= 1 + theta)))


def test_pair_check_agrees_with_svd_oracle():
    from sodreduce.dimreduce import _pair_passes, _regress

    g = np.random.default_rng(7)
    d, c, n = 30, 3, 60
    B = orthonormal_basis(g.standard_normal((d, c)))
    A = g.standard_normal((n, d))
    At = np.ascontiguousarray(A.T)
    theta = 0.35
    agree = total = 0
    for _ in range(6):
        s1, s2 = countsketch(40, d, g), countsketch(40, d, g)
        r1, r2 = _regress(B, At, s1, 1e-10), _regress(B, At, s2, 1e-10)
        fast = _pair_passes(r1, r2, np.arange(n), (1 - theta) ** 2, (1 + theta) ** 2)
        SB1, SB2 = countsketch_apply(s1, B), countsketch_apply(s2, B)
        SA1, SA2 = countsketch_apply(s1, At), countsketch_apply(s2, At)
        slow = [literal_check(SB1, SA1[:, i], SB2, SA2[:, i], theta) for i in range(n)]
        agree += np.sum(fast == np.array(slow))
        total += n
    assert agree == total


def check_rep(A, rep, eps):
    """Both ReducedRep invariants against exact projections."""
    ec = eps**2 / 6
    dist = exact_dist(A, rep.basis)
    lifted_err = np.linalg.norm(rep.coords @ rep.basis.T - A, axis=1)
    tol = 1e-9 * np.linalg.norm(A, axis=1)
    assert np.all(np.abs(rep.residuals - dist) <= ec * dist + tol)
    assert np.all(lifted_err <= (1 + ec) * dist + tol)


def test_projections_in_and_orthogonal_to_span(rng):
    d = 20
    B = orthonormal_basis(rng.standard_normal((d, 4)))
    inside = rng.standard_normal((10, 4)) @ B.T
    perp = rng.standard_normal((10, d))
    perp -= perp @ B @ B.T
    A = np.vstack([inside, perp])
    rep = reduce_with_basis(A, B, 0.5, rng)
    norms = np.linalg.norm(A, axis=1)
    assert np.all(rep.residuals[:10] <= 1e-6 * norms[:10])
    assert np.all(np.linalg.norm(rep.coords[:10] @ B.T - inside, axis=1) <= 1e-6 * norms[:10])
    assert np.all(np.abs(rep.coords[10:]) <= 1e-6 * norms[10:, None])
    check_rep(A, rep, 0.5)


@pytest.mark.parametrize("c_cs", [1.0, 1e-4])
def test_rep_invariants_random_instance(c_cs):
    g = np.random.default_rng(11)
    A, _, _ = planted(200, 30, 2, 0.3, g)
    B = orthonormal_basis(g.standard_normal((30, 6)))
    rep = reduce_with_basis(A, B, 0.5, g, DEFAULT.replace(c_cs=c_cs))
    check_rep(A, rep, 0.5)
    if c_cs == 1.0:
        assert rep.stats["fallback_rows"] <= 0.05 * 200


def test_approximate_projections_with_sparse_input(rng):
    A = sp.random(80, 25, density=0.2, random_state=3, format="csr")
    B = orthonormal_basis(rng.standard_normal((25, 5)))
    X, v, fb = approximate_projections(A, B, 0.01, rng)
    Xe, ve = exact_projections(A, B)
    np.testing.assert_allclose(v, ve, rtol=0.02, atol=1e-12)


def test_complete_dim_reduce_invariants():
    g = np.random.default_rng(5)
    A, _, _ = planted(200, 30, 2, 0.3, g)
    rep = complete_dim_reduce(A, 2, 0.5, g)
    check_rep(A, rep, 0.5)
    assert rep.stats["fallback_rows"] <= 10


def test_reduced_cost_full_basis_is_exact(rng):
    A = rng.standard_normal((40, 6))
    rep = reduce_with_basis(A, np.eye(6), 0.5, rng)
    S = Centers(rng.standard_normal((3, 6)))
    assert reduced_cost(rep, S) == pytest.approx(exact_cost(A, S), rel=1e-9)


def test_reduced_cost_of_own_span(rng):
    A = rng.standard_normal((40, 8))
    B = orthonormal_basis(rng.standard_normal((8, 3)))
    rep = reduce_with_basis(A, B, 0.5, rng)
    assert reduced_cost(rep, Subspace(B)) == pytest.approx(rep.residuals.sum(), rel=1e-12)


def test_end_to_end_planted():
    good = 0
    seeds = 3
    for seed in range(seeds):
        g = np.random.default_rng(seed)
        A, _, _ = planted(500, 40, 3, 0.5, g)
        eps = 0.4
        rep = complete_dim_reduce(A, 3, eps, g)
        errs = []
        for i in range(30):
            S = random_shape(("centers", "subspace", "union")[i % 3], 40, 3, g, 3.0)
            ex = exact_cost(A, S)
            errs.append(abs(reduced_cost(rep, S) - ex) / ex)
        good += max(errs) <= 5 * eps
    assert good == seeds


def test_rep_size_independent_of_nnz(tmp_path, rng):
    from sodreduce.io import write_rep

    B = orthonormal_basis(rng.standard_normal((50, 4)))
    sizes = []
    for density in (0.05, 0.9):
        A = sp.random(100, 50, density=density, random_state=1, format="csr")
        rep = reduce_with_basis(A, B, 0.5, rng)
        sizes.append(write_rep(rep, tmp_path / f"r{density}.bin").stat().st_size)
    assert sizes[0] == sizes[1] == 40 + 8 * (50 * 4 + 100 * 4 + 100)


def test_reduced_rep_lifted_matrix():
    rep = ReducedRep(np.eye(2), np.array([[1.0, 2.0]]), np.array([3.0]))
    np.testing.assert_array_equal(rep.lifted(), [[1, 2, 3]])
    assert (rep.n, rep.d, rep.c) == (1, 2, 2)
