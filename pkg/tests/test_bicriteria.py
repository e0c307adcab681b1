import numpy as np
import pytest
from conftest import planted
from oracles import best_line_cost, residual_cost

from sodreduce.bicriteria import eps_approx, poly_approx, residual_probabilities
from sodreduce.config import DEFAULT
from sodreduce.errors import DimensionError, ParameterError
from sodreduce.linalg import empty_basis, extend_basis, is_orthonormal, orthonormal_basis, residual_apply, rowspace_basis


def test_residual_apply_examples(rng):
    A = rng.standard_normal((20, 8))
    M = rng.standard_normal((8, 3))
    np.testing.assert_allclose(residual_apply(A, np.zeros((8, 0)), M), A @ M)
    B = orthonormal_basis(rng.standard_normal((8, 2)))
    assert np.max(np.abs(residual_apply(A, B, B))) <= 1e-8
    direct = A @ (np.eye(8) - B @ B.T) @ M
    np.testing.assert_allclose(residual_apply(A, B, M), direct, rtol=1e-9, atol=1e-12)
    with pytest.raises(DimensionError):
        residual_apply(A, B, M[:5])


def test_basis_helpers(rng):
    M = rng.standard_normal((10, 3))
    Q = orthonormal_basis(np.hstack([M, M[:, :1] + M[:, 1:2]]))
    assert Q.shape[1] == 3 and is_orthonormal(Q)
    V = rowspace_basis(M.T)
    assert V.shape == (10, 3) and is_orthonormal(V)
    E = extend_basis(Q[:, :1], Q)
    assert E.shape[1] == 3 and is_orthonormal(E)
    np.testing.assert_allclose(E[:, 0], Q[:, 0])


def test_poly_approx_rank_k_exact(rng):
    U, V = rng.standard_normal((100, 3)), rng.standard_normal((3, 20))
    A = U @ V
    res = poly_approx(A, np.zeros((20, 0)), 3, 0.1, rng)
    assert is_orthonormal(res.basis)
    assert residual_cost(A, res.basis) <= 1e-6 * residual_cost(A, np.zeros((20, 0)))


def test_poly_approx_zero_matrix():
    res = poly_approx(np.zeros((10, 5)), np.zeros((5, 0)), 2, 0.1, 0)
    assert res.cost_estimate == 0


def test_poly_approx_rejects_bad_k():
    with pytest.raises(ParameterError):
        poly_approx(np.ones((4, 3)), np.zeros((3, 0)), 4, 0.1, 0)
    with pytest.raises(ParameterError):
        poly_approx(np.ones((4, 3)), np.zeros((3, 0)), 1, 1.5, 0)


@pytest.mark.parametrize("seed", range(3))
def test_poly_approx_planted(seed):
    g = np.random.default_rng(seed)
    A, _, bound = planted(300, 30, 3, 0.1, g)
    res = poly_approx(A, np.zeros((30, 0)), 3, 0.1, g)
    assert residual_cost(A, res.basis) <= 100 * bound


def test_poly_approx_orthogonal_to_base(rng):
    A, _, _ = planted(300, 30, 2, 0.1, rng)
    B = orthonormal_basis(rng.standard_normal((30, 4)))
    res = poly_approx(A, B, 2, 0.1, rng)
    assert np.max(np.abs(res.basis.T @ B)) <= 1e-8


def test_eps_approx_zero_cost_input(rng):
    A = rng.standard_normal((50, 2)) @ rng.standard_normal((2, 10))
    X = rowspace_basis(A)
    res = eps_approx(A, np.zeros((10, 0)), X, 2, 100, 0.5, 0.1, rng)
    assert residual_cost(A, res.basis) <= 1e-8 * np.linalg.norm(A, axis=1).sum()


def test_eps_approx_planted_and_monotone():
    ok = 0
    for seed in range(20):
        g = np.random.default_rng(seed)
        A, _, bound = planted(200, 30, 3, 0.1, g)
        B = np.zeros((30, 0))
        X = poly_approx(A, B, 3, 0.01, g).basis
        U = eps_approx(A, B, X, 3, 100, 0.5, 0.01, g).basis
        cu = residual_cost(A, U)
        assert cu <= residual_cost(A, X) + 1e-8
        ok += cu <= 1.5 * bound
    assert ok >= 18


def test_eps_approx_orthogonal_to_base(rng):
    A, _, _ = planted(120, 15, 2, 0.2, rng)
    B = orthonormal_basis(rng.standard_normal((15, 3)))
    X = poly_approx(A, B, 2, 0.1, rng).basis
    U = eps_approx(A, B, X, 2, 100, 0.5, 0.1, rng).basis
    assert is_orthonormal(U)
    assert np.max(np.abs(U.T @ B)) <= 1e-8


def test_residual_probabilities_track_exact_norms():
    hits = total = 0
    for seed in range(5):
        g = np.random.default_rng(seed)
        A, _, _ = planted(200, 30, 3, 0.3, g)
        Q = orthonormal_basis(g.standard_normal((30, 3)))
        t = 62
        G = g.standard_normal((30, t)) / np.sqrt(t)
        p = residual_probabilities(A, Q, G)
        q = np.linalg.norm(A - A @ Q @ Q.T, axis=1)
        hits += np.sum(p >= (9 / 11) * q / q.sum())
        total += len(p)
    assert hits / total >= 0.95


def test_eps_approx_tiny_instances_against_line_search():
    wins = 0
    for seed in range(10):
        g = np.random.default_rng(seed)
        A = g.standard_normal((12, 4)) * [3, 1, 0.5, 0.2]
        oracle = best_line_cost(A, 4000, seed)
        B = np.zeros((4, 0))
        X = poly_approx(A, B, 1, 0.25 / 100, g).basis
        U = eps_approx(A, B, X, 1, 100, 0.25, 0.25 / 100, g).basis
        wins += residual_cost(A, U) <= 1.35 * oracle
    assert wins >= 9


def test_exact_cost_flag_changes_selection_only(rng):
    A, _, bound = planted(150, 20, 2, 0.1, rng)
    c = DEFAULT.replace(exact_cost=True, sketch_cols_cap=2, c_L=0.5)
    res = poly_approx(A, np.zeros((20, 0)), 2, 0.1, rng, c)
    assert res.cost_estimate == pytest.approx(residual_cost(A, res.basis), rel=1e-9)


def test_unsaturated_regime_planted():
    # d much larger than the sample counts, so the basis stays a proper subspace
    consts = DEFAULT.replace(sketch_cols_cap=6, residual_samples_cap=40)
    for seed in range(3):
        g = np.random.default_rng(seed)
        A, _, bound = planted(600, 400, 2, 0.5, g)
        r = poly_approx(A, empty_basis(400), 2, 0.1, g, consts)
        e = eps_approx(A, empty_basis(400), r.basis, 2, 100, 0.4, 0.1, g, consts)
        assert r.basis.shape[1] < 100
        assert residual_cost(A, r.basis) <= bound
        assert residual_cost(A, e.basis) < residual_cost(A, r.basis)
