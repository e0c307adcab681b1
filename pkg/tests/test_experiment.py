import math

import numpy as np
import pytest

from sodreduce.errors import ParameterError
from sodreduce.experiment import (
    ExperimentConfig,
    baseline_subspaces,
    build_shapes,
    run_experiment,
    synth_generate,
    truncate_history,
)
from sodreduce.linalg import is_orthonormal


def test_synth_shapes_and_labels(rng):
    A, C, lab = synth_generate(12, 4, 3, 4, rng=rng)
    assert A.shape == (12, 4) and C.shape == (3, 4)
    np.testing.assert_array_equal(lab, np.repeat([0, 1, 2], 4))
    with pytest.raises(ParameterError):
        synth_generate(10, 4, 3, 4, rng=rng)


def test_synth_zero_noise_is_centers(rng):
    A, C, lab = synth_generate(6, 3, 2, 3, scale=0.0, rng=rng)
    np.testing.assert_array_equal(A, C[lab])


def test_synth_gaussian_noise_distance(rng):
    d = 400
    A, C, lab = synth_generate(200, d, 1, 200, "gaussian", rng=rng)
    mean = np.linalg.norm(A - C[lab], axis=1).mean()
    assert abs(mean / math.sqrt(d) - 1) <= 0.1


def test_baselines_orthonormal(rng):
    A = rng.standard_normal((30, 8))
    for B in baseline_subspaces(A, 3, rng).values():
        assert B.shape == (8, 3) and is_orthonormal(B)
    top = baseline_subspaces(A, 1, rng)["top_svd"]
    v = np.linalg.svd(A)[2][0]
    assert abs(abs(top[:, 0] @ v) - 1) <= 1e-8


def test_truncate_history():
    h = [np.eye(5)[:, :2], np.eye(5)[:, :4]]
    assert truncate_history(h, 3).shape == (5, 3)
    assert truncate_history(h, 1).shape == (5, 1)
    assert truncate_history(h, 5).shape == (5, 4)


def test_build_shapes_specs(rng):
    A = rng.standard_normal((20, 4))
    shapes = build_shapes("kmedian+random:4", A, 2, rng)
    assert [s for s, _ in shapes][:2] == ["kmedian", "centers-0"]
    assert len(shapes) == 5
    with pytest.raises(ParameterError):
        build_shapes("planted", A, 2, rng)
    with pytest.raises(ParameterError):
        build_shapes("bogus", A, 2, rng)


def test_full_dimension_ratio_is_one():
    cfg = ExperimentConfig(n=40, d=6, k=2, dims_to_probe=[6], seed=2)
    recs = run_experiment(cfg)
    assert len(recs) == 3
    for r in recs:
        assert r.ratio == pytest.approx(1.0, abs=1e-9)


def test_config_validation():
    with pytest.raises(ParameterError):
        run_experiment(ExperimentConfig(dims_to_probe=[10, 5]))
    with pytest.raises(ParameterError):
        run_experiment(ExperimentConfig(eps=1.5))


def test_planted_beats_random_subspace():
    cfg = ExperimentConfig(n=600, d=120, k=3, dims_to_probe=[3, 10], seed=0)
    recs = run_experiment(cfg)
    ratio = {(r.method, r.subspace_dim): r.ratio for r in recs}
    for p in (3, 10):
        assert abs(ratio[("paper", p)] - 1) <= abs(ratio[("random_subspace", p)] - 1)
        assert ratio[("paper", p)] <= 1.5
