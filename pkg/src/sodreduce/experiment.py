"""Synthetic data and the subspace comparison experiment.

The basis produced by the dimension-reduction loop is compared against a
random subspace and the top singular subspace of the same dimension. For
each, a reduced representation is built and its estimate of the sum of
distances to a query shape is divided by the exact sum.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .config import DEFAULT, Constants
from .coresets import kmedian_seed
from .dimreduce import dimension_reduction, reduce_with_basis, reduced_cost
from .errors import ParameterError
from .rng import RngConfig, as_generator
from .shapes import Centers, exact_cost, random_shape

__all__ = [
    "synth_generate",
    "baseline_subspaces",
    "ExperimentConfig",
    "ResultRecord",
    "run_experiment",
    "truncate_history",
    "build_shapes",
]


def synth_generate(n: int, d: int, k: int, samples_per_center: int, noise: str = "cauchy",
                   scale: float = 1.0, rng=None, center_scale: float = 100.0):
    """Planted clusters: ``k`` Gaussian centers, each with i.i.d. per-coordinate noise.

    Returns ``(A, centers, labels)`` with rows grouped by center.
    """
    if k < 1 or samples_per_center < 1 or k * samples_per_center != n:
        raise ParameterError(f"k * samples_per_center must equal n ({k} * {samples_per_center} != {n})")
    if d < 1 or scale < 0:
        raise ParameterError("need d >= 1 and scale >= 0")
    g = as_generator(rng)
    centers = g.standard_normal((k, d)) * center_scale
    labels = np.repeat(np.arange(k), samples_per_center)
    if noise == "cauchy":
        E = g.standard_cauchy((n, d))
    elif noise == "gaussian":
        E = g.standard_normal((n, d))
    else:
        raise ParameterError(f"unknown noise family {noise!r}")
    return centers[labels] + scale * E, centers, labels


def baseline_subspaces(A, dims: int, rng=None) -> dict:
    """A random ``dims``-dimensional basis and the top ``dims`` right singular vectors."""
    n, d = A.shape
    if not 1 <= dims <= d:
        raise ParameterError(f"dims must lie in [1, {d}]")
    g = as_generator(rng)
    rand, _ = np.linalg.qr(g.standard_normal((d, dims)))
    if sp.issparse(A) and dims < min(n, d) - 1:
        _, s, Vt = spla.svds(A.astype(float), k=dims, random_state=0)
        top = Vt[np.argsort(-s)].T
    else:
        M = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
        _, _, Vt = np.linalg.svd(M, full_matrices=False)
        top = Vt[:dims].T
        if top.shape[1] < dims:
            top = np.linalg.qr(np.hstack([top, g.standard_normal((d, dims - top.shape[1]))]))[0]
    return {"random": rand, "top_svd": np.ascontiguousarray(top)}


def truncate_history(history: list, dim: int) -> np.ndarray:
    """The first ``dim`` columns of the earliest snapshot with at least ``dim`` columns.

    Falls back to the last snapshot when none is wide enough.
    """
    for B in history:
        if B.shape[1] >= dim:
            return B[:, :dim]
    return history[-1]


@dataclass
class ExperimentConfig:
    input: Optional[str] = None
    fmt: str = "csv"
    n: int = 2000
    d: int = 500
    per_center: Optional[int] = None
    noise: str = "cauchy"
    noise_scale: float = 1.0
    k: int = 5
    eps: float = 0.5
    seed: int = 0
    path: str = "sparse"
    blocks: Optional[int] = None
    dims_to_probe: list = field(default_factory=lambda: [5, 10, 20, 50, 100])
    shapes: str = "planted"
    constants: Constants = DEFAULT
    timing: bool = False

    def validate(self):
        if not 0 < self.eps < 1:
            raise ParameterError("eps must lie in (0, 1)")
        if self.k < 1:
            raise ParameterError("k must be at least 1")
        if list(self.dims_to_probe) != sorted(self.dims_to_probe) or not self.dims_to_probe:
            raise ParameterError("dims_to_probe must be a nonempty ascending list")
        if self.path not in ("sparse", "dense"):
            raise ParameterError(f"unknown path {self.path!r}")


@dataclass
class ResultRecord:
    method: str
    subspace_dim: int
    shape_id: str
    approx_cost: float
    exact_cost: float
    ratio: float
    wall_time_ms: Optional[float] = None

    def as_dict(self) -> dict:
        return asdict(self)


def build_shapes(spec: str, A, k: int, rng, planted=None) -> list:
    """Query shapes named by ``spec``.

    ``planted`` uses the generator's centers, ``kmedian`` a seeded
    k-median solution on the data, ``random:N`` ``N`` random shapes
    cycling through center sets, ``k``-subspaces and a union of two lines.
    Specs can be joined with ``+``.
    """
    out = []
    d = A.shape[1]
    for part in spec.split("+"):
        part = part.strip()
        if part == "planted":
            if planted is None:
                raise ParameterError("planted shapes need synthetic input")
            out.append(("planted", Centers(planted)))
        elif part == "kmedian":
            M = A.toarray() if sp.issparse(A) else np.asarray(A)
            idx, _, _ = kmedian_seed(M, k, rng)
            out.append(("kmedian", Centers(M[idx])))
        elif part.startswith("random"):
            _, _, num = part.partition(":")
            kinds = ("centers", "subspace", "union")
            scale = float(np.median(np.abs(A.data if sp.issparse(A) else A))) or 1.0
            for i in range(int(num or 30)):
                kind = kinds[i % 3]
                out.append((f"{kind}-{i}", random_shape(kind, d, k, rng, scale)))
        else:
            raise ParameterError(f"unknown shape spec {part!r}")
    return out


def run_experiment(cfg: ExperimentConfig, sink: Callable | None = None) -> list:
    """Compare the reduction basis with random and top-SVD bases at each probed dimension.

    Every record is passed to ``sink`` as soon as it is computed, so a
    failure part-way leaves the earlier records emitted.
    """
    cfg.validate()
    from .io import ingest

    planted = None
    if cfg.input:
        A = ingest(cfg.input, cfg.fmt)
    else:
        per = cfg.per_center or cfg.n // cfg.k
        A, planted, _ = synth_generate(cfg.n, cfg.d, cfg.k, per, cfg.noise, cfg.noise_scale,
                                       RngConfig(cfg.seed, 0))
    d = A.shape[1]
    dims = [p for p in cfg.dims_to_probe if p <= d]
    shapes = build_shapes(cfg.shapes, A, cfg.k, RngConfig(cfg.seed, 1).generator(), planted)
    exact = [exact_cost(A, S) for _, S in shapes]

    history: list = []
    g = RngConfig(cfg.seed, 2).generator()
    if cfg.path == "dense":
        from .densefast import dimension_reduction_dense

        dimension_reduction_dense(A, cfg.k, cfg.eps, g, cfg.constants, history, blocks=cfg.blocks)
    else:
        dimension_reduction(A, cfg.k, cfg.eps, g, cfg.constants, history)
    if not history:
        history = [np.zeros((d, 0))]

    records = []
    for i, p in enumerate(dims):
        base = baseline_subspaces(A, p, RngConfig(cfg.seed, 100 + i).generator())
        bases = {"paper": truncate_history(history, p), "random_subspace": base["random"],
                 "top_svd": base["top_svd"]}
        for j, (method, B) in enumerate(bases.items()):
            t0 = time.perf_counter()
            rep = reduce_with_basis(A, B, cfg.eps, RngConfig(cfg.seed, 1000 + 3 * i + j).generator(),
                                    cfg.constants, cfg.seed)
            for (sid, S), ex in zip(shapes, exact):
                approx = reduced_cost(rep, S)
                ratio = approx / ex if ex > 0 else (1.0 if approx == 0 else math.inf)
                ms = (time.perf_counter() - t0) * 1e3 if cfg.timing else None
                rec = ResultRecord(method, B.shape[1], sid, approx, ex, ratio, ms)
                records.append(rec)
                if sink is not None:
                    sink(rec)
    return records
