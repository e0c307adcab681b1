"""Block-partitioned solvers for dense inputs.

Row sampling probabilities are estimated per block from small Cauchy
sketches of each block. A sample first picks a block by its estimate and
only then computes exact probabilities inside that block, so most rows
never have their probability evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .bicriteria import BicriteriaResult, residual_sample_count, sketch_columns, trial_count
from .config import DEFAULT, Constants
from .embeddings import SamplingMatrix
from .errors import DimensionError, ParameterError, SamplingError
from .linalg import empty_basis, extend_basis, rowspace_basis
from .rng import as_generator
from .sketching import DenseSketch, cauchy_sketch, gaussian_sketch, log_size

__all__ = [
    "BlockPartition",
    "BlockSketch",
    "BlockProducts",
    "BlockEstimates",
    "SampleStats",
    "partition",
    "block_sketch",
    "precompute_products",
    "block_l1_leverage_sums",
    "block_residual_sums",
    "two_level_sample",
    "CauchyCost",
    "poly_approx_dense",
    "eps_approx_dense",
    "dimension_reduction_dense",
    "default_blocks",
]


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous row ranges ``[bounds[j], bounds[j+1])`` covering ``[0, n)``."""

    bounds: np.ndarray

    @property
    def b(self) -> int:
        return len(self.bounds) - 1

    @property
    def n(self) -> int:
        return int(self.bounds[-1])

    def block(self, j: int) -> range:
        return range(int(self.bounds[j]), int(self.bounds[j + 1]))

    def sizes(self) -> np.ndarray:
        return np.diff(self.bounds)


def partition(n: int, b: int) -> BlockPartition:
    """Split ``[0, n)`` into ``b`` contiguous blocks whose sizes differ by at most one."""
    if not 1 <= b <= max(n, 1):
        raise ParameterError(f"need 1 <= b <= n, got b={b}, n={n}")
    q, r = divmod(n, b)
    sizes = np.full(b, q)
    sizes[:r] += 1
    return BlockPartition(np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64))


@dataclass(frozen=True)
class BlockSketch:
    """An independent Cauchy sketch per block.

    Blocks with no more rows than ``rows`` are kept unsketched
    (``sketches[j] is None``): reading them exactly is no more expensive
    than sketching them.
    """

    part: BlockPartition
    rows: int
    sketches: tuple


def block_sketch(part: BlockPartition, rows: int, rng=None) -> BlockSketch:
    g = as_generator(rng)
    out = []
    for j in range(part.b):
        m = len(part.block(j))
        out.append(cauchy_sketch(rows, m, g).entries if m > rows else None)
    return BlockSketch(part, rows, tuple(out))


@dataclass(frozen=True)
class BlockProducts:
    """``C_j A_{I_j}`` for every block, or ``A_{I_j}`` itself for unsketched blocks."""

    sketch: BlockSketch
    products: tuple

    def estimate(self, right) -> np.ndarray:
        """Per block, ``sum_col ||(A_{I_j} right)_{*col}||_1`` estimated by Cauchy medians."""
        apx = np.empty(len(self.products))
        for j, (C, P) in enumerate(zip(self.sketch.sketches, self.products)):
            M = P @ right
            if C is None:
                apx[j] = np.abs(M).sum()
            else:
                apx[j] = np.median(np.abs(M), axis=0).sum()
        return apx


def _dense_rows(A, s, e):
    blk = A[s:e]
    return blk.toarray() if sp.issparse(blk) else np.asarray(blk, dtype=float)


def precompute_products(A, stack, chunk: int = 4096) -> list:
    """Every ``sketch @ A`` in the stack from a single pass over the rows of ``A``.

    Entries may be :class:`DenseSketch`, plain ``r x n`` arrays, or
    :class:`BlockSketch`; the latter yields :class:`BlockProducts`.
    """
    n, d = A.shape
    outs = []
    for sk in stack:
        if isinstance(sk, BlockSketch):
            if sk.part.n != n:
                raise DimensionError("block partition does not cover the rows of A")
            outs.append([None] * sk.part.b)
        else:
            E = sk.entries if isinstance(sk, DenseSketch) else np.asarray(sk, dtype=float)
            if E.shape[1] != n:
                raise DimensionError(f"sketch has {E.shape[1]} columns, A has {n} rows")
            outs.append(np.zeros((E.shape[0], d)))
    for s in range(0, n, chunk):
        e = min(n, s + chunk)
        X = _dense_rows(A, s, e)
        for sk, out in zip(stack, outs):
            if isinstance(sk, BlockSketch):
                bounds = sk.part.bounds
                first = int(np.searchsorted(bounds, s, side="right")) - 1
                for j in range(first, sk.part.b):
                    lo, hi = int(bounds[j]), int(bounds[j + 1])
                    if lo >= e:
                        break
                    a, z = max(lo, s), min(hi, e)
                    rows = X[a - s:z - s]
                    C = sk.sketches[j]
                    part = rows if C is None else C[:, a - lo:z - lo] @ rows
                    if out[j] is None:
                        out[j] = part.copy() if C is not None else part
                    elif C is None:
                        out[j] = np.vstack([out[j], part])
                    else:
                        out[j] = out[j] + part
            else:
                E = sk.entries if isinstance(sk, DenseSketch) else np.asarray(sk, dtype=float)
                out += E[:, s:e] @ X
    result = []
    for sk, out in zip(stack, outs):
        if isinstance(sk, BlockSketch):
            result.append(BlockProducts(sk, tuple(np.zeros((0, d)) if o is None else o for o in out)))
        else:
            result.append(out)
    return result


@dataclass(frozen=True)
class BlockEstimates:
    apx: np.ndarray
    kind: str


def block_l1_leverage_sums(products: BlockProducts, B, S, Rinv) -> BlockEstimates:
    """Estimated per-block sums of l1 leverage scores of ``A (I - B B^T) S^T R^{-1}``.

    ``S`` is the ``d x cols`` Gaussian (already transposed).
    """
    right = S - B @ (B.T @ S) if B.shape[1] else S
    return BlockEstimates(products.estimate(right @ Rinv), "l1_leverage_sum")


def block_residual_sums(products: BlockProducts, Q, G) -> BlockEstimates:
    """Estimated per-block sums of ``||a_i (I - Q Q^T)||_2`` from an unscaled Gaussian ``G``."""
    t = G.shape[1]
    right = G - Q @ (Q.T @ G) if Q.shape[1] else G
    return BlockEstimates(products.estimate(right * (math.sqrt(math.pi / 2) / t)), "residual_norm_sum")


@dataclass
class SampleStats:
    blocks_evaluated: int = 0
    rows_evaluated: int = 0
    draws: int = 0

    def add(self, other: "SampleStats"):
        self.blocks_evaluated += other.blocks_evaluated
        self.rows_evaluated += other.rows_evaluated
        self.draws += other.draws


def two_level_sample(estimates, part: BlockPartition, within_block_prob, count: int,
                     rng=None) -> tuple[SamplingMatrix, SampleStats]:
    """Draw ``count`` rows: a block ``j`` proportional to ``apx_j``, then a row by exact probabilities.

    ``within_block_prob(j)`` returns nonnegative weights for the rows of
    block ``j``; it is called once per distinct sampled block. Row ``i``
    is scaled by ``1 / (count * p_i)`` where ``p_i`` is the two-level
    probability of drawing it.
    """
    if count < 1:
        raise ParameterError("count must be at least 1")
    apx = np.asarray(estimates.apx if isinstance(estimates, BlockEstimates) else estimates, dtype=float)
    if apx.shape[0] != part.b:
        raise DimensionError("one estimate per block is required")
    total = apx.sum()
    if not total > 0 or not np.isfinite(total):
        raise SamplingError("all block estimates are zero")
    g = as_generator(rng)
    q = apx / total
    draws = g.choice(part.b, size=count, p=q)
    stats = SampleStats(draws=count)
    idx = np.empty(count, dtype=np.int64)
    prob = np.empty(count)
    for j in np.unique(draws):
        where = np.flatnonzero(draws == j)
        w = np.asarray(within_block_prob(int(j)), dtype=float)
        blk = part.block(int(j))
        if w.shape[0] != len(blk):
            raise DimensionError("callback returned the wrong number of probabilities")
        stats.blocks_evaluated += 1
        stats.rows_evaluated += len(blk)
        mass = w.sum()
        if not mass > 0:
            raise SamplingError(f"block {j} was sampled but has no mass")
        local = g.choice(len(blk), size=where.size, p=w / mass)
        idx[where] = blk.start + local
        prob[where] = q[j] * w[local] / mass
    return SamplingMatrix(idx, 1.0 / (count * prob), part.n), stats


class CauchyCost:
    """Estimates ``||A (I - Q Q^T)||_{1,2}`` from a precomputed ``C A``.

    For each column ``g`` of a Gaussian ``G``, ``median |C A (I - Q Q^T) g|``
    estimates ``sum_i |a_i (I - Q Q^T) g|``; scaling by ``sqrt(pi/2) / t``
    and summing over columns gives the row-norm sum.
    """

    def __init__(self, CA, G):
        self.CA = CA
        self.G = G

    def cost(self, Q) -> float:
        G = self.G
        right = G - Q @ (Q.T @ G) if Q.shape[1] else G
        t = G.shape[1]
        return float(np.median(np.abs(self.CA @ right), axis=0).sum() * math.sqrt(math.pi / 2) / t)


def _dense_samples(n, k, constants):
    return max(1, math.ceil(constants.c_d * k**3.5 * math.log2(n + 2)))


def _rows_of(A, idx):
    R = A[idx]
    return R.toarray() if sp.issparse(R) else np.asarray(R, dtype=float)


@dataclass
class DensePlan:
    """Sketches for one round of the dense solvers and their products with ``A``."""

    part: BlockPartition
    cost: CauchyCost
    blocks: BlockProducts
    WA: list
    stats: SampleStats = field(default_factory=SampleStats)


def plan_round(A, k, delta, b, rng, constants: Constants = DEFAULT) -> DensePlan:
    """Draw every sketch a round needs and multiply them into ``A`` in one pass."""
    n, d = A.shape
    g = as_generator(rng)
    part = partition(n, min(max(1, b), n))
    rows_c = log_size(constants.c_C, n * part.b)
    C1 = block_sketch(part, rows_c, g)
    cost_sk = cauchy_sketch(log_size(constants.c_C, n), n, g)
    cols = sketch_columns(k, delta, d, constants)
    w_rows = max(cols, math.ceil(constants.c_W * cols * math.log2(cols + 2)))
    Ws = [cauchy_sketch(w_rows, n, g) for _ in range(trial_count(delta))]
    prods = precompute_products(A, [cost_sk, C1] + Ws)
    t = log_size(constants.c_g, n)
    G = gaussian_sketch(d, t, 1.0, g).entries
    return DensePlan(part, CauchyCost(prods[0], G), prods[1], prods[2:])


def poly_approx_dense(A, B, k: int, delta: float, b: int, rng=None, constants: Constants = DEFAULT,
                      plan: DensePlan | None = None) -> BicriteriaResult:
    """Constant-factor basis for ``A (I - B B^T)`` using block-estimated l1 leverage sampling.

    Per trial: ``R`` from the QR of ``(W A)(I - B B^T) S^T`` with ``W`` a
    dense Cauchy sketch, block leverage sums from Cauchy medians, then
    two-level sampling where in-block probabilities are Cauchy-median
    estimates of row l1 norms. The trial with the smallest Cauchy-median
    cost estimate is kept.
    """
    B = np.asarray(B, dtype=float)
    n, d = A.shape
    if k < 1 or k > d:
        raise ParameterError(f"k must lie in [1, {d}]")
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    g = as_generator(rng)
    plan = plan or plan_round(A, k, delta, b, g, constants)
    if B.shape[1] >= d:
        return BicriteriaResult(empty_basis(d), 0.0, 0)
    base = plan.cost.cost(B)
    scale = plan.cost.cost(empty_basis(d))
    if base <= 1e-10 * scale:
        return BicriteriaResult(empty_basis(d), 0.0, 0)
    cols = sketch_columns(k, delta, d, constants)
    samples = _dense_samples(n, k, constants)
    best = None
    for WA in plan.WA:
        S = gaussian_sketch(d, cols, 1.0, g).entries
        right = S - B @ (B.T @ S) if B.shape[1] else S
        WM = WA @ right
        _, R0, piv = sla.qr(WM, mode="economic", pivoting=True)
        dg = np.abs(np.diag(R0))
        keep = np.sort(piv[: int(np.sum(dg > constants.rank_tol * dg[0]))]) if dg[0] > 0 else piv[:0]
        if keep.size == 0:
            continue
        S, right = S[:, keep], right[:, keep]
        _, R = np.linalg.qr(WM[:, keep])
        Rinv = sla.solve_triangular(R, np.eye(R.shape[0]))
        if samples >= n:
            L = SamplingMatrix.identity(n)
        else:
            est = block_l1_leverage_sums(plan.blocks, B, S, Rinv)
            Cr = cauchy_sketch(Rinv.shape[1], log_size(constants.c_C, n), g).entries
            inner = right @ Rinv @ Cr

            def probs(j, inner=inner):
                blk = plan.part.block(j)
                P = _dense_rows(A, blk.start, blk.stop) @ inner
                return np.median(np.abs(P), axis=1)

            L, st = two_level_sample(est, plan.part, probs, samples, g)
            plan.stats.add(st)
        LA = _rows_of(A, L.indices) * L.scales[:, None]
        Rm = LA - (LA @ B) @ B.T if B.shape[1] else LA
        X = extend_basis(B, rowspace_basis(Rm, constants.rank_tol))[:, B.shape[1]:]
        c = plan.cost.cost(np.hstack([B, X]))
        if best is None or c < best[1]:
            best = (X, c)
    if best is None:
        return BicriteriaResult(empty_basis(d), 0.0, len(plan.WA))
    return BicriteriaResult(best[0], best[1], len(plan.WA))


def eps_approx_dense(A, B, Xhat, k: int, K: float, eps: float, delta: float, b: int, rng=None,
                     constants: Constants = DEFAULT, plan: DensePlan | None = None) -> BicriteriaResult:
    """Residual-sampling refinement with block-estimated residual sums.

    Blocks are chosen by Cauchy-median estimates of their residual norm
    sums; inside a chosen block, rows are drawn by exact sketched residual
    norms ``||a_i (I - Q Q^T) G||_2``.
    """
    B = np.asarray(B, dtype=float)
    n, d = A.shape
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    g = as_generator(rng)
    plan = plan or plan_round(A, k, delta, b, g, constants)
    X = extend_basis(B, np.asarray(Xhat, dtype=float))[:, B.shape[1]:]
    Q = np.hstack([B, X])
    if Q.shape[1] >= d:
        return BicriteriaResult(X, 0.0, 1)
    t = log_size(constants.c_t, n)
    G = gaussian_sketch(d, t, 1.0, g).entries
    est = block_residual_sums(plan.blocks, Q, G)
    if not est.apx.sum() > 1e-12 * plan.cost.cost(empty_basis(d)):
        return BicriteriaResult(X, 0.0, 1)
    right = G - Q @ (Q.T @ G)

    def probs(j):
        blk = plan.part.block(j)
        return np.linalg.norm(_dense_rows(A, blk.start, blk.stop) @ right, axis=1)

    s = residual_sample_count(n, k, K, eps, delta, constants)
    L, st = two_level_sample(est, plan.part, probs, s, g)
    plan.stats.add(st)
    rows = _rows_of(A, np.unique(L.indices))
    Rm = rows - (rows @ Q) @ Q.T
    V = rowspace_basis(Rm, constants.rank_tol, np.linalg.norm(rows, axis=1).max())
    U = extend_basis(Q, V)[:, B.shape[1]:]
    return BicriteriaResult(U, plan.cost.cost(np.hstack([B, U])), 1)


def default_blocks(n: int, k: int, eps: float) -> int:
    """``max(1, ceil(k^3.5 / eps^3))`` clamped to ``n``."""
    return int(min(n, max(1, math.ceil(k**3.5 / eps**3))))


def dimension_reduction_dense(A, k: int, eps: float, rng=None, constants: Constants = DEFAULT,
                              history: list | None = None, blocks: int | None = None,
                              stats: dict | None = None) -> np.ndarray:
    """:func:`~sodreduce.dimreduce.dimension_reduction` with the block-sampling solvers.

    Each round draws its sketches and computes their products with ``A``
    in one pass, then runs :func:`poly_approx_dense` and
    :func:`eps_approx_dense` at ``delta = eps / 10``.
    """
    from .dimreduce import dimension_reduction

    n = A.shape[0]
    b = default_blocks(n, k, eps) if blocks is None else min(n, max(1, int(blocks)))
    delta = eps / 10.0
    totals = SampleStats()

    def step(A, B, k, eps, g, constants):
        plan = plan_round(A, k, delta, b, g, constants)
        X = poly_approx_dense(A, B, k, delta, b, g, constants, plan).basis
        U = eps_approx_dense(A, B, X, k, constants.K_default, eps, delta, b, g, constants, plan).basis
        totals.add(plan.stats)
        return U

    info = {}
    B = dimension_reduction(A, k, eps, rng, constants, history, step=step, stats=info)
    if stats is not None:
        stats.update(info)
        stats.update(blocks=b, blocks_evaluated=totals.blocks_evaluated,
                     rows_evaluated=totals.rows_evaluated, draws=totals.draws)
    return B
