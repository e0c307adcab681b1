"""Tunable constants hidden inside the asymptotic sketch and sample sizes.

Defaults are sized so that desk-scale instances (n up to a few thousand)
run in seconds. All of them can be overridden from the command line with
``--config key=value``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class Constants:
    # Gaussian cost-estimation sketch: t = ceil(c_g * log2(n + 2)) columns
    c_g: float = 8.0
    # Gaussian sketch S^T in poly_approx: cols = ceil(c_S * (k + 1/delta^2))
    c_S: float = 2.0
    # Upper bound on cols; None means 2 * c_S * k
    sketch_cols_cap: Optional[int] = None
    # Gaussian G in eps_approx: t = ceil(c_t * log2(n + 2))
    c_t: float = 8.0
    # Residual samples: s = ceil(c_s * K * k^3 / eps^2 * log2(1/delta + 2))
    c_s: float = 2.0
    # Upper bound on s; None means n
    residual_samples_cap: Optional[int] = None
    # Lewis samples: ceil(c_L * m * log2(m + 2))
    c_L: float = 4.0
    lewis_tol: float = 0.01
    lewis_max_iterations: int = 60
    # Dense Cauchy l1 embedding rows: ceil(c_W * m * log2(m + 2))
    c_W: float = 2.0
    embed_retries: int = 3
    embed_test_directions: int = 50
    # Trust factor handed from poly_approx to eps_approx
    K_default: float = 100.0
    # complete_dim_reduce runs dimension_reduction at eps' = eps^2 / c_q
    c_q: float = 10.0
    # Consistency window is [1 - theta, 1 + theta] with theta = theta_factor * eps'
    theta_factor: float = 0.5
    # CountSketch count t = ceil(c_cst * log2(n + 2)); rows ceil(c_cs * (c+1)^2 / theta^2)
    c_cst: float = 1.0
    c_cs: float = 1.0
    # Cauchy rows for block estimators: ceil(c_C * log2(n * b + 2))
    c_C: float = 12.0
    # Dense-path leverage samples: ceil(c_d * k^3.5 * log2(k + 2)), capped like the Lewis count
    c_d: float = 1.0
    # Coreset budgets (caps): c_T * k^3 / eps^8 * log2(n+2), c_m * k / eps^2 * total sensitivity * log2(n+2)
    c_T: float = 1.0
    c_m: float = 1.0
    coreset_fraction: float = 0.2
    # Verification mode: pick trials by exact cost instead of sketched estimates
    exact_cost: bool = False
    deterministic_istar: bool = False
    # Orthonormalization drop threshold, relative to the input scale
    rank_tol: float = 1e-10

    def replace(self, **changes) -> "Constants":
        return dataclasses.replace(self, **changes)

    def with_pairs(self, pairs) -> "Constants":
        """Apply ``key=value`` strings, coercing values to the field type."""
        fields = {f.name: f for f in dataclasses.fields(self)}
        changes = {}
        for item in pairs:
            key, sep, raw = item.partition("=")
            key = key.strip()
            if not sep or key not in fields:
                raise KeyError(f"unknown constant {key!r}")
            changes[key] = _coerce(raw.strip(), getattr(self, key))
        return self.replace(**changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(raw: str, current):
    if raw.lower() in ("none", "null"):
        return None
    if isinstance(current, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    try:
        return int(raw)
    except ValueError:
        return float(raw)


DEFAULT = Constants()
