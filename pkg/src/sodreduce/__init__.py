"""Dimensionality reduction for sum-of-distances objectives.

Computes a low-dimensional basis and per-point reduced representations
from which the sum of Euclidean distances of all points to any
``k``-dimensional shape (centers, subspaces, unions of subspaces) can be
recovered to ``1 +- eps``, plus coresets built on that representation.
"""

from .config import DEFAULT, Constants
from .dimreduce import ReducedRep, complete_dim_reduce, dimension_reduction, reduced_cost
from .errors import SodError
from .kernels import BACKEND
from .rng import RngConfig
from .shapes import Centers, Subspace, UnionOfSubspaces, exact_cost, shape_distance

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Centers",
    "Constants",
    "DEFAULT",
    "ReducedRep",
    "RngConfig",
    "SodError",
    "Subspace",
    "UnionOfSubspaces",
    "complete_dim_reduce",
    "dimension_reduction",
    "exact_cost",
    "reduced_cost",
    "shape_distance",
]
