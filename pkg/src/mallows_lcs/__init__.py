"""Longest common subsequences of independent Mallows permutations."""

from .perm_core import (
    Permutation,
    PermutationError,
    bruhat_leq,
    compose,
    identity,
    induced,
    inverse,
    inversion_number,
    inversion_set,
    reverse,
)
from .mallows import MallowsParams, ScalingParams, exact_pmf, sample
from .sequence_stats import PointCloud, Rectangle, Staircase, lcs, lds, lis, lis_pairs
from .density import DensityField, rho, rho_rect, u
from .variational import JBracket, MonotonePath, j_functional, jbar_closed, jbar_grid

__version__ = "0.1.0"
