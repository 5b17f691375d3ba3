"""
Longest increasing / common subsequence statistics.

The fast paths are patience sorting (``O(n log n)``). ``lcs`` goes through
the identity ``LCS(p, t) = LIS(p^-1, t^-1)``, where the right-hand side is the
longest chain of index pairs increasing in both coordinates. The quadratic
and exhaustive versions are kept for cross-checking.

Point clouds built from permutations have coordinates ``i/n``; they are
stored as integer numerators over a common denominator so that membership
in half-open rectangles ``(x1, x2] x (y1, y2]`` is decided exactly.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .perm_core import Permutation, PermutationError, inverse

__all__ = [
    "lis_length", "lis", "lds", "lis_pairs", "lcs", "lcs_dp_oracle",
    "lis_bruteforce", "lis_pairs_bruteforce", "PointCloud", "Rectangle",
    "Staircase", "lis_points", "lis_in_rectangle", "lis_staircase",
    "all_staircases",
]

LCS_DP_MAX_N = 4000


def lis_length(seq: Sequence) -> int:
    """Length of the longest strictly increasing subsequence (patience sorting)."""
    tops: list = []
    for v in seq:
        k = bisect_left(tops, v)
        if k == len(tops):
            tops.append(v)
        else:
            tops[k] = v
    return len(tops)


def lis(p: Permutation) -> int:
    return lis_length(p.entries)


def lds(p: Permutation) -> int:
    n = p.n
    return lis_length([n + 1 - v for v in p.entries])


def lis_bruteforce(seq: Sequence) -> int:
    """Largest strictly increasing subsequence by trying every subset; n <= ~15."""
    seq = list(seq)
    for m in range(len(seq), 0, -1):
        for idx in combinations(range(len(seq)), m):
            if all(seq[a] < seq[b] for a, b in zip(idx, idx[1:])):
                return m
    return 0


def _check_sizes(a: Permutation, b: Permutation) -> None:
    if a.n != b.n:
        raise PermutationError(f"size mismatch: {a.n} vs {b.n}")


def lis_pairs(a: Permutation, b: Permutation) -> int:
    """
    Longest chain of indices, in any order, along which both ``a`` and ``b``
    strictly increase.
    """
    _check_sizes(a, b)
    by_a = [0] * a.n
    for ai, bi in zip(a.entries, b.entries):
        by_a[ai - 1] = bi
    return lis_length(by_a)


def lis_pairs_bruteforce(a: Sequence[int], b: Sequence[int]) -> int:
    a, b = list(a), list(b)
    n = len(a)
    for m in range(n, 0, -1):
        for idx in combinations(range(n), m):
            pts = sorted((a[i], b[i]) for i in idx)
            if all(p[0] < q[0] and p[1] < q[1] for p, q in zip(pts, pts[1:])):
                return m
    return 0


def lcs(p: Permutation, t: Permutation) -> int:
    """Longest common subsequence of two permutations of the same size."""
    _check_sizes(p, t)
    return lis_pairs(inverse(p), inverse(t))


def lcs_dp_oracle(p: Permutation, t: Permutation) -> int:
    """Textbook ``O(n^2)`` LCS table; vectorised along rows."""
    _check_sizes(p, t)
    n = p.n
    if n > LCS_DP_MAX_N:
        raise ValueError(f"lcs_dp_oracle is quadratic; n={n} exceeds {LCS_DP_MAX_N}")
    tv = np.asarray(t.entries)
    prev = np.zeros(n + 1, dtype=np.int64)
    for x in p.entries:
        # cur[j] = max(prev[j], cur[j-1], prev[j-1] + [p_i == t_j])
        diag = prev[:-1] + (tv == x)
        cur = np.empty_like(prev)
        cur[0] = 0
        cur[1:] = np.maximum(prev[1:], diag)
        cur = np.maximum.accumulate(cur)
        prev = cur
    return int(prev[-1])


# -- point clouds ------------------------------------------------------------

def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(v)


@dataclass(frozen=True)
class Rectangle:
    """Half-open box ``(x1, x2] x (y1, y2]`` inside the unit square; exact bounds."""

    x1: Fraction
    x2: Fraction
    y1: Fraction
    y2: Fraction

    def __post_init__(self):
        for name in ("x1", "x2", "y1", "y2"):
            object.__setattr__(self, name, _as_fraction(getattr(self, name)))
        if not (0 <= self.x1 < self.x2 <= 1 and 0 <= self.y1 < self.y2 <= 1):
            raise ValueError(f"invalid rectangle {self}")

    @classmethod
    def parse(cls, text: str) -> Rectangle:
        """``"x1,x2,y1,y2"`` in decimal or ``a/b`` notation."""
        parts = [s.strip() for s in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"rectangle needs four numbers x1,x2,y1,y2: {text!r}")
        return cls(*(Fraction(s) for s in parts))

    @property
    def width(self) -> Fraction:
        return self.x2 - self.x1

    def as_floats(self) -> tuple[float, float, float, float]:
        return float(self.x1), float(self.x2), float(self.y1), float(self.y2)

    def __str__(self) -> str:
        return ",".join(str(float(v)) for v in (self.x1, self.x2, self.y1, self.y2))


@dataclass(frozen=True, eq=False)
class PointCloud:
    """
    Points ``(xs[i]/scale, ys[i]/scale)`` with integer numerators; x and y
    numerators must each be pairwise distinct.
    """

    xs: np.ndarray
    ys: np.ndarray
    scale: int = 1

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.int64)
        ys = np.asarray(self.ys, dtype=np.int64)
        if xs.shape != ys.shape or xs.ndim != 1:
            raise ValueError("xs and ys must be 1-d arrays of equal length")
        if len(np.unique(xs)) != len(xs) or len(np.unique(ys)) != len(ys):
            raise ValueError("point cloud has a repeated x or y coordinate")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_permutations(cls, p: Permutation, t: Permutation) -> PointCloud:
        """``{(p(i)/n, t(i)/n)}``."""
        _check_sizes(p, t)
        return cls(np.asarray(p.entries), np.asarray(t.entries), p.n)

    def __len__(self) -> int:
        return len(self.xs)

    def mask(self, r: Rectangle) -> np.ndarray:
        s = self.scale
        # x1 < xs/s <= x2  <=>  floor(x1*s) < xs <= floor(x2*s) for integer xs
        xlo, xhi = math.floor(r.x1 * s), math.floor(r.x2 * s)
        ylo, yhi = math.floor(r.y1 * s), math.floor(r.y2 * s)
        return (self.xs > xlo) & (self.xs <= xhi) & (self.ys > ylo) & (self.ys <= yhi)

    def count(self, r: Rectangle) -> int:
        return int(self.mask(r).sum())

    def subset(self, mask: np.ndarray) -> PointCloud:
        return PointCloud(self.xs[mask], self.ys[mask], self.scale)


def _lis_of_arrays(xs: np.ndarray, ys: np.ndarray) -> int:
    order = np.argsort(xs, kind="stable")
    return lis_length(ys[order].tolist())


def lis_points(c: PointCloud) -> int:
    """Longest chain under strict coordinatewise order."""
    return _lis_of_arrays(c.xs, c.ys)


def lis_in_rectangle(c: PointCloud, r: Rectangle) -> int:
    m = c.mask(r)
    return _lis_of_arrays(c.xs[m], c.ys[m])


@dataclass(frozen=True)
class Staircase:
    """
    ``K`` columns of width ``1/K``; column ``j`` spans heights
    ``(b[j-1]/(KL), (b[j]+1)/(KL)]``. ``b[0] = 0``, ``b[K] = KL - 1``,
    ``b`` nondecreasing.
    """

    K: int
    L: int
    b: tuple[int, ...]

    def __post_init__(self):
        b = tuple(int(v) for v in self.b)
        object.__setattr__(self, "b", b)
        K, L = self.K, self.L
        if K < 1 or L < 1:
            raise ValueError(f"K and L must be positive, got K={K}, L={L}")
        if len(b) != K + 1:
            raise ValueError(f"staircase needs K+1={K + 1} levels, got {len(b)}")
        if b[0] != 0 or b[-1] != K * L - 1:
            raise ValueError(f"staircase must run from 0 to KL-1={K * L - 1}: {b}")
        if any(x > y for x, y in zip(b, b[1:])):
            raise ValueError(f"staircase levels must be nondecreasing: {b}")

    @property
    def levels(self) -> int:
        return self.K * self.L

    def rectangles(self) -> list[Rectangle]:
        K, KL = self.K, self.levels
        return [
            Rectangle(Fraction(j - 1, K), Fraction(j, K),
                      Fraction(self.b[j - 1], KL), Fraction(self.b[j] + 1, KL))
            for j in range(1, K + 1)
        ]

    def mask(self, c: PointCloud) -> np.ndarray:
        """Points lying in the rectangle of their own column."""
        K, KL, s = self.K, self.levels, c.scale
        col = -((-c.xs * K) // s)                  # ceil(x K): column index 1..K
        inside = (col >= 1) & (col <= K)
        col = np.clip(col, 1, K)
        b = np.asarray(self.b)
        lo = b[col - 1] * s
        hi = (b[col] + 1) * s
        yk = c.ys * KL
        return inside & (yk > lo) & (yk <= hi)


def all_staircases(K: int, L: int):
    """Every admissible staircase for the ``(K, L)`` grid."""
    from itertools import combinations_with_replacement

    top = K * L - 1
    for mid in combinations_with_replacement(range(top + 1), K - 1):
        yield Staircase(K, L, (0, *mid, top))


def lis_staircase(c: PointCloud, b: Staircase) -> int:
    """Longest increasing chain confined to the staircase's rectangles."""
    m = b.mask(c)
    return _lis_of_arrays(c.xs[m], c.ys[m])
