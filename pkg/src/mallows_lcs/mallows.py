"""
Mallows measures ``mu_{n,q}(p) = q**l(p) / Z_{n,q}`` on ``S_n``.

Sampling goes through inversion tables: entry ``i`` (for value ``i``) is the
number of smaller values placed to its right, drawn from a geometric law
truncated to ``{0, ..., i-1}``. The entries are independent under Mallows,
so the sampler is exact.

The block sampler splits a permutation into value blocks (which positions
receive each consecutive run of values) and the patterns inside each block;
it exists to check the inversion identity, not for throughput.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .perm_core import (
    Permutation,
    PermutationError,
    all_permutations,
    induced,
    inversion_number,
)

__all__ = [
    "MallowsParams", "ScalingParams", "BlockDecomposition",
    "partition_function", "exact_pmf", "sample_inversion_table",
    "decode_inversion_table", "sample", "sample_batch",
    "block_spec", "block_encode", "block_decode", "block_inversion_number",
    "block_partitions", "block_sample", "block_sample_batch",
    "EXACT_PMF_MAX_N", "BLOCK_SAMPLE_MAX_N",
]

EXACT_PMF_MAX_N = 9
BLOCK_SAMPLE_MAX_N = 10
# below this |1 - q| the truncated geometric is drawn as uniform
Q_ONE_EPS = 1e-12


@dataclass(frozen=True)
class MallowsParams:
    n: int
    q: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not (self.q > 0 and math.isfinite(self.q)):
            raise ValueError(f"q must be positive and finite, got {self.q}")


@dataclass(frozen=True)
class ScalingParams:
    """The regime ``n(1 - q) = beta``; mapped to ``q = 1 - beta/n``."""

    n: int
    beta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not self.n > self.beta:
            raise ValueError(f"need n > beta so that q > 0 (n={self.n}, beta={self.beta})")

    @property
    def q(self) -> float:
        return 1.0 - self.beta / self.n

    def to_mallows(self) -> MallowsParams:
        return MallowsParams(self.n, self.q)


def partition_function(n: int, q: float) -> float:
    """``Z_{n,q} = prod_{i=1}^n (1 - q^i)/(1 - q)``, ``n!`` at ``q = 1``."""
    if q == 1:
        return float(math.factorial(n))
    z = 1.0
    for i in range(1, n + 1):
        # (1 - q^i)/(1 - q) = 1 + q + ... + q^{i-1}
        z *= math.fsum(q ** k for k in range(i))
    return z


def exact_pmf(params: MallowsParams) -> dict[Permutation, float]:
    """Every permutation of ``S_n`` with its Mallows probability."""
    n, q = params.n, params.q
    if n > EXACT_PMF_MAX_N:
        raise ValueError(f"exact_pmf enumerates S_n; n={n} exceeds {EXACT_PMF_MAX_N}")
    z = partition_function(n, q)
    return {p: q ** inversion_number(p) / z for p in all_permutations(n)}


def _truncated_geometric(sizes: np.ndarray, q: float, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draws of ``k`` in ``{0..m-1}`` with ``P(k) ~ q**k``, ``m = sizes``."""
    sizes = np.asarray(sizes)
    if abs(1.0 - q) < Q_ONE_EPS:
        k = np.floor(u * sizes).astype(np.int64)
        return np.minimum(k, sizes - 1)
    flip = q > 1.0
    r = 1.0 / q if flip else q
    # CDF(k) = (1 - r^{k+1}) / (1 - r^m); smallest k with CDF(k) >= u
    tail = -np.expm1(sizes * math.log(r))          # 1 - r^m
    with np.errstate(divide="ignore"):
        k = np.ceil(np.log1p(-u * tail) / math.log(r)) - 1.0
    k = np.clip(k, 0, sizes - 1).astype(np.int64)
    return sizes - 1 - k if flip else k


def sample_inversion_table(n: int, q: float, rng: np.random.Generator,
                           size: int | None = None) -> np.ndarray:
    """Independent entries ``c_i`` in ``{0..i-1}``, ``P(c_i = k) ~ q**k``."""
    sizes = np.arange(1, n + 1)
    shape = (n,) if size is None else (size, n)
    u = rng.random(shape)
    return _truncated_geometric(np.broadcast_to(sizes, shape), q, u)


def decode_inversion_table(table: Sequence[int]) -> Permutation:
    """
    Place value ``i`` so that exactly ``table[i-1]`` smaller values sit to its
    right. Values are placed from ``n`` down into free slots tracked by a
    Fenwick tree, O(n log n).
    """
    n = len(table)
    tree = [0] * (n + 1)
    for i in range(1, n + 1):
        tree[i] += 1
        j = i + (i & -i)
        if j <= n:
            tree[j] += tree[i]
    top = 1 << (n.bit_length() - 1)
    out = [0] * n
    for value in range(n, 0, -1):
        c = int(table[value - 1])
        if not 0 <= c < value:
            raise ValueError(f"inversion table entry {c} for value {value} out of range")
        # the (value - c)-th free slot, 1-based
        k = value - c
        pos = 0
        step = top
        while step:
            nxt = pos + step
            if nxt <= n and tree[nxt] < k:
                pos = nxt
                k -= tree[nxt]
            step >>= 1
        slot = pos + 1
        out[slot - 1] = value
        while slot <= n:
            tree[slot] -= 1
            slot += slot & -slot
    return Permutation(tuple(out))


def _decode_tables(tables: np.ndarray) -> np.ndarray:
    """Row-wise ``decode_inversion_table`` for a batch, vectorised over rows."""
    m, n = tables.shape
    out = np.zeros((m, n), dtype=np.int64)
    free = np.ones((m, n), dtype=bool)
    rows = np.arange(m)
    for value in range(n, 0, -1):
        k = value - tables[:, value - 1]
        rank = np.cumsum(free, axis=1)
        slot = np.argmax(free & (rank == k[:, None]), axis=1)
        out[rows, slot] = value
        free[rows, slot] = False
    return out


def sample(params: MallowsParams, rng: np.random.Generator) -> Permutation:
    """One exact draw from ``mu_{n,q}``."""
    return decode_inversion_table(sample_inversion_table(params.n, params.q, rng))


def sample_batch(params: MallowsParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent draws as rows of an ``(size, n)`` int array."""
    tables = sample_inversion_table(params.n, params.q, rng, size=size)
    return _decode_tables(tables)


# -- block decomposition -----------------------------------------------------

def block_spec(sizes: Sequence[int], n: int | None = None) -> tuple[int, ...]:
    sizes = tuple(int(c) for c in sizes)
    if not sizes or any(c < 1 for c in sizes):
        raise ValueError(f"block sizes must be positive, got {sizes}")
    if n is not None and sum(sizes) != n:
        raise ValueError(f"block sizes {sizes} do not sum to {n}")
    return sizes


@dataclass(frozen=True)
class BlockDecomposition:
    """
    ``blocks[i]`` holds the positions receiving the ``i``-th run of values
    (sorted); ``inner[i]`` is the pattern of the permutation on them.
    """

    blocks: tuple[tuple[int, ...], ...]
    inner: tuple[Permutation, ...]

    @property
    def block_inversions(self) -> int:
        return block_inversion_number(self.blocks)


def block_inversion_number(blocks: Sequence[Sequence[int]]) -> int:
    """Pairs ``x > y`` with ``x`` in an earlier block than ``y``."""
    label = {}
    for b, block in enumerate(blocks):
        for x in block:
            label[x] = b
    seq = [label[x] for x in sorted(label)]
    # count pairs x < y with label[x] > label[y]
    return inversion_number(seq) if len(seq) > 1 else 0


def block_encode(p: Permutation, sizes: Sequence[int]) -> BlockDecomposition:
    sizes = block_spec(sizes, p.n)
    blocks, inner = [], []
    lo = 0
    for c in sizes:
        hi = lo + c
        positions = tuple(i for i in range(1, p.n + 1) if lo < p(i) <= hi)
        blocks.append(positions)
        inner.append(induced(p, positions))
        lo = hi
    return BlockDecomposition(tuple(blocks), tuple(inner))


def block_decode(d: BlockDecomposition, sizes: Sequence[int]) -> Permutation:
    sizes = block_spec(sizes)
    n = sum(sizes)
    if len(d.blocks) != len(sizes) or len(d.inner) != len(sizes):
        raise ValueError("decomposition does not match the block spec")
    out = [0] * n
    lo = 0
    for c, positions, tau in zip(sizes, d.blocks, d.inner):
        if len(positions) != c or tau.n != c:
            raise ValueError(f"block of size {len(positions)} where {c} expected")
        if list(positions) != sorted(positions):
            raise ValueError(f"block positions {positions} are not sorted")
        for pos, rank in zip(positions, tau.entries):
            if not 1 <= pos <= n or out[pos - 1]:
                raise ValueError(f"position {pos} is invalid or used twice")
            out[pos - 1] = lo + rank
        lo += c
    try:
        return Permutation(tuple(out))
    except PermutationError as exc:
        raise ValueError(str(exc)) from exc


def block_partitions(sizes: Sequence[int]) -> list[tuple[tuple[int, ...], ...]]:
    """All ordered set partitions of ``1..n`` with the given block sizes."""
    sizes = block_spec(sizes)

    def rec(remaining: tuple[int, ...], k: int):
        if k == len(sizes):
            yield ()
            return
        for chosen in combinations(remaining, sizes[k]):
            rest = tuple(x for x in remaining if x not in chosen)
            for tail in rec(rest, k + 1):
                yield (chosen,) + tail

    return list(rec(tuple(range(1, sum(sizes) + 1)), 0))


def _partition_law(sizes: tuple[int, ...], q: float):
    parts = block_partitions(sizes)
    lengths = np.array([block_inversion_number(a) for a in parts], dtype=float)
    w = np.exp(lengths * math.log(q))
    return parts, w / w.sum()


def block_sample(sizes: Sequence[int], q: float, rng: np.random.Generator) -> Permutation:
    """
    Draw the block partition with weight ``q**l(blocks)`` by enumeration,
    the inner patterns from ``mu_{c_i,q}``, and glue them together.
    """
    sizes = block_spec(sizes)
    n = sum(sizes)
    if n > BLOCK_SAMPLE_MAX_N:
        raise ValueError(f"block_sample enumerates partitions; n={n} exceeds {BLOCK_SAMPLE_MAX_N}")
    parts, prob = _partition_law(sizes, q)
    blocks = parts[rng.choice(len(parts), p=prob)]
    inner = tuple(sample(MallowsParams(c, q), rng) for c in sizes)
    return block_decode(BlockDecomposition(blocks, inner), sizes)


def block_sample_batch(sizes: Sequence[int], q: float, size: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Vectorised ``block_sample``: rows of an ``(size, n)`` int array."""
    sizes = block_spec(sizes)
    n = sum(sizes)
    if n > BLOCK_SAMPLE_MAX_N:
        raise ValueError(f"block_sample enumerates partitions; n={n} exceeds {BLOCK_SAMPLE_MAX_N}")
    parts, prob = _partition_law(sizes, q)
    pos_table = np.array([[x - 1 for block in a for x in block] for a in parts])
    choice = rng.choice(len(parts), size=size, p=prob)
    positions = pos_table[choice]                      # (size, n)
    values = np.empty((size, n), dtype=np.int64)
    lo = 0
    for c in sizes:
        values[:, lo:lo + c] = lo + sample_batch(MallowsParams(c, q), size, rng)
        lo += c
    out = np.empty((size, n), dtype=np.int64)
    np.put_along_axis(out, positions, values, axis=1)
    return out
