"""
Permutations of ``{1, ..., n}`` in one-line notation.

Everything public is 1-based: ``p(i)`` is the image of ``i``. Products are
read right to left, so ``compose(s, p)(i) == s(p(i))``.

>>> p = Permutation.parse("2,4,1,3")
>>> str(inverse(p))
'3,1,4,2'
>>> inversion_number(p)
3
>>> str(compose(adjacent_transposition(2, 4), p))
'3,4,1,2'
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from itertools import permutations

__all__ = [
    "PermutationError", "Permutation", "identity", "adjacent_transposition",
    "inverse", "reverse", "compose", "inversion_number",
    "inversion_number_bruteforce", "inversion_set", "bruhat_leq", "induced",
    "all_permutations",
]


class PermutationError(ValueError):
    """Raised for malformed permutations, index vectors or size mismatches."""


@dataclass(frozen=True, slots=True)
class Permutation:
    """An immutable bijection of ``{1, ..., n}``, validated on construction."""

    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(v) for v in self.entries)
        object.__setattr__(self, "entries", entries)
        n = len(entries)
        if n < 1:
            raise PermutationError("a permutation needs at least one entry")
        seen = [False] * (n + 1)
        for v in entries:
            if not 1 <= v <= n:
                raise PermutationError(f"value {v} is outside 1..{n}")
            if seen[v]:
                raise PermutationError(f"value {v} appears more than once")
            seen[v] = True
        # n distinct values in 1..n cannot leave a gap

    @classmethod
    def parse(cls, text: str) -> Permutation:
        """Parse comma-separated one-line notation such as ``"2,4,1,3"``."""
        parts = [s.strip() for s in text.split(",") if s.strip()]
        try:
            values = [int(s) for s in parts]
        except ValueError as exc:
            raise PermutationError(f"not an integer list: {text!r}") from exc
        n = len(values)
        if n == 0:
            raise PermutationError("empty permutation")
        seen: set[int] = set()
        for v in values:
            if v in seen:
                raise PermutationError(f"duplicate value {v} in {text!r}")
            seen.add(v)
        for v in range(1, n + 1):
            if v not in seen:
                raise PermutationError(f"missing value {v} in {text!r}")
        return cls(tuple(values))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __call__(self, i: int) -> int:
        return self.entries[i - 1]

    def __iter__(self):
        return iter(self.entries)

    def __str__(self) -> str:
        return ",".join(map(str, self.entries))


def identity(n: int) -> Permutation:
    return Permutation(tuple(range(1, n + 1)))


def adjacent_transposition(i: int, n: int) -> Permutation:
    """The simple transposition ``s_i`` swapping ``i`` and ``i + 1``."""
    if not 1 <= i < n:
        raise PermutationError(f"s_{i} is not defined in S_{n}")
    e = list(range(1, n + 1))
    e[i - 1], e[i] = e[i], e[i - 1]
    return Permutation(tuple(e))


def all_permutations(n: int) -> list[Permutation]:
    """All of ``S_n`` in lexicographic order."""
    return [Permutation(e) for e in permutations(range(1, n + 1))]


def _check_same_size(p: Permutation, t: Permutation) -> None:
    if p.n != t.n:
        raise PermutationError(f"size mismatch: {p.n} vs {t.n}")


def inverse(p: Permutation) -> Permutation:
    r = [0] * p.n
    for i, v in enumerate(p.entries, start=1):
        r[v - 1] = i
    return Permutation(tuple(r))


def reverse(p: Permutation) -> Permutation:
    """``p^r(i) = p(n + 1 - i)``."""
    return Permutation(p.entries[::-1])


def compose(s: Permutation, p: Permutation) -> Permutation:
    """``(s o p)(i) = s(p(i))``."""
    _check_same_size(s, p)
    se = s.entries
    return Permutation(tuple(se[v - 1] for v in p.entries))


def _merge_count(seq: list[int]) -> tuple[list[int], int]:
    if len(seq) <= 1:
        return seq, 0
    mid = len(seq) // 2
    left, a = _merge_count(seq[:mid])
    right, b = _merge_count(seq[mid:])
    merged = []
    count = a + b
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            count += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, count


def inversion_number(p: Permutation | Sequence[int]) -> int:
    """Number of pairs ``i < j`` with ``p(i) > p(j)``, by merge sort."""
    entries = p.entries if isinstance(p, Permutation) else list(p)
    return _merge_count(list(entries))[1]


def inversion_number_bruteforce(p: Permutation | Sequence[int]) -> int:
    e = list(p)
    n = len(e)
    return sum(1 for i in range(n) for j in range(i + 1, n) if e[i] > e[j])


def inversion_set(p: Permutation) -> frozenset[tuple[int, int]]:
    """``Inv(p)``: index pairs ``(i, j)``, ``i < j``, with ``p(i) > p(j)``."""
    e = p.entries
    n = len(e)
    return frozenset(
        (i + 1, j + 1) for i in range(n) for j in range(i + 1, n) if e[i] > e[j]
    )


def bruhat_leq(p: Permutation, t: Permutation) -> bool:
    """Left weak order: ``p <=_L t`` iff ``Inv(p)`` is a subset of ``Inv(t)``."""
    _check_same_size(p, t)
    pe, te = p.entries, t.entries
    n = len(pe)
    for i in range(n):
        pi, ti = pe[i], te[i]
        for j in range(i + 1, n):
            if pi > pe[j] and not ti > te[j]:
                return False
    return True


def _check_index_vector(a: Sequence[int], n: int) -> tuple[int, ...]:
    a = tuple(int(v) for v in a)
    if not 1 <= len(a) <= n:
        raise PermutationError(f"index vector length {len(a)} not in 1..{n}")
    if a[0] < 1 or a[-1] > n:
        raise PermutationError(f"index vector {a} leaves 1..{n}")
    if any(x >= y for x, y in zip(a, a[1:])):
        raise PermutationError(f"index vector {a} is not strictly increasing")
    return a


def induced(p: Permutation, a: Iterable[int]) -> Permutation:
    """
    The pattern of ``p`` at positions ``a``: entry ``i`` is the rank of
    ``p(a_i)`` among ``p(a_1), ..., p(a_k)``.
    """
    a = _check_index_vector(list(a), p.n)
    values = [p.entries[i - 1] for i in a]
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0] * len(values)
    for r, idx in enumerate(order, start=1):
        ranks[idx] = r
    return Permutation(tuple(ranks))
