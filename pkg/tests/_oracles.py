"""Shared helpers for the test suite."""

import numpy as np

from mallows_lcs.mallows import MallowsParams, exact_pmf


def tv_rows(rows: np.ndarray, n: int, q: float) -> float:
    """Total-variation distance between sampled rows and ``mu_{n,q}``."""
    pmf = exact_pmf(MallowsParams(n, q))
    keys, counts = np.unique(rows, axis=0, return_counts=True)
    freq = {tuple(int(v) for v in k): c / len(rows) for k, c in zip(keys, counts)}
    return 0.5 * sum(abs(freq.get(p.entries, 0.0) - w) for p, w in pmf.items())


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))
