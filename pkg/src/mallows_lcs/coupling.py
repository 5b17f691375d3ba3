"""
Coupled adjacent-transposition chains on ``S_n``.

``X`` targets ``mu_{n,q}`` and ``Y`` targets ``mu_{n,q'}`` with ``q <= q'``.
Each step draws ``i`` uniformly from ``1..n-1`` and two coins ``F`` and ``B``,
classifies ``i`` as an ascent (``p^-1(i) < p^-1(i+1)``) or descent of each
chain, and multiplies the chains on the left by ``s_i`` according to
``CASE_TABLE``.

The intended invariant ``X_t <=_L Y_t`` is not preserved. ``s_i o p`` adds
or removes the position pair ``(p^-1(i), p^-1(i+1))``, which differs between
the chains. From ``(id, id)``, case 1 (F tail, B tail) at ``i = 2`` followed
by case 1 (F tail, B head) at ``i = 1`` gives ``X = 213``, ``Y = 231``, and
``Inv(X) = {(1,2)}`` is not inside ``Inv(Y) = {(1,3),(2,3)}``. Reachable
dominated pairs such as ``(132, 231)`` also hit ``i = 2`` as a descent of
``X`` and an ascent of ``Y``, a combination the three cases never cover.

The table is equivalent to per-chain rules: ``X`` moves up on (F tail,
B head) and down on (F head or B tail); ``Y`` moves up on F tail and down
on F head. ``classify`` returns case 4 for the uncovered combination and
the same rules apply, so each marginal stays an exact reversible chain for
its Mallows law whatever happens to the pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mallows import MallowsParams, exact_pmf
from .perm_core import Permutation, all_permutations, bruhat_leq, identity

__all__ = [
    "CouplingParams", "CoupledState", "CouplingInvariantError", "CASE_TABLE",
    "classify", "apply_case", "coupled_step",
    "run_coupled", "chain_transition_matrix", "upset_masses", "dominance_holds",
    "CHAIN_MATRIX_MAX_N",
]

CHAIN_MATRIX_MAX_N = 6


class CouplingInvariantError(RuntimeError):
    """The dominance invariant failed: a logic error, never a property of the input law."""


@dataclass(frozen=True)
class CouplingParams:
    q: float
    q_prime: float

    def __post_init__(self):
        if not 0 < self.q <= self.q_prime:
            raise ValueError(f"need 0 < q <= q' (got q={self.q}, q'={self.q_prime})")

    @property
    def p_forward(self) -> float:
        """Probability that coin ``F`` shows heads."""
        return 1.0 / (1.0 + self.q_prime)

    @property
    def p_back(self) -> float:
        """Probability that coin ``B`` shows heads."""
        q, qp = self.q, self.q_prime
        return (1.0 + qp) * q / ((1.0 + q) * qp)


@dataclass(frozen=True)
class CoupledState:
    x: Permutation
    y: Permutation
    t: int = 0
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.x.n != self.y.n:
            raise ValueError("coupled chains must have equal size")
        if self.check and not bruhat_leq(self.x, self.y):
            raise CouplingInvariantError(f"X={self.x} is not below Y={self.y} at t={self.t}")


# (case, F heads, B heads) -> (move X, move Y); B is irrelevant when F is heads.
# case 1: i ascent of both chains; 2: ascent of X, descent of Y; 3: descent of both.
CASE_TABLE: dict[tuple[int, bool, bool], tuple[bool, bool]] = {}
for _b in (True, False):
    CASE_TABLE[1, True, _b] = (False, False)
    CASE_TABLE[2, True, _b] = (False, True)
    CASE_TABLE[3, True, _b] = (True, True)
CASE_TABLE[1, False, True] = (True, True)
CASE_TABLE[1, False, False] = (False, True)
CASE_TABLE[2, False, True] = (True, False)
CASE_TABLE[2, False, False] = (False, False)
CASE_TABLE[3, False, True] = (False, False)
CASE_TABLE[3, False, False] = (True, False)


def _x_moves(ascent: bool, f_heads: bool, b_heads: bool) -> bool:
    return (not f_heads and b_heads) if ascent else (f_heads or not b_heads)


def _y_moves(ascent: bool, f_heads: bool) -> bool:
    return not f_heads if ascent else f_heads


# case 4: descent of X, ascent of Y; no row exists, the per-chain rules fill it
for _f in (True, False):
    for _b in (True, False):
        CASE_TABLE[4, _f, _b] = (_x_moves(False, _f, _b), _y_moves(True, _f))


def _is_ascent(p: Permutation, i: int) -> bool:
    e = p.entries
    return e.index(i) < e.index(i + 1)


def _move(p: Permutation, i: int) -> Permutation:
    """``s_i o p``: swap the values ``i`` and ``i+1``."""
    return Permutation(tuple(i + 1 if v == i else i if v == i + 1 else v for v in p.entries))


def classify(x: Permutation, y: Permutation, i: int) -> int:
    ax, ay = _is_ascent(x, i), _is_ascent(y, i)
    if ax:
        return 1 if ay else 2
    return 4 if ay else 3


def apply_case(state: CoupledState, i: int, f_heads: bool, b_heads: bool) -> CoupledState:
    """Deterministic part of a step once ``U = i`` and both coins are known."""
    move_x, move_y = CASE_TABLE[classify(state.x, state.y, i), f_heads, b_heads]
    x = _move(state.x, i) if move_x else state.x
    y = _move(state.y, i) if move_y else state.y
    return CoupledState(x, y, state.t + 1, check=state.check)


def coupled_step(state: CoupledState, params: CouplingParams,
                 rng: np.random.Generator) -> CoupledState:
    n = state.x.n
    if n < 2:
        return CoupledState(state.x, state.y, state.t + 1, check=state.check)
    i = int(rng.integers(1, n))
    f_heads = bool(rng.random() < params.p_forward)
    b_heads = bool(rng.random() < params.p_back)
    return apply_case(state, i, f_heads, b_heads)


def run_coupled(n: int, params: CouplingParams, steps: int, rng: np.random.Generator,
                *, check: bool = True,
                trace: list | None = None) -> CoupledState:
    """
    Iterate from ``(id, id)``. With ``check`` the invariant is verified after
    every step and the first failure raises ``CouplingInvariantError``. ``trace``, if given, receives every visited state.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    e = identity(n)
    state = CoupledState(e, e, 0, check=check)
    for _ in range(steps):
        state = coupled_step(state, params, rng)
        if trace is not None:
            trace.append(state)
    return state


def _move_probability(case: int, params: CouplingParams, which: str) -> float:
    pf, pb = params.p_forward, params.p_back
    total = 0.0
    for f in (True, False):
        for b in (True, False):
            mx, my = CASE_TABLE[case, f, b]
            if mx if which == "X" else my:
                total += (pf if f else 1 - pf) * (pb if b else 1 - pb)
    return total


def chain_transition_matrix(n: int, q: float, q_prime: float,
                            which: str) -> tuple[np.ndarray, list[Permutation]]:
    """
    Exact transition matrix of one marginal chain over ``S_n``, with the
    state list (lexicographic) that indexes it.

    A chain's move probability at ``i`` may only depend on whether ``i`` is
    its own ascent: for ``X`` cases 1, 2 agree and 3, 4 agree, for ``Y``
    cases 1, 4 and 2, 3. This is checked while assembling the matrix.
    """
    if which not in ("X", "Y"):
        raise ValueError("which must be 'X' or 'Y'")
    if n > CHAIN_MATRIX_MAX_N:
        raise ValueError(f"n={n} exceeds {CHAIN_MATRIX_MAX_N} for an explicit matrix")
    params = CouplingParams(q, q_prime)
    move = {c: _move_probability(c, params, which) for c in (1, 2, 3, 4)}
    pairs = ((1, 2), (3, 4)) if which == "X" else ((1, 4), (2, 3))
    if any(abs(move[a] - move[b]) > 1e-15 for a, b in pairs):
        raise AssertionError(f"{which} chain is not Markov on its own")
    up, down = move[1], move[3]

    states = all_permutations(n)
    index = {p: k for k, p in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for k, p in enumerate(states):
        for i in range(1, n):
            prob = (up if _is_ascent(p, i) else down) / (n - 1)
            P[k, index[_move(p, i)]] += prob
        P[k, k] += 1.0 - P[k].sum()
    return P, states


def upset_masses(n: int, q: float) -> dict[Permutation, float]:
    """``mu_{n,q}({p : sigma <=_L p})`` for every ``sigma``."""
    pmf = exact_pmf(MallowsParams(n, q))
    return {s: sum(w for p, w in pmf.items() if bruhat_leq(s, p)) for s in pmf}


def dominance_holds(n: int, q: float, q_prime: float, tol: float = 1e-12) -> bool:
    """No principal up-set is heavier under ``q`` than under ``q'``."""
    lo, hi = upset_masses(n, q), upset_masses(n, q_prime)
    return all(lo[s] <= hi[s] + tol for s in lo)
