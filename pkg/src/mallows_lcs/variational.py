"""
The path energy ``J(phi) = int_0^1 sqrt(phi'(x) rho(x, phi(x))) dx`` and
brackets on its supremum over nondecreasing paths.

``jbar_grid`` discretises the square into ``K`` columns and ``K*L`` levels.
A staircase ``b`` picks, in column ``i``, the level band ``b[i-1]..b[i]``;
its discrete energy is ``sum_i sqrt(M_i (b_i - b_{i-1} + 1) dx dy)`` with
``M_i`` an upper bound of ``rho`` on the column's rectangle. The maximum over
staircases (dynamic programming over ``(column, level)``) is the upper end
of the bracket; the piecewise-linear path through the best staircase gives
the lower end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import BETA_EPS, DensityField, gauss_legendre, rho_diag_closed
from .sequence_stats import Staircase, all_staircases

__all__ = [
    "MonotonePath", "Staircase", "JBracket", "j_functional", "jbar_closed",
    "jbar_diag", "cell_maxima", "staircase_energy", "max_staircase_energy_bruteforce",
    "jbar_grid", "midpoint_dominance_holds", "GRID_MAX_LEVELS",
]

GRID_MAX_LEVELS = 4096


@dataclass(frozen=True)
class MonotonePath:
    """
    Piecewise-linear nondecreasing path through ``knots``; ``x`` runs from 0
    to 1 strictly increasing. With ``pinned`` the path must also start at
    ``y = 0`` and end at ``y = 1``.
    """

    knots: tuple[tuple[float, float], ...]
    pinned: bool = False

    def __post_init__(self):
        knots = tuple((float(x), float(y)) for x, y in self.knots)
        object.__setattr__(self, "knots", knots)
        if len(knots) < 2:
            raise ValueError("a path needs at least two knots")
        xs = [k[0] for k in knots]
        ys = [k[1] for k in knots]
        if xs[0] != 0.0 or xs[-1] != 1.0:
            raise ValueError("knots must start at x=0 and end at x=1")
        if any(a >= b for a, b in zip(xs, xs[1:])):
            raise ValueError("knot x-coordinates must be strictly increasing")
        if any(a > b for a, b in zip(ys, ys[1:])):
            raise ValueError("path must be nondecreasing")
        if ys[0] < 0.0 or ys[-1] > 1.0:
            raise ValueError("path must stay inside [0, 1]")
        if self.pinned and (ys[0] != 0.0 or ys[-1] != 1.0):
            raise ValueError("pinned paths run from (0, 0) to (1, 1)")

    @classmethod
    def diagonal(cls) -> MonotonePath:
        return cls(((0.0, 0.0), (1.0, 1.0)), pinned=True)

    @classmethod
    def from_staircase(cls, s: Staircase) -> MonotonePath:
        dy = 1.0 / s.levels
        return cls(tuple((i / s.K, b * dy) for i, b in enumerate(s.b)))


def j_functional(phi: MonotonePath, field: DensityField, nodes_per_segment: int = 32) -> float:
    t, w = gauss_legendre(nodes_per_segment)
    total = 0.0
    for (x0, y0), (x1, y1) in zip(phi.knots, phi.knots[1:]):
        slope = (y1 - y0) / (x1 - x0)
        if slope == 0.0:
            continue
        xs = x0 + (x1 - x0) * t
        ys = np.clip(y0 + slope * (xs - x0), 0.0, 1.0)
        total += (x1 - x0) * float(w @ np.sqrt(slope * field(xs, ys)))
    return total


def jbar_closed(beta: float, nodes: int = 256) -> float:
    """Supremum for ``gamma = beta``, where the diagonal is optimal."""
    if abs(beta) < BETA_EPS:
        return 1.0
    x, w = gauss_legendre(nodes)
    pref = math.sqrt(beta / (6.0 * math.sinh(beta / 2.0)))
    return pref * float(w @ np.sqrt(math.cosh(beta / 2.0) + 2.0 * np.cosh(beta * (2 * x - 1) / 2.0)))


def jbar_diag(field: DensityField, nodes: int = 256, closed: bool = False) -> float:
    """``int_0^1 sqrt(rho(x, x)) dx``; ``closed`` uses the ``beta = gamma`` formula."""
    x, w = gauss_legendre(nodes)
    if closed:
        if abs(field.beta - field.gamma) > 0:
            raise ValueError("the closed diagonal form needs beta == gamma")
        if abs(field.beta) < BETA_EPS:
            return 1.0
        vals = rho_diag_closed(x, field.beta)
    else:
        vals = field(x, x)
    return float(w @ np.sqrt(vals))


def cell_maxima(field: DensityField, K: int, L: int, samples: int = 5) -> np.ndarray:
    """
    Certified upper bounds of ``rho`` on every unit cell
    ``((i-1)/K, i/K] x (j/(KL), (j+1)/(KL)]``, shape ``(K, KL)``.

    Each cell is sampled on a ``samples x samples`` lattice including its
    edges; every point of the cell is within ``h_x`` and ``h_y`` of a sample
    in each coordinate, so the log-Lipschitz bound of ``rho`` turns the sampled
    maximum into a supremum bound by the factor ``exp(|b| h_x + |g| h_y)``.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    KL = K * L
    s1 = samples - 1
    xs = np.linspace(0.0, 1.0, K * s1 + 1)
    ys = np.linspace(0.0, 1.0, KL * s1 + 1)
    vals = field.grid(xs, ys)
    # column maxima over the x samples of each column, then cell maxima in y
    col = np.lib.stride_tricks.sliding_window_view(vals, samples, axis=0)[::s1].max(axis=-1)
    cell = np.lib.stride_tricks.sliding_window_view(col, samples, axis=1)[:, ::s1].max(axis=-1)
    lx, ly = field.log_lipschitz
    hx, hy = 0.5 / (K * s1), 0.5 / (KL * s1)
    return cell * math.exp(lx * hx + ly * hy)


def _band_maxima(cells: np.ndarray) -> np.ndarray:
    """``out[a, b] = max(cells[a..b])`` for ``a <= b``, ``-inf`` below the diagonal."""
    m = len(cells)
    out = np.full((m, m), -np.inf)
    idx = np.arange(m)
    out[idx, idx] = cells
    for d in range(1, m):
        a = idx[: m - d]
        out[a, a + d] = np.maximum(out[a, a + d - 1], cells[a + d])
    return out


def staircase_energy(s: Staircase, cells: np.ndarray) -> float:
    """Discrete energy of one staircase given the per-cell bounds."""
    K, KL = s.K, s.levels
    dxdy = 1.0 / (K * KL)
    total = 0.0
    for i in range(1, K + 1):
        lo, hi = s.b[i - 1], s.b[i]
        m = float(cells[i - 1, lo:hi + 1].max())
        total += math.sqrt(m * (hi - lo + 1) * dxdy)
    return total


def max_staircase_energy_bruteforce(field: DensityField, K: int, L: int,
                                    samples: int = 5) -> tuple[float, Staircase]:
    """Exhaustive maximum over all staircases; tiny grids only."""
    cells = cell_maxima(field, K, L, samples)
    return max(((staircase_energy(s, cells), s) for s in all_staircases(K, L)),
               key=lambda pair: pair[0])


@dataclass(frozen=True)
class JBracket:
    lower: float
    upper: float
    K: int
    L: int
    argmax_staircase: Staircase

    @property
    def width(self) -> float:
        return self.upper - self.lower


def jbar_grid(field: DensityField, K: int, L: int, samples: int = 5) -> JBracket:
    if K < 2 or L < 1:
        raise ValueError("need K >= 2 and L >= 1")
    KL = K * L
    if KL > GRID_MAX_LEVELS:
        raise ValueError(f"K*L={KL} exceeds the {GRID_MAX_LEVELS}-level guard")
    cells = cell_maxima(field, K, L, samples)
    dxdy = 1.0 / (K * KL)
    width = np.arange(KL)[None, :] - np.arange(KL)[:, None] + 1   # b - a + 1
    width = np.where(width > 0, width, 0)

    value = np.full(KL, -np.inf)
    value[0] = 0.0
    parents = []
    for i in range(K):
        gain = np.sqrt(np.maximum(_band_maxima(cells[i]), 0.0) * width * dxdy)
        gain[width == 0] = -np.inf
        total = value[:, None] + gain                 # (previous level a, new level b)
        best = np.argmax(total, axis=0)
        value = total[best, np.arange(KL)]
        parents.append(best)
    upper = float(value[KL - 1])

    b = [KL - 1]
    for best in reversed(parents):
        b.append(int(best[b[-1]]))
    stair = Staircase(K, L, tuple(reversed(b)))
    lower = j_functional(MonotonePath.from_staircase(stair), field)
    return JBracket(lower, upper, K, L, stair)


def midpoint_dominance_holds(field: DensityField, grid: int) -> bool:
    """``rho(x, y) <= rho(m, m)``, ``m = (x + y)/2``, on a ``grid x grid`` lattice."""
    if grid < 11:
        raise ValueError("grid must be at least 11")
    g = np.linspace(0.0, 1.0, grid)
    vals = field.grid(g, g)
    x, y = np.meshgrid(g, g, indexing="ij")
    mid = (x + y) / 2.0
    mids = field(mid, mid)
    return bool(np.all(vals <= mids * (1 + 1e-9)))
