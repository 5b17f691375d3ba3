"""
Limit densities of Mallows point clouds.

``u(x, y, beta)`` is the density of the empirical measure of one Mallows
permutation in the regime ``n(1 - q) -> beta``; ``rho`` is the density of the
two-permutation cloud, the convolution ``int_0^1 u(x, t, beta) u(t, y, gamma) dt``.
Integrals use Gauss-Legendre rules; the integrands are smooth, so 256 nodes
are far past double precision for ``|beta|, |gamma| <= 50``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "BETA_EPS", "DensityField", "DensityDomainError", "u", "rho", "rho_rect",
    "rho_diag_closed", "gauss_legendre", "PartialBoundsReport",
    "u_partial_bounds_check", "rho_partial_bounds_check",
]

BETA_EPS = 1e-6
MAX_ABS_BETA = 50.0


class DensityDomainError(ValueError):
    """A coordinate fell outside the unit interval."""


def gauss_legendre(m: int, a: float = 0.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``m``-point rule on ``[a, b]``."""
    t, w = leggauss(m)
    half = 0.5 * (b - a)
    return a + half * (t + 1.0), half * w


def _check_unit(*arrays) -> None:
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if np.any(~np.isfinite(a)) or np.any(a < 0.0) or np.any(a > 1.0):
            raise DensityDomainError("coordinates must lie in [0, 1]")


def _u_raw(x, y, beta: float) -> np.ndarray:
    """The closed form without domain checks (used for finite differences)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if abs(beta) < BETA_EPS:
        return np.ones(np.broadcast(x, y).shape)
    if beta < 0:
        # u(x, y, -b) = u(x, 1 - y, b)
        beta, y = -beta, 1.0 - y
    # u = b(1 - e^{-b}) / D^2 with
    # D = 2cosh(b(x-y)/2) - 2e^{-b/2}cosh(b(x+y-1)/2)
    #   = 4 sinh(b(2x-1)/4) sinh(b(1-2y)/4) - 2cosh(b(x+y-1)/2) expm1(-b/2)
    # The first form cancels as b -> 0, the second for large b.
    if beta < 1.0:
        d = (4.0 * np.sinh(beta * (2.0 * x - 1.0) / 4.0) * np.sinh(beta * (1.0 - 2.0 * y) / 4.0)
             - 2.0 * np.cosh(beta * (x + y - 1.0) / 2.0) * math.expm1(-beta / 2.0))
    else:
        d = (2.0 * np.cosh(beta * (x - y) / 2.0)
             - 2.0 * math.exp(-beta / 2.0) * np.cosh(beta * (x + y - 1.0) / 2.0))
    return -beta * math.expm1(-beta) / (d * d)


def u(x, y, beta: float):
    """Single-permutation limit density; scalar in, scalar out."""
    _check_unit(x, y)
    out = _u_raw(x, y, beta)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class DensityField:
    """``rho`` for parameters ``(beta, gamma)`` with a fixed quadrature rule."""

    beta: float
    gamma: float
    quadrature_nodes: int = 256
    _nodes: np.ndarray = field(init=False, repr=False, compare=False)
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.beta) and math.isfinite(self.gamma)):
            raise ValueError("beta and gamma must be finite")
        if self.quadrature_nodes < 16:
            raise ValueError("quadrature_nodes must be at least 16")
        t, w = gauss_legendre(self.quadrature_nodes)
        object.__setattr__(self, "_nodes", t)
        object.__setattr__(self, "_weights", w)

    @property
    def is_uniform(self) -> bool:
        return abs(self.beta) < BETA_EPS and abs(self.gamma) < BETA_EPS

    @property
    def log_lipschitz(self) -> tuple[float, float]:
        """
        Bounds on ``|d ln rho / dx|`` and ``|d ln rho / dy|``.

        ``|du/dy| <= |beta| u`` pointwise, and by symmetry of ``u`` the same
        holds in ``x``; differentiating under the integral gives
        ``|d rho/dx| <= |beta| rho`` and ``|d rho/dy| <= |gamma| rho``.
        """
        return abs(self.beta), abs(self.gamma)

    @property
    def lipschitz(self) -> float:
        """The coarser uniform bound ``(|b| + |g|) e^{|b| + |g|}`` on both partials."""
        s = abs(self.beta) + abs(self.gamma)
        return s * math.exp(s)

    def grid(self, xs, ys) -> np.ndarray:
        """``rho`` on the tensor grid ``xs x ys``; shape ``(len(xs), len(ys))``."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        _check_unit(xs, ys)
        if self.is_uniform:
            return np.ones((len(xs), len(ys)))
        t, w = self._nodes, self._weights
        left = _u_raw(xs[:, None], t[None, :], self.beta) * w
        right = _u_raw(t[:, None], ys[None, :], self.gamma)
        return left @ right

    def __call__(self, x, y):
        """Pointwise ``rho`` with broadcasting."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        _check_unit(x, y)
        x, y = np.broadcast_arrays(x, y)
        if self.is_uniform:
            out = np.ones(x.shape)
        else:
            t, w = self._nodes, self._weights
            a = _u_raw(x[..., None], t, self.beta)
            b = _u_raw(t, y[..., None], self.gamma)
            out = (a * b) @ w
        return float(out) if out.ndim == 0 else out


def rho(x, y, field: DensityField):
    return field(x, y)


def rho_rect(r, field: DensityField, nodes: int | None = None) -> float:
    """
    Mass of ``rho`` over the rectangle ``r`` (anything with ``x1, x2, y1, y2``),
    by a tensor Gauss-Legendre rule.
    """
    x1, x2, y1, y2 = (float(v) for v in (r.x1, r.x2, r.y1, r.y2))
    m = nodes or field.quadrature_nodes
    xs, wx = gauss_legendre(m, x1, x2)
    ys, wy = gauss_legendre(m, y1, y2)
    return float(wx @ field.grid(xs, ys) @ wy)


def rho_diag_closed(x, beta: float):
    """``rho(x, x)`` for ``gamma = beta``, closed form."""
    if abs(beta) < BETA_EPS:
        raise ValueError("closed form is 0/0 at beta = 0; the limit value is 1")
    _check_unit(x)
    x = np.asarray(x, dtype=float)
    out = beta * (math.cosh(beta / 2.0) + 2.0 * np.cosh(beta * (2.0 * x - 1.0) / 2.0)) \
        / (6.0 * math.sinh(beta / 2.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PartialBoundsReport:
    max_abs_dx: float
    max_abs_dy: float
    bound: float
    passed: bool


_FD_STEP = 1e-6


def u_partial_bounds_check(beta: float, grid: int) -> PartialBoundsReport:
    """Central-difference partials of ``u`` on a ``grid x grid`` lattice vs ``|b| e^{|b|}``."""
    if grid < 11:
        raise ValueError("grid must be at least 11")
    g = np.linspace(0.0, 1.0, grid)
    x, y = np.meshgrid(g, g, indexing="ij")
    h = _FD_STEP
    dx = (_u_raw(x + h, y, beta) - _u_raw(x - h, y, beta)) / (2 * h)
    dy = (_u_raw(x, y + h, beta) - _u_raw(x, y - h, beta)) / (2 * h)
    bound = abs(beta) * math.exp(abs(beta))
    mx, my = float(np.abs(dx).max()), float(np.abs(dy).max())
    return PartialBoundsReport(mx, my, bound, max(mx, my) <= bound * (1 + 1e-3))


def rho_partial_bounds_check(field: DensityField, grid: int) -> PartialBoundsReport:
    """Same for ``rho`` against ``(|b| + |g|) e^{|b| + |g|}``."""
    if grid < 11:
        raise ValueError("grid must be at least 11")
    g = np.linspace(0.0, 1.0, grid)
    h = _FD_STEP
    t, w = field._nodes, field._weights

    def rho_raw(xs, ys):
        left = _u_raw(xs[:, None], t[None, :], field.beta) * w
        right = _u_raw(t[:, None], ys[None, :], field.gamma)
        return left @ right

    dx = (rho_raw(g + h, g) - rho_raw(g - h, g)) / (2 * h)
    dy = (rho_raw(g, g + h) - rho_raw(g, g - h)) / (2 * h)
    bound = field.lipschitz
    mx, my = float(np.abs(dx).max()), float(np.abs(dy).max())
    return PartialBoundsReport(mx, my, bound, max(mx, my) <= bound * (1 + 1e-3))
