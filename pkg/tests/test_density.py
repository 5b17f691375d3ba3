import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mallows_lcs.density import (
    BETA_EPS,
    DensityDomainError,
    DensityField,
    gauss_legendre,
    rho,
    rho_diag_closed,
    rho_partial_bounds_check,
    rho_rect,
    u,
    u_partial_bounds_check,
)
from mallows_lcs.sequence_stats import Rectangle
from mallows_lcs.variational import midpoint_dominance_holds

mpmath.mp.dps = 50
GRID = np.linspace(0.0, 1.0, 101)
BETAS = [-5.0, -1.0, 0.0, 1.0, 5.0]


def u_mp(x, y, b):
    """The defining formula in 50-digit arithmetic."""
    x, y, b = mpmath.mpf(x), mpmath.mpf(y), mpmath.mpf(b)
    num = b / 2 * mpmath.sinh(b / 2)
    den = mpmath.exp(b / 4) * mpmath.cosh(b * (x - y) / 2) - mpmath.exp(-b / 4) * mpmath.cosh(b * (x + y - 1) / 2)
    return num / den ** 2


def test_u_at_zero_is_one():
    assert u(0.3, 0.8, 0.0) == 1.0
    assert np.all(u(GRID, GRID[::-1], 1e-7) == 1.0)


def test_u_corner_value():
    assert u(1.0, 0.0, 1.0) == pytest.approx(1 / (math.e - 1), rel=1e-14)
    assert u(1.0, 0.0, 1.0) == pytest.approx(0.5819767068693265, rel=1e-14)


@pytest.mark.parametrize("b", [0.7, 3.0, -2.0])
def test_u_top_edge_closed_form(b):
    y = np.linspace(0, 1, 11)
    assert np.allclose(u(1.0, y, b), b * np.exp(b * y) / math.expm1(b), rtol=1e-13)


@given(st.floats(0, 1), st.floats(0, 1),
       st.floats(-50, 50).filter(lambda b: abs(b) > 1e-4))
@settings(max_examples=300, deadline=None)
def test_u_matches_high_precision_formula(x, y, b):
    assert u(x, y, b) == pytest.approx(float(u_mp(x, y, b)), rel=1e-12)


@pytest.mark.parametrize("b", [-3.0, 1.0, 5.0])
def test_u_symmetric(b):
    g = np.linspace(0, 1, 21)
    x, y = np.meshgrid(g, g, indexing="ij")
    assert np.allclose(u(x, y, b), u(y, x, b), rtol=1e-14)


@pytest.mark.parametrize("b", BETAS)
def test_u_bounds_and_double_stochasticity(b):
    x, y = np.meshgrid(GRID, GRID, indexing="ij")
    vals = u(x, y, b)
    assert np.all(vals >= math.exp(-abs(b)) * (1 - 1e-14))
    assert np.all(vals <= math.exp(abs(b)) * (1 + 1e-14))
    t, w = gauss_legendre(256)
    for s in (0.0, 0.37, 1.0):
        assert w @ u(s, t, b) == pytest.approx(1.0, abs=1e-8)
        assert w @ u(t, s, b) == pytest.approx(1.0, abs=1e-8)


def test_domain_errors():
    with pytest.raises(DensityDomainError):
        u(1.1, 0.5, 1.0)
    with pytest.raises(DensityDomainError):
        DensityField(1, 1)(0.5, -0.1)
    with pytest.raises(ValueError):
        DensityField(1, 1, quadrature_nodes=8)
    with pytest.raises(ValueError):
        DensityField(float("nan"), 1)


def test_uniform_rho():
    f = DensityField(0, 0)
    assert f.is_uniform
    assert rho(0.2, 0.9, f) == 1.0
    assert rho_rect(Rectangle(0, 0.3, 0.1, 0.6), f) == pytest.approx(0.15, abs=1e-15)


@pytest.mark.parametrize("b", BETAS)
@pytest.mark.parametrize("g", BETAS)
def test_rho_bounds(b, g):
    vals = DensityField(b, g).grid(GRID, GRID)
    assert np.all(vals >= math.exp(-abs(b) - abs(g)) * (1 - 1e-12))
    assert np.all(vals <= math.exp(abs(b) + abs(g)) * (1 + 1e-12))


def test_rho_pointwise_and_grid_agree():
    f = DensityField(1.5, -2.5)
    xs = np.array([0.0, 0.3, 1.0])
    ys = np.array([0.1, 0.9])
    g = f.grid(xs, ys)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            assert f(x, y) == pytest.approx(g[i, j], rel=1e-13)


def test_rho_matches_adaptive_integration():
    f = DensityField(3.0, -1.0)
    for x, y in [(0.1, 0.2), (0.5, 0.5), (0.95, 0.05)]:
        ref = mpmath.quad(lambda t: u_mp(x, t, 3.0) * u_mp(t, y, -1.0), [0, 1])
        assert f(x, y) == pytest.approx(float(ref), rel=1e-12)


def test_rho_diag_example():
    assert DensityField(2, 2)(0.5, 0.5) == pytest.approx(rho_diag_closed(0.5, 2.0), abs=1e-8)


@pytest.mark.parametrize("x", [0.1, 0.5, 0.9])
def test_rho_row_normalization(x):
    f = DensityField(1.0, -2.0)
    t, w = gauss_legendre(256)
    assert w @ f(x, t) == pytest.approx(1.0, abs=1e-8)


def test_rho_swap_symmetry():
    a, b = DensityField(1.5, -3.0), DensityField(-3.0, 1.5)
    g = np.linspace(0, 1, 17)
    assert np.allclose(a.grid(g, g), b.grid(g, g).T, rtol=0, atol=1e-10)


@pytest.mark.parametrize("b, g", [(2, 2), (1, -2), (-5, 5), (0, 3)])
def test_rho_rect_masses(b, g):
    f = DensityField(b, g)
    assert rho_rect(Rectangle(0, 1, 0, 1), f) == pytest.approx(1.0, abs=1e-8)
    parts = [Rectangle(0, 0.3, 0, 0.5), Rectangle(0.3, 1, 0, 0.5), Rectangle(0, 1, 0.5, 1)]
    assert sum(rho_rect(r, f) for r in parts) == pytest.approx(1.0, abs=1e-8)
    thin = Rectangle(0.4, 0.400001, 0.2, 0.7)
    assert rho_rect(thin, f) <= 1e-6 * math.exp(abs(b) + abs(g))


def test_rho_diag_closed_examples():
    assert rho_diag_closed(0.0, 2.0) == pytest.approx(1 / math.tanh(1.0), rel=1e-14)
    assert rho_diag_closed(0.0, 2.0) == pytest.approx(1.3130352854993312, rel=1e-14)
    for b in (0.5, 2.0, 5.0):
        mid = b * (math.cosh(b / 2) + 2) / (6 * math.sinh(b / 2))
        assert rho_diag_closed(0.5, b) == pytest.approx(mid, rel=1e-14)
    assert rho_diag_closed(0.5, 1e-4) == pytest.approx(1.0, abs=1e-8)
    x = np.linspace(0, 1, 9)
    assert np.allclose(rho_diag_closed(x, 3.0), rho_diag_closed(1 - x, 3.0))
    with pytest.raises(ValueError):
        rho_diag_closed(0.5, BETA_EPS / 2)


@pytest.mark.parametrize("b", [0.5, 2.0, 5.0])
def test_rho_diag_quadrature_matches_closed_form(b):
    x = np.linspace(0, 1, 21)
    assert np.abs(DensityField(b, b)(x, x) - rho_diag_closed(x, b)).max() <= 1e-8


def test_u_partials_bounds():
    zero = u_partial_bounds_check(0.0, 21)
    assert zero.max_abs_dx == zero.max_abs_dy == zero.bound == 0.0 and zero.passed
    one = u_partial_bounds_check(1.0, 41)
    assert one.passed and one.bound == pytest.approx(math.e)
    for b in (-5.0, -1.0, 5.0):
        assert u_partial_bounds_check(b, 101).passed


@pytest.mark.parametrize("b, g", [(1, 1), (-1, 5), (5, -5), (0, 1)])
def test_rho_partials_bounds(b, g):
    rep = rho_partial_bounds_check(DensityField(b, g), 101)
    assert rep.passed
    assert rep.bound == pytest.approx((abs(b) + abs(g)) * math.exp(abs(b) + abs(g)))


@pytest.mark.parametrize("b, g", [(2, 2), (-3, 1), (5, -5)])
def test_rho_log_lipschitz(b, g):
    f = DensityField(b, g)
    lx, ly = f.log_lipschitz
    h = 1e-6
    pts = np.linspace(h, 1 - h, 41)
    x, y = np.meshgrid(pts, pts, indexing="ij")
    r = f(x, y)
    dx = (f(x + h, y) - f(x - h, y)) / (2 * h)
    dy = (f(x, y + h) - f(x, y - h)) / (2 * h)
    assert np.all(np.abs(dx) <= lx * r * (1 + 1e-5) + 1e-7)
    assert np.all(np.abs(dy) <= ly * r * (1 + 1e-5) + 1e-7)


@pytest.mark.parametrize("b", [0.0, 0.5, 2.0, 5.0])
def test_midpoint_dominance_on_diagonal_parameters(b):
    assert midpoint_dominance_holds(DensityField(b, b), 21)
