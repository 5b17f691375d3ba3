import math

import numpy as np
import pytest

from mallows_lcs.density import DensityField, gauss_legendre
from mallows_lcs.sequence_stats import Staircase, all_staircases
from mallows_lcs.variational import (
    MonotonePath,
    cell_maxima,
    j_functional,
    jbar_closed,
    jbar_diag,
    jbar_grid,
    max_staircase_energy_bruteforce,
    midpoint_dominance_holds,
    staircase_energy,
)

UNIFORM = DensityField(0, 0)


def test_path_validation():
    with pytest.raises(ValueError):
        MonotonePath(((0, 0),))
    with pytest.raises(ValueError):
        MonotonePath(((0, 0), (0.5, 0.6), (0.5, 0.7), (1, 1)))
    with pytest.raises(ValueError):
        MonotonePath(((0, 0.5), (1, 0.4)))
    with pytest.raises(ValueError):
        MonotonePath(((0.1, 0), (1, 1)))
    with pytest.raises(ValueError):
        MonotonePath(((0, 0.2), (1, 1)), pinned=True)
    MonotonePath(((0, 0.2), (1, 0.9)))


def test_j_examples():
    assert j_functional(MonotonePath.diagonal(), UNIFORM) == pytest.approx(1.0, abs=1e-14)
    flat = MonotonePath(((0, 0.4), (1, 0.4)))
    assert j_functional(flat, DensityField(2, 2)) == 0.0
    assert j_functional(MonotonePath.diagonal(), DensityField(2, 2)) == pytest.approx(jbar_closed(2.0), abs=1e-6)


def test_j_uniform_piecewise_path():
    # sum over segments of sqrt(dx * dy)
    phi = MonotonePath(((0, 0), (0.5, 0.1), (1, 1)))
    assert j_functional(phi, UNIFORM) == pytest.approx(math.sqrt(0.05) + math.sqrt(0.45), rel=1e-14)


def test_jbar_closed_values():
    assert jbar_closed(0.0) == 1.0
    assert jbar_closed(1e-4) == pytest.approx(1.0, abs=1e-8)
    assert jbar_closed(1.0) == pytest.approx(1.013500519465793, rel=1e-12)
    assert jbar_closed(2.0) == pytest.approx(1.0500117170063623, rel=1e-12)
    for b in (0.5, 2.0, 7.0):
        assert jbar_closed(b) == pytest.approx(jbar_closed(-b), abs=1e-10)


@pytest.mark.parametrize("b", [0.5, 1.0, 2.0, 5.0])
def test_diagonal_forms_agree(b):
    f = DensityField(b, b)
    assert jbar_diag(f, closed=True) == pytest.approx(jbar_closed(b), abs=1e-8)
    assert jbar_diag(f) == pytest.approx(jbar_closed(b), abs=1e-8)


def test_jbar_diag_closed_needs_equal_parameters():
    with pytest.raises(ValueError):
        jbar_diag(DensityField(1, 2), closed=True)
    assert jbar_diag(UNIFORM, closed=True) == 1.0


def test_cell_maxima_dominate_dense_samples():
    f = DensityField(3.0, -2.0)
    K, L = 4, 2
    cells = cell_maxima(f, K, L)
    xs = np.linspace(0, 1, 4 * 40 + 1)
    ys = np.linspace(0, 1, 8 * 40 + 1)
    dense = f.grid(xs, ys)
    for i in range(K):
        for j in range(K * L):
            block = dense[i * 40:(i + 1) * 40 + 1, j * 40:(j + 1) * 40 + 1]
            assert block.max() <= cells[i, j]
    with pytest.raises(ValueError):
        cell_maxima(f, K, L, samples=1)


def test_uniform_cells_are_one():
    assert np.all(cell_maxima(UNIFORM, 3, 2) == 1.0)


def test_two_candidate_grid():
    br = jbar_grid(UNIFORM, 2, 1)
    energies = [staircase_energy(Staircase(2, 1, (0, b1, 1)), np.ones((2, 2))) for b1 in (0, 1)]
    assert br.upper == max(energies)
    assert br.upper == pytest.approx(math.sqrt(0.25) + math.sqrt(0.5), rel=1e-15)


@pytest.mark.parametrize("K", [2, 3])
@pytest.mark.parametrize("L", [1, 2])
@pytest.mark.parametrize("b, g", [(0, 0), (2, 2), (1, -3)])
def test_dp_equals_exhaustive(K, L, b, g):
    f = DensityField(b, g)
    best, stair = max_staircase_energy_bruteforce(f, K, L)
    br = jbar_grid(f, K, L)
    assert br.upper == pytest.approx(best, rel=1e-14)
    cells = cell_maxima(f, K, L)
    assert staircase_energy(br.argmax_staircase, cells) == pytest.approx(best, rel=1e-14)


def test_grid_guards():
    with pytest.raises(ValueError):
        jbar_grid(UNIFORM, 1, 1)
    with pytest.raises(ValueError):
        jbar_grid(UNIFORM, 128, 64)


def test_uniform_bracket_width_k16():
    br = jbar_grid(UNIFORM, 16, 16)
    assert br.lower - 1e-9 <= 1.0 <= br.upper
    assert br.width < 0.2


@pytest.mark.slow
def test_uniform_bracket_width_k64():
    br = jbar_grid(UNIFORM, 64, 64)
    assert br.lower - 1e-9 <= 1.0 <= br.upper
    assert br.width < 0.06


@pytest.mark.parametrize("b", [0.0, 1.0, 2.0])
def test_bracket_contains_closed_form(b):
    br = jbar_grid(DensityField(b, b), 64, 16)
    assert br.lower <= jbar_closed(b) <= br.upper
    assert br.width <= 0.1


def test_refinement_does_not_raise_bound():
    f = DensityField(2, 2)
    uppers = [jbar_grid(f, K, L).upper for K, L in [(8, 2), (16, 4), (32, 8)]]
    for coarse, fine in zip(uppers, uppers[1:]):
        assert fine <= coarse + 5e-3


@pytest.mark.parametrize("b, g", [(1, -2), (3, 0.5), (-2, -2)])
def test_bracket_dominates_diagonal(b, g):
    f = DensityField(b, g)
    br = jbar_grid(f, 16, 4)
    assert br.lower <= br.upper
    assert jbar_diag(f) <= br.upper


def test_midpoint_dominance_open_case_is_reported():
    value = midpoint_dominance_holds(DensityField(2, -3), 41)
    assert isinstance(value, bool)
    with pytest.raises(ValueError):
        midpoint_dominance_holds(UNIFORM, 5)


def test_lower_bound_path_follows_staircase():
    br = jbar_grid(DensityField(1, 1), 8, 2)
    phi = MonotonePath.from_staircase(br.argmax_staircase)
    assert phi.knots[0] == (0.0, 0.0)
    assert phi.knots[-1][0] == 1.0
    assert br.lower == pytest.approx(j_functional(phi, DensityField(1, 1)))


def test_staircase_count_matches_enumeration():
    assert len(list(all_staircases(2, 1))) == 2
