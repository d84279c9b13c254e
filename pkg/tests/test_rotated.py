import math

import numpy as np
import pytest

from twospin.errors import InvalidArgument, ResolutionError, SelectionRuleError
from twospin.model import ModelParams
from twospin.rotated import (TRANSFER_A, TRANSFER_B, SpinConfig, degenerate_pair_gap, dressed_energy,
                             extrapolated_epsilon, i12_numeric, make_grid, overlap_i12, potential_v,
                             rayleigh_quotient, solve_h0_level, solve_levels, v1_element, v12_element)

BARE = ModelParams(11.0, 15.0)


def harmonic_epsilon(n, spin, p):
    return 2 * n + 1 + 2 * (spin.m1 * p.delta_e1 + spin.m2 * p.delta_e2) / p.hbar_omega0


def test_spin_config_parsing():
    s = SpinConfig.parse("+-")
    assert s == SpinConfig(0.5, -0.5) and s.label() == "+-"
    assert s.flipped(1) == SpinConfig(-0.5, -0.5)
    assert SpinConfig.parse((-0.5, 0.5)) == TRANSFER_A
    with pytest.raises(InvalidArgument):
        SpinConfig.parse("+0")


def test_potential_without_coupling_is_shifted_parabola():
    y = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(potential_v(y, TRANSFER_A, BARE), y * y + 2 * (-5.5 + 7.5))


@pytest.mark.parametrize("n", [0, 3, 50, 400])
def test_harmonic_levels_are_exact(n):
    spin = SpinConfig.parse("-+")
    exact = harmonic_epsilon(n, spin, BARE)
    assert abs(extrapolated_epsilon(BARE, spin, n) - exact) <= 2e-7 * exact


def test_harmonic_spacing_is_two():
    spin = SpinConfig.parse("++")
    eps = [extrapolated_epsilon(BARE, spin, n) for n in range(10, 14)]
    np.testing.assert_allclose(np.diff(eps), 2.0, atol=1e-5)


@pytest.mark.parametrize("n", [0, 1, 7, 120])
def test_nodes_parity_and_rayleigh_quotient(n):
    p = ModelParams.from_g(11.0, 15.0, 0.6, 0.3, 100)
    level = solve_h0_level(p, TRANSFER_B, n)
    assert level.nodes() == n
    assert abs(rayleigh_quotient(level, p) - level.epsilon) <= 1e-12 * (abs(level.epsilon) + 1.0)
    np.testing.assert_allclose(level.u[::-1], (-1) ** n * level.u, atol=1e-9)
    assert level.grid.h * np.sum(level.u ** 2) == pytest.approx(1.0, rel=1e-12)


def test_under_resolved_grid_is_rejected():
    with pytest.raises(ResolutionError):
        solve_h0_level(BARE, TRANSFER_A, 20, points_per_wavelength=6)


def test_i12_of_uncoupled_levels_is_kronecker():
    spec = [(TRANSFER_A, 12), (TRANSFER_A, 12)]
    a, b = solve_levels(BARE, spec, grid=make_grid(BARE, spec))
    assert overlap_i12(a, b, BARE) == pytest.approx(1.0, rel=1e-12)
    spec = [(TRANSFER_A, 12), (TRANSFER_A, 14)]
    a, b = solve_levels(BARE, spec, grid=make_grid(BARE, spec))
    assert abs(overlap_i12(a, b, BARE)) < 1e-10


def test_v12_selection_rule():
    spec = [(TRANSFER_A, 10), (SpinConfig(0.5, 0.5), 10)]
    a, b = solve_levels(BARE, spec, grid=make_grid(BARE, spec))
    with pytest.raises(SelectionRuleError):
        v12_element(a, b, BARE)


def test_v1_element_is_antisymmetric():
    p = ModelParams.from_g(11.0, 13.0, 0.5, 0.5, 300)
    up, down = SpinConfig(0.5, -0.5), SpinConfig(-0.5, -0.5)
    spec = [(up, 300), (down, 311)]
    a, b = solve_levels(p, spec, grid=make_grid(p, spec))
    assert v1_element(a, b, p, 1) == pytest.approx(-v1_element(b, a, p, 1), rel=1e-12)


def test_i12_grid_halving_converged():
    p = ModelParams.from_g(11.0, 15.0, 0.5, 0.1611206, 9600)
    res = i12_numeric(p, 9600, -2)
    assert abs(res.fine - res.coarse) < 1e-4
    finer = i12_numeric(p, 9600, -2, points_per_wavelength=96)
    assert abs(finer.value - res.value) < 1e-6


def test_dressed_energy_limits():
    assert dressed_energy(11.0, 0.0, 9600) == 11.0
    values = [dressed_energy(11.0, g * 11 / math.sqrt(9600), 9600) for g in np.linspace(0, 1, 6)]
    assert np.all(np.diff(values) > 0)
    u = 0.5 * 11 / math.sqrt(9600)
    assert dressed_energy(11.0, u, 9600, "wkb") == pytest.approx(dressed_energy(11.0, u, 9600), rel=1e-7)


def test_degenerate_pair_gap():
    assert degenerate_pair_gap(1.0, 1.0, 0.25) == pytest.approx(0.5)
    assert degenerate_pair_gap(1.0, 1.3, 0.2) == pytest.approx(math.hypot(0.3, 0.4))


def test_level_csv(tmp_path):
    level = solve_h0_level(BARE, TRANSFER_A, 3)
    path = tmp_path / "level.csv"
    level.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "y,u" and len(lines) == level.grid.size + 1
