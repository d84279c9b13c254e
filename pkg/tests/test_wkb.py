import math

import numpy as np
import pytest

from twospin.errors import IncompatibleLevels, InvalidArgument, QuantizationFailure
from twospin.model import ModelParams
from twospin.rotated import TRANSFER_A, TRANSFER_B, extrapolated_epsilon, i12_numeric
from twospin.wkb import action, i12_wkb, quantize_potential, wkb_dressed_energy, wkb_quantize


@pytest.mark.parametrize("n", [1, 2, 10, 137, 9600])
def test_harmonic_oscillator_is_exact(n):
    level = quantize_potential(lambda y: y * y, n)
    assert level.epsilon == pytest.approx(2 * n + 1, rel=1e-12)
    assert level.turning_points[1] == pytest.approx(math.sqrt(2 * n + 1), rel=1e-12)


def test_phase_accumulates_quantization_condition():
    p = ModelParams.from_g(11.0, 15.0, 0.7, 0.4, 300)
    level = wkb_quantize(p, TRANSFER_A, 300)
    assert level.phase[-1] - level.phase[0] == pytest.approx(300.5 * math.pi, abs=1e-9)
    assert level.phase[0] == pytest.approx(0.25 * math.pi)


def test_action_integral_of_parabola():
    # area of the half disc: pi eps / 2
    assert action(lambda y: y * y, 9.0) == pytest.approx(4.5 * math.pi, rel=1e-13)


def test_wkb_tracks_numeric_levels_at_large_n():
    p = ModelParams.from_g(11.0, 15.0, 0.5, 0.2, 2000)
    for spin in (TRANSFER_A, TRANSFER_B):
        eps_wkb = wkb_quantize(p, spin, 2000).epsilon
        eps_num = extrapolated_epsilon(p, spin, 2000)
        assert abs(eps_wkb - eps_num) < 1e-2


def test_rejects_ground_state_and_double_wells():
    with pytest.raises(InvalidArgument):
        wkb_quantize(ModelParams(11.0, 15.0), TRANSFER_A, 0)
    with pytest.raises(QuantizationFailure):
        quantize_potential(lambda y: y ** 4 - 10 * np.asarray(y) ** 2, 3)


def test_incompatible_levels():
    p = ModelParams.from_g(11.0, 15.0, 0.5, 0.16, 9600)
    with pytest.raises(IncompatibleLevels):
        i12_wkb(p, 9600, -2000)


def test_wkb_i12_close_to_numeric():
    p = ModelParams.from_g(11.0, 15.0, 0.6, 0.2734154, 9600)
    w = i12_wkb(p, 9600, -2)
    num = i12_numeric(p, 9600, -2)
    assert abs(abs(w.value) - abs(num.value)) < 1.5e-3
    assert w.eta_mismatch < 1e-2


def test_wkb_dressed_energy_without_coupling():
    assert wkb_dressed_energy(11.0, 0.0, 100) == 11.0
