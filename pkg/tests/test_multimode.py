import math
from dataclasses import replace

import numpy as np
import pytest

from twospin.errors import InvalidArgument, PoleError
from twospin.model import ModelParams, Variant
from twospin.multimode import MultiModeSpec, multimode_v16, radial_grid, separation_sweep, sweep_to_csv
from twospin.sixstate import SixStateModel, v16_general


@pytest.mark.parametrize("n", [10.0, 1e4])
def test_single_mode_reduction(n):
    p = ModelParams.from_g(11.0, 11.0, 0.01, 0.02, n)
    spec = MultiModeSpec([0.0], [1.0], [1.0], p.u1, p.u2, n)
    assert multimode_v16(spec, 11.0) == pytest.approx(v16_general(SixStateModel(p, n)).v16, rel=1e-13)
    lossy = replace(p, variant=Variant.LOSSY, gamma=math.inf)
    assert multimode_v16(spec, 11.0, lossy=True) == pytest.approx(
        v16_general(SixStateModel(lossy, n)).v16, rel=1e-13)


def test_coherent_maximum_and_decaying_envelope():
    spec = radial_grid(5.0, 4000, lambda k: 0.2 + k)
    r = np.linspace(0.0, 30.0, 301)
    a = np.abs(separation_sweep(spec, 11.0, r))
    assert np.argmax(a) == 0
    peaks = [i for i in range(1, len(a) - 1) if a[i] >= a[i - 1] and a[i] >= a[i + 1]]
    assert len(peaks) > 3 and np.all(np.diff(a[peaks]) < 0)


def test_cartesian_phase_factor():
    k0, de = 2.0, 11.0
    spec = MultiModeSpec([[0.0, 0.0, k0]], [1.0], [1.0])
    r = 0.7
    expected = np.exp(1j * k0 * r) / (de - 1.0) - np.exp(-1j * k0 * r) / (de + 1.0)
    assert separation_sweep(spec, de, [r])[0] == pytest.approx(expected, rel=1e-14)


def test_pole_handling():
    k = np.array([1.0, 2.0, 3.0])
    omega = np.array([5.0, 11.0, 20.0])
    with pytest.raises(PoleError):
        multimode_v16(MultiModeSpec(k, np.ones(3), omega, pole="none"), 11.0)
    excluded = multimode_v16(MultiModeSpec(k, np.ones(3), omega, pole="exclude", eps=0.1), 11.0)
    # the resonant mode is dropped entirely
    expected = (1 / 6 - 1 / 16) + (-1 / 9 - 1 / 31)
    assert excluded == pytest.approx(expected, rel=1e-14)
    reg = multimode_v16(MultiModeSpec(k, np.ones(3), omega, pole="regularize", eps=0.1), 11.0)
    assert np.isfinite(reg) and reg.imag != 0


def test_spec_validation():
    with pytest.raises(InvalidArgument):
        MultiModeSpec([1.0, 2.0], [1.0], [1.0, 2.0])
    with pytest.raises(InvalidArgument):
        MultiModeSpec([1.0], [1.0], [-1.0])
    with pytest.raises(InvalidArgument):
        MultiModeSpec(np.ones((2, 2)), [1.0, 1.0], [1.0, 1.0])
    with pytest.raises(InvalidArgument):
        MultiModeSpec([1.0], [1.0], [1.0], pole="bogus")


def test_sweep_csv(tmp_path):
    spec = radial_grid(2.0, 50, lambda k: 1 + k)
    r = [0.0, 1.0]
    path = tmp_path / "sweep.csv"
    sweep_to_csv(path, r, separation_sweep(spec, 11.0, r))
    lines = path.read_text().splitlines()
    assert lines[0] == "separation,re_v16,im_v16,abs_v16" and len(lines) == 3
