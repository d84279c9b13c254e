import io
import json
import math

import numpy as np
import pytest

from twospin.errors import BracketError, InvalidArgument, NoResonance, UnsupportedVariant
from twospin.model import ModelParams, Variant
from twospin.resonance import (ResonanceKind, ScanProblem, evaluate_gap, refine_minimum, resonance_exists,
                               resonance_map, solve_energy_exchange_g, solve_resonance_g2, splitting_scan)
from twospin.rotated import dressed_energy

P = ModelParams(11.0, 15.0)


def test_transfer_resonance_satisfies_balance():
    pt = solve_resonance_g2(0.7, -2, P, 9600)
    de1 = dressed_energy(11.0, 0.7 * 11 / math.sqrt(9600), 9600)
    de2 = dressed_energy(15.0, pt.g2 * 15 / math.sqrt(9600), 9600)
    assert de2 - de1 == pytest.approx(-2.0, abs=1e-9)
    assert pt.residual < 1e-9 and pt.kind is ResonanceKind.EXCITATION_TRANSFER


def test_wkb_and_harmonic_resonances_agree():
    a = solve_resonance_g2(0.6, -2, P, 9600).g2
    b = solve_resonance_g2(0.6, -2, P, 9600, method="wkb").g2
    assert abs(a - b) < 5e-3 * a


def test_no_resonance_outside_existence_window():
    assert not resonance_exists(0.1, -2, P, 9600)
    with pytest.raises(NoResonance):
        solve_resonance_g2(0.1, -2, P, 9600)
    with pytest.raises(InvalidArgument):
        solve_resonance_g2(0.5, -3, P, 9600)


def test_energy_exchange_resonance():
    p = ModelParams(11.0, 13.0)
    pt = solve_energy_exchange_g(13, 1, p, 2000)
    assert dressed_energy(11.0, pt.g1 * 11 / math.sqrt(2000), 2000) == pytest.approx(13.0, abs=1e-9)
    assert solve_energy_exchange_g(11, 1, p, 2000).g1 == 0.0
    with pytest.raises(NoResonance):
        solve_energy_exchange_g(9, 1, p, 2000)


def test_map_curves_are_ordered():
    g1 = np.linspace(0.3, 1.2, 7)
    curves = resonance_map(P, 9600, g1, [-4, -2, 0, 2])
    for i in range(len(g1)):
        g2 = [curves[dn][i].g2 for dn in (-4, -2, 0, 2) if curves[dn][i] is not None]
        assert np.all(np.diff(g2) > 0)
    for dn, pts in curves.items():
        assert [p is not None for p in pts] == [resonance_exists(g, dn, P, 9600) for g in g1]


def test_refine_minimum_finds_hyperbola_vertex():
    f = lambda x: math.hypot(3.0 * (x - 0.4123), 1e-3)
    xs = np.linspace(0.3, 0.5, 9)
    x, fx, hist = refine_minimum(f, xs, [f(v) for v in xs])
    assert abs(x - 0.4123) < 1e-4 * 0.4123
    assert fx == pytest.approx(1e-3, rel=1e-6)
    assert len(hist) <= 60


def test_refine_minimum_rejects_flat_and_edge_minima():
    xs = np.linspace(0, 1, 9)
    with pytest.raises(BracketError):
        refine_minimum(lambda x: 1.0, xs, [1.0] * 9)
    with pytest.raises(BracketError):
        refine_minimum(lambda x: x + 1.0, xs, list(xs + 1.0))


def test_scan_problem_validation():
    with pytest.raises(InvalidArgument):
        ScanProblem(P.with_g(1000, g1=0.4), 1000, -3)
    with pytest.raises(UnsupportedVariant):
        ScanProblem(ModelParams(11.0, 15.0, variant=Variant.CONJUGATE), 1000, -2)
    with pytest.raises(InvalidArgument):
        ScanProblem(P, 1000, -2, control="g3")


def test_band_and_dense_gaps_agree():
    p = ModelParams(100.0, 100.0).with_g(400, g1=0.02, g2=0.02)
    pr = ScanProblem(p, 400, 0, control="g2")
    band = evaluate_gap(pr, 0.02, abs_tol=1e-14)
    dense = evaluate_gap(pr, 0.02, solver="dense")
    assert band.gap == pytest.approx(dense.gap, rel=1e-6)
    assert band.gap == pytest.approx(4 * 0.02 * 0.02 / 400, rel=0.05)
    assert min(band.weight_a) > 0.2 and min(band.weight_b) > 0.2


def test_scan_output_is_deterministic():
    p = ModelParams(53.0, 51.0).with_g(1000, g1=0.4)
    scan = splitting_scan(ScanProblem(p, 1000, -2, control="g2"), points=7)
    assert scan.ratio == pytest.approx(1.0, abs=0.1)
    assert scan.window_converged
    assert not scan.disrupted
    a, b = io.StringIO(), io.StringIO()
    scan.to_csv(a)
    scan.to_csv(b)
    assert a.getvalue() == b.getvalue()
    assert a.getvalue().splitlines()[0].startswith("control,gap,index_lo")
    summary = json.loads(scan.to_json())
    assert set(summary) >= {"resonance", "delta_e_min", "pt_prediction", "ratio"}
