import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twospin.errors import InvalidArgument, MultiphotonRegimeWarning, UnsupportedVariant
from twospin.model import (SPIN_ORDER, FockWindow, ModelParams, Variant, assemble_hamiltonian, bare_level,
                           build_basis, dense_hamiltonian, state_parity)


def test_rejects_bad_energies():
    with pytest.raises(InvalidArgument):
        ModelParams(-1.0, 2.0)
    with pytest.raises(InvalidArgument):
        ModelParams(3.0, 2.0, u1=-0.1)
    with pytest.raises(InvalidArgument):
        ModelParams(3.0, 2.0, variant="lossy", gamma=-1.0)


def test_warns_outside_multiphoton_regime():
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        ModelParams(0.5, 3.0)
    assert any(issubclass(w.category, MultiphotonRegimeWarning) for w in rec)


def test_g_round_trip():
    p = ModelParams.from_g(11.0, 15.0, 0.5, 0.16, 9600)
    assert p.g1(9600) == pytest.approx(0.5, rel=1e-15)
    assert p.g2(9600) == pytest.approx(0.16, rel=1e-15)
    q = p.with_g(9600, g2=0.3)
    assert q.g1(9600) == pytest.approx(0.5) and q.g2(9600) == pytest.approx(0.3)


@given(st.integers(0, 50), st.integers(1, 60), st.sampled_from([None, 1, -1]))
def test_basis_index_is_a_bijection(n_min, size, parity):
    basis = build_basis(FockWindow(n_min, n_min + size), parity)
    for i in range(basis.dim):
        assert basis.encode(*basis.decode(i)) == i
    if parity is not None:
        assert all(state_parity(n, a, b) == parity for n, a, b in zip(basis.n, basis.m1, basis.m2))
    else:
        assert basis.dim == 4 * (size + 1)


@settings(max_examples=30, deadline=None)
@given(st.floats(1.5, 20), st.floats(1.5, 20), st.floats(0, 2), st.floats(0, 2), st.integers(0, 30),
       st.integers(2, 25), st.sampled_from([None, 1, -1]))
def test_banded_assembly_equals_kronecker_oracle(de1, de2, u1, u2, n_min, size, parity):
    p = ModelParams(de1, de2, u1, u2)
    basis = build_basis(FockWindow(n_min, n_min + size), parity)
    band = assemble_hamiltonian(p, basis, energy_offset=3.0)
    np.testing.assert_allclose(band.to_dense(), dense_hamiltonian(p, basis, 3.0), rtol=0, atol=1e-12)


def test_band_structure_and_selection_rules():
    p = ModelParams.from_g(7.0, 9.0, 0.4, 0.7, 20)
    basis = build_basis(FockWindow(3, 30))
    h = assemble_hamiltonian(p, basis).to_dense()
    assert np.array_equal(h, h.T)
    rows, cols = np.nonzero(h - np.diag(np.diag(h)))
    assert np.max(np.abs(rows - cols)) <= 6
    for i, j in zip(rows, cols):
        assert abs(basis.n[i] - basis.n[j]) == 1
        assert (basis.m1[i] != basis.m1[j]) + (basis.m2[i] != basis.m2[j]) == 1
    assert assemble_hamiltonian(p, build_basis(FockWindow(3, 30), 1)).half_bandwidth == 3


def test_parity_commutes_and_sectors_split_spectrum():
    p = ModelParams.from_g(5.0, 7.0, 0.6, 0.3, 10)
    window = FockWindow(0, 20)
    full = build_basis(window)
    h = dense_hamiltonian(p, full)
    parity = np.diag([state_parity(n, a, b) for n, a, b in zip(full.n, full.m1, full.m2)]).astype(float)
    assert np.abs(h @ parity - parity @ h).max() == 0.0
    sectors = np.sort(np.concatenate([np.linalg.eigvalsh(dense_hamiltonian(p, build_basis(window, s)))
                                      for s in (1, -1)]))
    np.testing.assert_allclose(sectors, np.linalg.eigvalsh(h), atol=1e-11)


def test_bare_levels_on_diagonal():
    p = ModelParams(11.0, 15.0)
    basis = build_basis(FockWindow(4, 8))
    diag = assemble_hamiltonian(p, basis).lower[0]
    for i in range(basis.dim):
        assert diag[i] == bare_level(basis.n[i], basis.m1[i], basis.m2[i], p)
    assert SPIN_ORDER[0] == (-0.5, -0.5)


def test_other_variants_not_assembled():
    p = ModelParams(5.0, 5.0, 0.1, 0.1, variant=Variant.CONJUGATE)
    with pytest.raises(UnsupportedVariant):
        assemble_hamiltonian(p, build_basis(FockWindow(0, 5)))


def test_window_validation_and_growth():
    with pytest.raises(InvalidArgument):
        FockWindow(5, 5)
    w = FockWindow.around(3, 10)
    assert w.n_min == 0 and w.n_max == 13
    assert w.grown(0.5).size > w.size


def test_band_csv_dump(tmp_path):
    p = ModelParams(3.0, 4.0, 0.2, 0.3)
    band = assemble_hamiltonian(p, build_basis(FockWindow(0, 3)), energy_offset=1.0)
    path = tmp_path / "band.csv"
    band.to_csv(path)
    rows = path.read_text().splitlines()
    assert rows[0] == "row,col,value"
    dense = dense_hamiltonian(p, band.basis)
    for line in rows[1:]:
        i, j, v = line.split(",")
        assert float(v) == pytest.approx(dense[int(i), int(j)], abs=1e-8)
