import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twospin.eigen import (dense_eigen_oracle, eigenpairs_in_interval, eigenvalues_in_interval,
                           reduce_to_tridiagonal, sturm_count, tridiagonal)
from twospin.errors import TooManyEigenvalues
from twospin.model import BandedSymmetricMatrix, FockWindow, ModelParams, assemble_hamiltonian, build_basis


def random_band(rng, dim, bw):
    lower = rng.normal(size=(bw + 1, dim))
    for d in range(1, bw + 1):
        lower[d, dim - d:] = 0.0
    return BandedSymmetricMatrix(lower)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 400), st.integers(1, 6))
def test_band_eigenvalues_match_dense_oracle(seed, dim, bw):
    rng = np.random.default_rng(seed)
    band = random_band(rng, dim, min(bw, dim - 1))
    ref = dense_eigen_oracle(band.to_dense()).values
    got = eigenpairs_in_interval(band, ref[0] - 1, ref[-1] + 1, vectors=False, max_count=dim).values
    # bisection contract: absolute tolerance 1e-12 ||H||_1
    assert np.max(np.abs(got - ref)) <= 1e-12 * band.norm1()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(8, 150))
def test_eigenvectors_have_small_residuals_and_are_orthonormal(seed, dim):
    rng = np.random.default_rng(seed)
    band = random_band(rng, dim, 3)
    ref = np.linalg.eigvalsh(band.to_dense())
    a, b = ref[dim // 3] - 1e-9, ref[dim // 3 + 10 if dim > 40 else dim - 1]
    res = eigenpairs_in_interval(band, a, b)
    assert np.all(res.residuals < 1e-11)
    np.testing.assert_allclose(res.vectors.T @ res.vectors, np.eye(len(res.values)), atol=1e-9)


def test_tridiagonal_reduction_is_a_similarity():
    rng = np.random.default_rng(3)
    band = random_band(rng, 60, 6)
    tri = reduce_to_tridiagonal(band, accumulate=True)
    q = tri.q
    np.testing.assert_allclose(q.T @ q, np.eye(60), atol=1e-12)
    np.testing.assert_allclose(q @ tri.to_dense() @ q.T, band.to_dense(), atol=1e-12)


def test_sturm_count_is_inclusive_and_monotone():
    rng = np.random.default_rng(7)
    d, e = rng.normal(size=40), rng.normal(size=39)
    tri = tridiagonal(d, e)
    ref = np.linalg.eigvalsh(tri.to_dense())
    xs = np.linspace(ref[0] - 1, ref[-1] + 1, 200)
    counts = sturm_count(tri, xs)
    assert np.all(np.diff(counts) >= 0)
    np.testing.assert_array_equal(counts, np.searchsorted(ref, xs, side="right"))
    # integer-valued diagonal: eigenvalue exactly at the endpoint is included in (a, b]
    t = tridiagonal([1.0, 2.0, 3.0], [0.0, 0.0])
    np.testing.assert_allclose(eigenvalues_in_interval(t, 1.0, 2.0), [2.0], rtol=0, atol=1e-11)
    assert len(eigenvalues_in_interval(t, 2.0, 3.0)) == 1


def test_near_degenerate_cluster():
    # two eigenvalues 1e-9 apart: vectors must still be orthogonal
    dim = 50
    diag = np.arange(dim, dtype=float)
    diag[20] = diag[21] = 20.0
    diag[21] += 1e-9
    lower = np.zeros((4, dim))
    lower[0] = diag
    lower[3, :-3] = 1e-6
    band = BandedSymmetricMatrix(lower)
    res = eigenpairs_in_interval(band, 19.5, 20.5)
    assert len(res.values) == 2
    assert abs(res.vectors[:, 0] @ res.vectors[:, 1]) < 1e-8
    assert np.all(res.residuals < 1e-11)


def test_small_gap_resolved():
    tri = tridiagonal([0.0, 1e-7, 5.0], [0.0, 0.0])
    vals = eigenvalues_in_interval(tri, -1, 1)
    assert len(vals) == 2
    np.testing.assert_allclose(vals, [0.0, 1e-7], rtol=0, atol=1e-12 * tri.norm1())
    fine = eigenvalues_in_interval(tri, -1, 1, abs_tol=1e-14)
    assert abs((fine[1] - fine[0]) - 1e-7) < 1e-13


def test_too_many_eigenvalues():
    tri = tridiagonal(np.arange(300.0), np.zeros(299))
    with pytest.raises(TooManyEigenvalues):
        eigenvalues_in_interval(tri, -1, 400, max_count=100)


def test_physical_hamiltonian_window():
    p = ModelParams.from_g(11.0, 15.0, 0.5, 0.3, 500)
    basis = build_basis(FockWindow(300, 700), parity=1)
    band = assemble_hamiltonian(p, basis, energy_offset=500.0)
    ref = np.linalg.eigvalsh(band.to_dense())
    res = eigenpairs_in_interval(band, -2.0, 2.0)
    sel = ref[(ref > -2) & (ref <= 2)]
    np.testing.assert_allclose(res.values, sel, atol=1e-11)
    assert res.sturm_counts[1] - res.sturm_counts[0] == len(sel)
