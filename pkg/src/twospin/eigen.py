"""Interior eigenpairs of real symmetric band matrices.

The production path reduces the band to tridiagonal form with Givens
rotations, counts eigenvalues with Sturm sequences, bisects inside the
requested interval and recovers vectors by inverse iteration.  Anticrossing
gaps are many orders of magnitude below the matrix norm, which is why the
tolerances here are absolute and tied to ``||H||_1``.

:func:`dense_eigen_oracle` is the independent cubic-cost check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import InvalidArgument, NoConvergence, TooManyEigenvalues
from .model import BandedSymmetricMatrix

ABS_TOL = 1e-12
REFINE_TOL = 1e-14
CLUSTER_TOL = 1e-8
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class TridiagonalForm:
    """T = Q^T A Q with ``d``/``e`` its diagonals.

    ``band`` is the original matrix; it doubles as the transform handle when
    ``q`` was not accumulated, because inverse iteration can then run on the
    band itself and yields the back-transformed vector directly.
    """

    d: np.ndarray
    e: np.ndarray
    band: BandedSymmetricMatrix | None = None
    q: np.ndarray | None = None

    @property
    def dim(self):
        return len(self.d)

    def norm1(self):
        if self.band is not None:
            return self.band.norm1()
        s = np.abs(self.d).copy()
        s[:-1] += np.abs(self.e)
        s[1:] += np.abs(self.e)
        return float(s.max())

    def gershgorin(self):
        r = np.zeros_like(self.d)
        r[:-1] += np.abs(self.e)
        r[1:] += np.abs(self.e)
        return float((self.d - r).min()), float((self.d + r).max())

    def to_dense(self):
        return np.diag(self.d) + np.diag(self.e, 1) + np.diag(self.e, -1)


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    vectors: np.ndarray | None = None
    residuals: np.ndarray | None = None
    sturm_counts: tuple[int, int] | None = None


def reduce_to_tridiagonal(band, accumulate=False):
    """Orthogonal similarity of ``band`` to tridiagonal form.

    ``accumulate`` stores the dense Q (O(n^2) memory); leave it off for
    large matrices.
    """
    if band.half_bandwidth < 1:
        if band.half_bandwidth == 0:
            q = np.eye(band.dim) if accumulate else None
            return TridiagonalForm(band.lower[0].copy(), np.zeros(max(band.dim - 1, 0)), band, q)
        raise InvalidArgument("half_bandwidth must be >= 1")
    if band.half_bandwidth == 1:
        q = np.eye(band.dim) if accumulate else None
        return TridiagonalForm(band.lower[0].copy(), band.lower[1, :-1].copy(), band, q)
    q = np.eye(band.dim) if accumulate else np.zeros((1, 1))
    d, e = _kernels.band_to_tridiagonal(np.ascontiguousarray(band.lower, dtype=float), q, accumulate)
    return TridiagonalForm(d, e, band, q if accumulate else None)


def tridiagonal(d, e):
    return TridiagonalForm(np.asarray(d, dtype=float), np.asarray(e, dtype=float))


def _pivmin(tri):
    e2max = float((tri.e ** 2).max()) if tri.dim > 1 else 0.0
    return _TINY * max(1.0, e2max)


def sturm_count(tri, x):
    """Number of eigenvalues <= x (``x`` scalar or array)."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    counts = _kernels.sturm_counts(tri.d, tri.e ** 2, xs, _pivmin(tri))
    return int(counts[0]) if np.ndim(x) == 0 else counts


def eigenvalues_by_index(tri, indices, abs_tol=None):
    lo, hi = tri.gershgorin()
    scale = max(tri.norm1(), _TINY)
    tol = (ABS_TOL if abs_tol is None else abs_tol) * scale
    pad = 4 * np.finfo(float).eps * scale + _TINY
    return _kernels.bisect_indices(tri.d, tri.e ** 2, np.asarray(indices, dtype=np.int64),
                                   lo - pad, hi + pad, tol, _pivmin(tri))


def eigenvalues_in_interval(tri, a, b, abs_tol=None, max_count=256):
    """All eigenvalues in (a, b], ascending.

    ``abs_tol`` is relative to ``||H||_1`` (default 1e-12).
    """
    if not a < b:
        raise InvalidArgument("need a < b")
    ca, cb = sturm_count(tri, np.array([a, b]))
    count = int(cb - ca)
    if count > max_count:
        raise TooManyEigenvalues(f"{count} eigenvalues in ({a}, {b}] exceeds max_count={max_count}")
    if count == 0:
        return np.empty(0)
    values = eigenvalues_by_index(tri, np.arange(ca, cb), abs_tol)
    return np.clip(np.sort(values), np.nextafter(a, np.inf), b)


def _initial_vector(dim, k):
    rng = np.random.default_rng(12345 + k)
    return rng.uniform(-1.0, 1.0, dim)


def _inverse_iterate(solve, x, previous, max_iter):
    x = x / np.linalg.norm(x)
    for it in range(max_iter):
        y = solve(x)
        for v in previous:
            y -= (v @ y) * v
        growth = np.linalg.norm(y)
        if not np.isfinite(growth) or growth == 0.0:
            raise NoConvergence("inverse iteration broke down")
        y /= growth
        change = min(np.linalg.norm(y - x), np.linalg.norm(y + x))
        x = y
        if it >= 1 and change < 1e-13:
            return x
    return x


def _shifted_solver(ab, bw, lam, scale):
    """solve (A - lam I) x = rhs with a tiny shift if the system is exactly singular."""
    shift = lam
    for attempt in range(6):
        mat = ab.copy()
        mat[bw] -= shift
        try:
            test = scipy.linalg.solve_banded((bw, bw), mat, np.ones(mat.shape[1]), check_finite=False)
            if np.all(np.isfinite(test)):
                return lambda rhs, mat=mat: scipy.linalg.solve_banded(
                    (bw, bw), mat, rhs, check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            pass
        shift = lam + (10.0 ** attempt) * 4 * np.finfo(float).eps * scale
    raise NoConvergence(f"could not factor the shifted system at {lam}")


def eigenvectors(tri, values, max_iter=8, residual_tol=1e-11):
    """Unit eigenvectors for the given eigenvalues (columns).

    Eigenvalues closer than ``CLUSTER_TOL * ||H||_1`` are handled as one
    cluster and reorthogonalised against each other.
    """
    values = np.atleast_1d(np.asarray(values, dtype=float))
    scale = max(tri.norm1(), _TINY)
    use_band = tri.q is None and tri.band is not None
    if use_band:
        ab = tri.band.upper_lower_storage()
        bw = tri.band.half_bandwidth
        dim = tri.band.dim
    else:
        ab = np.zeros((3, tri.dim))
        ab[0, 1:] = tri.e
        ab[1] = tri.d
        ab[2, :-1] = tri.e
        bw = 1
        dim = tri.dim
    out = np.empty((dim, len(values)))
    cluster = []
    for k, lam in enumerate(values):
        if k == 0 or abs(lam - values[k - 1]) > CLUSTER_TOL * scale:
            cluster = []
        solve = _shifted_solver(ab, bw, lam, scale)
        x = _inverse_iterate(solve, _initial_vector(dim, k), cluster, max_iter)
        if not use_band and tri.q is not None:
            x = tri.q @ x
        cluster.append(x)
        out[:, k] = x
    if tri.band is not None:
        res = residuals(tri.band, values, out)
        bad = np.nonzero(res > residual_tol)[0]
        if len(bad):
            raise NoConvergence(
                f"eigenvector residual {res[bad].max():.3e} above {residual_tol:g} for "
                f"eigenvalue {values[bad[0]]!r}")
    return out


def eigenvector(tri, lam, transform=None):
    """Single eigenvector.  ``transform`` overrides the handle stored in ``tri``."""
    if transform is not None:
        if isinstance(transform, BandedSymmetricMatrix):
            tri = TridiagonalForm(tri.d, tri.e, transform, None)
        else:
            tri = TridiagonalForm(tri.d, tri.e, tri.band, np.asarray(transform))
    return eigenvectors(tri, [lam])[:, 0]


def residuals(band, values, vectors):
    """||A v - lam v|| / ||A||_1 per column."""
    scale = max(band.norm1(), _TINY)
    out = np.empty(len(values))
    for k, lam in enumerate(values):
        v = vectors[:, k]
        out[k] = np.linalg.norm(band.matvec(v) - lam * v) / scale
    return out


def eigenpairs_in_interval(band, a, b, vectors=True, abs_tol=None, max_count=256, tri=None):
    """Eigenvalues (and vectors) of ``band`` in (a, b] with residual certificates.

    ``a``, ``b`` and the returned values are in the band's shifted energy
    scale (physical energy minus ``band.energy_offset``).
    """
    tri = reduce_to_tridiagonal(band) if tri is None else tri
    values = eigenvalues_in_interval(tri, a, b, abs_tol=abs_tol, max_count=max_count)
    counts = tuple(int(c) for c in sturm_count(tri, np.array([a, b])))
    if not vectors or len(values) == 0:
        return EigenResult(values, np.empty((band.dim, 0)) if vectors else None, None, counts)
    vecs = eigenvectors(tri, values)
    return EigenResult(values, vecs, residuals(band, values, vecs), counts)


def dense_eigen_oracle(matrix):
    """Full spectrum of a dense symmetric matrix by LAPACK's classical solver."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidArgument("matrix must be square")
    if matrix.shape[0] > 2000:
        raise InvalidArgument("dense oracle is limited to dim <= 2000")
    values, vectors = np.linalg.eigh(matrix)
    scale = max(np.abs(matrix).sum(axis=0).max(), _TINY)
    res = np.linalg.norm(matrix @ vectors - vectors * values, axis=0) / scale
    return EigenResult(values, vectors, res, (0, len(values)))
