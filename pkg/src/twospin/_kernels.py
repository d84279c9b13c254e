"""Compiled inner loops for the band eigensolver."""

import numba
import numpy as np


@numba.njit(cache=True, inline="always")
def _get(w, bmax, r, c):
    if r < c:
        r, c = c, r
    d = r - c
    if d > bmax:
        return 0.0
    return w[d, c]


@numba.njit(cache=True, inline="always")
def _set(w, bmax, r, c, value):
    if r < c:
        r, c = c, r
    d = r - c
    if d <= bmax:
        w[d, c] = value


@numba.njit(cache=True)
def _rotate(w, bmax, n, p, c, s, q_acc, accumulate):
    """Similarity A <- R A R^T with R the rotation [[c, s], [-s, c]] in plane (p, p+1)."""
    q = p + 1
    app = w[0, p]
    aqq = w[0, q]
    apq = w[1, p]
    w[0, p] = c * c * app + 2.0 * c * s * apq + s * s * aqq
    w[0, q] = s * s * app - 2.0 * c * s * apq + c * c * aqq
    w[1, p] = c * s * (aqq - app) + (c * c - s * s) * apq
    lo = max(0, p - bmax)
    hi = min(n - 1, q + bmax)
    for k in range(lo, hi + 1):
        if k == p or k == q:
            continue
        akp = _get(w, bmax, k, p)
        akq = _get(w, bmax, k, q)
        if akp == 0.0 and akq == 0.0:
            continue
        _set(w, bmax, k, p, c * akp + s * akq)
        _set(w, bmax, k, q, -s * akp + c * akq)
    if accumulate:
        for i in range(n):
            x = q_acc[i, p]
            y = q_acc[i, q]
            q_acc[i, p] = c * x + s * y
            q_acc[i, q] = -s * x + c * y


@numba.njit(cache=True)
def _zero_with(w, bmax, n, r, col, q_acc, accumulate):
    """Annihilate A[r, col] against A[r-1, col] with a rotation in plane (r-1, r)."""
    x = _get(w, bmax, r, col)
    if x == 0.0:
        return False
    y = _get(w, bmax, r - 1, col)
    rho = np.hypot(y, x)
    c = y / rho
    s = x / rho
    _rotate(w, bmax, n, r - 1, c, s, q_acc, accumulate)
    _set(w, bmax, r, col, 0.0)
    return True


@numba.njit(cache=True)
def band_to_tridiagonal(lower, q_acc, accumulate):
    """Givens bulge-chasing reduction of a symmetric band matrix.

    ``lower`` is (b+1, n) lower band storage.  Returns the diagonal and
    off-diagonal of the similar tridiagonal matrix.  When ``accumulate`` is
    set, ``q_acc`` (initialised to the identity) is overwritten with Q such
    that A = Q T Q^T.
    """
    b = lower.shape[0] - 1
    n = lower.shape[1]
    bmax = b + 1
    w = np.zeros((bmax + 1, n))
    w[: b + 1, :] = lower
    for j in range(n - 2):
        for i in range(min(j + b, n - 1), j + 1, -1):
            if not _zero_with(w, bmax, n, i, j, q_acc, accumulate):
                continue
            p = i - 1
            # chase the bulge created at (p + b + 1, p) off the end of the band
            while p + b + 1 <= n - 1:
                r = p + b + 1
                if not _zero_with(w, bmax, n, r, p, q_acc, accumulate):
                    break
                p = r - 1
    d = w[0].copy()
    e = w[1, : n - 1].copy()
    return d, e


@numba.njit(cache=True)
def sturm_counts(d, e2, xs, pivmin):
    """Number of eigenvalues <= x for every x in ``xs`` (tridiagonal d, e**2)."""
    n = d.shape[0]
    out = np.empty(xs.shape[0], dtype=np.int64)
    for k in range(xs.shape[0]):
        x = xs[k]
        count = 0
        q = d[0] - x
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
        for i in range(1, n):
            q = d[i] - x - e2[i - 1] / q
            if abs(q) < pivmin:
                q = -pivmin
            if q < 0.0:
                count += 1
        out[k] = count
    return out


@numba.njit(cache=True)
def bisect_indices(d, e2, indices, lo0, hi0, abs_tol, pivmin):
    """Eigenvalue number ``indices[k]`` (0-based, ascending) by bisection.

    Each eigenvalue is bracketed in [lo, hi) with count(lo) <= idx < count(hi)
    and refined until the bracket is narrower than ``abs_tol`` or stops
    shrinking in floating point.
    """
    m = indices.shape[0]
    out = np.empty(m)
    one = np.empty(1)
    for k in range(m):
        idx = indices[k]
        lo = lo0
        hi = hi0
        for _ in range(400):
            if hi - lo <= abs_tol:
                break
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            one[0] = mid
            c = sturm_counts(d, e2, one, pivmin)[0]
            if c > idx:
                hi = mid
            else:
                lo = mid
        out[k] = 0.5 * (lo + hi)
    return out


@numba.njit(cache=True)
def hermite_density(n, y):
    """|psi_n(y)|^2 for the normalized harmonic-oscillator eigenfunction.

    Uses the normalized three-term recurrence with the Gaussian kept in a
    log scale, rescaling whenever the recurrence grows past 1e100.
    """
    out = np.empty(y.shape[0])
    big = 1e100
    log_big = np.log(big)
    for i in range(y.shape[0]):
        x = y[i]
        log_scale = -0.5 * x * x - 0.25 * np.log(np.pi)
        pm = 1.0
        p = 1.0 if n == 0 else np.sqrt(2.0) * x
        for k in range(1, n):
            pk = np.sqrt(2.0 / (k + 1)) * x * p - np.sqrt(k / (k + 1.0)) * pm
            pm = p
            p = pk
            if abs(p) > big:
                p /= big
                pm /= big
                log_scale += log_big
        out[i] = 0.0 if p == 0.0 else np.exp(2.0 * (log_scale + np.log(abs(p))))
    return out


@numba.njit(cache=True)
def bisect_tridiagonal_index(d, e2, idx, lo, hi, pivmin):
    """Eigenvalue ``idx`` of a tridiagonal matrix, bisected to full precision."""
    one = np.empty(1)
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        one[0] = mid
        if sturm_counts(d, e2, one, pivmin)[0] > idx:
            hi = mid
        else:
            lo = mid
    return lo, hi


@numba.njit(cache=True)
def position_amplitudes(k_lo, coeffs, y):
    """sum_k coeffs[k - k_lo, j] psi_k(y) for every grid point and column j.

    The Hermite recurrence runs from k = 0 at each point; the running sums
    are kept in the same rescaled units as the recurrence.
    """
    nk, m = coeffs.shape
    k_hi = k_lo + nk - 1
    out = np.zeros((y.shape[0], m))
    big = 1e100
    log_big = np.log(big)
    acc = np.empty(m)
    for i in range(y.shape[0]):
        x = y[i]
        log_scale = -0.5 * x * x - 0.25 * np.log(np.pi)
        acc[:] = 0.0
        pm = 0.0
        p = 1.0
        for k in range(k_hi + 1):
            if k >= k_lo:
                for j in range(m):
                    acc[j] += p * coeffs[k - k_lo, j]
            pk = np.sqrt(2.0 / (k + 1)) * x * p - np.sqrt(k / (k + 1.0)) * pm
            pm = p
            p = pk
            if abs(p) > big:
                p /= big
                pm /= big
                for j in range(m):
                    acc[j] /= big
                log_scale += log_big
        scale = np.exp(log_scale)
        for j in range(m):
            out[i, j] = acc[j] * scale
    return out
