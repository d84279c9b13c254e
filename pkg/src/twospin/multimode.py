"""Indirect coupling through a continuum of oscillator modes.

Mode sums replace the single-mode intermediate states:

    lossless  V = sum_k w U1 U2* e^{i k.r} / (dE1 - hw_k) - sum_k w U1* U2 e^{-i k.r} / (dE1 + hw_k)
    lossy     V = -sum_k w n_k U1 U2* e^{i k.r} / (dE1 - hw_k)
                  - sum_k w (n_k + 1) U1* U2 e^{-i k.r} / (dE1 + hw_k)

with r = r1 - r2.  A radial grid assumes isotropic couplings and uses the
angular average sinc(k r) of the phase factor.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, PoleError

POLE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MultiModeSpec:
    """Quadrature over modes.

    ``k`` is (N,) for a radial grid or (N, 3) for a Cartesian one; ``weights``
    are the quadrature weights (including any density of states).  Couplings
    ``u1``, ``u2`` and ``occupation`` may be scalars or per-mode arrays.
    ``pole`` is "exclude" (drop modes with |dE1 - hw_k| < eps), "regularize"
    (add i eps to the resonant denominator) or "none".
    """

    k: np.ndarray
    weights: np.ndarray
    omega: np.ndarray
    u1: object = 1.0
    u2: object = 1.0
    occupation: object = 0.0
    hbar: float = 1.0
    pole: str = "exclude"
    eps: float = 0.0

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        om = np.asarray(self.omega, dtype=float)
        n_modes = k.shape[0] if k.ndim else 0
        if k.ndim not in (1, 2) or (k.ndim == 2 and k.shape[1] != 3):
            raise InvalidArgument("k must have shape (N,) or (N, 3)")
        if w.shape != (n_modes,) or om.shape != (n_modes,):
            raise InvalidArgument("weights and omega must have one entry per mode")
        if np.any(om <= 0) or not np.all(np.isfinite(om)):
            raise InvalidArgument("mode frequencies must be positive and finite")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidArgument("weights must be non-negative and finite")
        if self.pole not in ("exclude", "regularize", "none"):
            raise InvalidArgument(f"unknown pole handling {self.pole!r}")
        if self.eps < 0:
            raise InvalidArgument("eps must be >= 0")
        if np.any(np.asarray(self.occupation, dtype=float) < 0):
            raise InvalidArgument("occupations must be >= 0")
        for name, arr in (("k", k), ("weights", w), ("omega", om)):
            object.__setattr__(self, name, arr)

    @property
    def radial(self):
        return self.k.ndim == 1

    def phases(self, separation):
        """Angular-averaged (radial) or explicit e^{i k.r} factors."""
        if self.radial:
            r = float(np.linalg.norm(np.atleast_1d(separation)))
            return np.sinc(self.k * r / np.pi).astype(complex)
        r = np.asarray(separation, dtype=float).reshape(3)
        return np.exp(1j * (self.k @ r))


def radial_grid(k_max, points, omega_of_k, coupling_of_k=1.0, occupation=0.0, **kwargs):
    """Midpoint radial grid with weights 4 pi k^2 dk."""
    dk = k_max / points
    k = (np.arange(points) + 0.5) * dk
    w = 4 * np.pi * k * k * dk
    u = coupling_of_k(k) if callable(coupling_of_k) else coupling_of_k
    return MultiModeSpec(k, w, omega_of_k(k), u, u, occupation, **kwargs)


def multimode_v16(spec, delta_e1, lossy=False, separation=0.0):
    """V16 summed over the modes of ``spec`` at separation r1 - r2."""
    e = spec.hbar * spec.omega
    phase = spec.phases(separation)
    u1 = np.broadcast_to(np.asarray(spec.u1, dtype=complex), e.shape)
    u2 = np.broadcast_to(np.asarray(spec.u2, dtype=complex), e.shape)
    occ = np.broadcast_to(np.asarray(spec.occupation, dtype=float), e.shape)
    resonant = delta_e1 - e
    keep = np.ones(e.shape, dtype=bool)
    scale = max(abs(delta_e1), 1.0)
    if spec.pole == "exclude" and spec.eps > 0:
        keep = np.abs(resonant) >= spec.eps
        denom = resonant.astype(complex)
    elif spec.pole == "regularize" and spec.eps > 0:
        denom = resonant + 1j * spec.eps
    else:
        denom = resonant.astype(complex)
    if np.any(keep & (np.abs(denom) < POLE_TOL * scale)):
        raise PoleError("a mode is resonant with dE1; use pole exclusion or regularization")
    w = np.where(keep, spec.weights, 0.0)
    safe = np.where(keep, denom, 1.0)
    emit = u1 * np.conj(u2) * phase / safe
    absorb = np.conj(u1) * u2 * np.conj(phase) / (delta_e1 + e)
    if lossy:
        return complex(-np.sum(w * occ * emit) - np.sum(w * (occ + 1) * absorb))
    return complex(np.sum(w * emit) - np.sum(w * absorb))


def separation_sweep(spec, delta_e1, separations, lossy=False):
    """V16 at each separation; scalar separations are taken along z for Cartesian grids."""
    out = []
    for r in separations:
        vec = r if (spec.radial or np.ndim(r)) else np.array([0.0, 0.0, float(r)])
        out.append(multimode_v16(spec, delta_e1, lossy, vec))
    return np.array(out)


def sweep_to_csv(path, separations, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["separation", "re_v16", "im_v16", "abs_v16"])
        for r, v in zip(separations, values):
            w.writerow([f"{float(np.linalg.norm(np.atleast_1d(r))):.8e}", f"{v.real:.8e}",
                        f"{v.imag:.8e}", f"{abs(v):.8e}"])
