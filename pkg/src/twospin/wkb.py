"""Semiclassical levels of the rotated-frame potential.

Levels obey int sqrt(eps - v) dy = (n + 1/2) pi between two soft turning
points.  Every integral between turning points is done in theta with
y = Y sin(theta), which removes the square-root endpoint behaviour of
sqrt(eps - v) and the inverse-square-root singularity of 1/eta.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import cumulative_simpson, simpson
from scipy.optimize import brentq

from .errors import IncompatibleLevels, InvalidArgument, QuantizationFailure, WkbAccuracyWarning
from .rotated import TRANSFER_A, TRANSFER_B, SpinConfig, lorentzian_weight, outer_turning_point, potential_v

GAUSS_NODES = 400
PHASE_SAMPLES = 2001
I12_SAMPLES = 20001
TURNING_POINT_RTOL = 0.05
ETA_MISMATCH_TOL = 1e-2

_X, _W = leggauss(GAUSS_NODES)
_THETA = 0.5 * math.pi * _X
_WEIGHT = 0.5 * math.pi * _W


@dataclass(frozen=True, eq=False)
class WkbLevel:
    n: int
    spin: SpinConfig | None
    epsilon: float
    turning_points: tuple[float, float]
    y: np.ndarray = field(repr=False)
    phase: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)

    def energy(self, hbar_omega0=1.0):
        return 0.5 * hbar_omega0 * (self.epsilon - 1.0)


@dataclass(frozen=True)
class I12WkbResult:
    value: float
    eta_mismatch: float
    turning_points: tuple[float, float]

    @property
    def magnitude(self):
        return abs(self.value)


def action(potential, eps):
    """int sqrt(eps - v) dy between the turning points of an even single well."""
    y_turn = outer_turning_point(potential, eps)
    if y_turn == 0.0:
        return 0.0
    y = y_turn * np.sin(_THETA)
    eta = np.sqrt(np.maximum(eps - potential(y), 0.0))
    return float(np.sum(_WEIGHT * eta * y_turn * np.cos(_THETA)))


def _check_single_well(potential, y_max):
    y = np.linspace(0.0, y_max, 4001)
    v = potential(y)
    if np.any(np.diff(v) <= 0):
        raise QuantizationFailure("potential is not a single well; multi-well quantization is unsupported")


def quantize_potential(potential, n, spin=None, samples=PHASE_SAMPLES):
    """WKB level ``n`` of an even, confining, single-well potential.

    ``potential`` must accept numpy arrays.
    """
    target = (n + 0.5) * math.pi
    v0 = float(potential(0.0))
    lo = v0
    span = 2.0 * n + 4.0
    hi = v0 + span
    for _ in range(60):
        if action(potential, hi) > target:
            break
        span *= 2.0
        hi = v0 + span
    else:
        raise QuantizationFailure(f"no bracket found for level {n}")
    _check_single_well(potential, outer_turning_point(potential, hi))
    try:
        eps = brentq(lambda e: action(potential, e) - target, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=200)
    except (ValueError, RuntimeError) as exc:
        raise QuantizationFailure(str(exc)) from exc
    y_turn = outer_turning_point(potential, eps)
    theta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, samples)
    y = y_turn * np.sin(theta)
    eta = np.sqrt(np.maximum(eps - potential(y), 0.0))
    phase = 0.25 * math.pi + cumulative_simpson(eta * y_turn * np.cos(theta), x=theta, initial=0.0)
    for a in (y, phase, eta):
        a.setflags(write=False)
    return WkbLevel(int(n), spin, float(eps), (-y_turn, y_turn), y, phase, eta)


def wkb_quantize(params, spin, n):
    """WKB level ``n`` (n >= 1) of the rotated-frame potential for ``spin``."""
    if n < 1:
        raise InvalidArgument("WKB levels require n >= 1")
    spin = SpinConfig.parse(spin)
    return quantize_potential(lambda y: potential_v(y, spin, params), n, spin)


def wkb_level_energy(params, spin, n):
    return wkb_quantize(params, spin, n).energy(params.hbar_omega0)


def _single_spin_potential(delta_e, u, m, hbar_omega0):
    return lambda y: y * y + (2 * m / hbar_omega0) * np.sqrt(delta_e ** 2 + 8 * u * u * np.asarray(y) ** 2)


def wkb_dressed_energy(delta_e, u_coupling, n, hbar_omega0=1.0):
    """Semiclassical dressed energy: level spacing between spin up and spin down."""
    if u_coupling == 0:
        return float(delta_e)
    up = quantize_potential(_single_spin_potential(delta_e, u_coupling, 0.5, hbar_omega0), n)
    down = quantize_potential(_single_spin_potential(delta_e, u_coupling, -0.5, hbar_omega0), n)
    return 0.5 * hbar_omega0 * (up.epsilon - down.epsilon)


def i12_wkb(params, n, delta_n, spin_a=TRANSFER_A, spin_b=TRANSFER_B, samples=I12_SAMPLES):
    """Semiclassical I12 keeping only the slowly varying phase difference.

    I12 ~ int cos(dphi) w(y) dy/eta / int dy/eta, with eta the momentum of
    the averaged potential and energy, and
    dphi(y) = int_0^y (eta_b - eta_a) dy' + delta_n pi / 2.
    """
    spin_a = SpinConfig.parse(spin_a)
    spin_b = SpinConfig.parse(spin_b)
    va = lambda y: potential_v(y, spin_a, params)
    vb = lambda y: potential_v(y, spin_b, params)
    la = wkb_quantize(params, spin_a, n)
    lb = wkb_quantize(params, spin_b, n + delta_n)
    ya, yb = la.turning_points[1], lb.turning_points[1]
    if abs(ya - yb) > TURNING_POINT_RTOL * max(ya, yb):
        raise IncompatibleLevels(f"turning points {ya:.6g} and {yb:.6g} differ by more than "
                                 f"{TURNING_POINT_RTOL:.0%}")
    eps_bar = 0.5 * (la.epsilon + lb.epsilon)
    v_bar = lambda y: 0.5 * (va(y) + vb(y))
    y_turn = outer_turning_point(v_bar, eps_bar)
    theta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, samples)
    y = y_turn * np.sin(theta)
    jac = y_turn * np.cos(theta)
    eta_a = np.sqrt(np.maximum(la.epsilon - va(y), 0.0))
    eta_b = np.sqrt(np.maximum(lb.epsilon - vb(y), 0.0))
    eta_bar = np.sqrt(np.maximum(eps_bar - v_bar(y), 0.0))
    # eta_b - eta_a written without cancellation
    diff = (lb.epsilon - la.epsilon - (vb(y) - va(y))) / np.where(eta_a + eta_b > 0, eta_a + eta_b, np.inf)
    phase = cumulative_simpson(diff * jac, x=theta, initial=0.0)
    phase -= phase[samples // 2]
    dphi = phase + delta_n * 0.5 * math.pi
    q = np.zeros_like(theta)
    inner = eta_bar > 0
    q[inner] = jac[inner] / eta_bar[inner]
    # dy/eta has a finite limit at the turning points in theta
    q[0], q[-1] = q[1], q[-2]
    num = simpson(np.cos(dphi) * lorentzian_weight(y, params) * q, x=theta)
    den = simpson(q, x=theta)
    core = np.abs(y) <= 0.95 * y_turn
    mismatch = float(np.max(np.abs(eta_a[core] - eta_b[core]) / eta_bar[core]))
    if mismatch > ETA_MISMATCH_TOL:
        warnings.warn(WkbAccuracyWarning(
            f"momenta of the two levels differ by {mismatch:.2e} relative"), stacklevel=2)
    return I12WkbResult(float(num / den), mismatch, (-y_turn, y_turn))
