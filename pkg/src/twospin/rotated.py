"""Rotated-frame oscillator problem and degenerate perturbation theory.

After the spin rotation each product state obeys a one-dimensional
Schroedinger equation -u'' + v(y) u = eps u in the oscillator coordinate y,
with eps = 2E/hbar_omega0 + 1.  Levels are obtained on a uniform grid with
second-order finite differences; the eigenvalue with index n is picked out
by Sturm bisection, so no shift guess is needed even for n ~ 1e4.
"""

from __future__ import annotations

import csv
import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from . import _kernels
from .errors import (CapacityError, GridMismatch, InvalidArgument, NoConvergence,
                     OffResonanceWarning, ResolutionError, SelectionRuleError)
from .model import ModelParams

MIN_POINTS_PER_WAVELENGTH = 12
DEFAULT_POINTS_PER_WAVELENGTH = 48
TAIL_MARGIN = 6.0


@dataclass(frozen=True)
class SpinConfig:
    m1: float
    m2: float

    def __post_init__(self):
        for m in (self.m1, self.m2):
            if m not in (-0.5, 0.5):
                raise InvalidArgument(f"spin projections must be +-1/2, got {m!r}")

    @classmethod
    def parse(cls, text):
        """'+-' style or a pair of numbers."""
        if isinstance(text, SpinConfig):
            return text
        if isinstance(text, str):
            if len(text) != 2 or set(text) - {"+", "-"}:
                raise InvalidArgument(f"spin string must look like '+-', got {text!r}")
            return cls(*(0.5 if ch == "+" else -0.5 for ch in text))
        m1, m2 = text
        return cls(float(m1), float(m2))

    def flipped(self, which):
        if which == 1:
            return SpinConfig(-self.m1, self.m2)
        if which == 2:
            return SpinConfig(self.m1, -self.m2)
        raise InvalidArgument("which must be 1 or 2")

    def label(self):
        return "".join("+" if m > 0 else "-" for m in (self.m1, self.m2))

    def as_tuple(self):
        return (self.m1, self.m2)


TRANSFER_A = SpinConfig(-0.5, 0.5)
TRANSFER_B = SpinConfig(0.5, -0.5)


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric grid y_i = (i - M) h, i = 0..2M."""

    h: float
    half_points: int

    @property
    def size(self):
        return 2 * self.half_points + 1

    @property
    def extent(self):
        return self.h * self.half_points

    @property
    def y(self):
        return self.h * np.arange(-self.half_points, self.half_points + 1, dtype=float)

    def refined(self):
        return Grid(self.h / 2, 2 * self.half_points)


@dataclass(frozen=True, eq=False)
class OscillatorLevel:
    n: int
    spin: SpinConfig
    epsilon: float
    grid: Grid
    u: np.ndarray = field(repr=False)

    def energy(self, hbar_omega0=1.0):
        return 0.5 * hbar_omega0 * (self.epsilon - 1.0)

    def nodes(self):
        return count_nodes(self.u)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["y", "u"])
            for y, u in zip(self.grid.y, self.u):
                w.writerow([f"{y:.8e}", f"{u:.8e}"])


@dataclass(frozen=True)
class DressedEnergies:
    de1: float
    de2: float
    g1: float
    g2: float
    method: str


@dataclass(frozen=True)
class I12Result:
    value: float
    coarse: float
    fine: float
    epsilon_a: float
    epsilon_b: float
    grid: Grid
    extrapolated: bool

    @property
    def magnitude(self):
        return abs(self.value)


def potential_v(y, spin, params):
    """Normalized rotated-frame potential."""
    spin = SpinConfig.parse(spin)
    y = np.asarray(y, dtype=float)
    hw = params.hbar_omega0
    # both dressing terms carry 8 U_j^2 y^2
    return (y * y
            + (2 * spin.m1 / hw) * np.sqrt(params.delta_e1 ** 2 + 8 * params.u1 ** 2 * y * y)
            + (2 * spin.m2 / hw) * np.sqrt(params.delta_e2 ** 2 + 8 * params.u2 ** 2 * y * y))


def potential_slope(y, spin, params):
    spin = SpinConfig.parse(spin)
    y = np.asarray(y, dtype=float)
    hw = params.hbar_omega0
    out = 2 * y
    for m, de, u in ((spin.m1, params.delta_e1, params.u1), (spin.m2, params.delta_e2, params.u2)):
        out = out + (2 * m / hw) * 8 * u * u * y / np.sqrt(de * de + 8 * u * u * y * y)
    return out


def outer_turning_point(potential, eps):
    """Largest y > 0 with v(y) = eps for an even, confining potential."""
    f = lambda y: float(eps - potential(y))
    if f(0.0) <= 0:
        return 0.0
    hi = math.sqrt(max(f(0.0), 1.0)) + 1.0
    while f(hi) > 0:
        hi *= 2.0
    return brentq(f, 0.0, hi, xtol=1e-14, rtol=1e-15)


def _estimate_epsilon(params, spin, n):
    from .wkb import quantize_potential

    return quantize_potential(lambda y: potential_v(y, spin, params), n).epsilon


def make_grid(params, levels, points_per_wavelength=DEFAULT_POINTS_PER_WAVELENGTH):
    """Common grid able to hold every (spin, n) in ``levels``.

    The extent reaches TAIL_MARGIN plus eight Airy lengths past the outermost
    turning point; the spacing resolves the shortest local wavelength with
    the requested number of points.
    """
    if points_per_wavelength < MIN_POINTS_PER_WAVELENGTH:
        raise ResolutionError(
            f"{points_per_wavelength} points per wavelength is below {MIN_POINTS_PER_WAVELENGTH}")
    extent = 0.0
    kmax = 0.0
    for spin, n in levels:
        spin = SpinConfig.parse(spin)
        if n < 0:
            raise InvalidArgument("level index must be >= 0")
        f = lambda y, s=spin: float(potential_v(y, s, params))
        eps = _estimate_epsilon(params, spin, n)
        turn = outer_turning_point(f, eps)
        airy = max(float(potential_slope(turn, spin, params)), 1e-3) ** (-1.0 / 3.0)
        extent = max(extent, turn + TAIL_MARGIN + 8.0 * airy)
        kmax = max(kmax, math.sqrt(max(eps - f(0.0), 1.0)))
    h = 2 * math.pi / (points_per_wavelength * kmax)
    return Grid(h, int(math.ceil(extent / h)))


def grid_points_per_wavelength(grid, params, spin, eps):
    vmin = float(np.min(potential_v(grid.y, spin, params)))
    k = math.sqrt(max(eps - vmin, 1e-300))
    return 2 * math.pi / (k * grid.h)


def count_nodes(u, rel_floor=1e-8):
    """Sign changes of ``u`` ignoring values in the numerically-zero tails."""
    big = np.abs(u) > rel_floor * np.abs(u).max()
    s = np.sign(u[big])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _fix_sign(u):
    big = np.nonzero(np.abs(u) > 1e-3 * np.abs(u).max())[0]
    return -u if u[big[0]] < 0 else u


def solve_h0_level(params, spin, n, grid=None, points_per_wavelength=DEFAULT_POINTS_PER_WAVELENGTH):
    """Eigenpair number ``n`` of -d^2/dy^2 + v(y) on a uniform grid.

    The returned u is normalized to sum(u^2) h = 1 and its first significant
    lobe is positive.
    """
    spin = SpinConfig.parse(spin)
    n = int(n)
    if n < 0:
        raise InvalidArgument("n must be >= 0")
    if grid is None:
        grid = make_grid(params, [(spin, n)], points_per_wavelength)
    if n >= grid.size // 4:
        raise CapacityError(f"level {n} does not fit on a grid of {grid.size} points")
    y = grid.y
    h = grid.h
    v = potential_v(y, spin, params)
    d = 2.0 / (h * h) + v
    off = -1.0 / (h * h)
    e2 = np.full(grid.size - 1, off * off)
    pivmin = np.finfo(float).tiny * max(1.0, off * off)
    lo, hi = _kernels.bisect_tridiagonal_index(d, e2, n, float(v.min()) - 1.0,
                                               float(d.max()) + 2.0 / (h * h), pivmin)
    lam = 0.5 * (lo + hi)
    eps_guess = lam
    ppw = grid_points_per_wavelength(grid, params, spin, eps_guess)
    if ppw < MIN_POINTS_PER_WAVELENGTH:
        raise ResolutionError(f"grid resolves only {ppw:.1f} points per wavelength at eps={eps_guess:.6g}")
    turn = outer_turning_point(lambda t: float(potential_v(t, spin, params)), eps_guess)
    if turn > grid.extent - 2.0:
        raise CapacityError(f"turning point {turn:.4g} is too close to the grid edge {grid.extent:.4g}")

    ab = np.empty((3, grid.size))
    ab[0] = off
    ab[2] = off
    ab[1] = d - lam
    x = np.random.default_rng(n).uniform(-1, 1, grid.size)
    for it in range(6):
        x_new = scipy.linalg.solve_banded((1, 1), ab, x, check_finite=False)
        nrm = np.linalg.norm(x_new)
        if not np.isfinite(nrm) or nrm == 0.0:
            raise NoConvergence("inverse iteration failed for the 1-D level")
        x_new /= nrm
        change = min(np.linalg.norm(x_new - x), np.linalg.norm(x_new + x))
        x = x_new
        if it >= 1 and change < 1e-12:
            break
    tx = d * x
    tx[1:] += off * x[:-1]
    tx[:-1] += off * x[1:]
    eps = float(x @ tx)
    u = _fix_sign(x / math.sqrt(h))
    nodes = count_nodes(u)
    if nodes != n:
        raise ResolutionError(f"level {n} has {nodes} nodes; refine the grid")
    u.setflags(write=False)
    return OscillatorLevel(n, spin, eps, grid, u)


def rayleigh_quotient(level, params):
    """<u|-d^2/dy^2 + v|u> on the level's own discretization."""
    u = level.u
    h = level.grid.h
    lap = np.empty_like(u)
    lap[1:-1] = u[2:] - 2 * u[1:-1] + u[:-2]
    lap[0] = u[1] - 2 * u[0]
    lap[-1] = u[-2] - 2 * u[-1]
    hu = -lap / (h * h) + potential_v(level.grid.y, level.spin, params) * u
    return float(h * (u @ hu) / (h * (u @ u)))


def richardson(coarse, fine):
    """Second-order extrapolation from spacings h and h/2."""
    return (4.0 * fine - coarse) / 3.0


def solve_levels(params, specs, points_per_wavelength=DEFAULT_POINTS_PER_WAVELENGTH, grid=None):
    """Several levels on one common grid; ``specs`` is a list of (spin, n)."""
    specs = [(SpinConfig.parse(s), int(n)) for s, n in specs]
    if grid is None:
        grid = make_grid(params, specs, points_per_wavelength)
    return [solve_h0_level(params, s, n, grid) for s, n in specs]


def extrapolated_epsilon(params, spin, n, points_per_wavelength=DEFAULT_POINTS_PER_WAVELENGTH):
    grid = make_grid(params, [(spin, n)], points_per_wavelength)
    coarse = solve_h0_level(params, spin, n, grid).epsilon
    fine = solve_h0_level(params, spin, n, grid.refined()).epsilon
    return richardson(coarse, fine)


# dressed transition energies

@functools.lru_cache(maxsize=16)
def _harmonic_density(n):
    """(y, w) on y >= 0 with sum(w f(y)) ~ <n|f|n> for even f."""
    h = min(0.05, 0.5 / math.sqrt(2 * n + 2))
    y = np.arange(0.0, math.sqrt(2 * n + 1) + 12.0, h)
    w = _kernels.hermite_density(n, y) * (2 * h)
    w[0] *= 0.5
    w /= w.sum()
    w.setflags(write=False)
    y.setflags(write=False)
    return y, w


def harmonic_expectation(f, n):
    y, w = _harmonic_density(int(n))
    return float(w @ f(y))


def dressed_energy(delta_e, u_coupling, n, method="harmonic", hbar_omega0=1.0):
    """Dressed transition energy DeltaE(g) of one two-level system.

    ``harmonic``: DeltaE <n| sqrt(1 + 8 U^2 y^2 / DeltaE^2) |n> in the bare
    oscillator state.  ``wkb``: difference of the semiclassical levels with
    the spin up and down.
    """
    if n < 0:
        raise InvalidArgument("n must be >= 0")
    if delta_e <= 0:
        raise InvalidArgument("delta_e must be positive")
    if u_coupling == 0:
        return float(delta_e)
    method = _method(method)
    if method == "harmonic":
        a = 8.0 * u_coupling ** 2 / delta_e ** 2
        val = delta_e * harmonic_expectation(lambda y: np.sqrt(1.0 + a * y * y), n)
        return max(val, float(delta_e))
    from .wkb import wkb_dressed_energy

    return wkb_dressed_energy(delta_e, u_coupling, n, hbar_omega0)


def _method(method):
    m = str(getattr(method, "value", method)).lower()
    aliases = {"harmonic": "harmonic", "harmonicexpectation": "harmonic",
               "wkb": "wkb", "wkbselfconsistent": "wkb"}
    if m not in aliases:
        raise InvalidArgument(f"unknown dressed-energy method {method!r}")
    return aliases[m]


def dressed_energies(params, n, method="harmonic"):
    return DressedEnergies(
        dressed_energy(params.delta_e1, params.u1, n, method, params.hbar_omega0),
        dressed_energy(params.delta_e2, params.u2, n, method, params.hbar_omega0),
        params.g1(n), params.g2(n), _method(method))


# perturbation operators

def lorentzian_weight(y, params):
    y = np.asarray(y, dtype=float)
    return 1.0 / ((1 + 8 * params.u1 ** 2 * y * y / params.delta_e1 ** 2)
                  * (1 + 8 * params.u2 ** 2 * y * y / params.delta_e2 ** 2))


def _same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatch("levels live on different grids")


def overlap_i12(level_a, level_b, params):
    _same_grid(level_a, level_b)
    return float(level_a.grid.h * np.sum(level_a.u * lorentzian_weight(level_a.grid.y, params) * level_b.u))


def v12_element(level_a, level_b, params):
    """Spin-spin matrix element between the two excitation-transfer states."""
    if {level_a.spin, level_b.spin} != {TRANSFER_A, TRANSFER_B}:
        raise SelectionRuleError("v12 couples (-1/2, +1/2) with (+1/2, -1/2) only")
    # 2 hbar_omega0 g1 g2 / n, written without n
    pref = 2 * params.hbar_omega0 * params.u1 * params.u2 / (params.delta_e1 * params.delta_e2)
    return pref * overlap_i12(level_a, level_b, params)


def derivative4(u, h):
    """Fourth-order central first derivative (second order at the two edge points)."""
    du = np.empty_like(u)
    du[2:-2] = (u[:-4] - 8 * u[1:-3] + 8 * u[3:-1] - u[4:]) / (12 * h)
    du[1] = (u[2] - u[0]) / (2 * h)
    du[-2] = (u[-1] - u[-3]) / (2 * h)
    du[0] = u[1] / (2 * h)
    du[-1] = -u[-2] / (2 * h)
    return du


def first_derivative_weight(y, params, which):
    de = params.delta_e(which)
    u = params.u(which)
    return (math.sqrt(2) * u / de) / (1 + 8 * u * u * np.asarray(y, dtype=float) ** 2 / de ** 2)


def v1_element(level_a, level_b, params, which_spin=1):
    """Matrix element of the symmetrized operator f_j d/dy + d/dy f_j.

    Integrating the second term by parts gives
    (hbar_omega0/2) int f_j (u_a u_b' - u_a' u_b) dy, antisymmetric in a, b.
    """
    _same_grid(level_a, level_b)
    if level_b.spin != level_a.spin.flipped(which_spin):
        raise SelectionRuleError(f"states must differ by a flip of spin {which_spin} only")
    g = level_a.grid
    f = first_derivative_weight(g.y, params, which_spin)
    da = derivative4(level_a.u, g.h)
    db = derivative4(level_b.u, g.h)
    return 0.5 * params.hbar_omega0 * g.h * float(np.sum(f * (level_a.u * db - da * level_b.u)))


def w_potential(y, params, which_spin):
    de = params.delta_e(which_spin)
    u = params.u(which_spin)
    y = np.asarray(y, dtype=float)
    return params.hbar_omega0 * (u / de) ** 2 / (1 + 8 * u * u * y * y / de ** 2) ** 2


def degenerate_pair_gap(e0, e1, coupling):
    """Eigenvalue gap of [[e0, V], [V*, e1]]."""
    return float(math.hypot(e0 - e1, 2 * abs(coupling)))


def _transfer_levels(params, n, delta_n, grid):
    return solve_levels(params, [(TRANSFER_A, n), (TRANSFER_B, n + delta_n)], grid=grid)


def i12_numeric(params, n, delta_n, spin_a=TRANSFER_A, spin_b=TRANSFER_B,
                points_per_wavelength=DEFAULT_POINTS_PER_WAVELENGTH, extrapolate=True):
    """I12 between level n (spin_a) and level n + delta_n (spin_b).

    With ``extrapolate`` the grid is halved once and both I12 and the level
    energies are Richardson-extrapolated.
    """
    spin_a = SpinConfig.parse(spin_a)
    spin_b = SpinConfig.parse(spin_b)
    if n + delta_n < 0:
        raise InvalidArgument("n + delta_n must be >= 0")
    specs = [(spin_a, n), (spin_b, n + delta_n)]
    grid = make_grid(params, specs, points_per_wavelength)
    a, b = solve_levels(params, specs, grid=grid)
    coarse = overlap_i12(a, b, params)
    if not extrapolate:
        return I12Result(coarse, coarse, coarse, a.epsilon, b.epsilon, grid, False)
    fine_grid = grid.refined()
    a2, b2 = solve_levels(params, specs, grid=fine_grid)
    fine = overlap_i12(a2, b2, params)
    return I12Result(richardson(coarse, fine), coarse, fine,
                     richardson(a.epsilon, a2.epsilon), richardson(b.epsilon, b2.epsilon),
                     fine_grid, True)


def pt_splitting_excitation_transfer(params, n, delta_n, i12=None,
                                     points_per_wavelength=DEFAULT_POINTS_PER_WAVELENGTH):
    """Minimum level splitting 4 hbar_omega0 g1 g2 |I12| / n.

    Warns with OffResonanceWarning when the two rotated-frame levels are
    further apart than ten times the predicted splitting.
    """
    if delta_n % 2:
        raise InvalidArgument("excitation transfer needs an even delta_n")
    if params.u1 == 0 or params.u2 == 0:
        return 0.0
    res = i12_numeric(params, n, delta_n, points_per_wavelength=points_per_wavelength) if i12 is None else i12
    value = res.value if isinstance(res, I12Result) else float(res)
    split = 4 * params.hbar_omega0 * params.u1 * params.u2 / (params.delta_e1 * params.delta_e2) * abs(value)
    if isinstance(res, I12Result):
        detune = 0.5 * params.hbar_omega0 * abs(res.epsilon_a - res.epsilon_b)
        if detune > 10 * split:
            warnings.warn(OffResonanceWarning(
                f"levels are {detune:.3e} apart, more than 10x the splitting {split:.3e}"), stacklevel=2)
    return split


def pt_splitting_energy_exchange(params, n, delta_n, which_spin=1, spectator=-0.5,
                                 points_per_wavelength=DEFAULT_POINTS_PER_WAVELENGTH,
                                 extrapolate=True):
    """2 |<n, up|V_j|n + delta_n, down>| for spin ``which_spin``.

    The other spin is held at ``spectator``.
    """
    if delta_n % 2 == 0:
        raise InvalidArgument("energy exchange needs an odd delta_n")
    if params.u(which_spin) == 0:
        return 0.0
    up = SpinConfig(0.5, spectator) if which_spin == 1 else SpinConfig(spectator, 0.5)
    down = up.flipped(which_spin)
    specs = [(up, n), (down, n + delta_n)]
    grid = make_grid(params, specs, points_per_wavelength)
    a, b = solve_levels(params, specs, grid=grid)
    coarse = 2 * abs(v1_element(a, b, params, which_spin))
    if not extrapolate:
        return coarse
    a2, b2 = solve_levels(params, specs, grid=grid.refined())
    return richardson(coarse, 2 * abs(v1_element(a2, b2, params, which_spin)))
