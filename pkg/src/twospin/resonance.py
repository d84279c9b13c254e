"""Resonance conditions, exact anticrossing scans and their PT comparison."""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .eigen import REFINE_TOL, dense_eigen_oracle, eigenpairs_in_interval
from .errors import (BracketError, InvalidArgument, NoResonance, TrackingError, UnsupportedVariant)
from .model import (SPIN_ORDER, FockWindow, ModelParams, Variant, assemble_hamiltonian, build_basis,
                    default_halfwidth, spin_characters, state_parity)
from .parallel import ordered_map
from .rotated import (SpinConfig, _method, dressed_energy, i12_numeric,
                      pt_splitting_energy_exchange, pt_splitting_excitation_transfer)
from .wkb import wkb_level_energy

RESIDUAL_TOL = 1e-9
G_MAX = 1e3
GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))
MAX_REFINE_ITER = 60
ISOLATION_FACTOR = 20.0


class ResonanceKind(str, enum.Enum):
    ENERGY_EXCHANGE = "energy_exchange"
    EXCITATION_TRANSFER = "excitation_transfer"


@dataclass(frozen=True)
class ResonancePoint:
    g1: float
    g2: float
    delta_n: int
    kind: ResonanceKind
    residual: float
    method: str = "harmonic"
    n0: int | None = None

    def as_dict(self):
        d = dataclasses.asdict(self)
        d["kind"] = self.kind.value
        return d


# resonance conditions

def _find_upper_bracket(f, g_start=1.0):
    g = g_start
    while f(g) <= 0:
        g *= 2.0
        if g > G_MAX:
            raise NoResonance("resonance condition has no root below g = 1e3")
    return g


def _root(f, lo, hi):
    return brentq(f, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=300)


def _transfer_defect_wkb(params, n0, delta_n):
    """E(n0, -1/2, +1/2) - E(n0 + delta_n, +1/2, -1/2) with WKB levels."""
    a = wkb_level_energy(params, SpinConfig(-0.5, 0.5), n0)
    b = wkb_level_energy(params, SpinConfig(0.5, -0.5), n0 + delta_n)
    return a - b


def solve_resonance_g2(g1, delta_n, params, n0, method="harmonic"):
    """g2 on the excitation-transfer resonance DE2(g2) - DE1(g1) = delta_n hw0.

    ``method='wkb'`` replaces the dressed-energy balance by equality of the
    two semiclassical level energies, which includes the n dependence of the
    dressing.
    """
    if delta_n % 2:
        raise InvalidArgument("excitation transfer needs an even delta_n")
    method = _method(method)
    hw = params.hbar_omega0
    de1 = dressed_energy(params.delta_e1, g1 * params.delta_e1 / math.sqrt(n0), n0, "harmonic", hw)
    if method == "harmonic":
        def f(g2):
            u2 = g2 * params.delta_e2 / math.sqrt(n0)
            return dressed_energy(params.delta_e2, u2, n0, "harmonic", hw) - de1 - delta_n * hw
    else:
        base = params.with_g(n0, g1=g1)

        def f(g2):
            return _transfer_defect_wkb(base.with_g(n0, g2=g2), n0, delta_n)
    f0 = f(0.0)
    if f0 > 0:
        raise NoResonance(
            f"no g2 >= 0 satisfies the resonance: DE2 already exceeds DE1(g1) + delta_n hw0 at g2 = 0")
    g2 = 0.0 if f0 == 0 else _root(f, 0.0, _find_upper_bracket(f))
    residual = abs(f(g2))
    return ResonancePoint(float(g1), float(g2), int(delta_n), ResonanceKind.EXCITATION_TRANSFER,
                          float(residual), method, int(n0))


def resonance_exists(g1, delta_n, params, n0):
    """Existence window: a g2 >= 0 root exists iff DE1(g1) + delta_n hw0 >= DE2."""
    de1 = dressed_energy(params.delta_e1, g1 * params.delta_e1 / math.sqrt(n0), n0,
                         "harmonic", params.hbar_omega0)
    return de1 + delta_n * params.hbar_omega0 >= params.delta_e2


def _exchange_defect_wkb(params, n0, delta_n, which, spectator):
    up = SpinConfig(0.5, spectator) if which == 1 else SpinConfig(spectator, 0.5)
    return wkb_level_energy(params, up, n0) - wkb_level_energy(params, up.flipped(which), n0 + delta_n)


def solve_energy_exchange_g(delta_n, which_spin, params, n0, method="harmonic", spectator=-0.5):
    """g_j on the energy-exchange resonance DE_j(g_j) = delta_n hw0 (delta_n odd).

    With ``method='wkb'`` the condition is equality of the WKB levels
    E(n0, up) = E(n0 + delta_n, down) for spin ``which_spin``; the other spin
    sits at ``spectator`` with the coupling taken from ``params``.
    """
    if delta_n % 2 == 0:
        raise InvalidArgument("energy exchange needs an odd delta_n")
    if which_spin not in (1, 2):
        raise InvalidArgument("which_spin must be 1 or 2")
    method = _method(method)
    hw = params.hbar_omega0
    de = params.delta_e(which_spin)
    if delta_n * hw < de:
        raise NoResonance(f"delta_n hw0 = {delta_n * hw:g} is below the bare DE = {de:g}")
    if method == "harmonic":
        def f(g):
            return dressed_energy(de, g * de / math.sqrt(n0), n0, "harmonic", hw) - delta_n * hw
    else:
        def f(g):
            p = params.with_g(n0, **{f"g{which_spin}": g})
            return _exchange_defect_wkb(p, n0, delta_n, which_spin, spectator)
    f0 = f(0.0)
    if f0 > 0:
        raise NoResonance("resonance condition has no root for g >= 0")
    g = 0.0 if f0 == 0 else _root(f, 0.0, _find_upper_bracket(f))
    other = params.g2(n0) if which_spin == 1 else params.g1(n0)
    g1, g2 = (g, other) if which_spin == 1 else (other, g)
    return ResonancePoint(float(g1), float(g2), int(delta_n), ResonanceKind.ENERGY_EXCHANGE,
                          float(abs(f(g))), method, int(n0))


def resonance_map(params, n0, g1_grid, delta_n_list, method="harmonic", jobs=1):
    """g2(g1) curves for each even delta_n; None where no root exists."""
    g1_grid = [float(g) for g in g1_grid]
    out = {}
    for dn in delta_n_list:
        if dn % 2:
            raise InvalidArgument("resonance_map takes even delta_n values")
        out[int(dn)] = ordered_map(_map_point, [(g1, int(dn), params, n0, method) for g1 in g1_grid], jobs)
    return out


def _map_point(args):
    g1, dn, params, n0, method = args
    try:
        return solve_resonance_g2(g1, dn, params, n0, method)
    except NoResonance:
        return None


# exact anticrossing scans

@dataclass(frozen=True)
class ScanProblem:
    """Which anticrossing to scan.

    ``kind`` selects the target pair: excitation transfer couples
    (n0, -1/2, +1/2) with (n0 + delta_n, +1/2, -1/2); energy exchange of spin
    ``which_spin`` couples (n0, up) with (n0 + delta_n, down), the other spin
    held at ``spectator``.  ``params`` supplies DE1, DE2 and the fixed
    coupling; ``control`` names the swept coupling.
    """

    params: ModelParams
    n0: int
    delta_n: int
    control: str = "g2"
    kind: ResonanceKind = ResonanceKind.EXCITATION_TRANSFER
    which_spin: int = 1
    spectator: float = -0.5
    halfwidth: int | None = None

    def __post_init__(self):
        if self.params.variant is not Variant.STANDARD:
            raise UnsupportedVariant("exact scans need the standard variant")
        if self.control not in ("g1", "g2"):
            raise InvalidArgument("control must be 'g1' or 'g2'")
        even = self.delta_n % 2 == 0
        if even != (self.kind is ResonanceKind.EXCITATION_TRANSFER):
            raise InvalidArgument("delta_n parity does not match the resonance kind")
        if self.n0 < 1 or self.n0 + self.delta_n < 1:
            raise InvalidArgument("both target levels need n >= 1")

    def params_at(self, x):
        return self.params.with_g(self.n0, **{self.control: float(x)})

    def targets(self):
        if self.kind is ResonanceKind.EXCITATION_TRANSFER:
            return (self.n0, -0.5, 0.5), (self.n0 + self.delta_n, 0.5, -0.5)
        up = (0.5, self.spectator) if self.which_spin == 1 else (self.spectator, 0.5)
        down = (-0.5, self.spectator) if self.which_spin == 1 else (self.spectator, -0.5)
        return (self.n0, *up), (self.n0 + self.delta_n, *down)

    def predicted_energies(self, x):
        p = self.params_at(x)
        (na, a1, a2), (nb, b1, b2) = self.targets()
        return (wkb_level_energy(p, SpinConfig(a1, a2), na), wkb_level_energy(p, SpinConfig(b1, b2), nb))

    def detuning(self, x):
        ea, eb = self.predicted_energies(x)
        return ea - eb

    def g_max(self, x):
        p = self.params_at(x)
        return max(p.g1(self.n0), p.g2(self.n0))

    def window(self, x, halfwidth=None):
        hw = halfwidth or self.halfwidth or default_halfwidth(self.n0, self.g_max(x))
        return FockWindow.around(self.n0 + self.delta_n // 2, hw)

    def pt_prediction(self, x):
        p = self.params_at(x)
        if self.kind is ResonanceKind.EXCITATION_TRANSFER:
            return pt_splitting_excitation_transfer(p, self.n0, self.delta_n,
                                                    i12=i12_numeric(p, self.n0, self.delta_n).value)
        return pt_splitting_energy_exchange(p, self.n0, self.delta_n, self.which_spin, self.spectator)


@dataclass(frozen=True)
class GapPoint:
    x: float
    gap: float
    energies: tuple[float, float]
    indices: tuple[int, int]
    sz1: tuple[float, float]
    sz2: tuple[float, float]
    weight_a: tuple[float, float]
    weight_b: tuple[float, float]
    window: FockWindow

    @property
    def character_difference(self):
        """w_A - w_B for the lower and the upper tracked state."""
        return tuple(a - b for a, b in zip(self.weight_a, self.weight_b))


def _config_index(m1, m2):
    return SPIN_ORDER.index((float(m1), float(m2)))


def rotated_weights(basis, vectors, params):
    """Probability of each rotated-frame spin configuration, shape (ncols, 4).

    The state is carried to position space, and at every y each spin is
    projected onto the local eigenvectors of DE_j s_z + sqrt(2) U_j y sigma_x.
    Columns follow SPIN_ORDER.
    """
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    nvec = vectors.shape[1]
    w = basis.window
    coeffs = np.zeros((w.size, 4 * nvec))
    spin_idx = np.array([_config_index(a, b) for a, b in zip(basis.m1, basis.m2)])
    rows = basis.n - w.n_min
    for v in range(nvec):
        coeffs[rows, spin_idx * nvec + v] = vectors[:, v]
    k_top = math.sqrt(2 * w.n_max + 1)
    h = 2 * math.pi / (8 * k_top)
    y_max = k_top + 8.0
    y = np.arange(-y_max, y_max + h / 2, h)
    amp = _kernels.position_amplitudes(w.n_min, coeffs, y).reshape(len(y), 2, 2, nvec)
    local = []
    for de, u in ((params.delta_e1, params.u1), (params.delta_e2, params.u2)):
        lam = 0.5 * np.arctan2(math.sqrt(8) * u * y, de)
        c, s = np.cos(lam), np.sin(lam)
        # rows: local down, local up; columns: lab down, lab up
        local.append(np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2))
    rot = np.einsum("yai,ybj,yijv->yabv", local[0], local[1], amp)
    weights = (rot ** 2).sum(axis=0).reshape(4, nvec).T
    return weights / weights.sum(axis=1, keepdims=True)


def evaluate_gap(problem, x, halfwidth=None, solver="band", abs_tol=None, candidates=4):
    """Exact gap of the tracked pair at control value ``x``."""
    p = problem.params_at(x)
    (na, a1, a2), (nb, b1, b2) = problem.targets()
    ea, eb = problem.predicted_energies(x)
    e_star = 0.5 * (ea + eb)
    window = problem.window(x, halfwidth)
    if not (window.contains(na, 10) and window.contains(nb, 10)):
        raise InvalidArgument("Fock window does not cover the target levels")
    basis = build_basis(window, parity=state_parity(na, a1, a2))
    offset = problem.n0 * p.hbar_omega0
    band = assemble_hamiltonian(p, basis, energy_offset=offset)
    lo = e_star - offset - 3 * p.hbar_omega0
    hi = e_star - offset + 3 * p.hbar_omega0
    if solver == "dense":
        full = dense_eigen_oracle(band.to_dense())
        sel = (full.values > lo) & (full.values <= hi)
        values, vectors = full.values[sel], full.vectors[:, sel]
    else:
        res = eigenpairs_in_interval(band, lo, hi, abs_tol=abs_tol, vectors=True)
        values, vectors = res.values, res.vectors
    if len(values) < 2:
        raise TrackingError("fewer than two eigenvalues near the predicted degeneracy",
                            {"x": x, "e_star": e_star, "count": int(len(values))})
    near = np.argsort(np.abs(values - (e_star - offset)))[:candidates]
    weights = rotated_weights(basis, vectors[:, near], p)
    ia, ib = _config_index(a1, a2), _config_index(b1, b2)
    overlap = weights[:, ia] + weights[:, ib]
    good = [k for k in range(len(near)) if overlap[k] > 0.5]
    if len(good) < 2:
        raise TrackingError("lost the target pair: rotated-frame overlap below 0.5",
                            {"x": x, "e_star": e_star,
                             "energies": (values[near] + offset).tolist(), "overlap": overlap.tolist()})
    pick = sorted(good[:2], key=lambda k: values[near[k]])
    idx = [int(near[k]) for k in pick]
    sz1, sz2 = spin_characters(basis, vectors[:, idx])
    return GapPoint(float(x), float(abs(values[idx[1]] - values[idx[0]])),
                    (float(values[idx[0]] + offset), float(values[idx[1]] + offset)),
                    (idx[0], idx[1]), tuple(float(v) for v in sz1), tuple(float(v) for v in sz2),
                    tuple(float(weights[k, ia]) for k in pick), tuple(float(weights[k, ib]) for k in pick),
                    window)


def refine_minimum(f, xs, fs, max_iter=MAX_REFINE_ITER, xtol=1e-4, ftol=1e-6):
    """Golden-section search with parabolic steps on f^2 around the smallest sample.

    ``f`` must be non-negative (a gap).  Near an anticrossing gap^2 is
    quadratic in the control, so the parabolic step lands on the minimum
    almost immediately; golden-section steps guarantee progress otherwise.
    Returns (x*, f(x*), history) with history the best value after each
    evaluation (non-increasing).
    """
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    if len(xs) < 3:
        raise BracketError("need at least three samples")
    order = np.argsort(xs)
    xs, fs = xs[order], fs[order]
    i = int(np.argmin(fs))
    if np.ptp(fs) <= 1e-15 * max(np.abs(fs).max(), 1e-300):
        raise BracketError("flat scan: no interior minimum")
    if i == 0 or i == len(xs) - 1:
        raise BracketError(f"minimum at scan boundary x = {xs[i]:.8g}")
    a, b, c = xs[i - 1], xs[i], xs[i + 1]
    qa, qb, qc = fs[i - 1] ** 2, fs[i] ** 2, fs[i + 1] ** 2
    history = [float(fs[i])]
    last_step = None
    for _ in range(max_iter):
        den = (b - a) * (qb - qc) - (b - c) * (qb - qa)
        x = None
        if den != 0.0:
            x = b - 0.5 * ((b - a) ** 2 * (qb - qc) - (b - c) ** 2 * (qb - qa)) / den
            tiny = 1e-12 * max(abs(b), 1e-12)
            if not (a + tiny < x < c - tiny) or (last_step is not None and abs(x - b) > 0.5 * abs(last_step)):
                x = None
        if x is None:
            x = b + GOLDEN * (c - b) if (c - b) > (b - a) else b - GOLDEN * (b - a)
        fx = float(f(x))
        qx = fx * fx
        step = x - b
        if qx < qb:
            prev = math.sqrt(qb)
            if x > b:
                a, qa = b, qb
            else:
                c, qc = b, qb
            b, qb = x, qx
            gain = (prev - fx) / max(prev, 1e-300)
        else:
            if x > b:
                c, qc = x, qx
            else:
                a, qa = x, qx
            gain = 0.0
        history.append(float(math.sqrt(qb)))
        last_step = step
        small_step = abs(step) <= xtol * max(abs(b), 1e-12)
        if (small_step and gain < ftol) or (c - a) <= 1e-13 * max(abs(b), 1e-12):
            break
    return float(b), float(math.sqrt(qb)), history


@dataclass
class SplittingScan:
    problem: ScanProblem
    control: str
    grid: np.ndarray
    points: list
    resonance_estimate: float
    minimum: tuple[float, float] | None = None
    minimum_point: GapPoint | None = None
    history: list = field(default_factory=list)
    pt_prediction: float | None = None
    disrupted: bool = False
    window_converged: bool | None = None

    @property
    def gaps(self):
        return np.array([pt.gap for pt in self.points])

    @property
    def ratio(self):
        if self.minimum is None or not self.pt_prediction:
            return None
        return self.minimum[1] / self.pt_prediction

    def to_csv(self, path_or_file):
        rows = ["control,gap,index_lo,index_hi,sz1_lo,sz1_hi,sz2_lo,sz2_hi,wa_lo,wa_hi,flags"]
        flag = "disrupted" if self.disrupted else ""
        for pt in self.points:
            rows.append(",".join([_fmt(pt.x), _fmt(pt.gap), str(pt.indices[0]), str(pt.indices[1]),
                                  *map(_fmt, pt.sz1), *map(_fmt, pt.sz2), *map(_fmt, pt.weight_a), flag]))
        text = "\n".join(rows) + "\n"
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w", newline="") as fh:
                fh.write(text)

    def summary(self):
        pr = self.problem
        x_min, gap = self.minimum if self.minimum else (None, None)
        g = {pr.control: x_min, "g1" if pr.control == "g2" else "g2":
             pr.params.g1(pr.n0) if pr.control == "g2" else pr.params.g2(pr.n0)}
        return {
            "resonance": {"g1": _num(g["g1"]), "g2": _num(g["g2"]), "delta_n": pr.delta_n,
                          "kind": pr.kind.value, "n0": pr.n0},
            "delta_e_min": _num(gap),
            "pt_prediction": _num(self.pt_prediction),
            "ratio": _num(self.ratio),
            "disrupted": self.disrupted,
            "window_converged": self.window_converged,
        }

    def to_json(self):
        return json.dumps(self.summary(), sort_keys=True, indent=2) + "\n"


def _fmt(x):
    return f"{x:.8e}"


def _num(x):
    return None if x is None else float(f"{x:.8e}")


def _resonance_control(problem):
    """Control value where the WKB levels of the two target states coincide."""
    f = problem.detuning
    sign = np.sign(f(0.0))
    lo, hi = 0.0, 0.05
    while np.sign(f(hi)) == sign:
        lo, hi = hi, hi * 1.6
        if hi > 20:
            raise NoResonance("no resonance along the control direction")
    return _root(f, lo, hi)


def _scan_range(problem, x0, span):
    d = max(1e-6, 1e-5 * abs(x0))
    slope = (problem.detuning(x0 + d) - problem.detuning(max(x0 - d, 0.0))) / (x0 + d - max(x0 - d, 0.0))
    if slope == 0:
        raise BracketError("detuning does not depend on the control parameter")
    width = span / abs(slope)
    return max(x0 - width, 0.0), x0 + width


def isolation_check(problem, x, split):
    """True when an odd-delta_n energy-exchange resonance is within 20 splittings."""
    p = problem.params_at(x)
    hw = p.hbar_omega0
    for which in (1, 2):
        de = dressed_energy(p.delta_e(which), p.u(which), problem.n0, "harmonic", hw) / hw
        odd = 2 * math.floor((de - 1) / 2) + 1
        for k in (odd, odd + 2):
            if abs(de - k) * hw < ISOLATION_FACTOR * split:
                return True
    return False


def splitting_scan(problem, span=0.05, points=9, refine=True, jobs=1, solver="band",
                   check_window=True):
    """Exact gaps across the anticrossing and the refined minimum.

    The control grid covers predicted detunings of +-``span`` hw0 around the
    WKB resonance estimate.
    """
    x0 = _resonance_control(problem)
    lo, hi = _scan_range(problem, x0, span * problem.params.hbar_omega0)
    grid = np.linspace(lo, hi, points)
    pts = ordered_map(_gap_job, [(problem, float(x), solver) for x in grid], jobs)
    scan = SplittingScan(problem, problem.control, grid, pts, float(x0))
    if refine:
        _refine_scan(scan, solver, check_window)
    return scan


def _gap_job(args):
    problem, x, solver = args
    return evaluate_gap(problem, x, solver=solver)


def _refine_scan(scan, solver, check_window):
    pr = scan.problem
    cache = {}

    def f(x):
        pt = evaluate_gap(pr, x, solver=solver, abs_tol=REFINE_TOL)
        cache[x] = pt
        return pt.gap

    x_min, gap, hist = refine_minimum(f, scan.grid, scan.gaps)
    point = cache.get(x_min) or evaluate_gap(pr, x_min, solver=solver, abs_tol=REFINE_TOL)
    converged = None
    if check_window:
        converged = False
        halfwidth = pr.halfwidth or default_halfwidth(pr.n0, pr.g_max(x_min))
        for _ in range(4):
            grown = evaluate_gap(pr, x_min, halfwidth=int(math.ceil(1.25 * halfwidth)),
                                 solver=solver, abs_tol=REFINE_TOL)
            shift = max(abs(a - b) for a, b in zip(grown.energies, point.energies))
            if shift < 1e-10 * pr.params.hbar_omega0:
                converged = True
                break
            halfwidth *= 2
            point = evaluate_gap(pr, x_min, halfwidth=halfwidth, solver=solver, abs_tol=REFINE_TOL)
        gap = point.gap
    scan.minimum = (x_min, gap)
    scan.minimum_point = point
    scan.history = hist
    scan.window_converged = converged
    scan.pt_prediction = pr.pt_prediction(x_min)
    if pr.kind is ResonanceKind.EXCITATION_TRANSFER:
        scan.disrupted = isolation_check(pr, x_min, scan.pt_prediction)


def min_gap(scan):
    """(control*, gap_min) of a scan, refining it first if needed."""
    if scan.minimum is None:
        _refine_scan(scan, "band", check_window=False)
    return scan.minimum


# g2 and |I12| along one excitation-transfer resonance line

TABLE1_G1 = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class Table1Row:
    g1: float
    g2: float
    i12: float
    i12_wkb: float


def table1_row(g1, params, n0, delta_n=-2, method="harmonic"):
    from .wkb import i12_wkb

    point = solve_resonance_g2(g1, delta_n, params, n0, method)
    p = params.with_g(n0, g1=g1, g2=point.g2)
    return Table1Row(float(g1), point.g2, abs(i12_numeric(p, n0, delta_n).value),
                     abs(i12_wkb(p, n0, delta_n).value))


def table1(params, n0=9600, g1_values=TABLE1_G1, delta_n=-2, method="harmonic", jobs=1):
    return ordered_map(_table1_job, [(g1, params, n0, delta_n, method) for g1 in g1_values], jobs)


def _table1_job(args):
    return table1_row(*args)


def table1_csv(rows):
    lines = ["g1,g2,i12,i12_wkb"]
    lines += [",".join(_fmt(v) for v in (r.g1, r.g2, r.i12, r.i12_wkb)) for r in rows]
    return "\n".join(lines) + "\n"
