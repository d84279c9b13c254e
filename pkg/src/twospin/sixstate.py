"""Six-state finite-basis model of indirect excitation transfer.

Basis (n, m1, m2):
  1 (n, +, -)    2 (n-1, -, -)   3 (n+1, -, -)
  4 (n-1, +, +)  5 (n+1, +, +)   6 (n, -, +)
Eliminating 2..5 leaves a 2x2 problem between 1 and 6 with the indirect
coupling V16(E) and self-energies Sigma1(E), Sigma6(E).

Energies are handled relative to n hw0 so that the n-proportional parts of
V16, which cancel to O(1) out of O(n), stay accurate for very large n.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, OffResonanceWarning, PoleError
from .model import ModelParams, Variant

STATES = ((0, 0.5, -0.5), (-1, -0.5, -0.5), (1, -0.5, -0.5), (-1, 0.5, 0.5), (1, 0.5, 0.5), (0, -0.5, 0.5))
POLE_TOL = 1e-12
FIXED_POINT_ITER = 50
FIXED_POINT_TOL = 1e-12


@dataclass(frozen=True)
class SixStateModel:
    params: ModelParams
    n: float

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgument("the six-state model needs n >= 1")

    @property
    def variant(self):
        return self.params.variant

    @property
    def gamma(self):
        return self.params.gamma

    @property
    def offsets(self):
        """H_j - n hw0 for the six basis states."""
        p = self.params
        return np.array([p.delta_e1 * m1 + p.delta_e2 * m2 + dn * p.hbar_omega0 for dn, m1, m2 in STATES])

    @property
    def h(self):
        return self.offsets + self.n * self.params.hbar_omega0

    def couplings(self):
        """Rows M[0, j] and columns M[j, 5] for j = 1..4 (intermediate states)."""
        p = self.params
        sn, sn1 = math.sqrt(self.n), math.sqrt(self.n + 1)
        if self.variant is Variant.CONJUGATE:
            to1 = np.array([p.u1 * sn, p.u1 * sn1, 1j * p.u2 * sn, -1j * p.u2 * sn1])
            to6 = np.array([1j * p.u2 * sn, -1j * p.u2 * sn1, p.u1 * sn, p.u1 * sn1])
        else:
            to1 = np.array([p.u1 * sn, p.u1 * sn1, p.u2 * sn, p.u2 * sn1], dtype=complex)
            to6 = np.array([p.u2 * sn, p.u2 * sn1, p.u1 * sn, p.u1 * sn1], dtype=complex)
        return to1, to6

    def matrix(self, relative=False):
        """The 6x6 coefficient matrix (complex; non-Hermitian for the lossy variant).

        The conjugate variant is the Hermitian completion of the coupling
        pattern of states 1..5.
        """
        to1, to6 = self.couplings()
        m = np.zeros((6, 6), dtype=complex)
        m[np.arange(6), np.arange(6)] = self.offsets if relative else self.h
        for j in range(4):
            m[0, j + 1] = to1[j]
            m[j + 1, 0] = np.conj(to1[j])
            m[j + 1, 5] = to6[j]
            m[5, j + 1] = np.conj(to6[j])
        if self.variant is Variant.LOSSY:
            m[1, 1] -= 0.5j * self.gamma
            m[2, 2] -= 0.5j * self.gamma
        return m


@dataclass(frozen=True)
class IndirectCoupling:
    energy: float
    v16: complex
    v61: complex
    sigma1: complex
    sigma6: complex
    terms: tuple
    splitting: float
    ratio_to_direct: complex


def _denominators(model, e_rel):
    """E - H_j (relative energies) for the intermediate states 2..5."""
    off = model.offsets
    d = (e_rel - off[1:5]).astype(complex)
    lossy = model.variant is Variant.LOSSY
    if lossy:
        d[:2] += 0.5j * model.gamma
    scale = model.params.hbar_omega0
    for j in range(4):
        regular = lossy and j < 2 and model.gamma > 0
        if not regular and abs(d[j]) < POLE_TOL * scale:
            raise PoleError(f"E is within {POLE_TOL:g} hw0 of intermediate level {j + 2}")
    return d


def _inverse(d):
    return 0.0 if np.isinf(d.imag) else 1.0 / d


def _paired_sum(d, model, e_rel):
    """1/d2 + 1/d3 + 1/d4 + 1/d5 grouped as (2,5) and (3,4) pairs.

    d2 + d5 and d3 + d4 equal 2 (E - n hw0) minus the sum of the pair's level
    offsets (plus the loss term), so the sum vanishes exactly when it should.
    """
    off = model.offsets
    lossy = model.variant is Variant.LOSSY
    if lossy and np.isinf(model.gamma):
        return _inverse(d[2]) + _inverse(d[3])
    loss = 0.5j * model.gamma if lossy else 0.0
    total = 0.0
    for a, b in ((0, 3), (1, 2)):
        s = 2 * e_rel - (off[1 + a] + off[1 + b]) + loss
        total += s / (d[a] * d[b])
    return total


def v16_general(model, energy=None, relative=False):
    """Indirect coupling, self-energies and path terms at energy E.

    ``energy`` defaults to H1; with ``relative`` it is measured from n hw0.
    """
    p = model.params
    if energy is None:
        e_rel = float(model.offsets[0])
    else:
        e_rel = float(energy) if relative else float(energy) - model.n * p.hbar_omega0
    d = _denominators(model, e_rel)
    to1, to6 = model.couplings()
    inv = np.array([_inverse(x) for x in d])
    terms = tuple(complex(to1[j] * to6[j] * inv[j]) for j in range(4))
    if model.variant is Variant.CONJUGATE:
        v16 = complex(sum(terms))
        v61 = complex(sum(np.conj(to6[j]) * np.conj(to1[j]) * inv[j] for j in range(4)))
    else:
        # both spins couple through real products U1 U2 (n or n+1)
        uu = p.u1 * p.u2
        tail = inv[1] + inv[3]  # the extra 1 of n+1
        v16 = complex(uu * (model.n * _paired_sum(d, model, e_rel) + tail))
        v61 = v16
    sigma1 = complex(sum(abs(to1[j]) ** 2 * inv[j] for j in range(4)))
    sigma6 = complex(sum(abs(to6[j]) ** 2 * inv[j] for j in range(4)))
    split = 2 * abs(np.sqrt(v16 * v61))
    direct = p.u1 * math.sqrt(model.n)
    ratio = v16 / direct if direct else complex("nan")
    e_abs = e_rel + model.n * p.hbar_omega0
    return IndirectCoupling(float(e_abs), v16, v61, sigma1, sigma6, terms, float(split), complex(ratio))


def resonance_energy(model):
    """Fixed point of E = mean(H1 + Sigma1(E), H6 + Sigma6(E)), relative to n hw0."""
    off = model.offsets
    e = float(off[0])
    for _ in range(FIXED_POINT_ITER):
        c = v16_general(model, e, relative=True)
        e_new = float(0.5 * (off[0] + c.sigma1.real + off[5] + c.sigma6.real))
        if abs(e_new - e) <= FIXED_POINT_TOL * model.params.hbar_omega0:
            return e_new, c
        e = e_new
    return e, v16_general(model, e, relative=True)


def six_state_splitting(model, warn=True):
    """2 |sqrt(V16 V61)| at the self-consistent resonance energy."""
    e, c = resonance_energy(model)
    off = model.offsets
    detune = abs((off[0] + c.sigma1.real) - (off[5] + c.sigma6.real))
    if warn and detune > max(0.5 * c.splitting, FIXED_POINT_TOL * model.params.hbar_omega0):
        warnings.warn(OffResonanceWarning(
            f"H1 + Sigma1 and H6 + Sigma6 differ by {detune:.3e}, splitting {c.splitting:.3e}"), stacklevel=2)
    return c.splitting


def effective_hamiltonian(model, energy, relative=True):
    c = v16_general(model, energy, relative=relative)
    off = model.offsets
    base = 0.0 if relative else model.n * model.params.hbar_omega0
    return np.array([[off[0] + base + c.sigma1, c.v16], [c.v61, off[5] + base + c.sigma6]])


def effective_eigenvalues(model, iterations=FIXED_POINT_ITER):
    """Both eigenvalues of the energy-dependent 2x2, each solved self-consistently.

    Returned relative to n hw0.
    """
    out = []
    for branch in (0, 1):
        e = float(model.offsets[0 if branch == 0 else 5])
        for _ in range(iterations):
            vals = np.sort_complex(np.linalg.eigvals(effective_hamiltonian(model, e)))
            e_new = float(vals[branch].real)
            if abs(e_new - e) <= FIXED_POINT_TOL * model.params.hbar_omega0:
                break
            e = e_new
        out.append(e_new)
    return np.sort(np.array(out))


def six_state_eigenvalues(model):
    """Eigenvalues of the 6x6 relative to n hw0 (sorted by real part)."""
    m = model.matrix(relative=True)
    if model.variant is Variant.LOSSY:
        return np.sort_complex(np.linalg.eigvals(m))
    return np.linalg.eigvalsh(m)


def six_state_propagate(model, initial, t_grid):
    """Amplitudes c(t), shape (len(t_grid), 6), with hbar = 1 and t in 1/omega0 units."""
    c0 = np.asarray(initial, dtype=complex)
    if c0.shape != (6,):
        raise InvalidArgument("initial state must have 6 components")
    t = np.asarray(t_grid, dtype=float)
    m = model.matrix(relative=True) / 1.0
    if model.variant is Variant.LOSSY:
        vals, vecs = np.linalg.eig(m)
        coef = np.linalg.solve(vecs, c0)
    else:
        vals, vecs = np.linalg.eigh(m)
        coef = vecs.conj().T @ c0
    phases = np.exp(-1j * np.outer(t, vals) / model.params.hbar_omega0)
    return (phases * coef) @ vecs.T


def transfer_period(model):
    """Time of the first maximum of |c6|^2, pi hbar / deltaE."""
    return math.pi * model.params.hbar_omega0 / six_state_splitting(model, warn=False)


# closed forms at E = H1 = H6 (DE1 = DE2)

def v16_standard_closed(params, n):
    hw = params.hbar_omega0
    return 2 * hw * params.u1 * params.u2 / (params.delta_e1 ** 2 - hw ** 2)


def v16_lossy_limit_closed(params, n):
    """Leading-order large-loss form -2 U1 U2 DE1 n / (DE1^2 - hw0^2)."""
    hw = params.hbar_omega0
    return -2 * params.u1 * params.u2 * params.delta_e1 * n / (params.delta_e1 ** 2 - hw ** 2)


def v16_lossy_limit_exact(params, n):
    """Exact Gamma -> infinity value U1 U2 (hw0 - (2n+1) DE1) / (DE1^2 - hw0^2)."""
    hw = params.hbar_omega0
    de = params.delta_e1
    return params.u1 * params.u2 * (hw - (2 * n + 1) * de) / (de ** 2 - hw ** 2)


def v16_conjugate_closed(params, n):
    hw = params.hbar_omega0
    return -2j * params.u1 * params.u2 * hw * (2 * n + 1) / (params.delta_e1 ** 2 - hw ** 2)


def enhancement_ratio_closed(params, n):
    return n * params.delta_e1 / params.hbar_omega0


def enhancement_ratio(params, n):
    """|V16|(Gamma = inf) / |V16|(Gamma = 0) from the eliminated model."""
    from dataclasses import replace

    lossless = SixStateModel(replace(params, variant=Variant.STANDARD, gamma=0.0), n)
    lossy = SixStateModel(replace(params, variant=Variant.LOSSY, gamma=math.inf), n)
    return abs(v16_general(lossy).v16) / abs(v16_general(lossless).v16)


@dataclass(frozen=True)
class InterferenceReport:
    terms: tuple
    total: complex
    largest: float
    suppression: float
    ratio_to_direct: complex
    ratio_estimate: float
    enhancement: float
    enhancement_estimate: float


def interference_diagnostics(model, energy=None):
    """Per-path contributions and the interference ratios."""
    c = v16_general(model, energy)
    p = model.params
    largest = max(abs(t) for t in c.terms)
    total = c.v16
    g2 = p.g2(model.n)
    if model.variant is Variant.LOSSY and np.isinf(model.gamma):
        estimate = -2 * g2
    else:
        estimate = (2 * g2 / model.n) * (p.hbar_omega0 / p.delta_e1)
    if p.u1 == 0 or p.u2 == 0:
        enh = float("nan")
    else:
        enh = enhancement_ratio(p, model.n)
    return InterferenceReport(c.terms, total, float(largest),
                              float(largest / abs(total)) if abs(total) else float("inf"),
                              c.ratio_to_direct, float(estimate), float(enh),
                              float(enhancement_ratio_closed(p, model.n)))
