"""Model parameters, the truncated product basis and the full Hamiltonian.

The Hamiltonian acts on |n>|m1>|m2> with m_j = -1/2, +1/2::

    H = dE1 m1 + dE2 m2 + n hw0 + U1 (a + a^+) sigma_x^(1) + U2 (a + a^+) sigma_x^(2)

Couplings change n by one and flip exactly one spin, so with the n-major
ordering used here the matrix is banded with half-bandwidth 6 (3 inside
one parity sector).  The operator ``(-1)^n sigma_z^(1) sigma_z^(2)``
commutes with H; restricting to a sector halves the dimension and removes
exact crossings between states of opposite parity.
"""

from __future__ import annotations

import csv
import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidArgument, MultiphotonRegimeWarning, UnsupportedVariant

# (m1, m2) order inside one oscillator block
SPIN_ORDER = ((-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5))


class Variant(str, enum.Enum):
    STANDARD = "standard"
    CONJUGATE = "conjugate"
    LOSSY = "lossy"


@dataclass(frozen=True)
class ModelParams:
    """Energies and couplings, all in the same energy unit.

    ``hbar_omega0`` is the unit scale (default 1).  ``gamma`` is the loss
    rate hbar*Gamma of the lossy variant and is ignored otherwise; it may be
    ``math.inf``.
    """

    delta_e1: float
    delta_e2: float
    u1: float = 0.0
    u2: float = 0.0
    hbar_omega0: float = 1.0
    variant: Variant = Variant.STANDARD
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        for name in ("delta_e1", "delta_e2", "hbar_omega0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgument(f"{name} must be positive and finite, got {value!r}")
        for name in ("u1", "u2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidArgument(f"{name} must be real and >= 0, got {value!r}")
        if self.variant is Variant.LOSSY and not self.gamma >= 0:
            raise InvalidArgument(f"gamma must be >= 0, got {self.gamma!r}")
        if self.hbar_omega0 >= min(self.delta_e1, self.delta_e2):
            warnings.warn(
                "hbar_omega0 >= min(delta_e1, delta_e2): outside the multiphoton regime",
                MultiphotonRegimeWarning,
                stacklevel=3,
            )

    @classmethod
    def from_g(cls, delta_e1, delta_e2, g1, g2, n, hbar_omega0=1.0, **kwargs):
        """Build parameters from dimensionless couplings g_j = U_j sqrt(n) / dE_j."""
        if n <= 0:
            raise InvalidArgument("n must be positive to convert g to U")
        root = math.sqrt(n)
        return cls(delta_e1, delta_e2, g1 * delta_e1 / root, g2 * delta_e2 / root,
                   hbar_omega0, **kwargs)

    def g1(self, n):
        return self.u1 * math.sqrt(n) / self.delta_e1

    def g2(self, n):
        return self.u2 * math.sqrt(n) / self.delta_e2

    def delta_e(self, which):
        return self.delta_e1 if which == 1 else self.delta_e2

    def u(self, which):
        return self.u1 if which == 1 else self.u2

    def with_g(self, n, g1=None, g2=None):
        """Copy with one or both couplings replaced via g at reference n."""
        u1 = self.u1 if g1 is None else g1 * self.delta_e1 / math.sqrt(n)
        u2 = self.u2 if g2 is None else g2 * self.delta_e2 / math.sqrt(n)
        return ModelParams(self.delta_e1, self.delta_e2, u1, u2, self.hbar_omega0,
                           self.variant, self.gamma)


def bare_level(n, m1, m2, params):
    """Undressed energy dE1 m1 + dE2 m2 + n hw0."""
    return params.delta_e1 * m1 + params.delta_e2 * m2 + n * params.hbar_omega0


def state_parity(n, m1, m2):
    """Eigenvalue of (-1)^n sigma_z^(1) sigma_z^(2)."""
    return (-1 if n % 2 else 1) * int(round(2 * m1)) * int(round(2 * m2))


@dataclass(frozen=True)
class FockWindow:
    n_min: int
    n_max: int

    def __post_init__(self):
        if int(self.n_min) != self.n_min or int(self.n_max) != self.n_max:
            raise InvalidArgument("window bounds must be integers")
        if self.n_min < 0 or self.n_max <= self.n_min:
            raise InvalidArgument(f"empty or invalid window [{self.n_min}, {self.n_max}]")

    @classmethod
    def around(cls, n0, halfwidth):
        halfwidth = int(math.ceil(halfwidth))
        return cls(max(0, n0 - halfwidth), n0 + halfwidth)

    @property
    def size(self):
        return self.n_max - self.n_min + 1

    def contains(self, n, margin=0):
        return self.n_min + margin <= n <= self.n_max - margin

    def grown(self, factor):
        """Window enlarged symmetrically by ``factor`` of its size (clipped at 0)."""
        extra = int(math.ceil(self.size * factor / 2))
        return FockWindow(max(0, self.n_min - extra), self.n_max + extra)


def default_halfwidth(n0, g_max):
    """Window half-width max(200, 8 g sqrt(n0))."""
    return int(math.ceil(max(200.0, 8.0 * g_max * math.sqrt(n0))))


@dataclass(frozen=True)
class BasisIndex:
    """Bijection (n, m1, m2) <-> flat index, n-major with SPIN_ORDER inside.

    With ``parity`` set to +1 or -1 only the states of that parity sector
    are included, keeping the same relative order.
    """

    window: FockWindow
    parity: int | None = None

    def __post_init__(self):
        if self.parity not in (None, 1, -1):
            raise InvalidArgument("parity must be None, +1 or -1")

    @cached_property
    def _tables(self):
        ns, m1s, m2s = [], [], []
        for n in range(self.window.n_min, self.window.n_max + 1):
            for m1, m2 in SPIN_ORDER:
                if self.parity is None or state_parity(n, m1, m2) == self.parity:
                    ns.append(n)
                    m1s.append(m1)
                    m2s.append(m2)
        return np.array(ns), np.array(m1s), np.array(m2s)

    @property
    def n(self):
        return self._tables[0]

    @property
    def m1(self):
        return self._tables[1]

    @property
    def m2(self):
        return self._tables[2]

    @property
    def dim(self):
        return len(self._tables[0])

    @property
    def per_block(self):
        return 4 if self.parity is None else 2

    def encode(self, n, m1, m2):
        if not self.window.contains(n):
            raise InvalidArgument(f"n={n} outside window")
        try:
            s = SPIN_ORDER.index((float(m1), float(m2)))
        except ValueError:
            raise InvalidArgument(f"invalid spin pair ({m1}, {m2})") from None
        block = n - self.window.n_min
        if self.parity is None:
            return 4 * block + s
        if state_parity(n, m1, m2) != self.parity:
            raise InvalidArgument(f"state ({n}, {m1}, {m2}) not in parity sector {self.parity}")
        allowed = [k for k, (a, b) in enumerate(SPIN_ORDER) if state_parity(n, a, b) == self.parity]
        return 2 * block + allowed.index(s)

    def decode(self, index):
        if not 0 <= index < self.dim:
            raise InvalidArgument(f"index {index} out of range")
        n, m1, m2 = self._tables
        return int(n[index]), float(m1[index]), float(m2[index])


def build_basis(window, parity=None):
    return BasisIndex(window, parity)


@dataclass(frozen=True)
class BandedSymmetricMatrix:
    """Real symmetric band matrix in lower storage.

    ``lower[d, j]`` holds A[j + d, j]; entries past the end of the matrix are
    zero.  ``energy_offset`` has been subtracted from the diagonal, so the
    eigenvalues of the stored matrix plus the offset are those of the
    physical operator.
    """

    lower: np.ndarray
    energy_offset: float = 0.0
    basis: BasisIndex | None = field(default=None, compare=False, repr=False)

    @property
    def dim(self):
        return self.lower.shape[1]

    @property
    def half_bandwidth(self):
        return self.lower.shape[0] - 1

    def to_dense(self):
        n = self.dim
        a = np.zeros((n, n))
        for d in range(self.half_bandwidth + 1):
            idx = np.arange(n - d)
            a[idx + d, idx] = self.lower[d, : n - d]
            a[idx, idx + d] = self.lower[d, : n - d]
        return a

    def matvec(self, x):
        x = np.asarray(x)
        y = self.lower[0] * x
        n = self.dim
        for d in range(1, self.half_bandwidth + 1):
            band = self.lower[d, : n - d]
            y[d:] += band * x[: n - d]
            y[: n - d] += band * x[d:]
        return y

    def norm1(self):
        """Max absolute column sum (equal to the infinity norm by symmetry)."""
        n = self.dim
        s = np.abs(self.lower[0]).copy()
        for d in range(1, self.half_bandwidth + 1):
            band = np.abs(self.lower[d, : n - d])
            s[: n - d] += band
            s[d:] += band
        return float(s.max()) if n else 0.0

    def upper_lower_storage(self):
        """Full band storage for ``scipy.linalg.solve_banded``."""
        b, n = self.half_bandwidth, self.dim
        ab = np.zeros((2 * b + 1, n))
        for d in range(b + 1):
            ab[b + d, : n - d] = self.lower[d, : n - d]
            ab[b - d, d:] = self.lower[d, : n - d]
        return ab

    def to_csv(self, path):
        """Debug dump of nonzero elements as (row, col, value), lower triangle only."""
        n = self.dim
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row", "col", "value"])
            for j in range(n):
                for d in range(self.half_bandwidth + 1):
                    if j + d < n and self.lower[d, j] != 0.0:
                        value = self.lower[d, j] + (self.energy_offset if d == 0 else 0.0)
                        writer.writerow([j + d, j, f"{value:.8e}"])


def assemble_hamiltonian(params, basis, energy_offset=0.0):
    """Banded matrix of H on ``basis`` (Standard variant only)."""
    if params.variant is not Variant.STANDARD:
        raise UnsupportedVariant(
            f"exact assembly is only defined for the standard variant, not {params.variant.value}")
    n_of, m1_of, m2_of = basis.n, basis.m1, basis.m2
    dim = basis.dim
    hw = params.hbar_omega0
    b = 6 if basis.parity is None else 3
    lower = np.zeros((b + 1, dim))
    lower[0] = params.delta_e1 * m1_of + params.delta_e2 * m2_of + (n_of * hw - energy_offset)
    per = basis.per_block
    # couple every state of block n to the states of block n+1 differing by one spin flip
    for j in range(dim):
        n = n_of[j]
        start = (j // per + 1) * per
        for i in range(start, min(start + per, dim)):
            d1 = m1_of[i] != m1_of[j]
            d2 = m2_of[i] != m2_of[j]
            if d1 == d2:
                continue
            u = params.u1 if d1 else params.u2
            if u:
                lower[i - j, j] = u * math.sqrt(n + 1)
    return BandedSymmetricMatrix(lower, energy_offset, basis)


def dense_hamiltonian(params, basis, energy_offset=0.0):
    """Dense H built from Kronecker products of the operators (test oracle)."""
    w = basis.window
    ns = np.arange(w.n_min, w.n_max + 1)
    x = np.diag(np.sqrt(ns[1:].astype(float)), -1)  # a^+ on the window
    x = x + x.T  # a + a^+
    number = np.diag(ns.astype(float))
    eye_n = np.eye(len(ns))
    eye2 = np.eye(2)
    sz = np.diag([-0.5, 0.5])
    sx2 = np.array([[0.0, 1.0], [1.0, 0.0]])
    hw = params.hbar_omega0
    h = (params.delta_e1 * np.kron(eye_n, np.kron(sz, eye2))
         + params.delta_e2 * np.kron(eye_n, np.kron(eye2, sz))
         + hw * np.kron(number, np.eye(4))
         + params.u1 * np.kron(x, np.kron(sx2, eye2))
         + params.u2 * np.kron(x, np.kron(eye2, sx2)))
    h -= energy_offset * np.eye(h.shape[0])
    if basis.parity is not None:
        keep = [4 * (n - w.n_min) + k for n in ns for k, (a, b) in enumerate(SPIN_ORDER)
                if state_parity(n, a, b) == basis.parity]
        h = h[np.ix_(keep, keep)]
    return h


def spin_characters(basis, vectors):
    """<2 s_z^(1)>, <2 s_z^(2)> for each column of ``vectors``."""
    p = np.abs(np.asarray(vectors)) ** 2
    if p.ndim == 1:
        p = p[:, None]
    return (2 * basis.m1) @ p, (2 * basis.m2) @ p


def configuration_weight(basis, vectors, configs):
    """Probability on the lab-frame spin configurations ``configs`` (any n)."""
    mask = np.zeros(basis.dim, dtype=bool)
    for m1, m2 in configs:
        mask |= (basis.m1 == m1) & (basis.m2 == m2)
    p = np.abs(np.asarray(vectors)) ** 2
    if p.ndim == 1:
        p = p[:, None]
    return mask.astype(float) @ p
