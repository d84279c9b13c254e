"""Two spins coupled through a shared oscillator mode in the multiphoton regime."""

from .errors import *  # noqa: F401,F403
from .model import (FockWindow, ModelParams, Variant, assemble_hamiltonian, bare_level, build_basis,
                    dense_hamiltonian)
from .eigen import dense_eigen_oracle, eigenpairs_in_interval, eigenvalues_in_interval, reduce_to_tridiagonal
from .rotated import (SpinConfig, dressed_energy, i12_numeric, pt_splitting_energy_exchange,
                      pt_splitting_excitation_transfer, solve_h0_level, v1_element, v12_element)
from .wkb import i12_wkb, quantize_potential, wkb_quantize
from .resonance import (ResonanceKind, ScanProblem, resonance_map, solve_energy_exchange_g,
                        solve_resonance_g2, splitting_scan, table1)
from .sixstate import (SixStateModel, interference_diagnostics, six_state_propagate, six_state_splitting,
                       v16_general)
from .multimode import MultiModeSpec, multimode_v16, separation_sweep

__version__ = "0.1.0"
