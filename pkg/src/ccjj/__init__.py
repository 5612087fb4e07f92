"""Simulator for two capacitively coupled current-biased Josephson junctions.

Static spectra and eigenstate entanglement versus bias detuning, and full
time-dependent realization of the controlled-phase and swaplike two-qubit
gates on a 2D phase grid.
"""

__version__ = "0.1.0"

from ._core import backend_name
from .evolution import (
    AbsorberConfig,
    OscillationFit,
    PropagationConfig,
    Trajectory,
    fit_oscillation,
    propagate,
    survival,
)
from .gates import (
    CanonicalGate,
    GateMatrix,
    GateReport,
    canonicalize,
    design_u1,
    design_u2,
    extract_gate,
    fidelity,
    leakage,
    score_gate,
    target_u1,
    target_u2,
    tune_swap_ns,
)
from .grids import (
    EntanglementReport,
    Grid2D,
    Wavefunction2D,
    build_grid,
    entanglement,
    from_momentum,
    inner,
    to_momentum,
)
from .model import (
    BiasPair,
    CircuitParams,
    DerivedScales,
    PulseSchedule,
    bias_for_ns,
    derive_scales,
    detune,
    epsilon_at,
    kinetic_spectrum,
    potential_cubic,
    potential_full,
    scales_for_ns,
)
from .spectrum import (
    LevelTrack,
    ProductBasis,
    SpectrumSlice,
    find_avoided_crossing,
    mixing_angle,
    perturbative_eps,
    product_basis,
    solve_1d,
    solve_2d,
    sweep,
    tunneling_scale,
)
