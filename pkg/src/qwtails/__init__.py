"""
Stationary states of Szegedy quantum walks on graphs with semi-infinite tails.

A finite graph carries a random-walk kernel; tails attached to some of its
vertices feed a constant inflow in and carry the response out. The package
computes the stationary state, checks its scattering against the
reversible/non-reversible prediction, and maps reversible states onto an
electric circuit.
"""

from .circuit import (
    CircuitSolution,
    KirchhoffResiduals,
    PowerDecomposition,
    RegimeError,
    boundary_injections,
    current_from_wavefunction,
    decompose_mu,
    solve_circuit,
    verify_kirchhoff,
)
from .dynamics import (
    ConvergenceError,
    InconsistentSystemError,
    InducedSystem,
    StationaryReport,
    WaveFunction,
    apply_U,
    build_induced_system,
    direct_solve,
    evolution_matrix,
    extract_outflow,
    iterate,
    local_coin,
    mass,
    mu_qw,
    stationary_state,
    truncated_evolution_oracle,
)
from .graph import SymmetricDigraph, TailedGraph, attach_tails, build_graph, cycle_basis, truncate
from .kernel import (
    NonReversible,
    ReversibleMeasure,
    TransitionKernel,
    find_reversible_measure,
    kernel_from_conductances,
    validate_kernel,
)
from .reference import C3PkSpec, make_c3pk, penetration_check
from .scattering import ScatteringReport, predicted_scattering, verify_scattering

__version__ = "0.1.0"
