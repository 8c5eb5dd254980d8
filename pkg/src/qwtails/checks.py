"""Invariant battery run by the ``check`` command."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import boundary_injections, current_from_wavefunction, decompose_mu, solve_circuit, verify_kirchhoff
from .dynamics import (
    DEFAULT_N_MAX,
    DEFAULT_TOL,
    build_induced_system,
    check_cycle_eigenvector,
    cycle_vector,
    edge_vertex_residual,
    evolution_matrix,
    iterate_steps,
    local_coin,
    nonreversible_residuals,
    reversible_edge_residual,
    stationary_state,
    truncated_evolution_oracle,
    truncated_kernel,
)
from .graph import TailedGraph, cycle_basis, truncate
from .kernel import TransitionKernel, boundary_conductance, coin_vector, find_reversible_measure, validate_kernel
from .scattering import predicted_scattering

__all__ = ["CheckResult", "run_checks"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold,
                "pass": self.passed}


def _check(name, value, threshold, exact=False):
    value = float(value)
    ok = value == threshold if exact else value <= threshold
    return CheckResult(name, value, float(threshold), bool(ok))


def run_checks(tg: TailedGraph, p: TransitionKernel, alpha, tol: float = DEFAULT_TOL,
               n_max: int = DEFAULT_N_MAX, n_states: int = 20, oracle_steps: int = 12,
               seed: int = 0) -> tuple[str, list[CheckResult]]:
    """Run every applicable invariant on one instance.

    Returns the detected regime and the list of results. The regime
    decides which of the reversible or non-reversible identities apply.
    """
    alpha = np.asarray(alpha, dtype=complex)
    rng = np.random.default_rng(seed)
    g = tg.internal
    out = [_check("kernel.normalization", validate_kernel(tg, p).max_residual, 1e-12)]

    coin_err = 0.0
    for u in range(g.n_vertices):
        _, vec = coin_vector(tg, p, u)
        if vec.size == 0:
            continue
        C = local_coin(vec)
        coin_err = max(coin_err, np.abs(C - C.conj().T).max(), np.abs(C @ C - np.eye(vec.size)).max())
    out.append(_check("coin.self_adjoint_involution", coin_err, 1e-12))

    tr = truncate(tg, 3)
    U = evolution_matrix(tr.graph, truncated_kernel(tg, p, tr))
    drift = 0.0
    for _ in range(n_states):
        x = rng.normal(size=tr.graph.n_arcs) + 1j * rng.normal(size=tr.graph.n_arcs)
        drift = max(drift, abs(np.linalg.norm(U @ x) - np.linalg.norm(x)))
    out.append(_check("unitarity.truncated_norm", drift, 1e-12))

    rep = stationary_state(tg, p, alpha, method="both", tol=tol, n_max=n_max)
    wave = rep.wave
    system = build_induced_system(tg, p, alpha)
    out.append(_check("stationary.fixed_point", rep.fixed_point_residual, 1e-9))
    out.append(_check("stationary.iterate_vs_solve", rep.cross_method_gap, 1e-8))

    tr_n, Psi = truncated_evolution_oracle(tg, p, alpha, oracle_steps)
    gap = np.abs(Psi[tr_n.internal_arcs] - iterate_steps(system, oracle_steps)).max(initial=0.0)
    out.append(_check("stationary.truncated_oracle", gap, 1e-8))

    out.append(_check("stationary.outflow_norm",
                      abs(np.linalg.norm(wave.boundary_out) - np.linalg.norm(alpha)), 1e-8))
    out.append(_check("identity.edge_vertex", edge_vertex_residual(tg, p, wave), 1e-9))

    m = find_reversible_measure(tg, p)
    if not m:
        out.append(_check("scattering.phase_flip", np.abs(wave.boundary_out + alpha).max(initial=0.0), 1e-8))
        anti, flux = nonreversible_residuals(tg, p, wave)
        out.append(_check("identity.antisymmetry", anti, 1e-9))
        out.append(_check("identity.vertex_flux", flux, 1e-9))
        return "non-reversible", out

    S = predicted_scattering("reversible", boundary_conductance(m))
    out.append(_check("scattering.reversible", np.abs(wave.boundary_out - S @ alpha).max(initial=0.0), 1e-8))
    out.append(_check("identity.reversible_edge", reversible_edge_residual(tg, wave, m), 1e-9))

    basis = cycle_basis(g)
    if rep.nullity is not None:
        out.append(_check("kernel_dimension.cycle_count", abs(rep.nullity - len(basis)), 0, exact=True))
    cycle_err = 0.0
    for c in basis:
        w = cycle_vector(c, m.arc_conductance(), g.n_arcs)
        cycle_err = max(cycle_err, *check_cycle_eigenvector(system, w, rep.psi))
    out.append(_check("cycles.eigenvector_orthogonality", cycle_err, 1e-10))

    j = current_from_wavefunction(wave, m)
    inj = boundary_injections(tg, alpha, m)
    sol = solve_circuit(g, m.m_E, inj)
    out.append(_check("circuit.quantum_vs_laplacian", np.abs(sol.current - j[:g.n_arcs]).max(initial=0.0), 1e-8))
    out.append(_check("circuit.kirchhoff", verify_kirchhoff(g, j[:g.n_arcs], m.m_E, basis, inj).max(), 1e-9))

    dec = decompose_mu(tg, wave, m, j)
    out.append(_check("decomposition.modulus", dec.residual_modulus, 1e-9))
    if not np.any(alpha.imag):
        out.append(_check("decomposition.real_input", dec.residual, 1e-9))
    return "reversible", out
