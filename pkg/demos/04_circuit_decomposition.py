"""
Electric-circuit picture of a reversible stationary state.

The stationary amplitudes define a current that satisfies Kirchhoff's laws
with the random walk's edge weights as conductances. The finding
probability splits into electric power plus a multiple of the walk's
reversible measure.
"""

import numpy as np

from qwtails.circuit import (
    boundary_injections,
    current_from_wavefunction,
    decompose_mu,
    solve_circuit,
)
from qwtails.dynamics import stationary_state
from qwtails.kernel import boundary_conductance, find_reversible_measure
from qwtails.reference import C3PkSpec, make_c3pk

inst = make_c3pk(C3PkSpec(1 / 3, 1 / 3, 1 / 3, k=1))
tg, p = inst.graph, inst.kernel
g = tg.internal

# conductance 2/3 on every edge (m_V = 2 on the triangle)
m = find_reversible_measure(tg, p, pin=(0, 2.0))
wave = stationary_state(tg, p, inst.alpha).wave
j = current_from_wavefunction(wave, m)
print(f"injected current I  = {j[tg.inbound_arc(0)].real:.6f}   sqrt(1/6) = {np.sqrt(1 / 6):.6f}")
print(f"current on b1       = {j[inst.labels['b1']].real:.6f}   (2/3) I  = {2 / 3 * np.sqrt(1 / 6):.6f}")

# %% same currents from a Laplacian solve
sol = solve_circuit(g, m.m_E, boundary_injections(tg, inst.alpha, m))
print(f"Laplacian vs quantum: {np.abs(sol.current - j[:g.n_arcs]).max():.1e}")
print("potentials:", np.round(sol.potential.real, 6))

# %% power split
dec = decompose_mu(tg, wave, m, j)
for u in range(g.n_vertices):
    print(f"  vertex {u}: mu = {dec.mu[u]:.6f} = power {dec.w_ec[u].real:.6f} + walk {dec.m_rw[u]:.6f}")

# %% inputs along and across the boundary conductance vector
u = boundary_conductance(m)
for label, alpha in (("parallel", u.astype(complex)), ("orthogonal", np.array([u[1], -u[0]], dtype=complex))):
    wave = stationary_state(tg, p, alpha).wave
    dec = decompose_mu(tg, wave, m)
    jj = current_from_wavefunction(wave, m)
    print(f"{label:10s}: max|j| = {np.abs(jj).max():.2e}, max|mu - m_RW| = {np.abs(dec.mu - dec.m_rw).max():.2e}, "
          f"max|mu - w_EC| = {np.abs(dec.mu - dec.w_ec).max():.2e}")
