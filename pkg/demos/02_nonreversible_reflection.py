"""
Breaking reversibility on the same graph.

With different clockwise and counter-clockwise probabilities the walker is
reflected with a sign flip, never reaches the path, and the internal mass
blows up as the two probabilities approach each other.
"""

import numpy as np

from qwtails.dynamics import mass, nonreversible_residuals, stationary_state
from qwtails.kernel import find_reversible_measure
from qwtails.reference import (
    C3PkSpec,
    closed_form_nonreversible,
    divergence_scan,
    make_c3pk,
    penetration_check,
    scan_to_csv,
)

p, q, r = 1 / 2, 1 / 6, 1 / 3
inst = make_c3pk(C3PkSpec(p, q, r, k=3))

verdict = find_reversible_measure(inst.graph, inst.kernel)
print("reversible:", bool(verdict), f"(cycle violation {verdict.max_violation:.3f})")

rep = stationary_state(inst.graph, inst.kernel, inst.alpha)
print("outflow:", np.round(rep.wave.boundary_out, 12), " <- minus the inflow")
print("support:", penetration_check(inst.graph, rep.psi))
anti, flux = nonreversible_residuals(inst.graph, inst.kernel, rep.wave)
print(f"Psi(a) + Psi(inv a): {anti:.1e}, vertex flux: {flux:.1e}")

closed = closed_form_nonreversible(p, q, r)
print(f"psi(b1) = {rep.psi[inst.labels['b1']].real:.6f}  closed form {closed.values['b1']:.6f}")
print(f"mass    = {mass(rep.wave):.6f}  closed form {closed.mass:.6f}")

# %% mass against |p - q| at fixed r
print()
print(scan_to_csv(divergence_scan(r, [0.4, 0.2, 0.1, 0.05, 0.02, 0.01])), end="")
