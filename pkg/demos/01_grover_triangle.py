"""
Grover walk on a triangle with a dangling path.

Two tails touch the triangle; a unit amplitude is fed into the first one.
The stationary state fills the whole internal graph and everything leaves
through the second tail.
"""

import numpy as np

from qwtails.dynamics import mass, stationary_state
from qwtails.reference import C3PkSpec, closed_form_reversible, make_c3pk

# %% build the instance: p = q = r = 1/3 is the Grover walk
inst = make_c3pk(C3PkSpec(p=1 / 3, q=1 / 3, r=1 / 3, k=2))
g = inst.graph.internal
print(f"{g.n_vertices} vertices, {g.n_edges} edges, tails at {inst.graph.attach.tolist()}")

# %% solve it both ways and compare
rep = stationary_state(inst.graph, inst.kernel, inst.alpha, method="both")
print(f"iterations: {rep.iterations_used}, iterate vs solve gap: {rep.cross_method_gap:.1e}")
print(f"dim ker(I - E) = {rep.nullity}  (one independent cycle)")

closed = closed_form_reversible(1 / 3, k=2)
for name in ("b1", "b1_bar", "b2", "b2_bar", "b3", "b3_bar"):
    a = inst.labels[name]
    print(f"  {name:7s} {g.arc_label(a):8s} {rep.psi[a].real:+.6f}   closed form {closed.values[name]:+.6f}")
print("  path arcs:", np.round(rep.psi[inst.path_arcs].real, 12))

# %% scattering: perfect transmission
print("outflow:", np.round(rep.wave.boundary_out, 12))
print(f"mass of the internal graph: {mass(rep.wave):.6f} (closed form {closed.mass:.6f})")
