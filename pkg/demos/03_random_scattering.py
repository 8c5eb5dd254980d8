"""
Scattering on random graphs.

Reversible kernels scatter the inflow through the Szegedy matrix of the
boundary conductances; non-reversible ones send back minus the input. The
regime can be read off from the scattering alone.
"""

import numpy as np

from qwtails.kernel import boundary_conductance, find_reversible_measure
from qwtails.random_instances import (
    random_alpha,
    random_nonreversible_kernel,
    random_reversible_kernel,
    random_tailed_graph,
)
from qwtails.scattering import infer_regime, unitarity_of_columns, verify_scattering

rng = np.random.default_rng(7)

print("reversible")
for _ in range(5):
    tg = random_tailed_graph(rng)
    p = random_reversible_kernel(rng, tg)
    rep = verify_scattering(tg, p, random_alpha(rng, tg.r))
    u = boundary_conductance(find_reversible_measure(tg, p))
    print(f"  n={tg.n_vertices} r={tg.r}  m_dE={np.round(u, 3)}  residual {rep.residual_inf_norm:.1e}")

print("non-reversible")
for _ in range(5):
    tg = random_tailed_graph(rng, min_cycles=1)
    p = random_nonreversible_kernel(rng, tg)
    rep = verify_scattering(tg, p, random_alpha(rng, tg.r))
    gram = unitarity_of_columns(tg, p)
    print(f"  n={tg.n_vertices} r={tg.r}  residual {rep.residual_inf_norm:.1e}  "
          f"|B*B - I| {np.abs(gram - np.eye(tg.r)).max():.1e}  inferred: {infer_regime(tg, p)}")
