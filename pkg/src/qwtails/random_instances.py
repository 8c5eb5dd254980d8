"""Seeded random tailed graphs and kernels for property checks."""

from __future__ import annotations

import numpy as np

from .graph import TailedGraph, attach_tails, build_graph
from .kernel import TransitionKernel, find_reversible_measure, kernel_from_conductances

__all__ = [
    "random_connected_graph",
    "random_tailed_graph",
    "random_reversible_kernel",
    "random_nonreversible_kernel",
    "random_alpha",
]


def random_connected_graph(rng: np.random.Generator, n_vertices: int, n_extra: int,
                           allow_parallel: bool = False):
    """Random tree on ``n_vertices`` plus ``n_extra`` additional edges."""
    edges = [(int(rng.integers(v)), v) for v in range(1, n_vertices)]
    present = {tuple(sorted(e)) for e in edges}
    tries = 0
    while n_extra > 0 and tries < 100 and n_vertices > 1:
        tries += 1
        u, v = sorted(int(x) for x in rng.choice(n_vertices, size=2, replace=False))
        if (u, v) in present and not allow_parallel:
            continue
        edges.append((u, v))
        present.add((u, v))
        n_extra -= 1
    return build_graph(edges, n_vertices)


def random_tailed_graph(rng: np.random.Generator, max_vertices: int = 8, max_tails: int = 4,
                        min_cycles: int = 0, allow_parallel: bool = False) -> TailedGraph:
    n = int(rng.integers(3, max_vertices + 1))
    extra = int(rng.integers(min_cycles, n + 1))
    g = random_connected_graph(rng, n, extra, allow_parallel=allow_parallel)
    r = int(rng.integers(1, max_tails + 1))
    return attach_tails(g, rng.integers(0, n, size=r))


def random_reversible_kernel(rng: np.random.Generator, tg: TailedGraph) -> TransitionKernel:
    """Kernel generated from random positive edge conductances."""
    return kernel_from_conductances(tg, rng.uniform(0.2, 2.0, size=tg.internal.n_edges),
                                    rng.uniform(0.2, 2.0, size=tg.r))


def random_nonreversible_kernel(rng: np.random.Generator, tg: TailedGraph,
                                max_tries: int = 100) -> TransitionKernel:
    """Kernel with independent Dirichlet rows; resampled until non-reversible.

    The internal graph must contain a cycle (trees only carry reversible walks).
    """
    g = tg.internal
    for _ in range(max_tries):
        internal = np.empty(g.n_arcs)
        outbound = np.empty(tg.r)
        for u in range(g.n_vertices):
            out = g.out_arcs(u)
            tails = tg.tails_at(u)
            w = rng.dirichlet(np.full(out.size + tails.size, 2.0))
            internal[out] = w[:out.size]
            outbound[tails] = w[out.size:]
        p = TransitionKernel(internal=internal, outbound=outbound)
        if not find_reversible_measure(tg, p):
            return p
    raise ValueError("could not draw a non-reversible kernel; does the graph have a cycle?")


def random_alpha(rng: np.random.Generator, r: int, real: bool = False) -> np.ndarray:
    a = rng.normal(size=r)
    if not real:
        a = a + 1j * rng.normal(size=r)
    return a.astype(complex)
