"""
Random-walk kernels on tailed graphs.

A kernel stores ``p(a)`` on every internal arc and on every outbound
boundary arc (internal graph -> tail). Probabilities on the tails
themselves are fixed at 1/2 and never stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import TailedGraph, cycle_basis, spanning_forest

__all__ = [
    "NORMALIZATION_TOL",
    "REVERSIBILITY_RTOL",
    "TransitionKernel",
    "KernelValidation",
    "ReversibleMeasure",
    "NonReversible",
    "validate_kernel",
    "find_reversible_measure",
    "boundary_conductance",
    "kernel_from_conductances",
    "coin_vector",
]

NORMALIZATION_TOL = 1e-12
REVERSIBILITY_RTOL = 1e-10
TAIL_PROBABILITY = 0.5


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Transition probabilities of the underlying random walk.

    Attributes
    ----------
    internal : ndarray, shape (n_arcs,)
        ``p(a)`` for each internal arc.
    outbound : ndarray, shape (r,)
        ``p`` of the arc leaving the internal graph into tail ``j``.
    """

    internal: np.ndarray
    outbound: np.ndarray

    def __post_init__(self):
        for name in ("internal", "outbound"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def vertex_sums(self, tg: TailedGraph) -> np.ndarray:
        sums = np.zeros(tg.n_vertices)
        np.add.at(sums, tg.internal.origin, self.internal)
        np.add.at(sums, tg.attach, self.outbound)
        return sums


@dataclass(frozen=True)
class KernelValidation:
    residuals: np.ndarray
    max_residual: float
    ok: bool
    starved_vertices: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_kernel(tg: TailedGraph, p: TransitionKernel) -> KernelValidation:
    """Check shapes, the ``(0, 1]`` range and per-vertex normalization.

    Structural problems (wrong length, a probability outside ``(0, 1]``)
    raise ``ValueError``; normalization failures are reported in the
    returned value. Attach vertices without internal arcs, whose whole mass
    leaves through tails, are listed in ``starved_vertices`` but do not fail
    validation.
    """
    if p.internal.shape != (tg.n_arcs,):
        raise ValueError(f"kernel has {p.internal.size} internal probabilities, "
                         f"graph has {tg.n_arcs} internal arcs")
    if p.outbound.shape != (tg.r,):
        raise ValueError(f"kernel has {p.outbound.size} boundary probabilities, "
                         f"graph has {tg.r} tails")
    g = tg.internal
    for a, x in enumerate(p.internal):
        if not 0.0 < x <= 1.0:
            raise ValueError(f"p({g.arc_label(a)}) = {x} outside (0, 1]")
    for j, x in enumerate(p.outbound):
        if not 0.0 < x <= 1.0:
            raise ValueError(f"p(tail {j} outbound) = {x} outside (0, 1]")
    residuals = np.abs(p.vertex_sums(tg) - 1.0)
    worst = float(residuals.max(initial=0.0))
    # p > 0 on every stored arc, so only a vertex with no internal arcs can
    # send all of its mass into tails
    starved = tuple(int(u) for u in np.unique(tg.attach) if g.degree(u) == 0)
    return KernelValidation(residuals=residuals, max_residual=worst,
                            ok=worst <= NORMALIZATION_TOL,
                            starved_vertices=starved)


@dataclass(frozen=True)
class ReversibleMeasure:
    """Vertex and edge weights satisfying detailed balance.

    ``m_E`` is indexed by internal edge (``arc // 2``) and ``m_E_boundary``
    by tail.
    """

    m_V: np.ndarray
    m_E: np.ndarray
    m_E_boundary: np.ndarray

    @property
    def m_delta(self) -> float:
        return float(self.m_E_boundary.sum())

    def arc_conductance(self) -> np.ndarray:
        """``m_E(|a|)`` for each internal arc."""
        return np.repeat(self.m_E, 2)

    def scaled(self, c: float) -> "ReversibleMeasure":
        return ReversibleMeasure(self.m_V * c, self.m_E * c, self.m_E_boundary * c)


@dataclass(frozen=True)
class NonReversible:
    """Verdict returned when detailed balance fails.

    ``witness`` is the fundamental cycle (arc ids) closed by the worst
    violating edge.
    """

    witness: list = field(default_factory=list)
    max_violation: float = 0.0

    def __bool__(self) -> bool:
        return False


def find_reversible_measure(tg: TailedGraph, p: TransitionKernel, pin: tuple[int, float] = (0, 1.0)):
    """Reversible measure of the kernel, or a :class:`NonReversible` verdict.

    ``m_V`` is propagated along a BFS spanning tree from vertex 0 with
    ``m_V(t(a)) = m_V(o(a)) p(a) / p(inv a)`` and detailed balance is then
    checked on every arc.

    The measure is only defined up to a positive factor; ``pin = (u, c)``
    fixes it by ``m_V(u) = c``. Stationary amplitudes do not depend on the
    choice, currents scale with ``sqrt(c)``.
    """
    u_pin, c_pin = pin
    if not c_pin > 0:
        raise ValueError("pinned vertex measure must be positive")
    if not 0 <= u_pin < tg.internal.n_vertices:
        raise ValueError(f"pinned vertex {u_pin} out of range")
    g = tg.internal
    parent_arc, depth, component = spanning_forest(g)
    if g.n_vertices and component.max() > 0:
        raise ValueError("internal graph must be connected")

    m_V = np.ones(g.n_vertices)
    for u in np.argsort(depth, kind="stable"):
        a = parent_arc[u]
        if a >= 0:
            m_V[u] = m_V[g.origin[a]] * p.internal[a] / p.internal[a ^ 1]

    fwd = p.internal[0::2] * m_V[g.origin[0::2]]
    bwd = p.internal[1::2] * m_V[g.origin[1::2]]
    rel = np.abs(fwd - bwd) / np.maximum(np.abs(fwd), np.abs(bwd))
    if rel.size and rel.max() > REVERSIBILITY_RTOL:
        e = int(np.argmax(rel))
        witness = []
        for cyc in cycle_basis(g):
            if cyc[0] // 2 == e:
                witness = cyc
                break
        return NonReversible(witness=witness, max_violation=float(rel[e]))

    m_E = 0.5 * (fwd + bwd)
    m_E_boundary = p.outbound * m_V[tg.attach]
    c = c_pin / m_V[u_pin]
    return ReversibleMeasure(m_V=m_V * c, m_E=m_E * c, m_E_boundary=m_E_boundary * c)


def boundary_conductance(m: ReversibleMeasure) -> np.ndarray:
    """Unit vector ``sqrt(m_E(|e_j|) / m(dG0))`` over the tails."""
    return np.sqrt(m.m_E_boundary / m.m_delta)


def kernel_from_conductances(tg: TailedGraph, m_E, m_E_boundary) -> TransitionKernel:
    """Reversible kernel ``p(a) = m_E(|a|) / m_V(o(a))`` from edge weights."""
    m_E = np.asarray(m_E, dtype=float)
    m_E_boundary = np.asarray(m_E_boundary, dtype=float)
    g = tg.internal
    arc_m = np.repeat(m_E, 2)
    m_V = np.zeros(g.n_vertices)
    np.add.at(m_V, g.origin, arc_m)
    np.add.at(m_V, tg.attach, m_E_boundary)
    return TransitionKernel(internal=arc_m / m_V[g.origin],
                            outbound=m_E_boundary / m_V[tg.attach])


def coin_vector(tg: TailedGraph, p: TransitionKernel, u: int) -> tuple[np.ndarray, np.ndarray]:
    """Out-arcs of ``u`` and the coin vector ``[sqrt p(a_1), ...]``.

    Outbound boundary arcs are included, using their boundary ids.
    """
    g = tg.internal
    tails = tg.tails_at(u)
    arcs = np.concatenate([g.out_arcs(u), tg.n_arcs + 2 * tails + 1])
    probs = np.concatenate([p.internal[g.out_arcs(u)], p.outbound[tails]])
    return arcs, np.sqrt(probs)
