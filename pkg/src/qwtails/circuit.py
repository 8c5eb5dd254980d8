"""
Electric-circuit view of reversible stationary states.

Sign convention: a current ``j(a)`` flows along arc ``a`` from ``o(a)`` to
``t(a)``, so ``j(a) = m_E(|a|) (phi(o(a)) - phi(t(a)))``. An *injection* at
a vertex is the net current entering it from outside the internal graph
(through its tails); Kirchhoff's current law then reads
``sum_{o(a)=u} j(a) = injection(u)`` over internal arcs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dynamics import WaveFunction, mu_qw
from .graph import SymmetricDigraph, TailedGraph, cycle_basis, spanning_forest
from .kernel import ReversibleMeasure, boundary_conductance

__all__ = [
    "CircuitSolution",
    "KirchhoffResiduals",
    "PowerDecomposition",
    "RegimeError",
    "inflow_overlap",
    "current_from_wavefunction",
    "boundary_injections",
    "solve_circuit",
    "verify_kirchhoff",
    "decompose_mu",
]

BALANCE_TOL = 1e-10


class RegimeError(ValueError):
    """Circuit quantities requested for a non-reversible kernel."""


@dataclass(frozen=True)
class KirchhoffResiduals:
    kcl: float
    antisymmetry: float
    kvl: float

    def max(self) -> float:
        return max(self.kcl, self.antisymmetry, self.kvl)


@dataclass(frozen=True)
class CircuitSolution:
    current: np.ndarray
    potential: np.ndarray
    kcl_residual: float
    kvl_residual: float


@dataclass(frozen=True)
class PowerDecomposition:
    """Vertexwise split of the finding probability.

    ``w_ec`` is ``sum_{t(a)=u} j(a)^2 / m_E`` taken literally (complex for
    complex input); ``w_ec_modulus`` uses ``|j(a)|^2`` instead. The two
    coincide for real input.
    """

    mu: np.ndarray
    w_ec: np.ndarray
    m_rw: np.ndarray
    w_ec_modulus: np.ndarray
    residual: float
    residual_modulus: float


def _require(m):
    if not isinstance(m, ReversibleMeasure):
        raise RegimeError("circuit decomposition undefined: underlying random walk is not reversible")


def inflow_overlap(m: ReversibleMeasure, alpha) -> complex:
    """``<m_dE, alpha>`` (``m_dE`` is real, so no conjugation is needed)."""
    return complex(np.dot(boundary_conductance(m), np.asarray(alpha, dtype=complex)))


def _full_conductance(m: ReversibleMeasure) -> np.ndarray:
    return np.concatenate([m.arc_conductance(), np.repeat(m.m_E_boundary, 2)])


def current_from_wavefunction(wave: WaveFunction, m) -> np.ndarray:
    """Current on every arc, in the layout of :meth:`WaveFunction.full`.

    ``j(a) = sqrt(m_E) Psi(a) - m_E <m_dE, alpha> / sqrt(m(dG0))``.
    """
    _require(m)
    cond = _full_conductance(m)
    c = inflow_overlap(m, wave.boundary_in) / np.sqrt(m.m_delta)
    return np.sqrt(cond) * wave.full() - cond * c


def boundary_injections(tg: TailedGraph, alpha, m) -> np.ndarray:
    """Current entering each vertex through its tails, from ``alpha`` and ``m`` only."""
    _require(m)
    alpha = np.asarray(alpha, dtype=complex)
    c = inflow_overlap(m, alpha) / np.sqrt(m.m_delta)
    j_in = np.sqrt(m.m_E_boundary) * alpha - m.m_E_boundary * c
    inj = np.zeros(tg.n_vertices, dtype=complex)
    np.add.at(inj, tg.attach, j_in)
    return inj


def _laplacian(g: SymmetricDigraph, conductance) -> sp.csr_matrix:
    arc_c = np.repeat(np.asarray(conductance, dtype=float), 2)
    n = g.n_vertices
    adj = sp.csr_matrix((arc_c, (g.origin, g.terminus)), shape=(n, n))
    return (sp.diags(np.asarray(adj.sum(axis=1)).ravel()) - adj).tocsr()


def verify_kirchhoff(g: SymmetricDigraph, current, conductance, basis=None, injections=None) -> KirchhoffResiduals:
    """Residuals of Kirchhoff's laws for an internal arc current.

    KCL is checked in both forms, outflow ``sum_{o(a)=u} j(a) = inj(u)``
    and inflow ``sum_{t(a)=u} j(a) = -inj(u)``, so a fault on one arc shows
    up at both of its endpoints. KVL is checked on ``basis`` (the
    fundamental cycles by default) with ``conductance`` given per edge.
    """
    j = np.asarray(current, dtype=complex)
    inj = np.zeros(g.n_vertices, dtype=complex) if injections is None else np.asarray(injections)
    out_sum = np.zeros(g.n_vertices, dtype=complex)
    in_sum = np.zeros(g.n_vertices, dtype=complex)
    np.add.at(out_sum, g.origin, j)
    np.add.at(in_sum, g.terminus, j)
    kcl = max(np.abs(out_sum - inj).max(initial=0.0), np.abs(in_sum + inj).max(initial=0.0))
    anti = np.abs(j + j[np.arange(g.n_arcs) ^ 1]).max(initial=0.0)
    if basis is None:
        basis = cycle_basis(g)
    arc_c = np.repeat(np.asarray(conductance, dtype=float), 2)
    kvl = max((abs(np.sum(j[c] / arc_c[c])) for c in basis), default=0.0)
    return KirchhoffResiduals(kcl=float(kcl), antisymmetry=float(anti), kvl=float(kvl))


def solve_circuit(g: SymmetricDigraph, conductance, injections) -> CircuitSolution:
    """Currents and potentials of a resistor network with external injections.

    One potential per connected component is pinned to zero. Injections
    must sum to zero on every component.
    """
    inj = np.asarray(injections, dtype=complex)
    parent_arc, depth, comp = spanning_forest(g)
    n = g.n_vertices
    for label in np.unique(comp):
        total = inj[comp == label].sum()
        if abs(total) > BALANCE_TOL * max(1.0, np.abs(inj[comp == label]).sum()):
            raise ValueError(f"injections on component {label} sum to {total!r}, not zero")
    roots = np.flatnonzero(parent_arc < 0)
    free = np.setdiff1d(np.arange(n), roots)
    L = _laplacian(g, conductance)
    phi = np.zeros(n, dtype=complex)
    if free.size:
        Lr = L[free][:, free].tocsc()
        solve = spla.factorized(Lr)
        phi[free] = solve(inj[free].real) + 1j * solve(inj[free].imag)
    current = np.repeat(np.asarray(conductance, dtype=float), 2) * (phi[g.origin] - phi[g.terminus])
    res = verify_kirchhoff(g, current, conductance, injections=inj)
    return CircuitSolution(current=current, potential=phi,
                           kcl_residual=max(res.kcl, res.antisymmetry), kvl_residual=res.kvl)


def decompose_mu(tg: TailedGraph, wave: WaveFunction, m, current=None) -> PowerDecomposition:
    """Split ``mu_QW`` into electric power plus a multiple of ``m_V``.

    Arcs entering ``u`` include the inbound tail arcs. Residuals are the
    max vertexwise gaps ``|mu - w_ec - m_rw|`` for both forms of the power.
    """
    _require(m)
    if current is None:
        current = current_from_wavefunction(wave, m)
    g = tg.internal
    n0 = g.n_arcs
    cond = _full_conductance(m)
    power = current ** 2 / cond
    power_mod = np.abs(current) ** 2 / cond
    inbound = n0 + 2 * np.arange(tg.r)
    heads = np.concatenate([g.terminus, tg.attach])
    arcs = np.concatenate([np.arange(n0), inbound])
    w = np.zeros(g.n_vertices, dtype=complex)
    w_mod = np.zeros(g.n_vertices)
    np.add.at(w, heads, power[arcs])
    np.add.at(w_mod, heads, power_mod[arcs])
    m_rw = abs(inflow_overlap(m, wave.boundary_in)) ** 2 / m.m_delta * m.m_V
    mu = mu_qw(tg, wave)
    return PowerDecomposition(
        mu=mu, w_ec=w, m_rw=m_rw, w_ec_modulus=w_mod,
        residual=float(np.abs(mu - w - m_rw).max(initial=0.0)),
        residual_modulus=float(np.abs(mu - w_mod - m_rw).max(initial=0.0)),
    )
