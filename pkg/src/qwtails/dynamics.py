"""
Szegedy evolution, the induced dynamical system on internal arcs, and its
stationary state.

Local rule at a vertex ``u`` with out-arcs ``a_1 .. a_d``::

    Psi'(a_i) = sum_k (2 sqrt(p(a_i) p(a_k)) - delta_ik) Psi(inv a_k)

i.e. every arc entering ``u`` is first reversed, then the Szegedy coin
``2 v v^T - I`` with ``v = [sqrt p(a_1), ..., sqrt p(a_d)]`` is applied.

Restricting to internal arcs gives ``psi_{n+1} = E psi_n + rho`` where ``E``
is the internal block of the evolution and ``rho`` collects the constant
inflow arriving along the tails.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import SymmetricDigraph, TailedGraph, Truncation, truncate
from .kernel import TAIL_PROBABILITY, TransitionKernel, boundary_conductance

__all__ = [
    "DENSE_LIMIT",
    "ConvergenceError",
    "InconsistentSystemError",
    "WaveFunction",
    "InducedSystem",
    "StationaryReport",
    "local_coin",
    "evolution_matrix",
    "apply_U",
    "truncated_kernel",
    "build_induced_system",
    "iterate",
    "iterate_steps",
    "direct_solve",
    "stationary_state",
    "extract_outflow",
    "truncated_evolution_oracle",
    "cycle_vector",
    "check_cycle_eigenvector",
    "mu_qw",
    "mass",
    "vertex_flux",
    "edge_vertex_residual",
    "nonreversible_residuals",
    "reversible_edge_residual",
]

DENSE_LIMIT = 2000
DEFAULT_TOL = 1e-10
DEFAULT_N_MAX = 200_000
STREAK = 10


class ConvergenceError(RuntimeError):
    """Iteration failed to settle within ``n_max`` steps."""

    def __init__(self, message, residual, iterations, oscillating=False):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.oscillating = oscillating


class InconsistentSystemError(RuntimeError):
    pass


@dataclass(frozen=True)
class WaveFunction:
    """Stationary amplitudes on internal arcs plus tail boundary values."""

    amplitudes: np.ndarray
    boundary_in: np.ndarray
    boundary_out: np.ndarray

    def full(self) -> np.ndarray:
        """Amplitudes indexed by tailed-graph arc id (internal, then e_j / inverse pairs)."""
        bd = np.empty(2 * self.boundary_in.size, dtype=complex)
        bd[0::2] = self.boundary_in
        bd[1::2] = self.boundary_out
        return np.concatenate([self.amplitudes.astype(complex), bd])


@dataclass(frozen=True)
class InducedSystem:
    E: object  # ndarray or scipy sparse matrix
    rho: np.ndarray

    @property
    def n(self) -> int:
        return self.rho.size

    def dense(self) -> np.ndarray:
        return self.E.toarray() if sp.issparse(self.E) else np.asarray(self.E)

    def residual(self, psi: np.ndarray) -> float:
        return float(np.abs(self.E @ psi + self.rho - psi).max(initial=0.0))


@dataclass
class StationaryReport:
    psi: np.ndarray
    method: str
    iterations_used: int
    fixed_point_residual: float
    cross_method_gap: float = float("nan")
    nullity: int | None = None
    wave: WaveFunction | None = None


def local_coin(u) -> np.ndarray:
    """Szegedy matrix ``2 u u^* - I`` of a unit vector."""
    u = np.asarray(u)
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise ValueError(f"coin vector must have unit norm, got {np.linalg.norm(u)!r}")
    return 2.0 * np.outer(u, u.conj()) - np.eye(u.size)


def evolution_matrix(g: SymmetricDigraph, p_arcs, dense: bool | None = None):
    """Matrix of the evolution on a finite graph (or its internal block).

    ``p_arcs`` gives ``p(a)`` for every arc of ``g``. When the
    probabilities out of some vertex sum to less than one, the missing mass
    belongs to arcs outside ``g`` and the result is the corresponding
    sub-block of the full unitary.
    """
    sq = np.sqrt(np.asarray(p_arcs, dtype=float))
    rows, cols, vals = [], [], []
    for u in range(g.n_vertices):
        out = g.out_arcs(u)
        if out.size == 0:
            continue
        block = 2.0 * np.outer(sq[out], sq[out]) - np.eye(out.size)
        rows.append(np.repeat(out, out.size))
        cols.append(np.tile(out ^ 1, out.size))
        vals.append(block.ravel())
    n = g.n_arcs
    if rows:
        mat = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                            shape=(n, n))
    else:
        mat = sp.csr_matrix((n, n))
    if dense is None:
        dense = n <= DENSE_LIMIT
    return mat.toarray() if dense else mat


def apply_U(g: SymmetricDigraph, p_arcs, psi) -> np.ndarray:
    """One evolution step on a finite graph, computed vertex by vertex."""
    psi = np.asarray(psi, dtype=complex)
    sq = np.sqrt(np.asarray(p_arcs, dtype=float))
    out_psi = np.zeros_like(psi)
    for u in range(g.n_vertices):
        out = g.out_arcs(u)
        if out.size == 0:
            continue
        incoming = psi[out ^ 1]
        v = sq[out]
        out_psi[out] = 2.0 * v * (v @ incoming) - incoming
    return out_psi


def truncated_kernel(tg: TailedGraph, p: TransitionKernel, tr: Truncation) -> np.ndarray:
    """Kernel on a truncation: 1/2 along tails, 1 at each leaf."""
    q = np.full(tr.graph.n_arcs, TAIL_PROBABILITY)
    q[tr.internal_arcs] = p.internal
    q[tr.outbound] = p.outbound
    for verts in tr.tail_vertices:
        leaf = verts[-1]
        q[tr.graph.out_arcs(leaf)] = 1.0
    return q


def build_induced_system(tg: TailedGraph, p: TransitionKernel, alpha) -> InducedSystem:
    """Internal block ``E`` and inflow ``rho`` for a constant input ``alpha``.

    ``rho(a) = 2 sqrt(p(a)) sum_j sqrt(p(out_j)) alpha_j`` over the tails
    attached at ``o(a)``, and zero away from attach vertices.
    """
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (tg.r,):
        raise ValueError(f"alpha must have length {tg.r}")
    g = tg.internal
    E = evolution_matrix(g, p.internal)
    source = np.zeros(g.n_vertices, dtype=complex)
    np.add.at(source, tg.attach, np.sqrt(p.outbound) * alpha)
    rho = 2.0 * np.sqrt(p.internal) * source[g.origin]
    return InducedSystem(E=E, rho=rho)


def iterate_steps(system: InducedSystem, n: int) -> np.ndarray:
    """``psi_n`` of the recursion started from ``psi_0 = 0``."""
    psi = np.zeros(system.n, dtype=complex)
    for _ in range(n):
        psi = system.E @ psi + system.rho
    return psi


def iterate(system: InducedSystem, n_max: int = DEFAULT_N_MAX, tol: float = DEFAULT_TOL,
            stride: int | None = None) -> StationaryReport:
    """Run ``psi_{k+1} = E psi_k + rho`` from zero until it settles.

    Convergence means ``max|psi_{k+1} - psi_k| < tol`` on ``STREAK``
    consecutive steps. If that never happens but the even and odd
    subsequences have each settled, the error is flagged as oscillating.

    After the first ``stride`` single steps the recursion advances ``stride``
    steps at a time via ``psi_{k+B} = E^B psi_k + psi_B`` (same sequence,
    far fewer matrix products); the convergence test is still applied to
    single steps at every stride boundary. Keep ``stride`` odd: with an even
    stride, rounding errors fed into eigenvalue -1 modes pile up instead of
    cancelling.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = system.n
    psi = np.zeros(n, dtype=complex)
    if not np.any(system.rho):
        return StationaryReport(psi=psi, method="iteration", iterations_used=0,
                                fixed_point_residual=0.0)
    E, rho = system.E, system.rho
    if stride is None:
        stride = 255 if n <= DENSE_LIMIT else 1

    def step(x):
        return E @ x + rho

    streak = 0
    diff = np.inf
    k = 0
    # plain steps first; cheap instances finish here
    while k < min(n_max, max(stride, STREAK)):
        new = step(psi)
        diff = float(np.abs(new - psi).max())
        psi = new
        k += 1
        streak = streak + 1 if diff < tol else 0
        if streak >= STREAK:
            return StationaryReport(psi=psi, method="iteration", iterations_used=k,
                                    fixed_point_residual=system.residual(psi))
    if stride > 1 and k < n_max:
        EB = np.linalg.matrix_power(system.dense(), stride)
        psi_B = iterate_steps(system, stride)
        while k + stride + STREAK <= n_max:
            psi = EB @ psi + psi_B
            k += stride
            diff = float(np.abs(step(psi) - psi).max())
            if diff >= tol:
                continue
            trial, ok = psi, True
            for _ in range(STREAK):
                new = step(trial)
                ok = float(np.abs(new - trial).max()) < tol
                trial = new
                k += 1
                if not ok:
                    break
            psi = trial
            if ok:
                return StationaryReport(psi=psi, method="iteration", iterations_used=k,
                                        fixed_point_residual=system.residual(psi))
    while k < n_max:
        new = step(psi)
        diff = float(np.abs(new - psi).max())
        psi = new
        k += 1
        streak = streak + 1 if diff < tol else 0
        if streak >= STREAK:
            return StationaryReport(psi=psi, method="iteration", iterations_used=k,
                                    fixed_point_residual=system.residual(psi))
    diff = float(np.abs(step(psi) - psi).max())
    two_step = float(np.abs(step(step(psi)) - psi).max())
    oscillating = two_step < tol <= diff
    msg = f"no convergence after {n_max} steps (last step change {diff:.3e})"
    if oscillating:
        msg += f"; even/odd subsequences settle (two-step change {two_step:.3e})"
    raise ConvergenceError(msg, residual=diff, iterations=n_max, oscillating=oscillating)


def direct_solve(system: InducedSystem, rtol: float = 1e-10, consistency_tol: float = 1e-8) -> StationaryReport:
    """Minimum-norm solution of ``(I - E) psi = rho``.

    The minimum-norm solution is the one orthogonal to ``ker(I - E)``,
    which the stationary state must be. ``nullity`` is the dimension of that
    kernel as seen at relative singular-value cutoff ``rtol`` (dense path
    only).
    """
    n = system.n
    if not np.any(system.rho):
        psi = np.zeros(n, dtype=complex)
        nullity = None
        if n <= DENSE_LIMIT:
            s = np.linalg.svd(np.eye(n) - system.dense(), compute_uv=False)
            nullity = int(np.sum(s <= rtol * max(s.max(initial=0.0), 1.0)))
        return StationaryReport(psi=psi, method="direct-solve", iterations_used=0,
                                fixed_point_residual=0.0, nullity=nullity)
    if n <= DENSE_LIMIT:
        M = np.eye(n) - system.dense()
        psi, _, rank, _ = np.linalg.lstsq(M.astype(complex), system.rho, rcond=rtol)
        nullity = n - int(rank)
    else:
        M = (sp.identity(n, format="csr") - system.E).astype(complex)
        psi = spla.lsqr(M, system.rho, atol=1e-15, btol=1e-15, iter_lim=50 * n)[0]
        nullity = None
    res = system.residual(psi)
    if res > consistency_tol:
        raise InconsistentSystemError(f"(I - E) psi = rho inconsistent: residual {res:.3e}")
    return StationaryReport(psi=psi, method="direct-solve", iterations_used=0,
                            fixed_point_residual=res, nullity=nullity)


def extract_outflow(tg: TailedGraph, p: TransitionKernel, psi, alpha) -> np.ndarray:
    """Outflow ``beta_j`` on the arc from ``o(P_j)`` into tail ``j``."""
    psi = np.asarray(psi, dtype=complex)
    alpha = np.asarray(alpha, dtype=complex)
    g = tg.internal
    # sum over out-arcs b of u of sqrt(p(b)) Psi(inv b), tails included
    flux = np.zeros(g.n_vertices, dtype=complex)
    np.add.at(flux, g.origin, np.sqrt(p.internal) * psi[np.arange(g.n_arcs) ^ 1])
    np.add.at(flux, tg.attach, np.sqrt(p.outbound) * alpha)
    return 2.0 * np.sqrt(p.outbound) * flux[tg.attach] - alpha


def stationary_state(tg: TailedGraph, p: TransitionKernel, alpha, method: str = "direct-solve",
                     tol: float = DEFAULT_TOL, n_max: int = DEFAULT_N_MAX) -> StationaryReport:
    """Stationary state of the walk with constant inflow ``alpha``.

    ``method`` is ``"iteration"``, ``"direct-solve"`` or ``"both"``; with
    ``"both"`` the direct solution is returned and ``cross_method_gap``
    records its sup-distance from the iterated one.
    """
    aliases = {"iterate": "iteration", "solve": "direct-solve"}
    method = aliases.get(method, method)
    if method not in ("iteration", "direct-solve", "both"):
        raise ValueError(f"unknown method {method!r}")
    alpha = np.asarray(alpha, dtype=complex)
    system = build_induced_system(tg, p, alpha)
    if method == "iteration":
        report = iterate(system, n_max=n_max, tol=tol)
    elif method == "direct-solve":
        report = direct_solve(system)
    else:
        it = iterate(system, n_max=n_max, tol=tol)
        report = direct_solve(system)
        report.method = "both"
        report.iterations_used = it.iterations_used
        report.cross_method_gap = float(np.abs(it.psi - report.psi).max(initial=0.0))
    beta = extract_outflow(tg, p, report.psi, alpha)
    report.wave = WaveFunction(amplitudes=report.psi, boundary_in=alpha, boundary_out=beta)
    return report


def truncated_evolution_oracle(tg: TailedGraph, p: TransitionKernel, alpha, n: int):
    """Evolve the full unitary ``n`` times on tails cut at length ``n + 2``.

    Returns ``(truncation, Psi_n)``. Inflow has not yet reached the cut
    ends, so ``Psi_n`` restricted to internal arcs equals ``psi_n``.
    """
    alpha = np.asarray(alpha, dtype=complex)
    tr = truncate(tg, n + 2)
    q = truncated_kernel(tg, p, tr)
    psi = np.zeros(tr.graph.n_arcs, dtype=complex)
    for j, arcs in enumerate(tr.inward):
        psi[arcs] = alpha[j]
    U = evolution_matrix(tr.graph, q)
    for _ in range(n):
        psi = U @ psi
    return tr, psi


def cycle_vector(cycle: Sequence[int], arc_conductance, n_arcs: int) -> np.ndarray:
    """``+1/sqrt(m_E)`` along the cycle, ``-1/sqrt(m_E)`` on reversed arcs."""
    w = np.zeros(n_arcs)
    for a in cycle:
        s = 1.0 / np.sqrt(arc_conductance[a])
        w[a] += s
        w[a ^ 1] -= s
    return w


def check_cycle_eigenvector(system: InducedSystem, w, psi) -> tuple[float, float]:
    """``(max|E w - w|, |<w, psi>|)``; both vanish for a cycle vector."""
    w = np.asarray(w)
    return float(np.abs(system.E @ w - w).max()), float(abs(np.vdot(w, psi)))


def mu_qw(tg: TailedGraph, wave: WaveFunction, u: int | None = None):
    """Relative finding probability: sum of ``|Psi|^2`` over arcs into ``u``.

    Inbound tail arcs contribute ``|alpha_j|^2``. Returns the per-vertex
    array when ``u`` is omitted.
    """
    g = tg.internal
    mu = np.zeros(g.n_vertices)
    np.add.at(mu, g.terminus, np.abs(wave.amplitudes) ** 2)
    np.add.at(mu, tg.attach, np.abs(wave.boundary_in) ** 2)
    return mu if u is None else float(mu[u])


def mass(wave: WaveFunction) -> float:
    """Total ``|Psi|^2`` on arcs ending inside the internal graph."""
    return float(np.sum(np.abs(wave.amplitudes) ** 2) + np.sum(np.abs(wave.boundary_in) ** 2))


def vertex_flux(tg: TailedGraph, p: TransitionKernel, wave: WaveFunction) -> np.ndarray:
    """``sum_{t(b)=u} sqrt(p(inv b)) Psi(b)`` for each internal vertex."""
    g = tg.internal
    flux = np.zeros(g.n_vertices, dtype=complex)
    np.add.at(flux, g.terminus, np.sqrt(p.internal[np.arange(g.n_arcs) ^ 1]) * wave.amplitudes)
    np.add.at(flux, tg.attach, np.sqrt(p.outbound) * wave.boundary_in)
    return flux


def edge_vertex_residual(tg: TailedGraph, p: TransitionKernel, wave: WaveFunction) -> float:
    """Max deviation from ``(Psi(a) + Psi(inv a))/2 = sqrt(p(a)) flux(o(a))``.

    Checked on both orientations of every internal edge and on the
    internal side of every boundary edge.
    """
    g = tg.internal
    flux = vertex_flux(tg, p, wave)
    psi = wave.amplitudes
    edge_avg = 0.5 * (psi + psi[np.arange(g.n_arcs) ^ 1])
    res_int = np.abs(edge_avg - np.sqrt(p.internal) * flux[g.origin])
    bd_avg = 0.5 * (wave.boundary_in + wave.boundary_out)
    res_bd = np.abs(bd_avg - np.sqrt(p.outbound) * flux[tg.attach])
    return float(max(res_int.max(initial=0.0), res_bd.max(initial=0.0)))


def nonreversible_residuals(tg: TailedGraph, p: TransitionKernel, wave: WaveFunction) -> tuple[float, float]:
    """``(max|Psi(a) + Psi(inv a)|, max|flux(u)|)`` including boundary arcs."""
    g = tg.internal
    psi = wave.amplitudes
    anti = np.abs(psi + psi[np.arange(g.n_arcs) ^ 1]).max(initial=0.0)
    anti = max(anti, np.abs(wave.boundary_in + wave.boundary_out).max(initial=0.0))
    return float(anti), float(np.abs(vertex_flux(tg, p, wave)).max(initial=0.0))


def reversible_edge_residual(tg: TailedGraph, wave: WaveFunction, m) -> float:
    """Max deviation from ``Psi(a) + Psi(inv a) = 2 sqrt(m_E) <m_dE, alpha> / sqrt(m(dG0))``."""
    g = tg.internal
    c = np.dot(boundary_conductance(m), wave.boundary_in) / np.sqrt(m.m_delta)
    psi = wave.amplitudes
    lhs = psi + psi[np.arange(g.n_arcs) ^ 1]
    res = np.abs(lhs - 2.0 * np.sqrt(m.arc_conductance()) * c).max(initial=0.0)
    bd = np.abs(wave.boundary_in + wave.boundary_out - 2.0 * np.sqrt(m.m_E_boundary) * c)
    return float(max(res, bd.max(initial=0.0)))
