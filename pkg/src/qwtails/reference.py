"""
The triangle-plus-path benchmark C3*P_k and its closed forms.

Layout (``k >= 1``)::

    tail 1 -- 0 ----> 1 -- tail 2          b1 = 0->1, b2 = 1->2, b3 = 2->0
               ^     /                     (clockwise, probability p;
                \\   v                       reversed arcs carry q)
                  2 -- 3 -- ... -- k+2      path, 1/2 inside, leaf reflects

Tail 1 (the one carrying the unit inflow) sits at vertex 0 and tail 2 at
vertex 1; the path hangs off vertex 2. Every triangle vertex leaves the
triangle with probability ``r`` (into its tail or into the path).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dynamics import mass, stationary_state
from .graph import TailedGraph, attach_tails, build_graph
from .kernel import TransitionKernel, find_reversible_measure, kernel_from_conductances

__all__ = [
    "C3PkSpec",
    "C3PkInstance",
    "ClosedForm",
    "make_c3pk",
    "closed_form_reversible",
    "closed_form_nonreversible",
    "mass_reversible",
    "mass_nonreversible",
    "penetration_check",
    "divergence_scan",
    "scan_to_csv",
    "exceptional_two_tail_instance",
]

TRIANGLE_LABELS = ("b1", "b1_bar", "b2", "b2_bar", "b3", "b3_bar")


@dataclass(frozen=True)
class C3PkSpec:
    p: float
    q: float
    r: float
    k: int = 1

    def __post_init__(self):
        if min(self.p, self.q, self.r) <= 0:
            raise ValueError("p, q, r must be positive")
        if abs(self.p + self.q + self.r - 1.0) > 1e-12:
            raise ValueError(f"p + q + r = {self.p + self.q + self.r!r}, expected 1")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("path length k must be a positive integer")

    @property
    def reversible(self) -> bool:
        return self.p == self.q


@dataclass(frozen=True)
class C3PkInstance:
    spec: C3PkSpec
    graph: TailedGraph
    kernel: TransitionKernel
    alpha: np.ndarray
    labels: dict
    path_arcs: np.ndarray


def make_c3pk(spec: C3PkSpec) -> C3PkInstance:
    k = int(spec.k)
    edges = [(0, 1), (1, 2), (2, 0)] + [(2 + i, 3 + i) for i in range(k)]
    g = build_graph(edges, k + 3)
    tg = attach_tails(g, [0, 1])
    labels = {
        "b1": g.arc_id("0->1"), "b2": g.arc_id("1->2"), "b3": g.arc_id("2->0"),
    }
    for name in ("b1", "b2", "b3"):
        labels[name + "_bar"] = labels[name] ^ 1

    p = np.empty(g.n_arcs)
    for name in ("b1", "b2", "b3"):
        p[labels[name]] = spec.p
        p[labels[name + "_bar"]] = spec.q
    p[g.arc_id("2->3")] = spec.r
    leaf = k + 2
    for v in range(3, leaf):
        p[g.out_arcs(v)] = 0.5
    p[g.out_arcs(leaf)] = 1.0

    path_arcs = np.array(sorted(set(range(g.n_arcs)) - {labels[n] for n in TRIANGLE_LABELS}))
    return C3PkInstance(
        spec=spec,
        graph=tg,
        kernel=TransitionKernel(internal=p, outbound=[spec.r, spec.r]),
        alpha=np.array([1.0, 0.0], dtype=complex),
        labels=labels,
        path_arcs=path_arcs,
    )


@dataclass(frozen=True)
class ClosedForm:
    values: dict
    path_value: float
    mass: float

    def psi(self, inst: C3PkInstance) -> np.ndarray:
        """Closed-form amplitudes laid out on the instance's internal arcs."""
        out = np.full(inst.graph.n_arcs, self.path_value, dtype=float)
        for name, v in self.values.items():
            out[inst.labels[name]] = v
        return out


def mass_reversible(r: float, k: int) -> float:
    return (-17.0 / 12.0 + 2.0 / (3.0 * (1.0 - r)) + 3.0 / (4.0 * r) + k / 2.0) + 1.0


def mass_nonreversible(p: float, q: float, r: float) -> float:
    if p == q:
        raise ValueError("p == q is the reversible case")
    d = p ** 1.5 - q ** 1.5
    return 2.0 * r * (p * p + p * q + q * q) / d ** 2 + 1.0


def closed_form_reversible(r: float, k: int = 1) -> ClosedForm:
    """Stationary amplitudes for ``p = q = (1 - r)/2``."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    den = 6.0 * np.sqrt(2.0) * np.sqrt(r * (1.0 - r))
    values = {
        "b1": (3 + r) / den, "b1_bar": (3 - 7 * r) / den,
        "b2": (3 - 5 * r) / den, "b2_bar": (3 - r) / den,
        "b3": (3 - 5 * r) / den, "b3_bar": (3 - r) / den,
    }
    return ClosedForm(values=values, path_value=0.5, mass=mass_reversible(r, k))


def closed_form_nonreversible(p: float, q: float, r: float) -> ClosedForm:
    """Stationary amplitudes for ``p != q``; zero on the path."""
    if p == q:
        raise ValueError("p == q is the reversible case (closed form has a pole)")
    if min(p, q, r) <= 0 or abs(p + q + r - 1.0) > 1e-12:
        raise ValueError("need positive p, q, r summing to 1")
    d = p ** 1.5 - q ** 1.5
    b1 = np.sqrt(r * p * p) / d
    b2 = np.sqrt(r * p * q) / d
    b3 = np.sqrt(r * q * q) / d
    values = {"b1": b1, "b1_bar": -b1, "b2": b2, "b2_bar": -b2, "b3": b3, "b3_bar": -b3}
    return ClosedForm(values=values, path_value=0.0, mass=mass_nonreversible(p, q, r))


def penetration_check(tg: TailedGraph, psi, tol: float = 1e-9) -> str:
    """Classify the support of an internal stationary state.

    ``"full"`` if every internal edge carries amplitude on some orientation,
    ``"none"`` if nothing does, ``"partial"`` otherwise.
    """
    amp = np.abs(np.asarray(psi)).reshape(-1, 2).max(axis=1) > tol
    if amp.size == 0 or not amp.any():
        return "none"
    return "full" if amp.all() else "partial"


def divergence_scan(r: float, epsilons, k: int = 1, method: str = "direct-solve") -> list[dict]:
    """Mass of the internal graph as ``|p - q| = eps`` shrinks.

    Rows carry the simulated and closed-form masses; ``eps == 0`` is the
    reversible instance.
    """
    rows = []
    for eps in epsilons:
        eps = float(eps)
        p = (1.0 - r + eps) / 2.0
        q = (1.0 - r - eps) / 2.0
        inst = make_c3pk(C3PkSpec(p=p, q=q, r=r, k=k))
        rep = stationary_state(inst.graph, inst.kernel, inst.alpha, method=method)
        closed = mass_reversible(r, k) if eps == 0 else mass_nonreversible(p, q, r)
        rows.append({"epsilon": eps, "M_simulated": mass(rep.wave), "M_closed_form": closed})
    return rows


def scan_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["epsilon", "M_simulated", "M_closed_form"],
                       lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({key: repr(float(v)) for key, v in row.items()})
    return buf.getvalue()


def exceptional_two_tail_instance(k: int = 1, boundary=(1.0, 2.0)):
    """C3*P_k with both tails on vertex 0 and the input that cancels ``rho``.

    The kernel is the reversible one with unit conductance on every internal
    edge and ``boundary`` conductances on the two tails. Returns
    ``(graph, kernel, alpha)`` with ``alpha = (sqrt m_E(e_2), -sqrt m_E(e_1))``.
    """
    edges = [(0, 1), (1, 2), (2, 0)] + [(2 + i, 3 + i) for i in range(k)]
    tg = attach_tails(build_graph(edges, k + 3), [0, 0])
    kernel = kernel_from_conductances(tg, np.ones(k + 3), boundary)
    m = find_reversible_measure(tg, kernel)
    alpha = np.array([np.sqrt(m.m_E_boundary[1]), -np.sqrt(m.m_E_boundary[0])], dtype=complex)
    return tg, kernel, alpha


def parse_probability(text) -> float:
    """Accept a float or an exact fraction string such as ``"1/3"``."""
    if isinstance(text, (int, float)):
        return float(text)
    return float(Fraction(str(text).strip()))
