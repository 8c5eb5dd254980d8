"""
Run-spec files and report serialization.

A run spec is a JSON document::

    {
      "graph":  {"vertices": 4, "edges": [[0, 1], [1, 2], [2, 0], [2, 3]]},
      "tails":  [0, 1],
      "kernel": {"0->1[0]": "1/3", ..., "0->tail[0]": "1/3", "1->tail[1]": "1/3"},
      "inflow": [[1, 0], [0, 0]],
      "solver": {"method": "both", "tol": 1e-10, "n_max": 200000}
    }

Internal arcs are addressed as ``"u->v[k]"`` (``k`` = index among parallel
edges, ``"u->v"`` means ``k = 0``); the arc from ``o(P_j)`` into tail ``j``
is ``"u->tail[j]"``. Probabilities may be numbers or exact fractions.
Complex numbers are ``[re, im]`` pairs.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DEFAULT_N_MAX, DEFAULT_TOL
from .graph import TailedGraph, attach_tails, build_graph
from .kernel import TransitionKernel, validate_kernel
from .reference import parse_probability

__all__ = [
    "SpecError",
    "RunSpec",
    "parse_run_spec",
    "load_run_spec",
    "spec_from_instance",
    "complex_list",
    "export_dense",
    "load_dense",
    "dumps_report",
]

_TAIL_KEY = re.compile(r"^\s*(\d+)\s*->\s*tail\s*\[\s*(\d+)\s*\]\s*$")
_TOP_KEYS = {"graph", "tails", "kernel", "inflow", "solver"}
_SOLVER_KEYS = {"method", "tol", "n_max"}
_METHODS = {"iterate", "iteration", "solve", "direct-solve", "both"}


class SpecError(ValueError):
    """Malformed or invalid run spec; the message names the offending field."""


@dataclass
class RunSpec:
    n_vertices: int
    edges: list
    tails: list
    kernel: dict
    inflow: np.ndarray
    method: str = "both"
    tol: float = DEFAULT_TOL
    n_max: int = DEFAULT_N_MAX
    _built: tuple = field(default=None, repr=False, compare=False)

    def build(self) -> tuple[TailedGraph, TransitionKernel, np.ndarray]:
        if self._built is None:
            self._built = _build(self)
        return self._built

    def to_dict(self) -> dict:
        tg, p, _ = self.build()
        g = tg.internal
        kernel = {g.arc_label(a): float(p.internal[a]) for a in range(g.n_arcs)}
        for j, u in enumerate(tg.attach):
            kernel[f"{u}->tail[{j}]"] = float(p.outbound[j])
        return {
            "graph": {"vertices": self.n_vertices, "edges": [list(e) for e in self.edges]},
            "tails": list(self.tails),
            "kernel": kernel,
            "inflow": complex_list(self.inflow),
            "solver": {"method": self.method, "tol": self.tol, "n_max": self.n_max},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RunSpec):
            return NotImplemented
        a, b = self.build(), other.build()
        return (a[0] == b[0]
                and np.array_equal(a[1].internal, b[1].internal)
                and np.array_equal(a[1].outbound, b[1].outbound)
                and np.array_equal(a[2], b[2])
                and (self.method, self.tol, self.n_max) == (other.method, other.tol, other.n_max))


def complex_list(z) -> list:
    return [[float(np.real(x)), float(np.imag(x))] for x in np.asarray(z, dtype=complex)]


def _complex(value, where) -> complex:
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        raise SpecError(f"{where}: expected [re, im] pair, got {value!r}")
    return complex(value[0], value[1])


def _int(value, where) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError(f"{where}: expected integer, got {value!r}")
    return value


def parse_run_spec(text: str) -> RunSpec:
    """Parse and validate a run spec; raises :class:`SpecError` on any defect."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise SpecError("top level: expected an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise SpecError(f"top level: unknown field(s) {sorted(unknown)}")
    for key in ("graph", "tails", "kernel", "inflow"):
        if key not in doc:
            raise SpecError(f"top level: missing field {key!r}")

    graph = doc["graph"]
    if not isinstance(graph, dict) or set(graph) - {"vertices", "edges"}:
        raise SpecError("graph: expected object with 'vertices' and 'edges'")
    n = _int(graph.get("vertices"), "graph.vertices")
    edges_raw = graph.get("edges", [])
    if not isinstance(edges_raw, list):
        raise SpecError("graph.edges: expected a list")
    edges = []
    for i, e in enumerate(edges_raw):
        if not isinstance(e, list) or len(e) != 2:
            raise SpecError(f"graph.edges[{i}]: expected [u, v]")
        edges.append((_int(e[0], f"graph.edges[{i}][0]"), _int(e[1], f"graph.edges[{i}][1]")))

    if not isinstance(doc["tails"], list):
        raise SpecError("tails: expected a list of vertex ids")
    tails = [_int(u, f"tails[{i}]") for i, u in enumerate(doc["tails"])]

    kernel = doc["kernel"]
    if not isinstance(kernel, dict):
        raise SpecError("kernel: expected an object mapping arc labels to probabilities")
    probs = {}
    for key, value in kernel.items():
        try:
            probs[key] = parse_probability(value)
        except (ValueError, ZeroDivisionError, TypeError):
            raise SpecError(f"kernel[{key!r}]: not a probability: {value!r}") from None

    if not isinstance(doc["inflow"], list):
        raise SpecError("inflow: expected a list of [re, im] pairs")
    inflow = np.array([_complex(z, f"inflow[{i}]") for i, z in enumerate(doc["inflow"])],
                      dtype=complex)

    solver = doc.get("solver", {})
    if not isinstance(solver, dict):
        raise SpecError("solver: expected an object")
    unknown = set(solver) - _SOLVER_KEYS
    if unknown:
        raise SpecError(f"solver: unknown field(s) {sorted(unknown)}")
    method = solver.get("method", "both")
    if method not in _METHODS:
        raise SpecError(f"solver.method: expected one of {sorted(_METHODS)}, got {method!r}")
    tol = solver.get("tol", DEFAULT_TOL)
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or tol <= 0:
        raise SpecError(f"solver.tol: expected positive number, got {tol!r}")
    n_max = _int(solver.get("n_max", DEFAULT_N_MAX), "solver.n_max")

    spec = RunSpec(n_vertices=n, edges=edges, tails=tails, kernel=probs, inflow=inflow,
                   method=method, tol=float(tol), n_max=n_max)
    spec.build()
    return spec


def _build(spec: RunSpec):
    try:
        g = build_graph(spec.edges, spec.n_vertices)
        tg = attach_tails(g, spec.tails)
    except ValueError as exc:
        raise SpecError(f"graph/tails: {exc}") from None
    if spec.inflow.shape != (tg.r,):
        raise SpecError(f"inflow: expected {tg.r} entries (one per tail), got {spec.inflow.size}")

    internal = np.full(g.n_arcs, np.nan)
    outbound = np.full(tg.r, np.nan)
    for key, value in spec.kernel.items():
        m = _TAIL_KEY.match(key)
        if m:
            u, j = int(m.group(1)), int(m.group(2))
            if j >= tg.r or tg.attach[j] != u:
                raise SpecError(f"kernel[{key!r}]: tail {j} is not attached at vertex {u}")
            outbound[j] = value
            continue
        try:
            internal[g.arc_id(key)] = value
        except KeyError as exc:
            raise SpecError(f"kernel[{key!r}]: {exc.args[0]}") from None
    for a in np.flatnonzero(np.isnan(internal)):
        raise SpecError(f"kernel: missing probability for arc {g.arc_label(a)!r}")
    for j in np.flatnonzero(np.isnan(outbound)):
        raise SpecError(f"kernel: missing probability for arc '{tg.attach[j]}->tail[{j}]'")

    p = TransitionKernel(internal=internal, outbound=outbound)
    try:
        report = validate_kernel(tg, p)
    except ValueError as exc:
        raise SpecError(f"kernel: {exc}") from None
    if not report.ok:
        u = int(np.argmax(report.residuals))
        raise SpecError(f"kernel: probabilities out of vertex {u} sum to "
                        f"{float(p.vertex_sums(tg)[u])!r} (residual {report.max_residual:.3e})")
    return tg, p, spec.inflow


def load_run_spec(path) -> RunSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_run_spec(fh.read())


def spec_from_instance(tg: TailedGraph, p: TransitionKernel, alpha, **solver) -> RunSpec:
    g = tg.internal
    kernel = {g.arc_label(a): float(p.internal[a]) for a in range(g.n_arcs)}
    for j, u in enumerate(tg.attach):
        kernel[f"{u}->tail[{j}]"] = float(p.outbound[j])
    return RunSpec(n_vertices=g.n_vertices, edges=g.edges, tails=[int(u) for u in tg.attach],
                   kernel=kernel, inflow=np.asarray(alpha, dtype=complex), **solver)


def export_dense(matrix) -> str:
    """Row-major text dump: one row per line, entries ``re,im`` separated by spaces."""
    M = np.asarray(matrix.toarray() if hasattr(matrix, "toarray") else matrix, dtype=complex)
    return "".join(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) + "\n" for row in M)


def load_dense(text: str) -> np.ndarray:
    rows = []
    for line in text.splitlines():
        if line.strip():
            rows.append([complex(*map(float, tok.split(","))) for tok in line.split()])
    return np.array(rows, dtype=complex)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_report(report: dict) -> str:
    """Deterministic JSON: insertion order kept, floats in shortest round-trip form."""
    return json.dumps(_plain(report), indent=2, allow_nan=True) + "\n"
