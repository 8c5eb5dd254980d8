"""
Command-line front end.

Exit codes: 0 pass, 1 numerical failure, 2 parse or validation error,
3 regime mismatch (circuit quantities requested for a non-reversible walk).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .checks import run_checks
from .circuit import (
    RegimeError,
    boundary_injections,
    current_from_wavefunction,
    decompose_mu,
    solve_circuit,
    verify_kirchhoff,
)
from .dynamics import ConvergenceError, InconsistentSystemError, build_induced_system, mass, stationary_state
from .graph import cycle_basis
from .kernel import find_reversible_measure, validate_kernel
from .reference import (
    TRIANGLE_LABELS,
    C3PkSpec,
    closed_form_nonreversible,
    closed_form_reversible,
    divergence_scan,
    make_c3pk,
    parse_probability,
    scan_to_csv,
)
from .scattering import verify_scattering
from .spec_io import SpecError, complex_list, dumps_report, export_dense, load_run_spec

EXIT_OK, EXIT_NUMERIC, EXIT_INVALID, EXIT_REGIME = 0, 1, 2, 3

STATIONARY_RESIDUAL = 1e-9
METHOD_GAP = 1e-8
SCATTER_RESIDUAL = 1e-8
CIRCUIT_GAP = 1e-8
KIRCHHOFF_RESIDUAL = 1e-9
DECOMPOSITION_RESIDUAL = 1e-9
GOLDEN_GAP = 1e-8
MASS_RTOL = 1e-6


def _arc_map(tg, values) -> dict:
    """Internal arcs by label, then boundary arcs as ``tail[j].in``/``tail[j].out``."""
    g = tg.internal
    vals = np.asarray(values, dtype=complex)
    out = {g.arc_label(a): [vals[a].real, vals[a].imag] for a in range(g.n_arcs)}
    for j in range(tg.r):
        for suffix, a in (("in", tg.inbound_arc(j)), ("out", tg.outbound_arc(j))):
            if a < vals.size:
                out[f"tail[{j}].{suffix}"] = [vals[a].real, vals[a].imag]
    return out


def _solver(args, spec):
    method = args.method or spec.method
    tol = args.tol if args.tol is not None else spec.tol
    n_max = args.n_max if args.n_max is not None else spec.n_max
    return method, tol, n_max


def _emit(args, report: dict) -> None:
    text = dumps_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_stationary(args) -> int:
    spec = load_run_spec(args.spec)
    tg, p, alpha = spec.build()
    method, tol, n_max = _solver(args, spec)
    if args.export_matrix:
        with open(args.export_matrix, "w", encoding="utf-8") as fh:
            fh.write(export_dense(build_induced_system(tg, p, alpha).dense()))
    rep = stationary_state(tg, p, alpha, method=method, tol=tol, n_max=n_max)
    ok = rep.fixed_point_residual <= STATIONARY_RESIDUAL
    if rep.method == "both":
        ok = ok and rep.cross_method_gap <= METHOD_GAP
    _emit(args, {
        "command": "stationary",
        "method": rep.method,
        "iterations_used": rep.iterations_used,
        "fixed_point_residual": rep.fixed_point_residual,
        "cross_method_gap": rep.cross_method_gap,
        "nullity": rep.nullity,
        "starved_vertices": list(validate_kernel(tg, p).starved_vertices),
        "mass": mass(rep.wave),
        "psi": _arc_map(tg, rep.wave.full()),
        "pass": ok,
    })
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_scatter(args) -> int:
    spec = load_run_spec(args.spec)
    tg, p, alpha = spec.build()
    method, tol, n_max = _solver(args, spec)
    if method == "both":
        method = "direct-solve"
    rep = verify_scattering(tg, p, alpha, method=method, tol=tol, n_max=n_max)
    ok = rep.residual_inf_norm < SCATTER_RESIDUAL
    _emit(args, {
        "command": "scatter",
        "regime": rep.regime,
        "alpha_in": complex_list(rep.alpha_in),
        "beta_out_measured": complex_list(rep.beta_out_measured),
        "beta_out_predicted": complex_list(rep.beta_out_predicted),
        "S_matrix": [complex_list(row) for row in rep.S_matrix],
        "residual_inf_norm": rep.residual_inf_norm,
        "pass": ok,
    })
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_circuit(args) -> int:
    spec = load_run_spec(args.spec)
    tg, p, alpha = spec.build()
    method, tol, n_max = _solver(args, spec)
    m = find_reversible_measure(tg, p, pin=args.pin_measure)
    if not m:
        raise RegimeError("circuit decomposition undefined: underlying random walk is not "
                          f"reversible (Kolmogorov violation {m.max_violation:.3e})")
    g = tg.internal
    rep = stationary_state(tg, p, alpha, method=method, tol=tol, n_max=n_max)
    j = current_from_wavefunction(rep.wave, m)
    inj = boundary_injections(tg, alpha, m)
    sol = solve_circuit(g, m.m_E, inj)
    kirch = verify_kirchhoff(g, j[:g.n_arcs], m.m_E, cycle_basis(g), inj)
    dec = decompose_mu(tg, rep.wave, m, j)
    gap = float(np.abs(sol.current - j[:g.n_arcs]).max(initial=0.0))
    ok = (gap <= CIRCUIT_GAP and kirch.max() <= KIRCHHOFF_RESIDUAL
          and dec.residual_modulus <= DECOMPOSITION_RESIDUAL)
    _emit(args, {
        "command": "circuit",
        "regime": "reversible",
        "boundary_current": complex_list(j[tg.inbound_arc(np.arange(tg.r))]),
        "vertex_injection": complex_list(inj),
        "current": _arc_map(tg, j),
        "potential": complex_list(sol.potential),
        "quantum_vs_laplacian": gap,
        "kcl_residual": kirch.kcl,
        "antisymmetry_residual": kirch.antisymmetry,
        "kvl_residual": kirch.kvl,
        "mu": dec.mu,
        "w_ec": complex_list(dec.w_ec),
        "w_ec_modulus": dec.w_ec_modulus,
        "m_rw": dec.m_rw,
        "decomposition_residual": dec.residual,
        "decomposition_residual_modulus": dec.residual_modulus,
        "pass": ok,
    })
    return EXIT_OK if ok else EXIT_NUMERIC


def _fraction(text: str) -> float:
    try:
        return parse_probability(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or fraction: {text!r}") from None


def _pin(text: str) -> tuple[int, float]:
    try:
        u, c = text.split("=")
        return int(u), parse_probability(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected U=VALUE, got {text!r}") from None


def _eps_list(text: str) -> list[float]:
    return [_fraction(tok) for tok in text.split(",") if tok.strip()]


def cmd_c3pk(args) -> int:
    r = args.r
    if args.scan_eps is not None:
        rows = divergence_scan(r, args.scan_eps, k=args.k)
        text = scan_to_csv(rows)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK

    p = args.p if args.p is not None else (1.0 - r) / 2.0
    q = args.q if args.q is not None else (1.0 - r) / 2.0
    spec = C3PkSpec(p=p, q=q, r=r, k=args.k)
    inst = make_c3pk(spec)
    closed = closed_form_reversible(r, args.k) if spec.reversible else closed_form_nonreversible(p, q, r)
    rep = stationary_state(inst.graph, inst.kernel, inst.alpha, method=args.method or "direct-solve",
                           tol=args.tol or 1e-12, n_max=args.n_max or 10**8)
    want = closed.psi(inst)
    got = rep.psi
    rows = [{"arc": name, "simulated": got[inst.labels[name]].real,
             "closed_form": closed.values[name],
             "abs_error": abs(got[inst.labels[name]] - closed.values[name])}
            for name in TRIANGLE_LABELS]
    path_err = float(np.abs(got[inst.path_arcs] - closed.path_value).max(initial=0.0))
    max_gap = float(np.abs(got - want).max())
    m_sim = mass(rep.wave)
    rel = abs(m_sim - closed.mass) / abs(closed.mass)
    ok = max_gap < GOLDEN_GAP and rel <= MASS_RTOL
    _emit(args, {
        "command": "c3pk",
        "p": p, "q": q, "r": r, "k": args.k,
        "branch": "reversible" if spec.reversible else "non-reversible",
        "triangle": rows,
        "path_value_closed_form": closed.path_value,
        "path_max_abs_error": path_err,
        "mass_simulated": m_sim,
        "mass_closed_form": closed.mass,
        "mass_relative_error": rel,
        "max_gap": max_gap,
        "pass": ok,
    })
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_check(args) -> int:
    spec = load_run_spec(args.spec)
    tg, p, alpha = spec.build()
    _, tol, n_max = _solver(args, spec)
    regime, results = run_checks(tg, p, alpha, tol=tol, n_max=n_max)
    ok = all(c.passed for c in results)
    _emit(args, {"command": "check", "regime": regime,
                 "starved_vertices": list(validate_kernel(tg, p).starved_vertices),
                 "checks": [c.as_dict() for c in results], "pass": ok})
    return EXIT_OK if ok else EXIT_NUMERIC


def _common(sp, spec_file=True):
    if spec_file:
        sp.add_argument("spec", help="run-spec JSON file")
    sp.add_argument("--method", choices=["iterate", "solve", "both", "iteration", "direct-solve"])
    sp.add_argument("--tol", type=float)
    sp.add_argument("--n-max", type=int, dest="n_max")
    sp.add_argument("--out", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qwtails", description="Stationary quantum walks on graphs with tails.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("stationary", help="stationary state of a run spec")
    _common(sp)
    sp.add_argument("--export-matrix", metavar="PATH",
                    help="also write the internal evolution block as re,im text")
    sp.set_defaults(func=cmd_stationary)

    sp = sub.add_parser("scatter", help="measured versus predicted outflow")
    _common(sp)
    sp.set_defaults(func=cmd_scatter)

    sp = sub.add_parser("circuit", help="currents, Kirchhoff residuals and power split")
    _common(sp)
    sp.add_argument("--pin-measure", type=_pin, default=(0, 1.0), metavar="U=VALUE",
                    help="fix the measure scale by m_V(U) = VALUE (default 0=1); "
                         "currents scale with its square root")
    sp.set_defaults(func=cmd_circuit)

    sp = sub.add_parser("c3pk", help="triangle-with-path reference model")
    _common(sp, spec_file=False)
    sp.add_argument("--p", type=_fraction, help="clockwise probability (default (1-r)/2)")
    sp.add_argument("--q", type=_fraction, help="counter-clockwise probability (default (1-r)/2)")
    sp.add_argument("--r", type=_fraction, default=1.0 / 3.0, help="escape probability")
    sp.add_argument("--k", type=int, default=1, help="path length")
    sp.add_argument("--scan-eps", type=_eps_list, metavar="LIST",
                    help="comma-separated |p-q| values; prints a mass CSV instead")
    sp.set_defaults(func=cmd_c3pk)

    sp = sub.add_parser("check", help="run the full invariant battery")
    _common(sp)
    sp.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (ConvergenceError, InconsistentSystemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
