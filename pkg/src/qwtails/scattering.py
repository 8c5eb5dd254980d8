"""Predicted versus measured scattering of the stationary inflow."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DEFAULT_N_MAX, DEFAULT_TOL, local_coin, stationary_state
from .graph import TailedGraph
from .kernel import TransitionKernel, boundary_conductance, find_reversible_measure

__all__ = [
    "ScatteringReport",
    "predicted_scattering",
    "verify_scattering",
    "unitarity_of_columns",
    "infer_regime",
]

REVERSIBLE = "reversible"
NON_REVERSIBLE = "non-reversible"


@dataclass
class ScatteringReport:
    alpha_in: np.ndarray
    beta_out_measured: np.ndarray
    beta_out_predicted: np.ndarray
    S_matrix: np.ndarray
    residual_inf_norm: float
    regime: str


def predicted_scattering(regime: str, m_delta_e=None, r: int | None = None) -> np.ndarray:
    """``Sz(m_dE)`` for reversible kernels, ``-I`` otherwise."""
    if regime == REVERSIBLE:
        if m_delta_e is None:
            raise ValueError("reversible regime needs the boundary conductance vector")
        return local_coin(np.asarray(m_delta_e, dtype=float))
    if regime == NON_REVERSIBLE:
        if r is None:
            if m_delta_e is None:
                raise ValueError("number of tails required")
            r = len(m_delta_e)
        return -np.eye(r)
    raise ValueError(f"unknown regime {regime!r}")


def _regime(tg, p):
    m = find_reversible_measure(tg, p)
    if m:
        return REVERSIBLE, predicted_scattering(REVERSIBLE, boundary_conductance(m))
    return NON_REVERSIBLE, predicted_scattering(NON_REVERSIBLE, r=tg.r)


def verify_scattering(tg: TailedGraph, p: TransitionKernel, alpha, method: str = "direct-solve",
                      tol: float = DEFAULT_TOL, n_max: int = DEFAULT_N_MAX) -> ScatteringReport:
    """Solve for the stationary state and compare its outflow with the prediction.

    The regime comes from :func:`find_reversible_measure`, never from the
    caller.
    """
    alpha = np.asarray(alpha, dtype=complex)
    regime, S = _regime(tg, p)
    rep = stationary_state(tg, p, alpha, method=method, tol=tol, n_max=n_max)
    beta = rep.wave.boundary_out
    predicted = S @ alpha
    return ScatteringReport(
        alpha_in=alpha,
        beta_out_measured=beta,
        beta_out_predicted=predicted,
        S_matrix=S,
        residual_inf_norm=float(np.abs(beta - predicted).max()),
        regime=regime,
    )


def unitarity_of_columns(tg: TailedGraph, p: TransitionKernel, method: str = "direct-solve") -> np.ndarray:
    """Gram matrix of the outflows produced by unit inputs on each tail."""
    cols = []
    for i in range(tg.r):
        alpha = np.zeros(tg.r, dtype=complex)
        alpha[i] = 1.0
        cols.append(stationary_state(tg, p, alpha, method=method).wave.boundary_out)
    B = np.column_stack(cols)
    return B.conj().T @ B


def infer_regime(tg: TailedGraph, p: TransitionKernel, seed: int = 0, tol: float = 1e-8) -> str:
    """Guess reversibility from scattering alone.

    A generic complex input (fixed seed) is sent in; a pure phase flip of
    it means non-reversible.
    """
    rng = np.random.default_rng(seed)
    alpha = rng.normal(size=tg.r) + 1j * rng.normal(size=tg.r)
    beta = stationary_state(tg, p, alpha, method="direct-solve").wave.boundary_out
    return NON_REVERSIBLE if np.abs(beta + alpha).max() <= tol else REVERSIBLE
