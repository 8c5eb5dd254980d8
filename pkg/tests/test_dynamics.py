import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qwtails.dynamics import (
    ConvergenceError,
    InconsistentSystemError,
    InducedSystem,
    apply_U,
    build_induced_system,
    direct_solve,
    edge_vertex_residual,
    evolution_matrix,
    extract_outflow,
    iterate,
    iterate_steps,
    local_coin,
    mass,
    mu_qw,
    stationary_state,
    truncated_evolution_oracle,
    truncated_kernel,
)
from qwtails.graph import attach_tails, build_graph, cycle_basis, truncate
from qwtails.kernel import TransitionKernel
from _helpers import iterate_or_slow
from qwtails.random_instances import (
    random_alpha,
    random_nonreversible_kernel,
    random_reversible_kernel,
    random_tailed_graph,
)

seeds = st.integers(0, 2**32 - 1)


def _instance(seed, reversible=True):
    rng = np.random.default_rng(seed)
    if reversible:
        tg = random_tailed_graph(rng)
        p = random_reversible_kernel(rng, tg)
    else:
        tg = random_tailed_graph(rng, min_cycles=1)
        p = random_nonreversible_kernel(rng, tg)
    return tg, p, random_alpha(rng, tg.r)


def test_grover_coin_entries():
    C = local_coin(np.full(3, 1 / np.sqrt(3)))
    assert np.allclose(np.diag(C), -1 / 3, atol=1e-15)
    off = C[~np.eye(3, dtype=bool)]
    assert np.allclose(off, 2 / 3, atol=1e-15)


@given(vec=st.lists(st.floats(0.01, 10.0), min_size=1, max_size=8))
def test_coin_is_self_adjoint_involution(vec):
    u = np.sqrt(np.array(vec) / np.sum(vec))
    C = local_coin(u)
    assert np.abs(C - C.conj().T).max() <= 1e-12
    assert np.abs(C @ C - np.eye(u.size)).max() <= 1e-12


def test_coin_rejects_non_unit_vector():
    with pytest.raises(ValueError):
        local_coin([1.0, 1.0])


@given(seed=seeds)
def test_truncated_evolution_is_unitary(seed):
    tg, p, _ = _instance(seed)
    tr = truncate(tg, 4)
    q = truncated_kernel(tg, p, tr)
    U = evolution_matrix(tr.graph, q)
    assert np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() <= 1e-12
    rng = np.random.default_rng(seed)
    x = rng.normal(size=U.shape[0]) + 1j * rng.normal(size=U.shape[0])
    assert abs(np.linalg.norm(U @ x) - np.linalg.norm(x)) <= 1e-12
    assert np.abs(apply_U(tr.graph, q, x) - U @ x).max() <= 1e-12


def test_unitarity_on_100_random_states(rng):
    tg, p, _ = _instance(11)
    tr = truncate(tg, 6)
    U = evolution_matrix(tr.graph, truncated_kernel(tg, p, tr))
    for _ in range(100):
        x = rng.normal(size=U.shape[0]) + 1j * rng.normal(size=U.shape[0])
        assert abs(np.linalg.norm(U @ x) - np.linalg.norm(x)) <= 1e-12


def test_sparse_and_dense_agree(grover):
    g = grover.graph.internal
    Ed = evolution_matrix(g, grover.kernel.internal, dense=True)
    Es = evolution_matrix(g, grover.kernel.internal, dense=False)
    assert np.array_equal(Ed, Es.toarray())


@given(seed=seeds, n=st.integers(0, 15))
def test_oracle_norm_and_restriction(seed, n):
    tg, p, alpha = _instance(seed)
    tr, Psi = truncated_evolution_oracle(tg, p, alpha, n)
    assert np.linalg.norm(Psi) ** 2 == pytest.approx((n + 2) * np.sum(np.abs(alpha) ** 2), rel=1e-12)
    psi_n = iterate_steps(build_induced_system(tg, p, alpha), n)
    assert np.abs(Psi[tr.internal_arcs] - psi_n).max(initial=0.0) <= 1e-10


@given(seed=seeds, reversible=st.booleans())
def test_iterate_and_direct_solve_agree(seed, reversible):
    tg, p, alpha = _instance(seed, reversible)
    rep = stationary_state(tg, p, alpha)
    assert rep.fixed_point_residual <= 1e-9
    it = iterate_or_slow(build_induced_system(tg, p, alpha))
    if it is not None:
        # the step-change stopping rule leaves an error proportional to the
        # amplitude scale on slowly mixing instances
        scale = max(1.0, np.abs(rep.psi).max())
        assert np.abs(it.psi - rep.psi).max() <= 1e-8 * scale
    # the outflow conserves probability current
    assert np.linalg.norm(rep.wave.boundary_out) == pytest.approx(np.linalg.norm(alpha), rel=1e-9)
    assert edge_vertex_residual(tg, p, rep.wave) <= 1e-9


@given(seed=seeds)
def test_nullity_is_cycle_count_for_reversible(seed):
    tg, p, alpha = _instance(seed)
    rep = stationary_state(tg, p, alpha, method="direct-solve")
    assert rep.nullity == len(cycle_basis(tg.internal))


def test_grover_kernel_dimension(grover):
    system = build_induced_system(grover.graph, grover.kernel, grover.alpha)
    assert direct_solve(system).nullity == 1


@given(seed=seeds, reversible=st.booleans())
def test_solution_is_orthogonal_to_fixed_space(seed, reversible):
    tg, p, alpha = _instance(seed, reversible)
    system = build_induced_system(tg, p, alpha)
    rep = direct_solve(system)
    _, s, vh = np.linalg.svd(np.eye(system.n) - system.dense())
    null = vh[s <= 1e-10].conj()
    assert null.shape[0] == rep.nullity
    assert np.abs(null @ rep.psi).max(initial=0.0) <= 1e-10
    # iteration from zero never excites the fixed space either
    it = iterate_or_slow(system)
    if it is not None:
        assert np.abs(null @ it.psi).max(initial=0.0) <= 1e-8


def test_zero_source_returns_immediately(exceptional):
    tg, p, alpha = exceptional
    system = build_induced_system(tg, p, alpha)
    assert not np.any(system.rho)
    rep = stationary_state(tg, p, alpha, method="both")
    assert rep.iterations_used == 0
    assert np.all(rep.psi == 0)


def test_convergence_error_on_budget(grover):
    system = build_induced_system(grover.graph, grover.kernel, grover.alpha)
    with pytest.raises(ConvergenceError) as info:
        iterate(system, n_max=5)
    assert info.value.iterations == 5
    assert not info.value.oscillating


def test_oscillation_is_flagged():
    system = InducedSystem(E=-np.eye(2), rho=np.array([1.0, 0.0], dtype=complex))
    with pytest.raises(ConvergenceError) as info:
        iterate(system, n_max=1000)
    assert info.value.oscillating


def test_inconsistent_system_raises():
    system = InducedSystem(E=np.eye(2), rho=np.array([1.0, 0.0], dtype=complex))
    with pytest.raises(InconsistentSystemError):
        direct_solve(system)


def test_bad_arguments(grover):
    with pytest.raises(ValueError):
        build_induced_system(grover.graph, grover.kernel, [1.0])
    with pytest.raises(ValueError):
        stationary_state(grover.graph, grover.kernel, grover.alpha, method="magic")
    system = build_induced_system(grover.graph, grover.kernel, grover.alpha)
    with pytest.raises(ValueError):
        iterate(system, tol=0.0)


def test_method_aliases(grover):
    a = stationary_state(grover.graph, grover.kernel, grover.alpha, method="iterate").psi
    b = stationary_state(grover.graph, grover.kernel, grover.alpha, method="solve").psi
    assert np.abs(a - b).max() <= 1e-8


def test_mass_and_finding_probability(grover):
    wave = stationary_state(grover.graph, grover.kernel, grover.alpha).wave
    assert mu_qw(grover.graph, wave).sum() == pytest.approx(mass(wave))
    assert mu_qw(grover.graph, wave, 0) == pytest.approx(mu_qw(grover.graph, wave)[0])
    assert mass(wave) == pytest.approx(11 / 6 + 1 / 2 + 1)


def test_outflow_formula_on_single_edge():
    # one edge, both ends carry a tail: the walk is a pure transmission line
    tg = attach_tails(build_graph([(0, 1)]), [0, 1])
    p = TransitionKernel([0.5, 0.5], [0.5, 0.5])
    rep = stationary_state(tg, p, [1.0, 0.0])
    assert np.allclose(rep.wave.boundary_out, [0.0, 1.0], atol=1e-12)
    assert np.allclose(extract_outflow(tg, p, rep.psi, [1.0, 0.0]), rep.wave.boundary_out)


def test_slow_instance_is_reported():
    # found by property search: a decaying mode at |lambda| = 1 - 7e-9
    tg, p, alpha = _instance(21707407, reversible=False)
    system = build_induced_system(tg, p, alpha)
    with pytest.raises(ConvergenceError) as info:
        iterate(system, tol=1e-12, n_max=10**6)
    assert info.value.residual > 1e-12
    assert not info.value.oscillating
    # the direct route is unaffected
    assert direct_solve(system).fixed_point_residual <= 1e-12


def test_finding_probability_opposite_the_tails(grover):
    wave = stationary_state(grover.graph, grover.kernel, grover.alpha).wave
    assert mu_qw(grover.graph, wave, 2) == pytest.approx((1 / 3) ** 2 + (2 / 3) ** 2 + (1 / 2) ** 2)


def test_large_sparse_instance():
    # a long cycle pushes the arc count past the dense limit
    n = 1100
    edges = [(i, (i + 1) % n) for i in range(n)]
    tg = attach_tails(build_graph(edges), [0, n // 2])
    p = TransitionKernel(np.full(2 * n, 1 / 3), [1 / 3, 1 / 3])
    p_int = p.internal.copy()
    g = tg.internal
    for u in range(n):
        if u not in (0, n // 2):
            p_int[g.out_arcs(u)] = 0.5
    p = TransitionKernel(p_int, [1 / 3, 1 / 3])
    system = build_induced_system(tg, p, [1.0, 0.0])
    assert system.n > 2000
    rep = direct_solve(system)
    assert rep.fixed_point_residual <= 1e-9
    assert rep.nullity is None
