import numpy as np
import pytest

from excitonkerr.analytic import expected_numbers
from excitonkerr.dynamics import (
    LindbladPropagator,
    _min_eigenvalue_ok,
    evolve_closed,
    evolve_lindblad,
    iter_lindblad,
    lindblad_rhs_dense,
    lindblad_spec,
    observables_over,
)
from excitonkerr.errors import DimensionMismatch, NonphysicalState, TruncationLeakage
from excitonkerr.fock import (
    HilbertConfig,
    QuantumState,
    annihilator,
    build_hamiltonian,
    coherent_state,
    expectation,
    fock_state,
    identity,
    number_operator,
)
from excitonkerr.params import InitialAmplitudes, SystemParams
from excitonkerr.series import TimeGrid
from excitonkerr.witnesses import series_from_states, witness_series

from conftest import random_density

CFG = HilbertConfig(20, 20)
SHORT = TimeGrid.uniform(0.3, 61)


@pytest.fixture(scope="module")
def coherent():
    return coherent_state(CFG, 2, 1)


@pytest.fixture(scope="module")
def closed_cds(coherent):
    return evolve_closed(coherent, SystemParams.cds(), SHORT)


def n_total(cfg):
    return number_operator(cfg, "exciton") + number_operator(cfg, "photon")


# ---- collapse operators ----

def test_jump_operators_vanish_without_damping():
    spec = lindblad_spec(HilbertConfig(3, 4), SystemParams(gamma=0.0, n_th=2.0))
    for op in spec.operators:
        assert np.all(op.matrix == 0)


def test_vacuum_bath_has_no_pumping():
    cfg = HilbertConfig(3, 4)
    spec = lindblad_spec(cfg, SystemParams(gamma=0.2, n_th=0.0))
    assert np.all(spec.L2.matrix == 0)
    np.testing.assert_allclose(spec.L1.matrix, np.sqrt(0.2) * annihilator(cfg, "a").matrix)
    np.testing.assert_allclose(spec.L3.matrix, np.sqrt(0.2) * annihilator(cfg, "c").matrix)


@pytest.mark.parametrize("dims", [(4, 4), (3, 6), (6, 2)])
@pytest.mark.parametrize("gamma,n_th", [(0.0, 0.0), (0.3, 0.0), (0.3, 1.7)])
def test_fast_rhs_matches_dense_master_equation(dims, gamma, n_th):
    cfg = HilbertConfig(*dims)
    p = SystemParams(gamma=gamma, n_th=n_th)
    rho = random_density(cfg.dim, seed=dims[0] * 10 + dims[1])
    fast = LindbladPropagator(cfg, p).rhs(rho)
    dense = lindblad_rhs_dense(rho, build_hamiltonian(cfg, p), lindblad_spec(cfg, p))
    assert np.max(np.abs(fast - dense)) <= 1e-10 * max(1.0, np.max(np.abs(dense)))


def test_fast_rhs_in_rotating_frame():
    cfg = HilbertConfig(4, 3)
    p = SystemParams(gamma=0.1, n_th=0.5)
    rho = random_density(cfg.dim, seed=11)
    fast = LindbladPropagator(cfg, p, frame=24.0).rhs(rho)
    dense = lindblad_rhs_dense(rho, build_hamiltonian(cfg, p, frame=24.0), lindblad_spec(cfg, p))
    assert np.max(np.abs(fast - dense)) <= 1e-10 * np.max(np.abs(dense))


# ---- closed evolution ----

def test_free_evolution_conserves_each_number(coherent):
    p = SystemParams(g=0.0, chi=0.0)
    traj = evolve_closed(coherent, p, SHORT)
    n_a = [expectation(s, number_operator(CFG, "a")).real for s in traj.states]
    assert np.ptp(n_a) <= 1e-10


def test_closed_conservation_laws(closed_cds, coherent):
    h = build_hamiltonian(CFG, SystemParams.cds())
    norms = [np.linalg.norm(s.payload) for s in closed_cds.states]
    n = [expectation(s, n_total(CFG)).real for s in closed_cds.states]
    e = [expectation(s, h).real for s in closed_cds.states]
    assert max(abs(x - 1) for x in norms) <= 1e-9
    assert np.ptp(n) <= 1e-8
    assert np.ptp(e) <= 1e-8
    assert closed_cds.states[0] is coherent
    assert all(s.is_ket for s in closed_cds.states)
    assert len(closed_cds.leakage) == len(SHORT)


def test_closed_matches_analytic_numbers_at_0p1(coherent):
    grid = TimeGrid(np.array([0.0, 0.1]))
    traj = evolve_closed(coherent, SystemParams.cds(), grid)
    exact = expectation(traj.states[1], number_operator(CFG, "a")).real
    approx, _ = expected_numbers(0.1, SystemParams.cds(), InitialAmplitudes())
    assert abs(exact - approx) <= 5e-3


def test_closed_requires_ket(coherent):
    with pytest.raises(ValueError):
        evolve_closed(coherent.to_density(), SystemParams.cds(), SHORT)


def test_initial_leakage_is_rejected():
    psi = coherent_state(HilbertConfig(12, 6), 2, 1, leakage_tol=1e-2)
    with pytest.raises(TruncationLeakage):
        evolve_closed(psi, SystemParams.cds(), SHORT)
    with pytest.raises(TruncationLeakage):
        evolve_lindblad(psi, SystemParams.cds(gamma=0.1), SHORT)


@pytest.mark.parametrize("evolve", [evolve_closed, evolve_lindblad])
def test_leakage_during_run_is_fatal(evolve):
    # hopping moves the exciton into the top photon level of a two-level photon space
    psi = fock_state(HilbertConfig(3, 2), 1, 0)
    with pytest.raises(TruncationLeakage) as err:
        evolve(psi, SystemParams(chi=0.0), TimeGrid.uniform(1.0, 11))
    assert err.value.leakage > 1e-4


# ---- open evolution ----

def test_lindblad_without_damping_is_unitary(coherent):
    p = SystemParams.cds(gamma=0.0)
    closed = evolve_closed(coherent, p, SHORT)
    opened = evolve_lindblad(coherent, p, SHORT)
    worst = max(np.max(np.abs(a.density_matrix() - b.payload)) for a, b in zip(closed.states, opened.states))
    assert worst <= 1e-6


def test_damped_single_excitation():
    cfg = HilbertConfig(3, 2)
    p = SystemParams(g=0.0, chi=0.0, gamma=0.1)
    grid = TimeGrid.uniform(10.0, 21)
    traj = evolve_lindblad(fock_state(cfg, 1, 0), p, grid)
    n_a = np.array([expectation(s, number_operator(cfg, "a")).real for s in traj.states])
    np.testing.assert_allclose(n_a, np.exp(-0.1 * grid.points), atol=1e-5)


def test_thermal_exciton_bath_relaxes_to_n_th():
    cfg = HilbertConfig(25, 2)
    p = SystemParams(g=0.0, chi=0.0, gamma=0.5, n_th=1.0)
    grid = TimeGrid.uniform(30.0, 4)
    traj = evolve_lindblad(fock_state(cfg, 0, 0), p, grid, leakage_tol=1.0)
    n_a = expectation(traj.states[-1], number_operator(cfg, "a")).real
    # thermal occupation, slightly reduced by truncating the Bose-Einstein tail at 24 quanta
    assert n_a == pytest.approx(1.0, abs=1e-4)


def test_trace_and_positivity_over_long_damping():
    cfg = HilbertConfig(6, 6)
    p = SystemParams(gamma=1.0, n_th=0.2, chi=0.5)
    grid = TimeGrid.uniform(10.0, 51)
    traj = evolve_lindblad(fock_state(cfg, 1, 2), p, grid, leakage_tol=1.0)
    for s in traj.states:
        rho = s.payload
        assert abs(np.trace(rho).real - 1) <= 1e-7
        assert np.max(np.abs(rho - rho.conj().T)) == 0
        assert np.linalg.eigvalsh(rho)[0] >= -1e-6
    assert not traj.states[0].is_ket
    np.testing.assert_allclose(traj.states[0].payload, fock_state(cfg, 1, 2).density_matrix())


def test_unstable_step_is_reported():
    cfg = HilbertConfig(4, 4)
    # hopping alone is not rate-capped, so an oversized step destroys positivity
    p = SystemParams(g=3.0, chi=0.0, gamma=0.0)
    with pytest.raises(NonphysicalState):
        evolve_lindblad(fock_state(cfg, 1, 1), p, TimeGrid.uniform(2.0, 3), max_step=0.5, leakage_tol=1.0)


def test_min_eigenvalue_check():
    ok, lam = _min_eigenvalue_ok(np.diag([1.0, 0.0, -5e-7]), 1e-6)
    assert ok and lam is None
    ok, lam = _min_eigenvalue_ok(np.diag([1.0, 0.0, -2e-6]), 1e-6)
    assert not ok and lam == pytest.approx(-2e-6)


def test_open_rejects_bad_step(coherent):
    with pytest.raises(ValueError):
        evolve_lindblad(coherent, SystemParams.cds(gamma=0.1), SHORT, max_step=0.0)


def test_damping_makes_squeezing_shallower(coherent):
    grid = TimeGrid.uniform(0.3, 301)
    runs = {}
    for gamma in (0.0, 0.01):
        traj = evolve_lindblad(coherent, SystemParams.cds(gamma=gamma), grid)
        runs[gamma] = witness_series(traj)["varX_a"]
    assert runs[0.01].min() > runs[0.0].min()


def test_step_halving(coherent):
    grid = TimeGrid.uniform(1.0, 101)
    p = SystemParams.cds(gamma=0.05, n_th=1.0)
    coarse = series_from_states(grid, (s for _, s, _ in iter_lindblad(coherent, p, grid)), "numeric-open")
    fine = series_from_states(
        grid, (s for _, s, _ in iter_lindblad(coherent, p, grid, max_step=2e-3)), "numeric-open"
    )
    for col in coarse.column_names():
        assert np.max(np.abs(coarse[col] - fine[col])) <= 1e-6, col


@pytest.mark.parametrize("kind", ["closed", "open"])
def test_rotating_frame_leaves_number_witnesses(coherent, kind):
    p = SystemParams.cds(gamma=0.02)
    grid = TimeGrid.uniform(0.3, 31)
    if kind == "closed":
        lab = witness_series(evolve_closed(coherent, p, grid))
        rot = witness_series(evolve_closed(coherent, p, grid, frame=p.omega2))
    else:
        lab = witness_series(evolve_lindblad(coherent, p, grid))
        rot = witness_series(evolve_lindblad(coherent, p, grid, frame=p.omega2))
    for col in ("N_a", "N_c", "g2_a", "g2_c", "HZ1"):
        assert np.max(np.abs(lab[col] - rot[col])) <= 1e-8, col


def test_iter_lindblad_yields_grid_points(coherent):
    out = list(iter_lindblad(coherent, SystemParams.cds(gamma=0.01), SHORT))
    assert [t for t, _, _ in out] == list(SHORT.points)
    assert all(0 <= leak <= 1e-4 for _, _, leak in out)


# ---- observables ----

def test_observables_identity_and_conservation(closed_cds):
    s = observables_over(closed_cds, {"one": identity(CFG), "N": n_total(CFG)})
    np.testing.assert_allclose(s["one"], 1.0, atol=1e-12)
    assert np.ptp(s["N"]) <= 1e-8
    assert s.source == "numeric-closed"


def test_observables_split_complex_columns(closed_cds):
    s = observables_over(closed_cds, {"a": annihilator(CFG, "exciton")})
    assert "a_re" in s and "a_im" in s
    assert s["a_re"][0] == pytest.approx(2.0, abs=1e-6)


def test_observables_dimension_check(closed_cds):
    with pytest.raises(DimensionMismatch):
        observables_over(closed_cds, {"n": number_operator(HilbertConfig(3, 3), "a")})


def test_photon_number_envelope_decays():
    cfg = HilbertConfig(8, 12)
    grid = TimeGrid.uniform(60.0, 1201)
    traj = evolve_lindblad(fock_state(cfg, 0, 5), SystemParams.cds(gamma=0.01), grid)
    n_c = observables_over(traj, {"N_c": number_operator(cfg, "photon")})["N_c"]
    envelope = n_c[1:].reshape(6, 200).max(axis=1)
    assert np.all(np.diff(envelope) < 0)
