import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eitsim.dynamics import (
    DensityMatrix,
    MultipleSteadyStatesError,
    UndefinedStatisticError,
    build_liouvillian,
    g2_tau,
    g2_zero,
    propagate,
    steady_state,
    unvec,
    vec,
)
from eitsim.model import ModelParams, fig2_params, fig3_params, hermitian_hamiltonian, jump_operators
from eitsim.spectra import analyze

# Frozen from an independent dense construction: the generator assembled
# element by element from the commutator form with row-major vectorisation,
# steady state taken as the smallest right singular vector.
FIG2_G2_ORACLE = 3.6328804716725767e-3
FIG2_N_ORACLE = 3.671842823330102e-3
N2_NMAX2_G2_ORACLE = 3.68037608001967e-4  # fig3 parameters, delta = 7.5, n_max = 2
N2_NMAX2_N_ORACLE = 9.668539699227273e-05


def commutator_form(p, space, rho):
    h = hermitian_hamiltonian(p, space, with_drive=True).toarray()
    out = -1j * (h @ rho - rho @ h)
    for c in jump_operators(p, space):
        c = c.toarray()
        cd = c.conj().T
        out += c @ rho @ cd - 0.5 * (cd @ c @ rho + rho @ cd @ c)
    return out


def random_rho(dim, rng):
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return x @ x.conj().T / np.trace(x @ x.conj().T)


def test_vec_convention():
    x = np.arange(6).reshape(2, 3)
    assert list(vec(x)) == [0, 3, 1, 4, 2, 5]
    rng = np.random.default_rng(0)
    a, b, r = (rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(vec(a @ r @ b), np.kron(b.T, a) @ vec(r))
    assert np.array_equal(unvec(vec(r), 3), r)


@given(st.integers(0, 2**31), st.sampled_from([1, 2]))
@settings(max_examples=15, deadline=None)
def test_superoperator_matches_commutator_form(seed, n_atoms):
    rng = np.random.default_rng(seed)
    p = ModelParams(
        n_atoms=n_atoms, g13=rng.uniform(0.5, 3), g24=rng.uniform(0, 3), omega=rng.uniform(0.5, 3),
        kappa=rng.uniform(0.2, 2), gamma31=rng.uniform(0, 1), gamma32=rng.uniform(0, 1),
        gamma4=rng.uniform(0, 1), delta=rng.normal(), big_delta=rng.normal(), eps_p=rng.uniform(0, 1),
        n_max=1,
    )
    space = p.space()
    lv = build_liouvillian(p, space)
    rho = random_rho(space.dim, rng)
    out = lv.apply(rho)
    assert np.allclose(out, commutator_form(p, space, rho), atol=1e-12)
    assert abs(np.trace(out)) < 1e-12
    assert np.allclose(out, out.conj().T, atol=1e-12)


def test_fig2_steady_state_against_oracle(fig2_solution):
    lv, rho = fig2_solution
    assert g2_zero(rho) == pytest.approx(FIG2_G2_ORACLE, rel=1e-6)
    assert rho.mean_photon() == pytest.approx(FIG2_N_ORACLE, rel=1e-8)
    assert np.linalg.norm(lv.matrix @ vec(rho.data)) <= 1e-9
    assert rho.trace == pytest.approx(1.0, abs=1e-14)
    assert rho.min_eigenvalue() >= -1e-8


def test_two_atom_steady_state_against_oracle():
    p = fig3_params(n_max=2)
    rho = steady_state(build_liouvillian(p, p.space()))
    assert g2_zero(rho) == pytest.approx(N2_NMAX2_G2_ORACLE, rel=1e-4)
    assert rho.mean_photon() == pytest.approx(N2_NMAX2_N_ORACLE, rel=1e-8)


def test_harmonic_ladder_is_coherent():
    p = fig2_params(g24=0.0, eps_p=0.01)
    rho = steady_state(build_liouvillian(p, p.space()))
    assert g2_zero(rho) == pytest.approx(1.0, abs=0.05)


def test_empty_cavity_statistic_undefined():
    p = fig2_params(eps_p=0.0, n_max=2)
    rho = steady_state(build_liouvillian(p, p.space()))
    assert rho.mean_photon() == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(UndefinedStatisticError):
        g2_zero(rho)
    with pytest.raises(UndefinedStatisticError):
        g2_tau(p, [0.0, 1.0])


def test_degenerate_null_space_detected():
    # without g13 and atomic decay, levels 2 and 3 form a closed lossless subsystem
    p = ModelParams(g13=0.0, g24=0.0, omega=1.0, eps_p=0.1, n_max=1)
    with pytest.raises(MultipleSteadyStatesError):
        steady_state(build_liouvillian(p, p.space()))


def test_propagation_reaches_steady_state(fig2, fig2_solution):
    lv, rho = fig2_solution
    tau_c = 1.0 / -analyze(fig2).eps0.imag
    late = propagate(lv, DensityMatrix.ground(lv.space), 30 * tau_c)
    assert late.trace_distance(rho) <= 1e-6


def test_propagation_preserves_trace_and_hermiticity(fig2_solution, rng):
    lv, _ = fig2_solution
    rho0 = DensityMatrix(lv.space, random_rho(lv.space.dim, rng))
    for t in (0.0, 0.3, 5.0):
        rho_t = propagate(lv, rho0, t)
        assert rho_t.trace == pytest.approx(1.0, abs=1e-10)
        assert np.allclose(rho_t.data, rho_t.data.conj().T, atol=1e-10)
    with pytest.raises(ValueError):
        propagate(lv, rho0, -1.0)


def test_g2_tau_zero_matches_g2_zero(fig2, fig2_solution):
    lv, rho = fig2_solution
    series = g2_tau(fig2, [0.0, 0.5], lv, rho)
    assert series.g2[0] == pytest.approx(g2_zero(rho), rel=1e-8)
    assert series.mean_photon == pytest.approx(rho.mean_photon())
    assert [r["tau"] for r in series.rows()] == [0.0, 0.5]


def test_g2_tau_rises_from_antibunched_value(fig2, fig2_solution):
    # the rise happens on the trapping-state lifetime; faster vacuum Rabi
    # ringing can dip below g2(0) within the first couple of cavity lifetimes
    lv, rho = fig2_solution
    tau_c = 1.0 / -analyze(fig2).eps0.imag
    tau = np.linspace(0.05, 0.25, 9) * tau_c
    series = g2_tau(fig2, np.concatenate([[0.0], tau]), lv, rho)
    assert np.all(series.g2[1:] > series.g2[0])


def test_g2_tau_long_time_limit(fig2, fig2_solution):
    lv, rho = fig2_solution
    tau_c = 1.0 / -analyze(fig2).eps0.imag
    series = g2_tau(fig2, [20 * tau_c, 40 * tau_c], lv, rho)
    assert np.all(np.abs(series.g2 - 1) <= 0.02)
    assert np.all(series.g2 >= -1e-8)
