import numpy as np
import pytest

from subradiance.liouvillian import SystemParams, build_liouvillian, vec
from subradiance.observables import dicke_populations
from subradiance.operators import (
    basis_state,
    build_space,
    emitter_number,
    expectation,
    ket_to_dm,
    swap_emitters,
)
from subradiance.steady import (
    MultipleSteadyStatesError,
    NoUniqueSteadyStateError,
    smallest_singular_values,
    steady_state,
    steady_state_by_evolution,
)


def test_no_pump_relaxes_to_vacuum():
    s = build_space(2, 3)
    rho = steady_state(build_liouvillian(s, SystemParams(kappa=1.0, pump=0.0, gamma_r=0.1)))
    np.testing.assert_allclose(rho, ket_to_dm(basis_state(s, "gg", 0)), atol=1e-12)


def test_no_pump_without_emitter_decay_keeps_dark_state():
    # |-,0> is stationary when nothing but the cavity dissipates
    s = build_space(2, 2)
    with pytest.raises(MultipleSteadyStatesError):
        steady_state(build_liouvillian(s, SystemParams(kappa=3.0, pump=0.0)))


def test_no_pump_evolution_from_doubly_excited_state():
    s = build_space(2, 3)
    L = build_liouvillian(s, SystemParams(kappa=1.0, pump=0.0))
    rho = steady_state_by_evolution(L, 200.0, ket_to_dm(basis_state(s, "ee")))
    np.testing.assert_allclose(rho, ket_to_dm(basis_state(s, "gg")), atol=1e-8)


def test_single_emitter_rate_balance():
    # P / (P + Gamma_r) with no cavity coupling
    s = build_space(1, 1)
    p = SystemParams(kappa=1.0, pump=0.3, gamma_r=0.7, g=0.0)
    rho = steady_state(build_liouvillian(s, p))
    assert expectation(rho, emitter_number(s, 1)).real == pytest.approx(0.3, abs=1e-12)


def test_weak_pump_population_ordering():
    s = build_space(2, 3)
    rho = steady_state(build_liouvillian(s, SystemParams(kappa=3.0, pump=1e-3)))
    d = dicke_populations(rho, s)
    assert d.p_gg > d.p_minus > d.p_plus
    assert d.p_gg > d.p_ee


def test_result_is_valid_density_matrix():
    s = build_space(2, 3)
    rho = steady_state(build_liouvillian(s, SystemParams(kappa=11.7, pump=0.3, dephasing=0.1)))
    assert np.trace(rho) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(rho, rho.conj().T, atol=0)
    assert np.linalg.eigvalsh(rho).min() >= -1e-8


def test_residual_is_small():
    s = build_space(2, 3)
    L = build_liouvillian(s, SystemParams(kappa=0.5, pump=2.0))
    rho = steady_state(L)
    assert np.abs(L.matrix @ vec(rho)).sum() <= 1e-10 * s.dim


def test_closed_system_has_no_unique_steady_state():
    s = build_space(2, 2)
    with pytest.raises(NoUniqueSteadyStateError):
        steady_state(build_liouvillian(s, SystemParams(kappa=0, pump=0)))


def test_pure_dephasing_is_degenerate():
    # gamma only conserves every population, so the kernel is many-dimensional
    s = build_space(2, 1)
    L = build_liouvillian(s, SystemParams(kappa=0, pump=0, dephasing=0.5, g=0.0))
    with pytest.raises(MultipleSteadyStatesError) as info:
        steady_state(L)
    assert info.value.sigma1 - info.value.sigma0 <= 1e-8


def test_unique_kernel_has_singular_value_gap():
    L = build_liouvillian(build_space(2, 2), SystemParams(kappa=1, pump=0.1))
    s0, s1 = smallest_singular_values(L)
    assert s0 < 1e-12 < 1e-3 < s1


@pytest.mark.parametrize("kappa, pump", [(3.0, 0.1), (0.5, 1.0), (11.7, 0.05)])
def test_matches_long_time_rk45_evolution(kappa, pump):
    # independent oracle: explicit integration from the ground state
    s = build_space(2, 3)
    L = build_liouvillian(s, SystemParams(kappa=kappa, pump=pump))
    rho_ss = steady_state(L)
    t_final = 40.0 / min(kappa, pump, 1.0)
    rho_t = steady_state_by_evolution(L, t_final, ket_to_dm(basis_state(s, "gg")), method="RK45")
    assert np.max(np.abs(rho_ss - rho_t)) < 1e-6


def test_matches_exact_propagator_at_weak_pump():
    s = build_space(2, 3)
    L = build_liouvillian(s, SystemParams(kappa=11.7, pump=9e-4))
    rho_t = steady_state_by_evolution(L, 200 / 9e-4, ket_to_dm(basis_state(s, "gg")))
    assert np.max(np.abs(steady_state(L) - rho_t)) < 1e-8


def test_exchange_symmetry():
    s = build_space(2, 3)
    rho = steady_state(build_liouvillian(s, SystemParams(kappa=2.0, pump=0.2, dephasing=0.3)))
    P = swap_emitters(s, 1, 2).toarray()
    np.testing.assert_allclose(P @ rho @ P.T, rho, atol=1e-10)


def test_by_evolution_rejects_nonpositive_time():
    L = build_liouvillian(build_space(1, 1), SystemParams(kappa=1, pump=0.1))
    with pytest.raises(ValueError):
        steady_state_by_evolution(L, 0.0, np.eye(4) / 4)
