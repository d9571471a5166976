import numpy as np
import pytest

from conftest import random_density_matrix, random_hermitian
from subradiance.dynamics import evolve
from subradiance.liouvillian import (
    SystemParams,
    build_liouvillian,
    dissipator,
    hamiltonian,
    unvec,
    vec,
)
from subradiance.operators import (
    basis_state,
    build_space,
    cavity_annihilation,
    dicke_ket,
    emitter_lowering,
    emitter_number,
    ket_to_dm,
)


def test_single_jaynes_cummings_element():
    s = build_space(1, 1)
    H = hamiltonian(s, SystemParams(kappa=0, pump=0)).toarray()
    assert basis_state(s, "g", 1) @ H @ basis_state(s, "e", 0) == pytest.approx(1.0)
    np.testing.assert_allclose(H, H.conj().T)


def test_two_emitter_bright_and_dark_matrix_elements():
    s = build_space(2, 2)
    H = hamiltonian(s, SystemParams(kappa=0, pump=0)).toarray()
    assert basis_state(s, "gg", 1) @ H @ dicke_ket(s, "+") == pytest.approx(np.sqrt(2), abs=1e-15)
    assert np.linalg.norm(H @ dicke_ket(s, "-")) == 0


def test_uncoupled_hamiltonian_is_diagonal_in_detunings():
    s = build_space(2, 1)
    H = hamiltonian(s, SystemParams(kappa=0, pump=0, g=0, detunings=(0.7, -1.3))).toarray()
    np.testing.assert_array_equal(H, np.diag(np.diag(H)))
    for bits, e in {"gg": 0.0, "ge": -1.3, "eg": 0.7, "ee": -0.6}.items():
        for n in (0, 1):
            assert H[np.argmax(basis_state(s, bits, n)), np.argmax(basis_state(s, bits, n))] == pytest.approx(e)


def test_detuning_length_mismatch():
    with pytest.raises(ValueError):
        hamiltonian(build_space(2, 1), SystemParams(kappa=1, pump=0, detunings=(0.1,)))


def test_negative_rates_rejected():
    with pytest.raises(ValueError):
        SystemParams(kappa=-1, pump=0)


def test_dissipator_photon_loss():
    s = build_space(1, 1)
    a = cavity_annihilation(s)
    rho = ket_to_dm(basis_state(s, "g", 1))
    expected = ket_to_dm(basis_state(s, "g", 0)) - rho
    np.testing.assert_allclose(dissipator(a, rho), expected, atol=1e-15)


def test_dissipator_pump_kick():
    s = build_space(1, 1)
    sp_ = emitter_lowering(s, 1).getH()
    rho = ket_to_dm(basis_state(s, "g", 0))
    expected = ket_to_dm(basis_state(s, "e", 0)) - rho
    np.testing.assert_allclose(dissipator(sp_, rho), expected, atol=1e-15)


def test_dissipator_projector_halves_coherence():
    # hand result: D[z] rho = z rho z - (z rho + rho z)/2 for z = |e><e|
    # off-diagonal <g|.|e> -> -c/2, diagonals -> 0
    s = build_space(1, 1)
    z = emitter_number(s, 1)
    g0, e0 = basis_state(s, "g", 0), basis_state(s, "e", 0)
    c = 0.3 - 0.2j
    rho = 0.6 * ket_to_dm(g0) + 0.4 * ket_to_dm(e0) + c * np.outer(g0, e0) + np.conj(c) * np.outer(e0, g0)
    out = dissipator(z, rho)
    ig, ie = np.argmax(g0), np.argmax(e0)
    assert out[ig, ie] == pytest.approx(-c / 2)
    assert out[ig, ig] == 0 and out[ie, ie] == 0


def test_dissipator_shape_mismatch():
    with pytest.raises(ValueError):
        dissipator(cavity_annihilation(build_space(1, 1)), np.eye(3))


def _random_params(rng, n):
    return SystemParams(kappa=rng.uniform(0, 5), pump=rng.uniform(0, 2), dephasing=rng.uniform(0, 1),
                        gamma_r=rng.uniform(0, 1), g=rng.uniform(0.2, 2),
                        detunings=tuple(rng.uniform(-1, 1, n)))


@pytest.mark.parametrize("n, cutoff", [(1, 2), (2, 2), (3, 1)])
def test_generator_trace_and_hermiticity(rng, n, cutoff):
    s = build_space(n, cutoff)
    L = build_liouvillian(s, _random_params(rng, n))
    for _ in range(20):
        X = random_hermitian(rng, s.dim)
        out = L.apply(X)
        assert abs(np.trace(out)) < 1e-10
        assert np.max(np.abs(out - out.conj().T)) < 1e-12


def test_adjoint_covariance(rng):
    s = build_space(2, 1)
    L = build_liouvillian(s, _random_params(rng, 2))
    X = rng.normal(size=(s.dim, s.dim)) + 1j * rng.normal(size=(s.dim, s.dim))
    np.testing.assert_allclose(L.apply(X).conj().T, L.apply(X.conj().T), atol=1e-12)


def test_matrix_form_agrees_with_apply(rng):
    s = build_space(2, 2)
    L = build_liouvillian(s, _random_params(rng, 2))
    for _ in range(10):
        X = rng.normal(size=(s.dim, s.dim)) + 1j * rng.normal(size=(s.dim, s.dim))
        direct = L.apply(X)
        via = unvec(L.matrix @ vec(X), s.dim)
        assert np.max(np.abs(direct - via)) <= 1e-12 * np.max(np.abs(direct))


def test_column_stacking_convention(rng):
    A = rng.normal(size=(3, 3))
    B = rng.normal(size=(3, 3))
    X = rng.normal(size=(3, 3))
    np.testing.assert_allclose(np.kron(B.T, A) @ vec(X), vec(A @ X @ B))


def test_literal_generator_sum(rng):
    s = build_space(2, 1)
    p = _random_params(rng, 2)
    L = build_liouvillian(s, p)
    rho = random_density_matrix(rng, s.dim)
    H = hamiltonian(s, p).toarray()
    expected = -1j * (H @ rho - rho @ H) + p.kappa * dissipator(cavity_annihilation(s).toarray(), rho)
    for i in (1, 2):
        sm = emitter_lowering(s, i).toarray()
        expected += p.pump * dissipator(sm.conj().T, rho)
        expected += p.dephasing * dissipator(sm.conj().T @ sm, rho)
        expected += p.gamma_r * dissipator(sm, rho)
    np.testing.assert_allclose(L.apply(rho), expected, atol=1e-12)


def test_closed_system_is_commutator_and_conserves_purity(rng):
    s = build_space(1, 2)
    p = SystemParams(kappa=0, pump=0)
    L = build_liouvillian(s, p)
    rho = ket_to_dm(basis_state(s, "e", 0))
    H = hamiltonian(s, p).toarray()
    np.testing.assert_allclose(L.apply(rho), -1j * (H @ rho - rho @ H))
    traj = evolve(L, rho, np.linspace(0, 5, 11))
    purity = [np.trace(r @ r).real for r in traj.states]
    np.testing.assert_allclose(purity, 1.0, atol=1e-7)


def test_pure_dephasing_rates():
    # gamma only: populations fixed, emitter-1 coherence decays at gamma/2
    s = build_space(2, 1)
    gamma = 0.8
    L = build_liouvillian(s, SystemParams(kappa=0, pump=0, dephasing=gamma, g=0))
    gg, eg = basis_state(s, "gg"), basis_state(s, "eg")
    rho = 0.5 * (ket_to_dm(gg) + ket_to_dm(eg) + np.outer(gg, eg) + np.outer(eg, gg))
    out = L.apply(rho)
    i, j = np.argmax(gg), np.argmax(eg)
    np.testing.assert_allclose(np.diag(out), 0, atol=1e-15)
    assert out[i, j] == pytest.approx(-gamma / 2 * rho[i, j])
    t = 3.0
    traj = evolve(L, rho, [0, t])
    assert traj.states[-1][i, j].real == pytest.approx(0.5 * np.exp(-gamma * t / 2), rel=1e-7)
    np.testing.assert_allclose(np.diag(traj.states[-1]).real, np.diag(rho).real, atol=1e-12)


def test_scaled_params():
    p = SystemParams(kappa=1, pump=2, dephasing=3, gamma_r=4, g=5, detunings=(1, 2))
    q = p.scaled(2)
    assert (q.kappa, q.pump, q.dephasing, q.gamma_r, q.g, q.detunings) == (2, 4, 6, 8, 10, (2, 4))
