import numpy as np
import pytest

import oracles
from mpotomo.pauli import coeffs_from_dense, partial_trace
from mpotomo.states import (HamiltonianSpec, ancilla_channel, ghz_state,
                            hamiltonian_dense, mps_to_mpo, named_state,
                            product_state, random_mps, random_mpo_via_ancilla,
                            thermal_dense, w_state)


def test_hamiltonian_spec_validation():
    with pytest.raises(ValueError):
        HamiltonianSpec("nope", 4)
    with pytest.raises(ValueError):
        HamiltonianSpec("critical_ising", 1)


def test_ising_two_site_ground_energy():
    # H = -XX - Z1 - 1Z has extremal eigenvalues -sqrt(5), +sqrt(5):
    # squaring on the invariant 2x2 block gives E^2 = 5
    spec = HamiltonianSpec("critical_ising", 2)
    H = hamiltonian_dense(spec)
    X, Z, I = oracles.SX, oracles.SZ, oracles.I2
    ref = -np.kron(X, X) - np.kron(Z, I) - np.kron(I, Z)
    assert np.allclose(H, ref)
    assert abs(np.linalg.eigvalsh(H)[0] + np.sqrt(5)) < 1e-12


def test_random_hamiltonian_is_hermitian_and_seeded():
    spec = HamiltonianSpec("random_next_neighbour", 4, seed=3)
    H1 = hamiltonian_dense(spec)
    H2 = hamiltonian_dense(HamiltonianSpec("random_next_neighbour", 4, seed=3))
    assert np.allclose(H1, H1.conj().T)
    assert np.array_equal(H1, H2)
    H3 = hamiltonian_dense(HamiltonianSpec("random_next_neighbour", 4, seed=4))
    assert not np.allclose(H1, H3)


def test_thermal_state_limits():
    spec = HamiltonianSpec("critical_ising", 3)
    rho0 = thermal_dense(spec, 0.0)
    assert np.allclose(rho0.matrix, np.eye(8) / 8, atol=1e-14)
    # large beta concentrates on the ground space
    rho = thermal_dense(spec, 50.0)
    H = hamiltonian_dense(spec)
    e0 = np.linalg.eigvalsh(H)[0]
    energy = np.trace(rho.matrix @ H).real
    assert abs(energy - e0) < 1e-6
    assert abs(np.trace(rho.matrix) - 1.0) < 1e-12
    assert np.linalg.eigvalsh(rho.matrix)[0] > -1e-14


def test_random_mps_is_normalized_and_seeded():
    rng = np.random.default_rng(5)
    mps = random_mps(5, 2, rng)
    vec = mps[0]
    for A in mps[1:]:
        vec = np.einsum("xab,sbc->xsac", vec, A).reshape(
            -1, vec.shape[1], A.shape[2])
    norm = np.linalg.norm(vec.ravel())
    assert abs(norm - 1.0) < 1e-12
    mps2 = random_mps(5, 2, np.random.default_rng(5))
    assert all(np.array_equal(a, b) for a, b in zip(mps, mps2))


def test_mps_to_mpo_matches_projector(rng):
    mps = random_mps(3, 2, rng)
    mpo = mps_to_mpo(mps)
    vec = mps[0]
    for A in mps[1:]:
        vec = np.einsum("xab,sbc->xsac", vec, A).reshape(
            -1, vec.shape[1], A.shape[2])
    psi = vec[:, 0, 0]
    ref = np.outer(psi, psi.conj())
    assert np.max(np.abs(mpo.to_dense().matrix - ref)) < 1e-12


def test_ancilla_channel_is_trace_preserving(rng):
    S = ancilla_channel(rng, t_hnorm=0.05)
    # rows of the superoperator acting on vec(rho): trace preservation
    # means sum_a S[(a,a), (s,t)] = delta_{s,t}
    S4 = S.reshape(2, 2, 2, 2)
    tr_out = S4[0, 0] + S4[1, 1]
    assert np.allclose(tr_out, np.eye(2), atol=1e-12)


def test_ancilla_mpo_is_a_state():
    mpo = random_mpo_via_ancilla(5, seed=7)
    assert mpo.bond_dims == [1, 4, 4, 4, 4, 1]
    assert all(np.isrealobj(t) for t in mpo.tensors)
    assert abs(mpo.trace - 1.0) < 1e-10
    dm = mpo.to_dense().matrix
    ev = np.linalg.eigvalsh(dm)
    assert ev[0] > -1e-10
    assert abs(np.trace(dm).real - 1.0) < 1e-10


def test_ancilla_mpo_zero_coupling_is_pure():
    mpo = random_mpo_via_ancilla(4, seed=2, t_hnorm=0.0)
    dm = mpo.to_dense().matrix
    purity = np.trace(dm @ dm).real
    assert abs(purity - 1.0) < 1e-10


def test_ancilla_mpo_coupling_mixes():
    mpo = random_mpo_via_ancilla(4, seed=2, t_hnorm=0.1)
    dm = mpo.to_dense().matrix
    assert np.trace(dm @ dm).real < 1.0 - 1e-6


def test_w_state_dense_and_mpo_agree():
    phases = [0.3, -0.2, 0.9]
    dense, mpo = w_state(4, phases=phases)
    assert np.max(np.abs(mpo.to_dense().matrix - dense.matrix)) < 1e-12
    assert mpo.bond_dims == [1, 4, 4, 4, 1]


def test_w_state_single_site_reduction():
    dense, _ = w_state(4)
    red = partial_trace(dense.matrix, [1])
    assert np.allclose(np.diag(red).real, [0.75, 0.25], atol=1e-14)
    assert abs(coeffs_from_dense(red)[3] - 1.0 / (2.0 * np.sqrt(2.0))) < 1e-14


def test_w_state_phases_live_on_branches():
    d0, _ = w_state(3)
    d1, _ = w_state(3, phases=[0.7, 0.7])
    # equal phases on every branch differ from the flat state only by
    # coherences involving the reference branch
    assert abs(d0.matrix[1, 1] - d1.matrix[1, 1]) < 1e-14
    assert abs(d0.matrix[2, 4] - d1.matrix[2, 4]) < 1e-14
    assert abs(d0.matrix[1, 2]) > 1e-3
    assert abs(d0.matrix[1, 2] - d1.matrix[1, 2]) > 1e-3


def test_ghz_state_dense_and_mpo_agree():
    dense, mpo = ghz_state(4)
    vec = np.zeros(16)
    vec[0] = vec[15] = 2.0 ** -0.5
    assert np.max(np.abs(dense.matrix - np.outer(vec, vec))) < 1e-14
    assert np.max(np.abs(mpo.to_dense().matrix - dense.matrix)) < 1e-12


def test_ghz_single_z_coefficient_vanishes():
    _, mpo = ghz_state(6)
    assert abs(mpo.coefficient([3, 0, 0, 0, 0, 0])) < 1e-14
    # while the two-point ZZ coefficient does not
    assert abs(mpo.coefficient([3, 3, 0, 0, 0, 0])) > 0.1


def test_product_state_expectations():
    dense, mpo = product_state(3)
    vec = np.zeros(8)
    vec[0] = 1.0
    assert np.allclose(dense.matrix, np.outer(vec, vec))
    assert mpo.bond_dims == [1, 1, 1, 1]
    # <Z> = 1 on every site: coefficient 2^{-3/2} * 1 on a single-Z string
    assert abs(mpo.coefficient([3, 0, 0]) - 2.0 ** -1.5) < 1e-14


def test_named_state_dispatch():
    dense, mpo = named_state("ghz", 3)
    assert mpo.n_sites == 3
    with pytest.raises(ValueError):
        named_state("unknown", 3)
