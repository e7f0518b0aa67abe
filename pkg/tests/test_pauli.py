import numpy as np
import pytest

import oracles
from mpotomo.pauli import (coeffs_from_dense, dense_from_coeffs,
                           hermitian_basis, n_sites_of, pack_index,
                           partial_trace, pauli_matrix, pauli_string_dense,
                           unpack_index)


def test_single_site_matrices_are_normalized():
    for a in range(4):
        P = pauli_matrix(a)
        assert np.allclose(P, oracles.PAULIS[a] / np.sqrt(2))
        assert abs(np.trace(P @ P) - 1.0) < 1e-15


def test_single_site_matrices_are_orthonormal():
    for a in range(4):
        for b in range(4):
            g = np.trace(pauli_matrix(a) @ pauli_matrix(b).conj().T)
            assert abs(g - (a == b)) < 1e-15


def test_string_dense_matches_literal_kron(rng):
    alphas = [2, 0, 3, 1]
    assert np.allclose(pauli_string_dense(alphas),
                       oracles.string_dense(alphas))


def test_pack_index_is_big_endian():
    # site 1 is the most significant digit
    assert pack_index([1, 2]) == 6
    assert pack_index([3, 0, 0]) == 48
    assert pack_index([0, 0, 3]) == 3
    assert tuple(unpack_index(6, 2)) == (1, 2)
    assert tuple(unpack_index(48, 3)) == (3, 0, 0)
    for idx in (0, 1, 17, 255):
        assert pack_index(unpack_index(idx, 4)) == idx


def test_n_sites_of_rejects_non_powers():
    assert n_sites_of(16) == 4
    with pytest.raises(ValueError):
        n_sites_of(12)


def test_coeffs_of_projector_on_zero_zero():
    # |00><00| = (1/4)(I+Z)(x)(I+Z); in the normalized basis every one of
    # the four surviving strings II, IZ, ZI, ZZ carries weight 1/2
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    c = coeffs_from_dense(rho)
    expected = np.zeros(16)
    expected[[0, 3, 12, 15]] = 0.5
    assert np.allclose(c, expected, atol=1e-14)


def test_coeffs_match_trace_oracle(herm16):
    c = coeffs_from_dense(herm16)
    ref = oracles.all_coeffs_by_trace(herm16, 4)
    assert np.max(np.abs(ref.imag)) < 1e-12
    assert np.allclose(c, ref.real, atol=1e-12)


def test_coeffs_roundtrip_and_parseval(herm16):
    c = coeffs_from_dense(herm16)
    assert c.dtype == np.float64
    back = dense_from_coeffs(c)
    assert np.allclose(back, herm16, atol=1e-12)
    # orthonormal basis: sum of squared coefficients equals tr[M^2]
    assert abs(np.sum(c**2) - np.trace(herm16 @ herm16).real) < 1e-12


def test_coeffs_reject_non_hermitian():
    m = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(ValueError):
        coeffs_from_dense(m)


def test_partial_trace_matches_loop_oracle(rng):
    n = 4
    m = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    for keep in ([1], [2, 3], [1, 4], [2, 3, 4]):
        got = partial_trace(m, keep)
        ref = oracles.partial_trace_loops(m, keep, n)
        assert np.allclose(got, ref, atol=1e-12)


def test_partial_trace_preserves_trace(herm16):
    red = partial_trace(herm16, [2])
    assert abs(np.trace(red) - np.trace(herm16)) < 1e-13


def test_partial_trace_rejects_bad_sites(herm16):
    with pytest.raises(ValueError):
        partial_trace(herm16, [0])
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), [3])


def test_hermitian_basis_is_orthonormal():
    for D in (2, 3, 4):
        H = hermitian_basis(D)
        assert H.shape == (D * D, D, D)
        for mu in range(D * D):
            assert np.allclose(H[mu], H[mu].conj().T)
            for nu in range(D * D):
                g = np.trace(H[mu] @ H[nu])
                assert abs(g - (mu == nu)) < 1e-14
