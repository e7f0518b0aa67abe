"""Normalized Pauli operator basis and coefficient transforms.

Conventions used throughout the package:

* single-site basis: P(0), P(1), P(2), P(3) = (identity, sigma_x, sigma_y,
  sigma_z) / sqrt(2), orthonormal under tr[P(a) P(b)] = delta_ab;
* multi-site strings are Kronecker products with site 1 leftmost;
* a string (a_1, ..., a_m) is packed into a flat index
  sum_i a_i * (d^2)^(m - i), i.e. big-endian with site 1 most significant;
* Hermitian operators have real coefficient vectors in this basis.
"""

from __future__ import annotations

import numpy as np

_SIGMA_0 = np.eye(2, dtype=complex)
_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

SIGMA = (_SIGMA_0, _SIGMA_X, _SIGMA_Y, _SIGMA_Z)


def pauli_matrix(alpha: int, d: int = 2) -> np.ndarray:
    """Normalized single-site basis element P(alpha), d x d."""
    if d != 2:
        raise ValueError("only d = 2 generators are provided")
    if not 0 <= alpha < d * d:
        raise ValueError(f"alpha = {alpha} out of range for d = {d}")
    return SIGMA[alpha] / np.sqrt(d)


def pauli_string_dense(alphas, d: int = 2) -> np.ndarray:
    """Dense Kronecker product P(a_1) x ... x P(a_m), site 1 leftmost."""
    alphas = list(alphas)
    if len(alphas) > 12:
        raise ValueError("dense strings capped at 12 sites")
    out = pauli_matrix(alphas[0], d)
    for a in alphas[1:]:
        out = np.kron(out, pauli_matrix(a, d))
    return out


def pack_index(alphas, d: int = 2) -> int:
    """Flat index of a multi-site string, site 1 most significant."""
    idx = 0
    for a in alphas:
        idx = idx * (d * d) + int(a)
    return idx


def unpack_index(idx: int, m: int, d: int = 2) -> tuple[int, ...]:
    """Inverse of pack_index for an m-site string."""
    out = []
    for _ in range(m):
        out.append(idx % (d * d))
        idx //= d * d
    if idx:
        raise ValueError("index out of range for m sites")
    return tuple(reversed(out))


def _site_transform(d: int = 2) -> np.ndarray:
    # W[a, r*d + c] = P(a)[c, r], so that (W @ vec(M))[a] = tr[M P(a)].
    # Rows are orthonormal, hence the inverse transform is W^dagger.
    d2 = d * d
    W = np.empty((d2, d2), dtype=complex)
    for a in range(d2):
        W[a] = pauli_matrix(a, d).T.reshape(-1)
    return W


_W2 = _site_transform(2)


def n_sites_of(dim: int, d: int = 2) -> int:
    """Number of sites of a d^m dimensional space, validated."""
    m = int(round(np.log(dim) / np.log(d)))
    if d**m != dim:
        raise ValueError(f"dimension {dim} is not a power of {d}")
    return m


def coeffs_from_dense(M: np.ndarray, d: int = 2) -> np.ndarray:
    """Coefficient vector c[pack(a_vec)] = tr[M P(a_1) x ... x P(a_m)].

    M must be Hermitian to machine accuracy; the result is returned real.
    """
    m = n_sites_of(M.shape[0], d)
    W = _W2 if d == 2 else _site_transform(d)
    # group row/column axes per site: (r1, c1, r2, c2, ...) -> (d^2,)*m
    T = M.reshape((d,) * (2 * m))
    perm = [ax for i in range(m) for ax in (i, m + i)]
    T = T.transpose(perm).reshape((d * d,) * m)
    for k in range(m):
        T = np.moveaxis(np.tensordot(W, T, axes=(1, k)), 0, k)
    c = T.reshape(-1)
    if np.max(np.abs(c.imag)) > 1e-10 * max(1.0, np.max(np.abs(c.real))):
        raise ValueError("operator is not Hermitian: complex coefficients")
    return np.ascontiguousarray(c.real)


def dense_from_coeffs(c: np.ndarray, d: int = 2) -> np.ndarray:
    """Dense matrix sum_a c[a] P-string(a); inverse of coeffs_from_dense."""
    m = n_sites_of(c.shape[0], d * d)
    W = _W2 if d == 2 else _site_transform(d)
    V = W.conj().T
    T = np.asarray(c, dtype=complex).reshape((d * d,) * m)
    for k in range(m):
        T = np.moveaxis(np.tensordot(V, T, axes=(1, k)), 0, k)
    T = T.reshape((d, d) * m)
    perm = [2 * i for i in range(m)] + [2 * i + 1 for i in range(m)]
    return T.transpose(perm).reshape(d**m, d**m)


def hermitian_basis(D: int) -> np.ndarray:
    """Orthonormal Hermitian basis of D x D matrices, shape (D^2, D, D).

    tr[H_i H_j] = delta_ij. Used to gauge complex pair-index bonds of an
    operator network into a form where Hermiticity makes tensors real.
    """
    basis = np.zeros((D * D, D, D), dtype=complex)
    n = 0
    for a in range(D):
        basis[n, a, a] = 1.0
        n += 1
    for a in range(D):
        for b in range(a + 1, D):
            basis[n, a, b] = basis[n, b, a] = 1.0 / np.sqrt(2.0)
            n += 1
            basis[n, a, b] = -1.0j / np.sqrt(2.0)
            basis[n, b, a] = 1.0j / np.sqrt(2.0)
            n += 1
    return basis


def partial_trace(M: np.ndarray, keep, d: int = 2) -> np.ndarray:
    """Partial trace of a dense m-site operator onto the sites in `keep`.

    `keep` holds 1-based site labels; their relative order is preserved.
    """
    m = n_sites_of(M.shape[0], d)
    keep = list(keep)
    if any(not 1 <= k <= m for k in keep):
        raise ValueError("keep sites out of range")
    T = M.reshape((d,) * (2 * m))
    row_idx = list(range(m))
    col_idx = [m + i if (i + 1) in keep else i for i in range(m)]
    out_idx = [i for i in range(m) if (i + 1) in keep]
    out_idx += [m + i for i in range(m) if (i + 1) in keep]
    nk = len(keep)
    out = np.einsum(T, row_idx + col_idx, out_idx)
    return out.reshape(d**nk, d**nk)
