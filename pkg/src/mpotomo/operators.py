"""Dense and matrix-product representations of multi-site operators.

A MatrixProductOperator stores one real 3-axis tensor per site, indexed
(basis index alpha, left bond, right bond), with unit boundary bonds. The
coefficient of a basis string is the ordered product of per-site matrices,

    c(a_1, ..., a_N) = T_1[a_1] T_2[a_2] ... T_N[a_N],

so Hermiticity of the represented operator is built in. Dense operators are
plain complex matrices with site 1 most significant in the index ordering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .pauli import coeffs_from_dense, dense_from_coeffs, n_sites_of

DENSE_SITE_CAP = 12


@dataclass
class DenseOperator:
    """Dense Hermitian operator on n_sites qudits."""

    matrix: np.ndarray
    d: int = 2

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        n = self.n_sites
        if n > DENSE_SITE_CAP:
            raise ValueError(f"dense operators capped at {DENSE_SITE_CAP} sites")
        dev = np.max(np.abs(self.matrix - self.matrix.conj().T))
        if dev > 1e-10 * max(1.0, np.max(np.abs(self.matrix))):
            raise ValueError(f"matrix is not Hermitian (deviation {dev:.2e})")

    @property
    def n_sites(self) -> int:
        return n_sites_of(self.matrix.shape[0], self.d)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def coeffs(self) -> np.ndarray:
        return coeffs_from_dense(self.matrix, self.d)


@dataclass
class MatrixProductOperator:
    """Operator in matrix-product form with real basis-coefficient tensors."""

    tensors: list[np.ndarray] = field(default_factory=list)
    d: int = 2

    def __post_init__(self):
        self.tensors = [np.ascontiguousarray(t, dtype=float) for t in self.tensors]
        d2 = self.d * self.d
        for i, t in enumerate(self.tensors):
            if t.ndim != 3 or t.shape[0] != d2:
                raise ValueError(f"tensor {i} must have shape ({d2}, Dl, Dr)")
            if i and t.shape[1] != self.tensors[i - 1].shape[2]:
                raise ValueError(f"bond mismatch between sites {i} and {i + 1}")
        if self.tensors:
            if self.tensors[0].shape[1] != 1 or self.tensors[-1].shape[2] != 1:
                raise ValueError("boundary bonds must have dimension 1")

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        """[D_1, ..., D_{N+1}] with D_1 = D_{N+1} = 1."""
        return [self.tensors[0].shape[1]] + [t.shape[2] for t in self.tensors]

    def coefficient(self, alphas) -> float:
        alphas = list(alphas)
        if len(alphas) != self.n_sites:
            raise ValueError("one basis index per site required")
        v = self.tensors[0][alphas[0]]
        for t, a in zip(self.tensors[1:], alphas[1:]):
            v = v @ t[a]
        return float(v[0, 0])

    def full_coeffs(self) -> np.ndarray:
        """All (d^2)^N coefficients, packed big-endian. Dense-cap sized."""
        if self.n_sites > DENSE_SITE_CAP:
            raise ValueError("full coefficient vector capped at 12 sites")
        G = self.tensors[0][:, 0, :]
        for t in self.tensors[1:]:
            G = np.tensordot(G, t, axes=(1, 1))
            G = G.reshape(-1, t.shape[2])
        return np.ascontiguousarray(G[:, 0])

    @property
    def trace(self) -> float:
        c0 = self.coefficient([0] * self.n_sites)
        return float(self.d ** (self.n_sites / 2.0) * c0)

    def to_dense(self) -> DenseOperator:
        return DenseOperator(dense_from_coeffs(self.full_coeffs(), self.d), self.d)

    def rescaled_trace(self, target: float = 1.0) -> "MatrixProductOperator":
        """Copy with the trace rescaled to `target` (trace must be nonzero)."""
        tr = self.trace
        if abs(tr) < 1e-300:
            raise ValueError("cannot rescale an operator with zero trace")
        tensors = [t.copy() for t in self.tensors]
        tensors[0] = tensors[0] * (target / tr)
        return MatrixProductOperator(tensors, self.d)


def mpo_expectation(mpo: MatrixProductOperator, alphas) -> float:
    """Coefficient tr[O P-string(alphas)] read off the tensor network."""
    return mpo.coefficient(alphas)


def dense_from_mpo(mpo: MatrixProductOperator) -> DenseOperator:
    return mpo.to_dense()


def identity_environments(mpo: MatrixProductOperator):
    """Boundary vectors of the network with all sites outside a window traced.

    Returns (left, right): left[k] contracts sites 1..k-1 against the
    identity string (each site contributing sqrt(d) times its alpha = 0
    slice), right[k] does the same for sites k+1..N; 1-based k.
    """
    n, d = mpo.n_sites, mpo.d
    rt = np.sqrt(float(d))
    left = [None] * (n + 2)
    left[1] = np.ones(1)
    for k in range(1, n + 1):
        left[k + 1] = rt * (left[k] @ mpo.tensors[k - 1][0])
    right = [None] * (n + 2)
    right[n] = np.ones(1)
    for k in range(n, 0, -1):
        right[k - 1] = rt * (mpo.tensors[k - 1][0] @ right[k])
    return left, right


def window_coeffs(mpo: MatrixProductOperator, k: int, width: int) -> np.ndarray:
    """Basis coefficients of the reduction onto sites k..k+width-1.

    Entry pack(a_vec) equals tr[rho_window P-string(a_vec)] where rho_window
    is the partial trace of the represented operator onto the window.
    """
    n, d = mpo.n_sites, mpo.d
    if not (1 <= k and k + width - 1 <= n):
        raise ValueError("window out of range")
    left, right = identity_environments(mpo)
    G = left[k]
    for i in range(k, k + width):
        G = np.tensordot(G, mpo.tensors[i - 1], axes=(G.ndim - 1, 1))
    out = np.tensordot(G, right[k + width - 1], axes=(G.ndim - 1, 0))
    return np.ascontiguousarray(out.reshape(-1))


def mpo_overlap(a: MatrixProductOperator, b: MatrixProductOperator) -> float:
    """Hilbert-Schmidt inner product tr[a b] of two Hermitian networks."""
    if a.n_sites != b.n_sites or a.d != b.d:
        raise ValueError("operands must share site count and local dimension")
    T = np.ones((1, 1))
    for ta, tb in zip(a.tensors, b.tensors):
        T = np.einsum("aij,ik,akl->jl", ta, T, tb, optimize=True)
    return float(T[0, 0])


def _exact_split(arr: np.ndarray, n_axes: int, tail: int, d2: int,
                 rtol: float = 1e-12):
    """Factor arr of shape (d2^n_axes * tail,) into n_axes site tensors.

    Sequential SVD keeping every singular value above rtol * s_max, so the
    product reproduces arr to numerical accuracy; the final tensor carries a
    right bond of size `tail`.
    """
    tensors = []
    carry = arr.reshape(1, -1)
    for i in range(n_axes):
        rows = carry.shape[0] * d2
        rest = carry.size // rows
        mat = carry.reshape(rows, rest)
        if i == n_axes - 1 and tail == rest:
            t = mat.reshape(carry.shape[0], d2, rest)
            tensors.append(np.ascontiguousarray(t.transpose(1, 0, 2)))
            return tensors
        U, s, Vt = np.linalg.svd(mat, full_matrices=False)
        keep = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 1
        keep = max(keep, 1)
        t = U[:, :keep].reshape(carry.shape[0], d2, keep)
        tensors.append(np.ascontiguousarray(t.transpose(1, 0, 2)))
        carry = s[:keep, None] * Vt[:keep]
    return tensors


def mpo_from_coeffs(c: np.ndarray, d: int = 2,
                    rtol: float = 1e-12) -> MatrixProductOperator:
    """Exact matrix-product form of a full coefficient vector."""
    c = np.asarray(c, dtype=float)
    n = n_sites_of(c.shape[0], d * d)
    tensors = _exact_split(c, n, 1, d * d, rtol)
    return MatrixProductOperator(tensors, d)


def mpo_from_dense(op: DenseOperator, rtol: float = 1e-12) -> MatrixProductOperator:
    """Exact (numerically lossless) matrix-product form of a dense operator."""
    return mpo_from_coeffs(op.coeffs(), op.d, rtol)


def random_mpo(n_sites: int, bond: int, seed=None, d: int = 2) -> MatrixProductOperator:
    """Random real-tensor network with the given uniform bulk bond dimension.

    Used for generic-position checks; the global operator is Hermitian by
    construction but not positive. Resamples until the trace is nonzero.
    """
    rng = np.random.default_rng(seed)
    d2 = d * d
    for _ in range(64):
        tensors = []
        for i in range(n_sites):
            dl = 1 if i == 0 else bond
            dr = 1 if i == n_sites - 1 else bond
            tensors.append(rng.standard_normal((d2, dl, dr)))
        mpo = MatrixProductOperator(tensors, d)
        if abs(mpo.trace) > 1e-6:
            return mpo
    raise RuntimeError("failed to draw a network with nonzero trace")


# ---- Serialization ----

FORMAT_VERSION = 1


def _mpo_to_payload(mpo: MatrixProductOperator) -> dict:
    return {
        "version": FORMAT_VERSION,
        "kind": "mpo",
        "n_sites": mpo.n_sites,
        "d": mpo.d,
        "bond_dims": mpo.bond_dims,
        "tensors": [t.tolist() for t in mpo.tensors],
    }


def _dense_to_payload(op: DenseOperator) -> dict:
    m = op.matrix
    return {
        "version": FORMAT_VERSION,
        "kind": "dense",
        "n_sites": op.n_sites,
        "d": op.d,
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def save_operator(op, path: str) -> None:
    """Write a DenseOperator or MatrixProductOperator to a JSON file."""
    if isinstance(op, MatrixProductOperator):
        payload = _mpo_to_payload(op)
    elif isinstance(op, DenseOperator):
        payload = _dense_to_payload(op)
    else:
        raise TypeError(f"cannot serialize {type(op).__name__}")
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_operator(path: str):
    """Read an operator JSON file; returns the matching container type."""
    with open(path) as fh:
        payload = json.load(fh)
    kind = payload.get("kind")
    if kind == "mpo":
        tensors = [np.asarray(t, dtype=float) for t in payload["tensors"]]
        return MatrixProductOperator(tensors, int(payload["d"]))
    if kind == "dense":
        raw = np.asarray(payload["matrix"], dtype=float)
        return DenseOperator(raw[..., 0] + 1.0j * raw[..., 1], int(payload["d"]))
    raise ValueError(f"unknown operator kind {kind!r}")
