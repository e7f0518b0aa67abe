"""Reference state generators: thermal chains, random networks, named states.

Thermal states are produced by exact diagonalization and are therefore
limited to the dense site cap. The random matrix-product family draws a
Gaussian bond-d pure state, weakly couples every site to its own ancilla
with a random Hermitian generator, and traces the ancillas out, which
yields a positive operator with bond dimension exactly d^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import DENSE_SITE_CAP, DenseOperator, MatrixProductOperator
from .pauli import SIGMA, hermitian_basis, pauli_matrix

# ---- Hamiltonians and thermal states ----

HAMILTONIAN_FAMILIES = ("critical_ising", "random_next_neighbour")


@dataclass
class HamiltonianSpec:
    """Nearest-neighbour chain Hamiltonian selector."""

    family: str
    n_sites: int
    seed: int | None = None

    def __post_init__(self):
        if self.family not in HAMILTONIAN_FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n_sites < 2:
            raise ValueError("need at least two sites")
        if self.n_sites > DENSE_SITE_CAP:
            raise ValueError(
                f"exact diagonalization capped at {DENSE_SITE_CAP} sites")


def _embed_two_site(term: np.ndarray, i: int, n: int) -> np.ndarray:
    """term acting on sites (i, i+1), identity elsewhere; 1-based i."""
    left = np.eye(2 ** (i - 1))
    right = np.eye(2 ** (n - i - 1))
    return np.kron(np.kron(left, term), right)


def hamiltonian_dense(spec: HamiltonianSpec) -> np.ndarray:
    n = spec.n_sites
    if spec.family == "critical_ising":
        h = np.zeros((2**n, 2**n), dtype=complex)
        xx = np.kron(SIGMA[1], SIGMA[1])
        for i in range(1, n):
            h -= _embed_two_site(xx, i, n)
        for i in range(1, n + 1):
            z = np.kron(np.kron(np.eye(2 ** (i - 1)), SIGMA[3]),
                        np.eye(2 ** (n - i)))
            h -= z
        return h
    rng = np.random.default_rng(spec.seed)
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(1, n):
        g = rng.standard_normal((4, 4)) + 1.0j * rng.standard_normal((4, 4))
        h += _embed_two_site((g + g.conj().T) / 2.0, i, n)
    return h


def thermal_dense(spec: HamiltonianSpec, beta: float) -> DenseOperator:
    """Gibbs state exp(-beta H) / Z by exact diagonalization."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    h = hamiltonian_dense(spec)
    evals, evecs = np.linalg.eigh(h)
    w = np.exp(-beta * (evals - evals.min()))
    w /= w.sum()
    rho = (evecs * w) @ evecs.conj().T
    return DenseOperator((rho + rho.conj().T) / 2.0, d=2)


# ---- Matrix-product machinery for pure states and local channels ----


def random_mps(n_sites: int, bond: int, rng, d: int = 2) -> list[np.ndarray]:
    """Unit-norm pure state with iid complex Gaussian tensors (d, Dl, Dr)."""
    tensors = []
    for i in range(n_sites):
        dl = 1 if i == 0 else bond
        dr = 1 if i == n_sites - 1 else bond
        shape = (d, dl, dr)
        tensors.append(rng.standard_normal(shape)
                       + 1.0j * rng.standard_normal(shape))
    T = np.ones((1, 1), dtype=complex)
    for A in tensors:
        T = np.einsum("sab,aA,sAB->bB", A.conj(), T, A, optimize=True)
    norm = np.sqrt(T[0, 0].real)
    scale = norm ** (-1.0 / n_sites)
    return [A * scale for A in tensors]


def mps_to_mpo(mps: list[np.ndarray], channels=None,
               d: int = 2) -> MatrixProductOperator:
    """Density operator of an MPS after an optional local channel per site.

    channels[i], if given, is the d^2 x d^2 superoperator S with
    S[(s', t'), (s, t)] the matrix element Lambda(|s><t|)[s', t']. Bond
    pair indices are rotated into a Hermitian operator basis, which makes
    every tensor real at bond dimension D^2.
    """
    n = len(mps)
    d2 = d * d
    W = np.empty((d2, d2), dtype=complex)
    for a in range(d2):
        W[a] = pauli_matrix(a, d).T.reshape(-1)  # W[a,(s',t')] = P(a)[t',s']
    bonds = [A.shape[1] for A in mps] + [mps[-1].shape[2]]
    Q = [hermitian_basis(D).reshape(D * D, D * D).T for D in bonds]
    tensors = []
    for i, A in enumerate(mps):
        pair = np.einsum("sab,tcd->stacbd", A, A.conj(), optimize=True)
        dl, dr = A.shape[1], A.shape[2]
        pair = pair.reshape(d, d, dl * dl, dr * dr)
        S = np.eye(d2, dtype=complex) if channels is None else channels[i]
        cmat = (W @ S).reshape(d2, d, d)
        T = np.einsum("ast,stlr->alr", cmat, pair, optimize=True)
        T = np.einsum("lm,amr,rk->alk", Q[i].conj().T, T, Q[i + 1],
                      optimize=True)
        if np.max(np.abs(T.imag)) > 1e-10 * max(1.0, np.max(np.abs(T.real))):
            raise ValueError("bond gauge failed to produce real tensors")
        tensors.append(T.real)
    return MatrixProductOperator(tensors, d)


def ancilla_channel(rng, t_hnorm: float, d: int = 2,
                    d_anc: int | None = None) -> np.ndarray:
    """Superoperator of a weak random site-ancilla coupling.

    Draws H = (G + G^dagger)/2 with complex Gaussian G on the site-ancilla
    pair, evolves for a time t with t * opnorm(H) = t_hnorm, ancilla
    starting in |0>, then traces the ancilla.
    """
    d_anc = d if d_anc is None else d_anc
    m = d * d_anc
    g = rng.standard_normal((m, m)) + 1.0j * rng.standard_normal((m, m))
    h = (g + g.conj().T) / 2.0
    evals, evecs = np.linalg.eigh(h)
    opnorm = np.max(np.abs(evals))
    t = 0.0 if opnorm == 0 else t_hnorm / opnorm
    u = (evecs * np.exp(-1.0j * t * evals)) @ evecs.conj().T
    kraus = u.reshape(d, d_anc, d, d_anc)[:, :, :, 0].transpose(1, 0, 2)
    return np.einsum("mas,mbt->abst", kraus, kraus.conj(),
                     optimize=True).reshape(d * d, d * d)


def random_mpo_via_ancilla(n_sites: int, seed=None, t_hnorm: float = 0.01,
                           d: int = 2) -> MatrixProductOperator:
    """Random positive operator with bond dimension d^2 and unit trace."""
    rng = np.random.default_rng(seed)
    mps = random_mps(n_sites, d, rng, d)
    channels = [ancilla_channel(rng, t_hnorm, d) for _ in range(n_sites)]
    return mps_to_mpo(mps, channels, d)


# ---- Named states ----


def _dense_from_vector(vec: np.ndarray) -> DenseOperator:
    return DenseOperator(np.outer(vec, vec.conj()), d=2)


def w_state(n_sites: int, phases=None):
    """W state with relative branch phases; returns (dense or None, MPO).

    The branch with the excitation on the last site carries phase zero and
    phases[j - 1] multiplies the branch with the excitation j sites in
    from the right, so len(phases) == n_sites - 1.
    """
    n = n_sites
    if phases is None:
        phases = np.zeros(n - 1)
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (n - 1,):
        raise ValueError("need n_sites - 1 phases")
    phi = np.concatenate(([0.0], phases))
    # amp[i] multiplies the branch with the excitation at 1-based site i + 1
    amp = np.exp(1.0j * phi[::-1]) / np.sqrt(n)
    mps = []
    for i in range(n):
        A = np.zeros((2, 2, 2), dtype=complex)
        A[0] = np.eye(2)
        A[1, 0, 1] = amp[i]
        if i == 0:
            A = A[:, :1, :]
        if i == n - 1:
            A = A[:, :, 1:]
        mps.append(A)
    mpo = mps_to_mpo(mps)
    dense = None
    if n <= DENSE_SITE_CAP:
        vec = np.zeros(2**n, dtype=complex)
        for i in range(n):
            vec[1 << (n - 1 - i)] = amp[i]
        dense = _dense_from_vector(vec)
    return dense, mpo


def ghz_state(n_sites: int):
    """GHZ state (|0...0> + |1...1>)/sqrt(2); returns (dense or None, MPO)."""
    n = n_sites
    c = 2.0 ** -0.5
    mps = []
    for i in range(n):
        if i == 0:
            A = np.zeros((2, 1, 2), dtype=complex)
            A[0, 0, 0] = c
            A[1, 0, 1] = c
        elif i == n - 1:
            A = np.zeros((2, 2, 1), dtype=complex)
            A[0, 0, 0] = 1.0
            A[1, 1, 0] = 1.0
        else:
            A = np.zeros((2, 2, 2), dtype=complex)
            A[0, 0, 0] = 1.0
            A[1, 1, 1] = 1.0
        mps.append(A)
    mpo = mps_to_mpo(mps)
    dense = None
    if n <= DENSE_SITE_CAP:
        vec = np.zeros(2**n, dtype=complex)
        vec[0] = vec[-1] = c
        dense = _dense_from_vector(vec)
    return dense, mpo


def product_state(n_sites: int, kets=None):
    """Product of single-site pure states; defaults to all |0>."""
    if kets is None:
        kets = [np.array([1.0, 0.0])] * n_sites
    if len(kets) != n_sites:
        raise ValueError("need one ket per site")
    tensors = []
    for v in kets:
        v = np.asarray(v, dtype=complex)
        v = v / np.linalg.norm(v)
        t = np.empty((4, 1, 1))
        for a in range(4):
            t[a, 0, 0] = (v.conj() @ pauli_matrix(a) @ v).real
        tensors.append(t)
    mpo = MatrixProductOperator(tensors, d=2)
    dense = None
    if n_sites <= DENSE_SITE_CAP:
        vec = np.array([1.0], dtype=complex)
        for v in kets:
            v = np.asarray(v, dtype=complex)
            vec = np.kron(vec, v / np.linalg.norm(v))
        dense = _dense_from_vector(vec)
    return dense, mpo


def named_state(kind: str, n_sites: int, phases=None, kets=None):
    """Dispatch for the named pure-state families."""
    if kind == "w":
        return w_state(n_sites, phases)
    if kind == "ghz":
        return ghz_state(n_sites)
    if kind == "product":
        return product_state(n_sites, kets)
    raise ValueError(f"unknown named state {kind!r}")
