"""Block expectation data, measurement simulation, and local estimation.

The central container holds, for every window of `width` consecutive sites,
the full vector of normalized basis-string expectations of the state's
reduction onto that window. Exact vectors come from dense partial traces or
from tensor-network contractions; synthetic noisy vectors come either from
Gaussian perturbations of the exact values or from simulated projective
counts pushed through a local maximum-likelihood estimator.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .operators import DenseOperator, MatrixProductOperator, window_coeffs
from .pauli import coeffs_from_dense, dense_from_coeffs, partial_trace

# ---- Block data container ----


@dataclass
class NoiseMeta:
    """Covariance descriptor for the entries of noisy block vectors.

    kind "scalar": iid Gaussian noise of standard deviation `sigma` was
    added to the unnormalized basis expectations (so sigma / sqrt(d^width)
    per normalized entry). kind "fisher": per-block Fisher information
    matrices over the non-identity normalized coefficients.
    """

    kind: str
    sigma: float | None = None
    fisher: list[np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("scalar", "fisher"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "scalar" and self.sigma is None:
            raise ValueError("scalar noise requires sigma")
        if self.kind == "fisher" and not self.fisher:
            raise ValueError("fisher noise requires matrices")


@dataclass
class PauliBlockData:
    """Normalized basis expectations for every width-site window.

    blocks[b] is the coefficient vector of the reduction onto sites
    b+1 .. b+width (1-based), packed big-endian, length (d^2)^width.
    """

    n_sites: int
    width: int
    blocks: np.ndarray
    d: int = 2
    noise: NoiseMeta | None = None

    def __post_init__(self):
        self.blocks = np.asarray(self.blocks, dtype=float)
        expect = (self.n_blocks, (self.d * self.d) ** self.width)
        if self.blocks.shape != expect:
            raise ValueError(f"blocks must have shape {expect}")

    @property
    def n_blocks(self) -> int:
        if not 1 <= self.width <= self.n_sites:
            raise ValueError("need 1 <= width <= n_sites")
        return self.n_sites - self.width + 1

    def block(self, k: int) -> np.ndarray:
        """Vector for the window starting at 1-based site k."""
        return self.blocks[k - 1]

    def block_dense(self, k: int) -> np.ndarray:
        """Dense reduced density matrix of the window starting at site k."""
        return dense_from_coeffs(self.block(k), self.d)


def exact_block_data(state, width: int) -> PauliBlockData:
    """Exact window expectations of a dense or matrix-product state."""
    if not isinstance(state, (DenseOperator, MatrixProductOperator)):
        raise TypeError(f"unsupported state type {type(state).__name__}")
    n, d = state.n_sites, state.d
    if not 1 <= width <= n:
        raise ValueError("need 1 <= width <= n_sites")
    if isinstance(state, DenseOperator):
        blocks = []
        for k in range(1, n - width + 2):
            rho_w = partial_trace(state.matrix, range(k, k + width), d)
            blocks.append(coeffs_from_dense(rho_w, d))
    else:
        blocks = [window_coeffs(state, k, width)
                  for k in range(1, n - width + 2)]
    return PauliBlockData(n, width, np.array(blocks), d)


def add_gaussian_noise(data: PauliBlockData, sigma: float, seed=None,
                       perturb_identity: bool = True) -> PauliBlockData:
    """Add iid N(0, sigma) noise in the unnormalized string convention.

    Normalized entries receive standard deviation sigma / sqrt(d^width).
    With perturb_identity=False the identity-string entries are left exact,
    preserving the declared trace.
    """
    rng = np.random.default_rng(seed)
    scale = sigma / np.sqrt(float(data.d) ** data.width)
    noisy = data.blocks + scale * rng.standard_normal(data.blocks.shape)
    if not perturb_identity:
        noisy[:, 0] = data.blocks[:, 0]
    return PauliBlockData(data.n_sites, data.width, noisy, data.d,
                          NoiseMeta("scalar", sigma=sigma))


def marginal_consistency(data: PauliBlockData) -> float:
    """Largest mismatch between overlapping marginals of adjacent blocks.

    Dropping the leftmost site of block k must agree with dropping the
    rightmost site of block k+1; zero for exact data.
    """
    d2 = data.d * data.d
    rt = np.sqrt(float(data.d))
    worst = 0.0
    for b in range(data.n_blocks - 1):
        left = data.blocks[b].reshape(d2, -1)[0] * rt
        right = data.blocks[b + 1].reshape(-1, d2)[:, 0] * rt
        worst = max(worst, float(np.max(np.abs(left - right))))
    return worst


# ---- Projective measurement simulation ----

_U_BASIS = {
    "z": np.eye(2, dtype=complex),
    "x": np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0),
    "y": np.array([[1.0, -1.0j], [1.0, 1.0j]], dtype=complex) / np.sqrt(2.0),
}

_AXIS = {"x": 1, "y": 2, "z": 3}


@dataclass
class CountsBlock:
    """Projective counts for one window, one entry per basis setting.

    counts maps a setting string over {x, y, z} to an integer histogram
    over the 2^width outcomes, indexed big-endian with bit 0 for the +1
    eigenvalue on a site.
    """

    k: int
    width: int
    counts: dict[str, np.ndarray] = field(default_factory=dict)

    def shots(self, setting: str) -> int:
        return int(self.counts[setting].sum())


def outcome_string(idx: int, width: int) -> str:
    return format(idx, f"0{width}b").replace("0", "+").replace("1", "-")


def outcome_index(s: str) -> int:
    return int(s.replace("+", "0").replace("-", "1"), 2)


def all_settings(width: int):
    return ["".join(p) for p in itertools.product("xyz", repeat=width)]


def _window_density(state, k: int, width: int) -> np.ndarray:
    if isinstance(state, DenseOperator):
        return partial_trace(state.matrix, range(k, k + width), state.d)
    return dense_from_coeffs(window_coeffs(state, k, width), state.d)


def setting_probabilities(rho: np.ndarray, setting: str) -> np.ndarray:
    """Outcome distribution of measuring each site along the given axes."""
    u = _U_BASIS[setting[0]]
    for ch in setting[1:]:
        u = np.kron(u, _U_BASIS[ch])
    p = np.einsum("ij,jk,ik->i", u, rho, u.conj(), optimize=True).real
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def simulate_counts(state, width: int, shots: int, seed=None) -> list[CountsBlock]:
    """Multinomial counts for all 3^width settings of every window."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    n = state.n_sites
    out = []
    for k in range(1, n - width + 2):
        rho = _window_density(state, k, width)
        counts = {}
        for setting in all_settings(width):
            p = setting_probabilities(rho, setting)
            counts[setting] = rng.multinomial(shots, p)
        out.append(CountsBlock(k, width, counts))
    return out


# ---- Local maximum-likelihood estimation ----

_P_FLOOR = 1e-12


def _design_blocks(width: int):
    """Measurement design over all settings in the coefficient basis.

    Returns (settings, cols, signs): for setting row s the probability
    vector is theta[cols[s]] @ signs.T, where theta is the window
    coefficient vector, cols[s, b] packs the string with site i carrying
    either the identity or the axis of s_i (b selects which sites are
    non-identity), and signs[o, b] = (-1)^popcount(o & b) * 2^(-width/2).
    The sign matrix is shared by every setting, so one matmul evaluates
    all settings at once.
    """
    dim = 1 << width
    o = np.arange(dim)
    v = o[:, None] & o[None, :]
    par = np.zeros((dim, dim), dtype=int)
    for t in range(width):
        par += (v >> t) & 1
    signs = np.where(par % 2 == 0, 1.0, -1.0) * 2.0 ** (-width / 2.0)
    bitmat = (o[:, None] >> (width - 1 - np.arange(width))) & 1
    place = 4 ** (width - 1 - np.arange(width))
    settings = list(all_settings(width))
    cols = np.zeros((len(settings), dim), dtype=np.intp)
    for j, setting in enumerate(settings):
        axes = np.array([_AXIS[ch] for ch in setting])
        cols[j] = bitmat @ (axes * place)
    return settings, cols, signs


def _counts_matrix(block: CountsBlock, settings) -> np.ndarray:
    dim = 1 << block.width
    out = np.zeros((len(settings), dim))
    for j, s in enumerate(settings):
        if s in block.counts:
            out[j] = block.counts[s]
    return out


def _log_likelihood(n_mat: np.ndarray, p_mat: np.ndarray) -> float:
    p = np.clip(p_mat, _P_FLOOR, None)
    mask = n_mat > 0
    return float(np.sum(n_mat[mask] * np.log(p[mask])))


@dataclass
class MleResult:
    rho: np.ndarray
    converged: bool
    n_iter: int
    log_likelihood: float


def local_mle(block: CountsBlock, tol: float = 1e-10,
              max_iter: int = 10_000) -> MleResult:
    """Fixed-point likelihood ascent for one window's counts.

    Iterates the standard R rho R update with step damping whenever a full
    step would lower the likelihood; halts when the likelihood gain drops
    below tol. Non-convergence is reported on the result, which then still
    carries the best iterate found.
    """
    width = block.width
    dim = 1 << width
    settings, cols, signs = _design_blocks(width)
    n_mat = _counts_matrix(block, settings)
    n_tot = n_mat.sum()
    if n_tot == 0:
        raise ValueError("no counts present in block")
    rho = np.eye(dim, dtype=complex) / dim
    theta = coeffs_from_dense(rho)
    p_mat = theta[cols] @ signs.T
    ll = _log_likelihood(n_mat, p_mat)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        ratio = n_mat / np.clip(p_mat, _P_FLOOR, None)
        grad = np.bincount(cols.ravel(), weights=(ratio @ signs).ravel(),
                           minlength=4**width)
        r_op = dense_from_coeffs(grad)
        step = 1.0
        accepted = False
        for _ in range(40):
            g = (1.0 - step) * np.eye(dim) + (step / n_tot) * r_op
            cand = g @ rho @ g.conj().T
            cand = (cand + cand.conj().T) / 2.0
            cand /= np.trace(cand).real
            cand_theta = coeffs_from_dense(cand)
            cand_p = cand_theta[cols] @ signs.T
            cand_ll = _log_likelihood(n_mat, cand_p)
            if cand_ll >= ll - 1e-13 * max(1.0, abs(ll)):
                accepted = True
                break
            step /= 2.0
        if not accepted:
            break
        gain = cand_ll - ll
        rho, theta, p_mat, ll = cand, cand_theta, cand_p, cand_ll
        if gain < tol:
            converged = True
            break
    return MleResult(rho, converged, it, ll)


def fisher_information(block: CountsBlock, rho_est: np.ndarray) -> np.ndarray:
    """Fisher information over the non-identity window coefficients.

    F = sum_s n_s sum_o (grad p)(grad p)^T / p evaluated at the estimate,
    with probabilities clipped at the floor; shape (4^w - 1, 4^w - 1).
    """
    width = block.width
    settings, cols, signs = _design_blocks(width)
    theta = coeffs_from_dense(np.asarray(rho_est, dtype=complex))
    full = np.zeros((4**width, 4**width))
    for j, s in enumerate(settings):
        n_so = block.counts.get(s)
        if n_so is None or n_so.sum() == 0:
            continue
        n_s = int(n_so.sum())
        p = np.clip(signs @ theta[cols[j]], _P_FLOOR, None)
        m = signs.T @ (signs / p[:, None]) * n_s
        full[np.ix_(cols[j], cols[j])] += m
    return full[1:, 1:]


def block_data_from_counts(blocks: list[CountsBlock], n_sites: int,
                           tol: float = 1e-10,
                           max_iter: int = 10_000) -> PauliBlockData:
    """Estimate every window from counts; attaches Fisher noise metadata."""
    if not blocks:
        raise ValueError("no blocks given")
    width = blocks[0].width
    by_k = {b.k: b for b in blocks}
    if sorted(by_k) != list(range(1, n_sites - width + 2)):
        raise ValueError("blocks must cover every window exactly once")
    vecs, fishers = [], []
    for k in range(1, n_sites - width + 2):
        res = local_mle(by_k[k], tol=tol, max_iter=max_iter)
        if not res.converged:
            warnings.warn(f"window {k}: likelihood ascent hit the iteration "
                          "cap; using the best iterate")
        vecs.append(coeffs_from_dense(res.rho))
        fishers.append(fisher_information(by_k[k], res.rho))
    return PauliBlockData(n_sites, width, np.array(vecs), 2,
                          NoiseMeta("fisher", fisher=fishers))


def blocks_from_global_counts(global_counts: dict[str, np.ndarray],
                              n_sites: int, width: int) -> list[CountsBlock]:
    """Reduce whole-chain setting histograms to window counts.

    Counts are marginalized over the sites outside each window and pooled
    over all global settings that agree on the window.
    """
    out = []
    for k in range(1, n_sites - width + 2):
        pooled: dict[str, np.ndarray] = {}
        for setting, hist in global_counts.items():
            if len(setting) != n_sites:
                raise ValueError("setting length must equal n_sites")
            hist = np.asarray(hist)
            sub = setting[k - 1:k - 1 + width]
            t = hist.reshape((2,) * n_sites)
            axes = tuple(i for i in range(n_sites)
                         if not k - 1 <= i < k - 1 + width)
            marg = t.sum(axis=axes).reshape(-1)
            if sub in pooled:
                pooled[sub] = pooled[sub] + marg
            else:
                pooled[sub] = marg.copy()
        out.append(CountsBlock(k, width, pooled))
    return out


# ---- Serialization ----


def save_counts(blocks: list[CountsBlock], n_sites: int, path: str) -> None:
    width = blocks[0].width
    payload = {
        "version": 1, "N": n_sites, "R": width, "d": 2,
        "blocks": [
            {"k": b.k, "settings": [
                {"s": s, "shots": int(c.sum()),
                 "counts": {outcome_string(i, width): int(v)
                            for i, v in enumerate(c) if v}}
                for s, c in sorted(b.counts.items())]}
            for b in blocks],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_counts(path: str):
    """Returns (blocks, n_sites); validates per-setting totals."""
    with open(path) as fh:
        payload = json.load(fh)
    n_sites, width = int(payload["N"]), int(payload["R"])
    blocks = []
    for rec in payload["blocks"]:
        counts = {}
        for srec in rec["settings"]:
            hist = np.zeros(1 << width, dtype=np.int64)
            for o, v in srec["counts"].items():
                hist[outcome_index(o)] = int(v)
            if "shots" in srec and int(srec["shots"]) != int(hist.sum()):
                raise ValueError(
                    f"block {rec['k']} setting {srec['s']}: counts sum to "
                    f"{int(hist.sum())}, declared {srec['shots']}")
            counts[srec["s"]] = hist
        blocks.append(CountsBlock(int(rec["k"]), width, counts))
    return blocks, n_sites


def save_block_data(data: PauliBlockData, path: str) -> None:
    noise = None
    if data.noise is not None:
        noise = {"kind": data.noise.kind}
        if data.noise.kind == "scalar":
            noise["sigma"] = data.noise.sigma
        else:
            noise["fisher"] = [f.tolist() for f in data.noise.fisher]
    payload = {
        "version": 1, "N": data.n_sites, "R": data.width, "d": data.d,
        "blocks": data.blocks.tolist(), "noise": noise,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_block_data(path: str) -> PauliBlockData:
    with open(path) as fh:
        payload = json.load(fh)
    noise = None
    raw = payload.get("noise")
    if raw:
        if raw["kind"] == "scalar":
            noise = NoiseMeta("scalar", sigma=float(raw["sigma"]))
        else:
            noise = NoiseMeta("fisher", fisher=[np.asarray(f, dtype=float)
                                                for f in raw["fisher"]])
    return PauliBlockData(int(payload["N"]), int(payload["R"]),
                          np.asarray(payload["blocks"], dtype=float),
                          int(payload["d"]), noise)
