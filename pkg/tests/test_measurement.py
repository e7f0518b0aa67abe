import json

import numpy as np
import pytest

import oracles
from mpotomo.measurement import (CountsBlock, add_gaussian_noise,
                                 all_settings, block_data_from_counts,
                                 blocks_from_global_counts, exact_block_data,
                                 fisher_information, load_block_data,
                                 load_counts, local_mle, marginal_consistency,
                                 outcome_index, outcome_string,
                                 save_block_data, save_counts,
                                 setting_probabilities, simulate_counts)
from mpotomo.operators import DenseOperator, random_mpo
from mpotomo.pauli import coeffs_from_dense
from mpotomo.states import product_state, w_state


def _dense_state(seed, n):
    rng = np.random.default_rng(seed)
    dim = 2**n
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = m @ m.conj().T
    return DenseOperator(m / np.trace(m).real)


def test_exact_blocks_match_trace_oracle():
    state = _dense_state(0, 4)
    data = exact_block_data(state, 2)
    assert data.n_blocks == 3
    for b, k in enumerate(range(1, 4)):
        red = oracles.partial_trace_loops(state.matrix, [k, k + 1], 4)
        ref = oracles.all_coeffs_by_trace(red, 2)
        assert np.max(np.abs(data.blocks[b] - ref.real)) < 1e-12


def test_exact_blocks_same_for_dense_and_mpo():
    mpo = random_mpo(6, bond=2, seed=12)
    d1 = exact_block_data(mpo, 3)
    d2 = exact_block_data(mpo.to_dense(), 3)
    assert np.max(np.abs(d1.blocks - d2.blocks)) < 1e-12


def test_identity_entry_encodes_trace():
    state = _dense_state(1, 4)
    for width in (1, 2, 3):
        data = exact_block_data(state, width)
        assert np.allclose(data.blocks[:, 0], 2.0 ** (-width / 2.0),
                           atol=1e-12)


def test_exact_block_data_validates_width():
    state = _dense_state(2, 3)
    with pytest.raises(ValueError):
        exact_block_data(state, 0)
    with pytest.raises(ValueError):
        exact_block_data(state, 4)


def test_noise_scale_follows_width():
    # injected on unnormalized strings: normalized entries get
    # sigma / sqrt(2^width)
    state = _dense_state(3, 5)
    width, sigma = 3, 1e-2
    data = exact_block_data(state, width)
    deltas = []
    for seed in range(40):
        noisy = add_gaussian_noise(data, sigma, seed=seed)
        deltas.append((noisy.blocks - data.blocks).ravel())
    sd = np.std(np.concatenate(deltas))
    expected = sigma / np.sqrt(2.0**width)
    assert abs(sd - expected) < 0.05 * expected


def test_noise_is_seeded_and_marks_metadata():
    state = _dense_state(4, 4)
    data = exact_block_data(state, 2)
    n1 = add_gaussian_noise(data, 1e-3, seed=5)
    n2 = add_gaussian_noise(data, 1e-3, seed=5)
    n3 = add_gaussian_noise(data, 1e-3, seed=6)
    assert np.array_equal(n1.blocks, n2.blocks)
    assert not np.array_equal(n1.blocks, n3.blocks)
    assert n1.noise.kind == "scalar" and n1.noise.sigma == 1e-3


def test_noise_can_keep_identity_exact():
    state = _dense_state(5, 4)
    data = exact_block_data(state, 2)
    noisy = add_gaussian_noise(data, 1e-2, seed=0, perturb_identity=False)
    assert np.array_equal(noisy.blocks[:, 0], data.blocks[:, 0])
    default = add_gaussian_noise(data, 1e-2, seed=0)
    assert not np.array_equal(default.blocks[:, 0], data.blocks[:, 0])


def test_marginal_consistency_zero_exact_positive_noisy():
    state = _dense_state(6, 5)
    data = exact_block_data(state, 3)
    assert marginal_consistency(data) < 1e-12
    noisy = add_gaussian_noise(data, 1e-2, seed=1)
    assert marginal_consistency(noisy) > 1e-4


def test_setting_probabilities_match_projector_oracle():
    state = _dense_state(7, 2)
    rho = state.matrix
    for setting in all_settings(2):
        p = setting_probabilities(rho, setting)
        ref = [oracles.outcome_probability(rho, setting, (o >> 1 & 1, o & 1))
               for o in range(4)]
        assert np.allclose(p, ref, atol=1e-12)
        assert abs(p.sum() - 1.0) < 1e-12


def test_outcome_string_roundtrip():
    assert outcome_string(0, 3) == "+++"
    assert outcome_string(5, 3) == "-+-"
    for idx in range(8):
        assert outcome_index(outcome_string(idx, 3)) == idx


def test_simulate_counts_on_all_up_state():
    state, _ = product_state(3)
    blocks = simulate_counts(state, 2, 500, seed=0)
    assert [b.k for b in blocks] == [1, 2]
    for b in blocks:
        assert set(b.counts) == set(all_settings(2))
        # measuring z on |0> is deterministic: every shot lands on "+"
        assert b.counts["zz"][0] == 500
        assert b.shots("xy") == 500


def test_simulate_counts_is_seeded():
    state, _ = product_state(3)
    b1 = simulate_counts(state, 2, 100, seed=3)
    b2 = simulate_counts(state, 2, 100, seed=3)
    for x, y in zip(b1, b2):
        for s in x.counts:
            assert np.array_equal(x.counts[s], y.counts[s])


def test_mle_recovers_pure_product_state():
    state, _ = product_state(2)
    block = simulate_counts(state, 2, 5000, seed=1)[0]
    res = local_mle(block)
    assert res.converged
    assert abs(res.rho[0, 0].real - 1.0) < 2e-2
    assert np.trace(res.rho).real == pytest.approx(1.0, abs=1e-10)
    ev = np.linalg.eigvalsh(res.rho)
    assert ev[0] > -1e-10


def test_mle_consistent_on_maximally_mixed():
    rho = DenseOperator(np.eye(2) / 2)
    block = simulate_counts(rho, 1, 1_000_000, seed=2)[0]
    res = local_mle(block)
    err = np.linalg.norm(res.rho - np.eye(2) / 2)
    assert err < 2e-3


def test_mle_likelihood_never_decreases():
    state = _dense_state(8, 2)
    block = simulate_counts(state, 2, 300, seed=4)[0]
    lls = []
    for cap in (1, 2, 5, 10, 40):
        lls.append(local_mle(block, max_iter=cap).log_likelihood)
    assert all(b >= a - 1e-9 for a, b in zip(lls, lls[1:]))


def test_fisher_information_on_maximally_mixed_single_site():
    # p = 1/2 +- c/sqrt(2) per setting, so F = 2n per axis, diagonal
    n = 600
    counts = CountsBlock(1, 1, {
        "x": np.array([n // 2, n // 2]),
        "y": np.array([n // 2, n // 2]),
        "z": np.array([n // 2, n // 2]),
    })
    F = fisher_information(counts, np.eye(2) / 2)
    assert np.allclose(F, np.diag([2 * n, 2 * n, 2 * n]), atol=1e-9)


def test_fisher_information_matches_finite_differences():
    state = _dense_state(9, 2)
    block = simulate_counts(state, 2, 200, seed=5)[0]
    res = local_mle(block)
    F = fisher_information(block, res.rho)
    theta = coeffs_from_dense(res.rho)
    ref = oracles.fisher_by_finite_difference(block.counts, 2, theta)
    assert np.max(np.abs(F - ref)) < 1e-3 * max(1.0, np.max(np.abs(ref)))


def test_block_data_from_counts_has_fisher_metadata():
    _, wm = w_state(4)
    blocks = simulate_counts(wm, 2, 400, seed=6)
    with pytest.warns(UserWarning, match="iteration cap"):
        # rank-deficient window marginals converge sublinearly; the cap
        # warning is the documented behaviour, the best iterate is kept
        data = block_data_from_counts(blocks, 4)
    assert data.noise is not None and data.noise.kind == "fisher"
    assert len(data.noise.fisher) == data.n_blocks
    assert data.noise.fisher[0].shape == (15, 15)
    # identity entries are fixed by unit trace
    assert np.allclose(data.blocks[:, 0], 0.5, atol=1e-12)


def test_block_data_from_counts_requires_full_coverage():
    _, wm = w_state(4)
    blocks = simulate_counts(wm, 2, 50, seed=7)
    with pytest.raises(ValueError):
        block_data_from_counts(blocks[:-1], 4)


def test_blocks_from_global_counts_pools_settings():
    rng = np.random.default_rng(8)
    global_counts = {}
    for setting in ("xzx", "xzy", "yzz"):
        global_counts[setting] = rng.integers(0, 50, size=8)
    blocks = blocks_from_global_counts(global_counts, 3, 2)
    assert [b.k for b in blocks] == [1, 2]
    # two global settings share the window "xz" on sites 1..2: their
    # marginalized histograms must pool
    first = blocks[0]
    t1 = global_counts["xzx"].reshape(2, 2, 2).sum(axis=2)
    t2 = global_counts["xzy"].reshape(2, 2, 2).sum(axis=2)
    assert np.array_equal(first.counts["xz"], (t1 + t2).reshape(-1))
    t3 = global_counts["yzz"].reshape(2, 2, 2).sum(axis=2)
    assert np.array_equal(first.counts["yz"], t3.reshape(-1))


def test_counts_serialization_roundtrip(tmp_path):
    state, _ = product_state(3)
    blocks = simulate_counts(state, 2, 64, seed=9)
    path = tmp_path / "c.json"
    save_counts(blocks, 3, path)
    back, n_sites = load_counts(path)
    assert n_sites == 3
    assert [b.k for b in back] == [b.k for b in blocks]
    for x, y in zip(back, blocks):
        for s in y.counts:
            assert np.array_equal(x.counts[s], y.counts[s])
    # sparse storage: zero histogram entries are dropped from the file
    payload = json.loads(path.read_text())
    ss = payload["blocks"][0]["settings"]
    zz = next(e for e in ss if e["s"] == "zz")
    assert zz["counts"] == {"++": 64}


def test_block_data_serialization_roundtrip(tmp_path):
    state = _dense_state(10, 4)
    data = add_gaussian_noise(exact_block_data(state, 2), 1e-3, seed=10)
    path = tmp_path / "d.json"
    save_block_data(data, path)
    back = load_block_data(path)
    assert back.n_sites == data.n_sites and back.width == data.width
    assert np.array_equal(back.blocks, data.blocks)
    assert back.noise.kind == "scalar" and back.noise.sigma == 1e-3


def test_block_data_serialization_keeps_fisher(tmp_path):
    _, wm = w_state(3)
    blocks = simulate_counts(wm, 2, 100, seed=11)
    data = block_data_from_counts(blocks, 3)
    path = tmp_path / "f.json"
    save_block_data(data, path)
    back = load_block_data(path)
    assert back.noise.kind == "fisher"
    for a, b in zip(back.noise.fisher, data.noise.fisher):
        assert np.allclose(a, b, atol=1e-12)
