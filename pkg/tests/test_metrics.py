import numpy as np
import pytest

from mpotomo.metrics import (compare_states, fidelity_w_optimized,
                             hs_distance, purity)
from mpotomo.operators import DenseOperator, mpo_from_dense, random_mpo
from mpotomo.states import ghz_state, w_state


def _wrap(x):
    return np.mod(np.asarray(x), 2.0 * np.pi)


def test_hs_distance_of_identical_states_is_zero():
    a = random_mpo(5, bond=2, seed=0)
    assert abs(hs_distance(a, a)) < 1e-12


def test_hs_distance_halved_state():
    # D(rho, rho/2) = ||rho/2||^2 / ||rho||^2 = 1/4
    a = random_mpo(4, bond=2, seed=1)
    half = a.rescaled_trace(a.trace / 2.0)
    assert abs(hs_distance(a, half) - 0.25) < 1e-12


def test_hs_distance_paths_agree(rng):
    a = random_mpo(6, bond=2, seed=2)
    b = random_mpo(6, bond=3, seed=3)
    ad, bd = a.to_dense(), b.to_dense()
    base = hs_distance(a, b)
    assert abs(hs_distance(ad, bd) - base) < 1e-10
    assert abs(hs_distance(ad, b) - base) < 1e-10
    assert abs(hs_distance(a, bd) - base) < 1e-10


def test_hs_distance_reference_normalization():
    a = random_mpo(4, bond=2, seed=4)
    b = random_mpo(4, bond=2, seed=5)
    na = hs_distance(a, b) * purity(a)
    nb = hs_distance(b, a) * purity(b)
    assert abs(na - nb) < 1e-10 * max(abs(na), 1.0)


def test_purity_closed_forms():
    n = 5
    mm = DenseOperator(np.eye(2**n, dtype=complex) / 2**n)
    assert abs(purity(mm) - 2.0**-n) < 1e-14
    dense, mpo = ghz_state(4)
    assert abs(purity(dense) - 1.0) < 1e-12
    assert abs(purity(mpo) - 1.0) < 1e-12
    assert abs(purity(mpo) - purity(mpo_from_dense(dense))) < 1e-12


def test_w_fidelity_of_w_state_is_one_with_phase_recovery():
    target = [0.3, -0.2, 0.9, 2.5]
    dense, mpo = w_state(5, phases=target)
    f, phases = fidelity_w_optimized(dense, seed=1)
    assert abs(f - 1.0) < 1e-10
    assert np.allclose(_wrap(phases), _wrap(target), atol=1e-5)
    f2, _ = fidelity_w_optimized(mpo, seed=1)
    assert abs(f2 - 1.0) < 1e-10


def test_w_fidelity_of_maximally_mixed():
    n = 4
    mm = DenseOperator(np.eye(2**n, dtype=complex) / 2**n)
    f, _ = fidelity_w_optimized(mm)
    assert abs(f - 2.0**-n) < 1e-12


def test_w_fidelity_of_mixture_closed_form():
    n = 4
    dense, _ = w_state(n, phases=[1.0, -0.5, 0.25])
    mix = 0.9 * dense.matrix + 0.1 * np.eye(2**n) / 2**n
    f, _ = fidelity_w_optimized(DenseOperator(mix))
    assert abs(f - (0.9 + 0.1 / 2**n)) < 1e-10


def test_w_fidelity_multistart_info():
    dense, _ = w_state(4, phases=[0.4, 1.3, -0.7])
    f, phases, info = fidelity_w_optimized(dense, full_output=True)
    spread = np.ptp(info["start_fidelities"])
    assert spread < 1e-8
    assert len(info["start_fidelities"]) == 10


def test_compare_states_report_fields():
    from mpotomo.states import random_mpo_via_ancilla
    a = random_mpo_via_ancilla(4, seed=6)
    dense, _ = w_state(4)
    rep = compare_states(dense, a, w_fidelity=True, seed=2)
    assert rep.hs_distance > 0.0
    assert abs(rep.purity_ref - 1.0) < 1e-10
    assert rep.min_eig_est is not None
    assert 0.0 <= rep.w_fidelity <= 1.0 + 1e-12
    assert len(rep.w_phases) == 3
    d = rep.to_dict()
    assert set(d) >= {"hs_distance", "purity_ref", "purity_est",
                      "min_eig_est", "w_fidelity"}


def test_compare_states_without_w_block():
    a = random_mpo(4, bond=2, seed=7)
    b = random_mpo(4, bond=2, seed=8)
    rep = compare_states(a, b)
    assert rep.w_fidelity is None and rep.w_phases is None


def test_report_serialization(tmp_path):
    a = random_mpo(3, bond=2, seed=9)
    b = random_mpo(3, bond=2, seed=10)
    rep = compare_states(a, b)
    path = tmp_path / "cmp.json"
    rep.save(path)
    import json
    payload = json.loads(path.read_text())
    assert abs(payload["hs_distance"] - rep.hs_distance) < 1e-15
