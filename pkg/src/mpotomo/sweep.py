"""Grid sweeps over families, sizes, window widths, and noise levels.

Every (N, width, sigma) cell runs a fixed number of trials. The per-trial
generator seed is SeedSequence([master_seed, cell_index, trial_index]) with
cells enumerated in grid order, so a rerun with the same configuration
reproduces the output files byte for byte. Wall-clock timings are kept out
of the reproducible CSVs; request a separate timing file if needed.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .measurement import add_gaussian_noise, exact_block_data
from .metrics import hs_distance, purity
from .reconstruction import (ReconstructionConfig, RegularizerSpec,
                             default_split, noise_tikhonov_sigma2,
                             reconstruct_mpo)
from .states import (HamiltonianSpec, ghz_state, product_state,
                     random_mpo_via_ancilla, thermal_dense, w_state)

FAMILIES = ("critical_ising", "random_next_neighbour", "random_mpo",
            "w", "ghz", "product")

TRIAL_COLUMNS = ("family", "N", "R", "l", "r", "sigma", "trial", "seed",
                 "D", "purity_ref", "solver_mode", "status")
SUMMARY_COLUMNS = ("family", "N", "R", "l", "r", "sigma", "n_trials",
                   "n_ok", "mean_D", "std_D")


@dataclass
class SweepConfig:
    family: str
    n_list: list[int]
    width_list: list[int]
    sigma_list: list[float]
    trials: int = 1
    beta: float = 5.0
    t_hnorm: float = 0.01
    master_seed: int = 0
    solver: str = "tikhonov"
    tau: float = 1e-10

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.solver not in ("tikhonov", "truncated_pinv"):
            raise ValueError("sweep solver must be tikhonov or truncated_pinv")


def sweep_config_from_json(path: str) -> SweepConfig:
    with open(path) as fh:
        raw = json.load(fh)
    if "width_list" not in raw and "r_list" in raw:
        raw["width_list"] = raw.pop("r_list")
    return SweepConfig(**raw)


def _reference_state(cfg: SweepConfig, n: int, seed):
    """Returns the comparison/reference object for one trial.

    Deterministic families ignore the seed; random families redraw the
    state every trial from it.
    """
    if cfg.family == "critical_ising":
        return thermal_dense(HamiltonianSpec("critical_ising", n), cfg.beta)
    if cfg.family == "random_next_neighbour":
        spec = HamiltonianSpec("random_next_neighbour", n, seed=seed)
        return thermal_dense(spec, cfg.beta)
    if cfg.family == "random_mpo":
        return random_mpo_via_ancilla(n, seed=seed, t_hnorm=cfg.t_hnorm)
    if cfg.family == "w":
        return w_state(n)[1]
    if cfg.family == "ghz":
        return ghz_state(n)[1]
    return product_state(n)[1]


def _trial_regularizer(cfg: SweepConfig, sigma: float, l: int,
                       r: int) -> RegularizerSpec:
    # sigma = 0 always takes the plain truncated pseudoinverse: the zero
    # Tikhonov filter is undefined on rank-deficient exact window maps.
    if sigma == 0.0 or cfg.solver == "truncated_pinv":
        return RegularizerSpec("truncated_pinv", tau=cfg.tau)
    return RegularizerSpec("tikhonov",
                           sigma2=noise_tikhonov_sigma2(sigma, l, r))


def run_trial(cfg: SweepConfig, n: int, width: int, sigma: float,
              seed_seq: np.random.SeedSequence) -> dict:
    state_seed, noise_seed = seed_seq.spawn(2)
    l, r = default_split(width)
    t0 = time.perf_counter()
    ref = _reference_state(cfg, n, state_seed)
    data = exact_block_data(ref, width)
    if sigma > 0.0:
        data = add_gaussian_noise(data, sigma, seed=noise_seed)
    reg = _trial_regularizer(cfg, sigma, l, r)
    est = reconstruct_mpo(data, ReconstructionConfig(l=l, r=r, regularizer=reg))
    row = {
        "D": hs_distance(ref, est),
        "purity_ref": purity(ref),
        "solver_mode": reg.mode,
        "status": "ok",
        "wall_ms": (time.perf_counter() - t0) * 1e3,
    }
    return row


def run_sweep(cfg: SweepConfig, out_csv: str | None = None,
              summary_csv: str | None = None,
              timing_csv: str | None = None):
    """Run the grid; returns (trial_rows, summary_rows) and writes CSVs.

    Trial and summary files are byte-identical across reruns with the same
    configuration; failures are recorded per row and do not stop the grid.
    """
    rows = []
    summaries = []
    cells = list(product(cfg.n_list, cfg.width_list, cfg.sigma_list))
    for cell_index, (n, width, sigma) in enumerate(cells):
        l, r = default_split(width)
        cell_d = []
        for trial in range(cfg.trials):
            ss = np.random.SeedSequence([cfg.master_seed, cell_index, trial])
            seed_repr = int(ss.generate_state(1, np.uint64)[0])
            base = {
                "family": cfg.family, "N": n, "R": width, "l": l, "r": r,
                "sigma": sigma, "trial": trial, "seed": seed_repr,
            }
            try:
                base.update(run_trial(cfg, n, width, sigma, ss))
            except Exception as exc:  # recorded, sweep continues
                base.update({
                    "D": float("nan"), "purity_ref": float("nan"),
                    "solver_mode": "", "wall_ms": float("nan"),
                    "status": f"{type(exc).__name__}: {exc}",
                })
            rows.append(base)
            if base["status"] == "ok":
                cell_d.append(base["D"])
        ok = np.asarray(cell_d, dtype=float)
        summaries.append({
            "family": cfg.family, "N": n, "R": width, "l": l, "r": r,
            "sigma": sigma, "n_trials": cfg.trials, "n_ok": ok.size,
            "mean_D": float(ok.mean()) if ok.size else float("nan"),
            "std_D": float(ok.std(ddof=1)) if ok.size > 1 else 0.0,
        })
    if out_csv:
        _write_csv(out_csv, TRIAL_COLUMNS, rows)
    if summary_csv:
        _write_csv(summary_csv, SUMMARY_COLUMNS, summaries)
    if timing_csv:
        cols = ("family", "N", "R", "sigma", "trial", "wall_ms")
        _write_csv(timing_csv, cols, rows)
    return rows, summaries


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: str, columns, records) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for rec in records:
            writer.writerow([_fmt(rec[c]) for c in columns])
