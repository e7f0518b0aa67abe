"""Command-line pipeline: generate, measure, reconstruct, compare, sweep.

Every subcommand exchanges data through JSON (operators, window data,
counts) or CSV (sweeps), takes explicit seeds for anything random, and
prints a small machine-readable JSON result to stdout. Errors exit nonzero
with a one-line JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .measurement import (add_gaussian_noise, block_data_from_counts,
                          exact_block_data, load_block_data, load_counts,
                          save_block_data, save_counts, simulate_counts)
from .metrics import compare_states
from .operators import (DenseOperator, MatrixProductOperator, load_operator,
                        mpo_from_dense, save_operator)
from .reconstruction import (ReconstructionConfig, RegularizerSpec,
                             check_invertibility_dense,
                             check_invertibility_mpo_spans, default_split,
                             noise_tikhonov_sigma2, reconstruct_mpo)
from .states import (HamiltonianSpec, named_state, random_mpo_via_ancilla,
                     thermal_dense)
from .sweep import run_sweep, sweep_config_from_json

_FAMILY_ALIASES = {
    "critical-ising": "critical_ising",
    "random-nn": "random_next_neighbour",
    "random-mpo": "random_mpo",
    "w": "w", "ghz": "ghz", "product": "product",
}

_SOLVER_ALIASES = {
    "truncated-pinv": "truncated_pinv",
    "tikhonov": "tikhonov",
    "fisher": "fisher",
}


def _emit(payload: dict) -> None:
    print(json.dumps(payload))


def _cmd_gen_state(args) -> int:
    family = _FAMILY_ALIASES[args.family]
    written = []
    dense = mpo = None
    if family in ("critical_ising", "random_next_neighbour"):
        spec = HamiltonianSpec(family, args.n, seed=args.seed)
        dense = thermal_dense(spec, args.beta)
        mpo = mpo_from_dense(dense)
        if args.n > args.dense_max_sites:
            dense = None
    elif family == "random_mpo":
        mpo = random_mpo_via_ancilla(args.n, seed=args.seed,
                                     t_hnorm=args.t_hnorm)
        if args.n <= args.dense_max_sites:
            dense = mpo.to_dense()
    else:
        phases = None
        if args.phases:
            phases = [float(x) for x in args.phases.split(",")]
        dense, mpo = named_state(family, args.n, phases=phases)
        if args.n > args.dense_max_sites:
            dense = None
    if mpo is not None:
        path = f"{args.out}.mpo.json"
        save_operator(mpo, path)
        written.append(path)
    if dense is not None:
        path = f"{args.out}.dense.json"
        save_operator(dense, path)
        written.append(path)
    _emit({"written": written, "family": family, "n_sites": args.n})
    return 0


def _cmd_measure(args) -> int:
    state = load_operator(args.state)
    if args.shots:
        blocks = simulate_counts(state, args.r, args.shots, seed=args.seed)
        save_counts(blocks, state.n_sites, args.out)
        _emit({"written": [args.out], "kind": "counts",
               "n_blocks": len(blocks), "shots": args.shots})
        return 0
    data = exact_block_data(state, args.r)
    if args.sigma > 0.0:
        data = add_gaussian_noise(data, args.sigma, seed=args.seed,
                                  perturb_identity=not args.keep_identity_exact)
    save_block_data(data, args.out)
    _emit({"written": [args.out], "kind": "block_data",
           "n_blocks": data.n_blocks, "sigma": args.sigma})
    return 0


def _pick_regularizer(args, data) -> RegularizerSpec:
    mode = _SOLVER_ALIASES[args.solver] if args.solver else None
    if mode is None:
        if data.noise is None:
            mode = "truncated_pinv"
        elif data.noise.kind == "fisher":
            mode = "fisher"
        else:
            mode = "tikhonov"
    if mode == "tikhonov":
        sigma2 = args.sigma2
        if sigma2 is None:
            if data.noise is None or data.noise.kind != "scalar":
                raise ValueError("tikhonov needs --sigma2 or scalar noise "
                                 "metadata on the data")
            l, r = (args.l, args.r)
            if l is None or r is None:
                l, r = default_split(data.width)
            sigma2 = noise_tikhonov_sigma2(data.noise.sigma, l, r, data.d)
        return RegularizerSpec("tikhonov", sigma2=sigma2)
    if mode == "fisher":
        return RegularizerSpec("fisher")
    return RegularizerSpec("truncated_pinv", tau=args.tau)


def _cmd_reconstruct(args) -> int:
    data = load_block_data(args.data)
    reg = _pick_regularizer(args, data)
    cfg = ReconstructionConfig(l=args.l, r=args.r, regularizer=reg,
                               normalize=args.normalize)
    mpo, report = reconstruct_mpo(data, cfg, with_report=True)
    save_operator(mpo, args.out)
    written = [args.out]
    if args.report:
        report.save(args.report)
        written.append(args.report)
    _emit({"written": written, "solver_mode": reg.mode,
           "bond_dims": mpo.bond_dims, "trace": mpo.trace})
    return 0


def _cmd_compare(args) -> int:
    ref = load_operator(args.ref)
    est = load_operator(args.est)
    report = compare_states(ref, est, w_fidelity=args.w_fidelity,
                            seed=args.seed)
    if args.out:
        report.save(args.out)
    _emit(report.to_dict())
    return 0


def _cmd_check_invertibility(args) -> int:
    state = load_operator(args.state)
    if isinstance(state, DenseOperator):
        report = check_invertibility_dense(state, args.l, args.r)
        payload = report.to_dict()
        payload["check"] = "dense_ranks"
    else:
        report = check_invertibility_mpo_spans(state, args.l, args.r)
        payload = report.to_dict()
        payload["check"] = "tensor_spans"
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
    _emit(payload)
    return 0


def _cmd_sweep(args) -> int:
    cfg = sweep_config_from_json(args.config)
    rows, summaries = run_sweep(cfg, out_csv=args.out,
                                summary_csv=args.summary,
                                timing_csv=args.timing)
    written = [p for p in (args.out, args.summary, args.timing) if p]
    n_ok = sum(1 for r in rows if r["status"] == "ok")
    _emit({"written": written, "n_trials": len(rows), "n_ok": n_ok})
    return 0


def _cmd_ingest_counts(args) -> int:
    blocks, n_sites = load_counts(args.counts)
    data = block_data_from_counts(blocks, n_sites, tol=args.tol,
                                  max_iter=args.max_iter)
    save_block_data(data, args.out)
    _emit({"written": [args.out], "n_blocks": data.n_blocks,
           "width": data.width})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mpotomo",
        description="Matrix-product reconstruction from window expectations")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-state", help="generate a reference state")
    g.add_argument("--family", required=True, choices=sorted(_FAMILY_ALIASES))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--beta", type=float, default=5.0)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--t-hnorm", type=float, default=0.01)
    g.add_argument("--phases", type=str, default=None,
                   help="comma-separated branch phases for the w family")
    g.add_argument("--dense-max-sites", type=int, default=8)
    g.add_argument("--out", required=True, help="output path prefix")
    g.set_defaults(func=_cmd_gen_state)

    m = sub.add_parser("measure", help="window data or counts from a state")
    m.add_argument("--state", required=True)
    m.add_argument("--r", type=int, required=True, help="window width")
    m.add_argument("--sigma", type=float, default=0.0)
    m.add_argument("--shots", type=int, default=None,
                   help="simulate projective counts instead")
    m.add_argument("--seed", type=int, default=None)
    m.add_argument("--keep-identity-exact", action="store_true")
    m.add_argument("--out", required=True)
    m.set_defaults(func=_cmd_measure)

    r = sub.add_parser("reconstruct", help="matrix-product estimate from data")
    r.add_argument("--data", required=True)
    r.add_argument("--l", type=int, default=None)
    r.add_argument("--r", type=int, default=None)
    r.add_argument("--solver", choices=sorted(_SOLVER_ALIASES), default=None)
    r.add_argument("--tau", type=float, default=1e-10)
    r.add_argument("--sigma2", type=float, default=None)
    r.add_argument("--normalize", action="store_true")
    r.add_argument("--out", required=True)
    r.add_argument("--report", default=None)
    r.set_defaults(func=_cmd_reconstruct)

    c = sub.add_parser("compare", help="distance metrics between two states")
    c.add_argument("--ref", required=True)
    c.add_argument("--est", required=True)
    c.add_argument("--w-fidelity", action="store_true")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default=None)
    c.set_defaults(func=_cmd_compare)

    i = sub.add_parser("check-invertibility", help="rank or span diagnostics")
    i.add_argument("--state", required=True)
    i.add_argument("--l", type=int, required=True)
    i.add_argument("--r", type=int, required=True)
    i.add_argument("--out", default=None)
    i.set_defaults(func=_cmd_check_invertibility)

    s = sub.add_parser("sweep", help="grid sweep driven by a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True, help="per-trial CSV")
    s.add_argument("--summary", default=None, help="per-cell CSV")
    s.add_argument("--timing", default=None,
                   help="wall-clock sidecar CSV (not reproducible)")
    s.set_defaults(func=_cmd_sweep)

    n = sub.add_parser("ingest-counts", help="counts to window data via "
                                             "local likelihood ascent")
    n.add_argument("--counts", required=True)
    n.add_argument("--out", required=True)
    n.add_argument("--tol", type=float, default=1e-10)
    n.add_argument("--max-iter", type=int, default=10_000)
    n.set_defaults(func=_cmd_ingest_counts)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
