"""qrkit command line front end.

Subcommands::

    qrkit verify    self-verification suite (oracles, roundtrips, flops)
    qrkit costs     cost-curve table over the benchmark grids
    qrkit simulate  replicated selection study on synthetic data
    qrkit select    spike-and-slab selection on a CSV dataset

Every command is deterministic under --seed; --threads falls back to the
QRKIT_THREADS environment variable, then 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .io import CsvFormatError, load_config, load_dataset, write_rows


def _threads(value: Optional[int]) -> int:
    if value is not None:
        return value
    return int(os.environ.get("QRKIT_THREADS", "1"))


def _emit(rows: List[dict], header: List[str], out: Optional[str]) -> None:
    if out:
        write_rows(out, rows, header)
    else:
        import csv

        w = csv.DictWriter(sys.stdout, fieldnames=header)
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in header})


def cmd_verify(args) -> int:
    from .verify import run_checks

    rows = run_checks(seed=args.seed, sizes=args.sizes, inject_fault=args.inject_fault)
    header = ["check", "max_error", "tolerance", "status"]
    _emit(rows, header, args.out)
    failures = [r for r in rows if r["status"] != "pass"]
    for r in rows:
        print(
            f"{r['check']:28s} max_err={r['max_error']:.3e} tol={r['tolerance']:.1e} {r['status']}",
            file=sys.stderr,
        )
    return 1 if failures else 0


def cmd_costs(args) -> int:
    from .flops import GRID_CSV_HEADER, cost_grid

    rows = cost_grid(measure=not args.no_measure, seed=args.seed)
    _emit(rows, GRID_CSV_HEADER, args.out)
    return 0


def cmd_simulate(args) -> int:
    from .bayes import SimSetting, aggregate, run_simulation

    cfg = load_config(args.config) if args.config else {}
    ns = cfg.get("n", [100, 500])
    ps = cfg.get("p", [100])
    p0s = cfg.get("p0", [10])
    structure = cfg.get("structure", "independent")
    rho = cfg.get("rho", 0.5)
    reps = cfg.get("reps", 10)
    draws = cfg.get("draws")
    settings = [
        SimSetting(n=n, p=p, p0=p0, structure=structure, rho=rho)
        for n in ns
        for p in ps
        for p0 in p0s
        if p0 < p
    ]
    rows = run_simulation(
        settings, reps=reps, seed=args.seed, threads=_threads(args.threads), draws=draws
    )
    agg = aggregate(rows)
    header = ["n", "p", "p0", "structure", "reps"] + [
        f"{m}_{s}" for m in ("auc", "f1", "tpr", "fdr", "mse", "seconds") for s in ("mean", "se")
    ]
    _emit(agg, header, args.out)
    if args.per_rep:
        rep_header = ["n", "p", "p0", "structure", "rep", "auc", "f1", "tpr", "fdr", "mse", "seconds"]
        write_rows(args.per_rep, rows, rep_header)
    return 0


def cmd_select(args) -> int:
    from .bayes import default_hyperparams, enumerate_posterior, log_predictive_score, run_chain
    from .bayes.model import Hyperparams

    try:
        ds = load_dataset(args.data, y_path=args.y_file, add_intercept=not args.no_intercept)
    except CsvFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    cfg = load_config(args.config) if args.config else {}
    n, p = ds.X.shape
    hp = default_hyperparams(n, p, float(np.var(ds.y)))
    for key in ("nu", "lam", "upsilon0", "theta_xi", "theta_phi", "fix_theta", "use_binom_coef"):
        if key in cfg:
            hp = Hyperparams(**{**hp.__dict__, key: cfg[key]})
    draws = int(cfg.get("draws", args.draws))
    seed = int(cfg.get("seed", args.seed))

    if args.upsilon_grid:
        grid = [float(x) for x in args.upsilon_grid.split(",")]
        cv = log_predictive_score(
            ds.X, ds.y, hp, grid, folds=int(cfg.get("folds", 5)),
            draws=int(cfg.get("cv_draws", max(500, draws // 4))), seed=seed,
        )
        hp = hp.with_upsilon0(cv["best"])
        print(f"cross-validated upsilon0 = {cv['best']:.6g} "
              f"(scores: {np.array2string(cv['score'], precision=4)})", file=sys.stderr)

    summ = run_chain(ds.X, ds.y, hp, draws=draws, seed=seed)
    exact = None
    if args.enumerate:
        exact = {r["mask"].tobytes(): r["pmp"] for r in enumerate_posterior(ds.X, ds.y, hp)}

    rows = []
    for j in range(p):
        rows.append(
            {
                "covariate": j + 1,
                "mip": summ.mip[j],
                "in_mpm": int(summ.mpm_mask[j]),
                "in_map": int(summ.map_mask[j]),
                "beta_bma": summ.beta_bma[j],
                "beta_mpm": summ.beta_mpm[j],
            }
        )
    _emit(rows, ["covariate", "mip", "in_mpm", "in_map", "beta_bma", "beta_mpm"], args.out)

    pmp_rows = []
    for rank, entry in enumerate(summ.pmp_top, start=1):
        row = {
            "rank": rank,
            "model": "".join(str(int(b)) for b in entry["mask"]),
            "pmp_est": entry["freq"],
            "log_post": entry["log_post"],
        }
        if exact is not None:
            row["pmp_exact"] = exact.get(entry["mask"].tobytes(), 0.0)
        pmp_rows.append(row)
    header = ["rank", "model", "pmp_est", "log_post"] + (["pmp_exact"] if exact is not None else [])
    if args.pmp_out:
        write_rows(args.pmp_out, pmp_rows, header)
    else:
        for r in pmp_rows:
            print(json.dumps(r), file=sys.stderr)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="qrkit", description=__doc__)
    ap.add_argument("--version", action="version", version=f"qrkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the self-verification suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--sizes", type=int, default=1, help="scale factor for random configurations")
    v.add_argument("--inject-fault", action="store_true", help="perturb one path to prove checks catch it")
    v.add_argument("--out", help="write the report CSV here")
    v.set_defaults(fn=cmd_verify)

    c = sub.add_parser("costs", help="emit the cost-curve table")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--no-measure", action="store_true", help="skip instrumented runs")
    c.add_argument("--out", help="write the CSV here")
    c.set_defaults(fn=cmd_costs)

    s = sub.add_parser("simulate", help="replicated synthetic selection study")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=None)
    s.add_argument("--config", help="JSON with n/p/p0/structure/rho/reps/draws")
    s.add_argument("--out", help="aggregate CSV")
    s.add_argument("--per-rep", help="optional per-replication CSV")
    s.set_defaults(fn=cmd_simulate)

    g = sub.add_parser("select", help="posterior selection on a CSV dataset")
    g.add_argument("data", help="CSV with y in the first column, covariates after")
    g.add_argument("--y-file", help="separate CSV holding y (then data is X only)")
    g.add_argument("--no-intercept", action="store_true", help="do not prepend an intercept column")
    g.add_argument("--config", help="JSON config for hyperparameters, draws, seed")
    g.add_argument("--draws", type=int, default=20000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--threads", type=int, default=None)
    g.add_argument("--enumerate", action="store_true", help="add exact PMPs (p <= 20)")
    g.add_argument("--upsilon-grid", help="comma-separated upsilon0 grid for CV tuning")
    g.add_argument("--out", help="MIP table CSV")
    g.add_argument("--pmp-out", help="top-model PMP table CSV")
    g.set_defaults(fn=cmd_select)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
