"""Command-line surface: fit, select, test, simulate, replicate.

Structured results go to stdout (or --out) as JSON; curves and tables are
CSV. Exit code 0 on success, 1 on any input or model error; unknown flags
are errors. Set SEGFIT_LOG=debug|info|warning for logging verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .candidates import bs_candidates, combination_search, fl_candidates
from .data import load_csv, write_csv
from .exceptions import SegfitError
from .lrtest import h0_context, lr_scan, permutation_test
from .maxem import max_em
from .models import get_model
from .selection import bic_value, select_k
from .sim import evaluate, generate, list_presets, load_preset, run_replicates

log = logging.getLogger("segfit")

FULL_SCALE_J = 500
FULL_SCALE_B = 1000


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract is exit 1
        raise _UsageError(message)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_input(path: str, model_name: str):
    model = get_model(model_name)
    return load_csv(path, model.kind), model


def _fit_payload(fit, model, data, pool=None) -> dict:
    return {
        "breakpoints": list(fit.breakpoints),
        "theta_per_segment": [list(map(float, th)) for th in fit.thetas],
        "loglik": fit.loglik,
        "bic": bic_value(fit.loglik, model.dim(data), fit.k, data.n),
        "iterations": fit.n_iter,
        "converged": fit.converged,
        "degenerate": fit.degenerate,
        "init_pool": list(pool.candidates) if pool is not None else [],
    }


def cmd_fit(args) -> int:
    data, model = _load_input(args.input, args.model)
    pool = None
    if args.init.startswith("given:"):
        bps = tuple(int(v) for v in args.init[len("given:"):].split(",") if v)
        if len(bps) != args.k - 1:
            raise SegfitError(f"--init given needs {args.k - 1} breakpoints, got {len(bps)}")
        fit = max_em(data, model, args.k, init=bps)
    elif args.init == "bs":
        pool = bs_candidates(data, model, depth=args.bs_depth)
        fit = combination_search(data, model, args.k, pool, n_jobs=args.threads)
    elif args.init == "fl":
        pool = fl_candidates(data, model, args.k)
        fit = combination_search(data, model, args.k, pool, n_jobs=args.threads)
    else:
        raise _UsageError(f"--init must be bs, fl or given:<i,j,..>, got {args.init!r}")
    _emit(_fit_payload(fit, model, data, pool), args.out)
    return 0


def cmd_select(args) -> int:
    data, model = _load_input(args.input, args.model)
    report = select_k(data, model, range(args.k_min, args.k_max + 1), args.init,
                      bs_depth=args.bs_depth, n_jobs=args.threads)
    payload = {
        "chosen_k": report.chosen_k,
        "per_k": [
            {"k": k, "bic": bic, "loglik": fit.loglik,
             "breakpoints": list(fit.breakpoints)}
            for k, fit, bic in zip(report.ks, report.fits, report.bics)
        ],
    }
    if args.curve:
        with open(args.curve, "w") as fh:
            fh.write("k,bic\n")
            for k, bic in zip(report.ks, report.bics):
                fh.write(f"{k},{bic!r}\n")
    _emit(payload, args.out)
    return 0


def cmd_test(args) -> int:
    data, model = _load_input(args.input, args.model)
    ctx = h0_context(data, model)
    curve = lr_scan(data, model, t_low=args.t_low, ctx=ctx)
    result = permutation_test(data, model, args.permutations, args.seed,
                              t_low=args.t_low, ctx=ctx, observed=curve,
                              n_jobs=args.threads)
    if args.curve:
        curve.to_csv(args.curve)
    _emit({
        "T_n": result.observed_t,
        "n1_hat": result.n1_hat,
        "p_value": result.p_value,
        "q95_null": result.q95_null,
        "B": result.b,
        "seed": result.seed,
    }, args.out)
    return 0


def cmd_simulate(args) -> int:
    if not args.out:
        raise _UsageError("simulate requires --out <csv>")
    scenario = load_preset(args.preset)
    data, _ = generate(scenario, args.seed, args.replicate)
    write_csv(data, args.out)
    log.info("wrote %d rows to %s", data.n, args.out)
    return 0


def cmd_replicate(args) -> int:
    scenario = load_preset(args.preset)
    j = FULL_SCALE_J if args.full_scale else args.j
    report, records, _ = run_replicates(scenario, args.method, j, args.seed,
                                        n_jobs=args.threads, bs_depth=args.bs_depth)
    if args.raw:
        with open(args.raw, "w") as fh:
            fh.write("replicate,breakpoints,loglik,converged,degenerate\n")
            for rec in records:
                bps = ";".join(str(b) for b in rec["breakpoints"])
                fh.write(f"{rec['replicate']},{bps},{rec['loglik']!r},"
                         f"{rec['converged']},{rec['degenerate']}\n")
    payload = {"preset": scenario.name, "method": args.method, "seed": args.seed,
               **report.to_dict()}
    _emit(payload, args.out)
    return 0


def _add_common(p, needs_input=True):
    if needs_input:
        p.add_argument("--input", required=True, help="CSV file (y or time,status first)")
        p.add_argument("--model", required=True,
                       choices=["mean", "linear", "logistic", "poisson", "aft"])
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker pool size (default: available parallelism)")


def build_parser() -> _Parser:
    parser = _Parser(prog="segfit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"segfit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="segment a dataset with a fixed number of segments")
    _add_common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--init", default="bs", help="bs | fl | given:<i,j,..>")
    p.add_argument("--bs-depth", type=int, default=4)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", help="choose the number of segments by BIC")
    _add_common(p)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--init", default="bs", choices=["bs", "fl"])
    p.add_argument("--bs-depth", type=int, default=4)
    p.add_argument("--curve", default=None, help="write k,bic rows to this CSV")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("test", help="single-breakpoint permutation test")
    _add_common(p)
    p.add_argument("--permutations", type=int, default=1000)
    p.add_argument("--t-low", type=int, default=100)
    p.add_argument("--curve", default=None, help="write n1,statistic,regime to this CSV")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="write one scenario replicate to CSV")
    _add_common(p, needs_input=False)
    p.add_argument("--preset", required=True, help="preset name or scenario JSON path")
    p.add_argument("--replicate", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replicate", help="replication study with metrics")
    _add_common(p, needs_input=False)
    p.add_argument("--preset", required=True)
    p.add_argument("--j", type=int, default=100)
    p.add_argument("--method", default="maxem-bs",
                   choices=["maxem-bs", "maxem-fl", "brute"])
    p.add_argument("--bs-depth", type=int, default=4)
    p.add_argument("--raw", default=None, help="per-replicate results CSV")
    p.add_argument("--full-scale", action="store_true",
                   help=f"replication-grade sizes (J={FULL_SCALE_J})")
    p.set_defaults(func=cmd_replicate)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SEGFIT_LOG", "WARNING").upper())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"segfit: error: {exc}", file=sys.stderr)
        return 1
    except (SegfitError, OSError, ValueError) as exc:
        print(f"segfit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
