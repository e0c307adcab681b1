"""Command-line front end.

Subcommands: ``synth``, ``reduce``, ``coreset``, ``evaluate``, ``experiment``.
Results are printed as newline-delimited JSON, or as CSV with ``--csv``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .config import DEFAULT
from .errors import SodError
from .rng import RngConfig

__all__ = ["main", "build_parser"]


def _add_common(p, reduce_opts=True):
    p.add_argument("--input", help="point matrix file")
    p.add_argument("--format", dest="fmt", choices=["csv", "mm"], default="csv")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--config", nargs="*", default=[], metavar="KEY=VALUE",
                   help="override tuning constants")
    p.add_argument("--csv", action="store_true", help="emit CSV instead of NDJSON")
    p.add_argument("--stats", action="store_true", help="include run counters")
    if reduce_opts:
        p.add_argument("--path", choices=["sparse", "dense"], default="sparse")
        p.add_argument("--blocks", type=int)
        p.add_argument("--exact-cost", action="store_true",
                       help="select trials by exact residual cost")
        p.add_argument("--deterministic-istar", action="store_true",
                       help="run the maximal number of rounds")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sodreduce", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a planted-cluster dataset as CSV")
    _add_common(p, reduce_opts=False)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--d", type=int, default=500)
    p.add_argument("--per-center", type=int)
    p.add_argument("--noise", choices=["cauchy", "gaussian"], default="cauchy")
    p.add_argument("--scale", type=float, default=1.0)

    p = sub.add_parser("reduce", help="compute and store a reduced representation")
    _add_common(p)

    p = sub.add_parser("coreset", help="build a coreset from a stored representation")
    _add_common(p, reduce_opts=False)
    p.add_argument("--rep", required=True, help="reduced representation file")
    p.add_argument("--kind", choices=["subspace", "kmedian"], default="kmedian")

    p = sub.add_parser("evaluate", help="compare stored estimates with exact costs")
    _add_common(p, reduce_opts=False)
    p.add_argument("--rep", required=True)
    p.add_argument("--coreset", help="evaluate this coreset instead of the full representation")
    p.add_argument("--shapes", default="random:30", help="random:N, kmedian, or SPEC+SPEC")

    p = sub.add_parser("experiment", help="compare against random and top-SVD subspaces")
    _add_common(p)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--d", type=int, default=500)
    p.add_argument("--per-center", type=int)
    p.add_argument("--noise", choices=["cauchy", "gaussian"], default="cauchy")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--dims", default="5,10,20,50,100", help="comma-separated probe dimensions")
    p.add_argument("--shapes", default=None, help="planted (synthetic default), kmedian, random:N")
    p.add_argument("--timing", action="store_true", help="record wall time per method")
    return ap


def _constants(args):
    c = DEFAULT.with_pairs(args.config)
    if getattr(args, "exact_cost", False):
        c = c.replace(exact_cost=True)
    if getattr(args, "deterministic_istar", False):
        c = c.replace(deterministic_istar=True)
    return c


class _Emitter:
    """Serialized record sink writing NDJSON or CSV."""

    def __init__(self, out, as_csv):
        self.fh = open(out, "w", newline="") if out else sys.stdout
        self.own = bool(out)
        self.as_csv = as_csv
        self.writer = None

    def __call__(self, rec):
        row = rec if isinstance(rec, dict) else rec.as_dict()
        if self.as_csv:
            if self.writer is None:
                self.writer = csv.DictWriter(self.fh, fieldnames=list(row))
                self.writer.writeheader()
            self.writer.writerow(row)
        else:
            self.fh.write(json.dumps(row, sort_keys=False) + "\n")
        self.fh.flush()

    def close(self):
        if self.own:
            self.fh.close()


def _need_input(args):
    if not args.input:
        raise SodError("--input is required")


def cmd_synth(args, emit):
    from .experiment import synth_generate

    per = args.per_center or args.n // args.k
    A, centers, _ = synth_generate(args.n, args.d, args.k, per, args.noise, args.scale,
                                   RngConfig(args.seed, 0))
    if not args.out:
        raise SodError("synth needs --out")
    np.savetxt(args.out, A, delimiter=",", fmt="%.17g")
    np.savetxt(args.out + ".centers.csv", centers, delimiter=",", fmt="%.17g")
    emit({"path": args.out, "n": A.shape[0], "d": A.shape[1], "k": args.k})
    return 0


def cmd_reduce(args, emit):
    from .dimreduce import complete_dim_reduce
    from .io import ingest, write_rep

    _need_input(args)
    if not args.out:
        raise SodError("reduce needs --out")
    A = ingest(args.input, args.fmt)
    rep = complete_dim_reduce(A, args.k, args.eps, RngConfig(args.seed, 0).generator(),
                              _constants(args), args.path, args.blocks, seed=args.seed)
    write_rep(rep, args.out)
    rec = {"path": args.out, "n": rep.n, "d": rep.d, "c": rep.c, "eps": rep.eps}
    if args.stats:
        rec["stats"] = rep.stats
    emit(rec)
    return 0


def cmd_coreset(args, emit):
    from .coresets import kmedian_coreset, subspace_coreset
    from .io import read_rep, write_coreset

    if not args.out:
        raise SodError("coreset needs --out")
    rep = read_rep(args.rep)
    build = subspace_coreset if args.kind == "subspace" else kmedian_coreset
    cs = build(rep, args.k, args.eps, RngConfig(args.seed, 1).generator(), _constants(args))
    write_coreset(cs, args.out, args.rep)
    emit({"path": args.out, "kind": cs.kind, "size": cs.size, "total_weight": float(cs.weights.sum())})
    return 0


def cmd_evaluate(args, emit):
    from .coresets import coreset_query_cost
    from .dimreduce import reduced_cost
    from .experiment import ResultRecord, build_shapes
    from .io import ingest, read_coreset, read_rep
    from .shapes import exact_cost

    _need_input(args)
    A = ingest(args.input, args.fmt)
    rep = read_rep(args.rep)
    cs = read_coreset(args.coreset) if args.coreset else None
    shapes = build_shapes(args.shapes, A, args.k, RngConfig(args.seed, 1).generator())
    method = "coreset" if cs is not None else "paper"
    for sid, S in shapes:
        ex = exact_cost(A, S)
        ap = coreset_query_cost(cs, S) if cs is not None else reduced_cost(rep, S)
        emit(ResultRecord(method, rep.c, sid, ap, ex, ap / ex if ex > 0 else float("nan")))
    return 0


def cmd_experiment(args, emit):
    from .experiment import ExperimentConfig, run_experiment

    dims = [int(x) for x in args.dims.split(",") if x.strip()]
    shapes = args.shapes or ("kmedian" if args.input else "planted")
    cfg = ExperimentConfig(
        input=args.input, fmt=args.fmt, n=args.n, d=args.d, per_center=args.per_center,
        noise=args.noise, noise_scale=args.scale, k=args.k, eps=args.eps, seed=args.seed,
        path=args.path, blocks=args.blocks, dims_to_probe=dims, shapes=shapes,
        constants=_constants(args), timing=args.timing,
    )
    run_experiment(cfg, emit)
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "reduce": cmd_reduce,
    "coreset": cmd_coreset,
    "evaluate": cmd_evaluate,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # records go to stdout unless the command writes its main artifact to --out
    target = args.out if args.command == "experiment" else None
    emit = _Emitter(target, args.csv)
    try:
        return COMMANDS[args.command](args, emit)
    except (SodError, KeyError, OSError) as exc:
        print(f"sodreduce: error: {exc}", file=sys.stderr)
        return 2
    finally:
        emit.close()


if __name__ == "__main__":
    sys.exit(main())
