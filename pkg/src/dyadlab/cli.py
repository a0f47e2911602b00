"""Command line entry point: ``dyadlab <subcommand> [options]``.

Exit status 0 means every checked invariant held, 1 means one failed, 2 is a
usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .dyadic import default_collection, parse_collection
from .grid import read_csv, write_csv
from .multiplier import apply_tm, get_symbol
from .stopping import InvariantBreach

OK, BREACH, USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def _floats(text: str) -> list:
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text: str) -> list:
    return [int(x) for x in str(text).split(",") if x.strip()]


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows, footer=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    if footer:
        buf.write(footer + "\n")
    return buf.getvalue()


def cmd_lemma_decompose(args) -> int:
    a, b = _floats(args.interval)
    if not b > a:
        raise UsageError("--interval needs a < b")
    from .bump import BumpProfile, decompose, make_bump

    bump = make_bump((a, b - a), args.resolution, BumpProfile(args.profile))
    dec = decompose(bump, args.decay, args.terms)
    rows = dec.rows()
    _emit(_csv_text(["k", "weight", "mean", "sup_outside_support", "residual_sup_after_k"], rows), args.out)
    bad = any(r[3] != 0.0 for r in rows)
    bad |= float(np.abs(dec.reconstruction() - bump.samples.samples).max()) > 1e-12
    if bump.cancellation:
        bad |= any(abs(r[2]) * r[1] > 1e-10 for r in rows) or any(abs(m) > 1e-10 for m in dec.residual_means)
    return BREACH if bad else OK


def cmd_verify_domination(args) -> int:
    types = tuple(_ints(args.type))
    if len(types) != args.dim:
        raise UsageError("--type needs one entry per dimension")
    rows = harness.domination_rows(types, args.trials, args.resolution, args.seed)
    worst = harness.fitted_constant(rows)
    _emit(_csv_text(["trial", "lhs", "rhs", "ratio"], rows, f"# max_ratio={worst!r}"), args.out)
    return BREACH if not worst <= args.bound else OK


def cmd_norm_scan(args) -> int:
    resolutions = _ints(args.resolutions)
    est = harness.norm_scan(args.pattern, args.p, args.trials, resolutions, args.seed, args.lattice)
    data = est.to_json()
    data["p"] = args.p
    growth = est.growth(resolutions[0], resolutions[-1])
    data["growth"] = growth
    _emit(harness.to_json(data) + "\n", args.out)
    return BREACH if growth > args.max_growth else OK


def cmd_stopping_trace(args) -> int:
    try:
        data = harness.stopping_report(args.resolution, args.p, args.q, args.seed, args.kmax, args.decay,
                                       args.lattice)
    except InvariantBreach as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return BREACH
    _emit(harness.to_json(data) + "\n", args.out)
    ok = data["exceptional"]["global_omega"] < 0.5 and data["shadow_violations"] == 0
    ok &= all(v["part_two"] <= 1e-12 for v in data["dilations"].values())
    return OK if ok else BREACH


def cmd_symbol_check(args) -> int:
    rows = harness.symbol_rows(args.symbol, args.dim, args.alpha_max, args.samples, args.seed)
    _emit(_csv_text(["multi_index", "worst_constant"], rows), args.out)
    return OK if all(np.isfinite(v) for _, v in rows) else BREACH


def _load_collection(path, dim: int, log_resolution: int):
    if path is None:
        return default_collection(dim, log_resolution)
    return parse_collection(Path(path).read_text().splitlines())


def cmd_hybrid_eval(args) -> int:
    f = read_csv(args.input)
    collection = _load_collection(args.collection, f.dim, f.log_resolution)
    if collection.dim != f.dim or len(args.pattern) != f.dim:
        raise UsageError("pattern, collection and input must share a dimension")
    out = harness.hybrid_operator(args.pattern, collection, args.lattice)(f)
    write_csv(out, args.out)
    return OK


def cmd_apply_tm(args) -> int:
    f, g = read_csv(args.f), read_csv(args.g)
    if f.dim == 2 and f.log_resolution > 8:
        raise UsageError("two-dimensional inputs are capped at resolution 8")
    out = apply_tm(get_symbol(args.symbol, f.dim), f, g)
    write_csv(out, args.out)
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyadlab", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file whose keys override the flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lemma-decompose", help="split a bump into pieces on dilated intervals")
    p.add_argument("--interval", default="0.375,0.625")
    p.add_argument("--profile", default="gaussian_like", choices=["gaussian_like", "compact_smooth", "mean_zero_wavelet"])
    p.add_argument("--decay", type=int, default=10)
    p.add_argument("--terms", type=int, default=4)
    p.add_argument("--resolution", type=int, default=10)
    p.set_defaults(func=cmd_lemma_decompose)

    p = sub.add_parser("verify-domination", help="compare |Lambda| with the square/maximal bound")
    p.add_argument("--dim", type=int, choices=[1, 2], default=1)
    p.add_argument("--type", default="1")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--resolution", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bound", type=float, default=10.0)
    p.set_defaults(func=cmd_verify_domination)

    p = sub.add_parser("norm-scan", help="empirical L^p norm of a square/maximal operator across resolutions")
    p.add_argument("--pattern", default="S")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--resolutions", default="5,6,7")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lattice", type=int, default=5)
    p.add_argument("--max-growth", type=float, default=1.25)
    p.set_defaults(func=cmd_norm_scan)

    p = sub.add_parser("stopping-trace", help="run the exceptional-set and level-set construction")
    p.add_argument("--resolution", type=int, default=6)
    p.add_argument("--p", type=float, default=2.5)
    p.add_argument("--q", type=float, default=2.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--decay", type=int, default=12)
    p.add_argument("--lattice", type=int, default=5)
    p.set_defaults(func=cmd_stopping_trace)

    p = sub.add_parser("symbol-check", help="finite-difference symbol estimates")
    p.add_argument("--symbol", default="riesz")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--alpha-max", type=int, default=2)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_symbol_check)

    p = sub.add_parser("hybrid-eval", help="evaluate MS, SM, SS or MM on a grid function")
    p.add_argument("--pattern", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--collection")
    p.add_argument("--lattice", type=int, default=5)
    p.set_defaults(func=cmd_hybrid_eval)

    p = sub.add_parser("apply-tm", help="apply a bilinear multiplier to two grid functions")
    p.add_argument("--symbol", required=True)
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.set_defaults(func=cmd_apply_tm)

    for name, p in sub.choices.items():
        p.add_argument("--out", required=name in ("hybrid-eval", "apply-tm"))
    return parser


def _apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> argparse.Namespace:
    data = json.loads(Path(args.config).read_text())
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest in ("schema", "command"):
            continue
        if not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        setattr(args, dest, ",".join(map(str, value)) if isinstance(value, list) else value)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            args = _apply_config(parser, args)
        return args.func(args)
    except (UsageError, ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
