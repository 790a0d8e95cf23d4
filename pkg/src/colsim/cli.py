"""Command line entry point.

Subcommands write one CSV table plus a JSON manifest next to it
(``<name>.manifest.json``) recording the full parameter set. Re-running with
the same manifest parameters reproduces the CSV byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (
    ContinuumParams,
    analytic_channel,
    continuum_bracket,
    correlation_function as named_correlation,
    predicted_ncg,
    riemann_sum,
)
from .correlation import correlation_function, fit_correlation_length
from .divisibility import CrossingPolicy, detect_ncg, eigenvalue_curve
from .engine import BLOCK, EnsembleConfig, run_ensemble
from .errors import ColsimError, TruncationWarning
from .sampler import CorrelationModel, SamplerConfig, sample_jumps

log = logging.getLogger("colsim")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer, str)):
        return str(x)
    return format(float(x), ".17g")


def _write_outputs(args, header, rows, results, params) -> Path:
    path = Path(args.out or f"{args.command}.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    manifest = {
        "command": args.command,
        "argv": args.argv,
        "parameters": params,
        "results": results,
        "version": __version__,
        "outputs": {"csv": str(path)},
    }
    mpath = path.with_suffix(".manifest.json")
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(path)
    return path


def _model(args) -> CorrelationModel:
    if args.model == "uncorrelated":
        return CorrelationModel.uncorrelated()
    return CorrelationModel(args.model, args.ncor)


def _default_nmax(ncor: int | None) -> int:
    return max(40, 4 * (ncor or 0) + 20)


# simulate


def _simulate(args) -> dict:
    n_max = args.nmax
    model = _model(args)
    cfg = EnsembleConfig(
        SamplerConfig(args.epsilon, 2 * n_max, model, args.seed),
        tuple(range(1, 2 * n_max + 1)),
        args.trajectories,
        shards=args.shards,
        threads=args.threads,
    )
    est = run_ensemble(cfg)
    lam_curve = eigenvalue_curve(est, range(1, n_max + 1))
    curve = {p.n: p for p in lam_curve}
    policy = CrossingPolicy(args.z, not args.first_crossing)
    try:
        ncg = detect_ncg(lam_curve, policy)
    except ColsimError:
        ncg = None

    rows = []
    for n in cfg.checkpoints:
        w = est.weights(n)
        se = est.standard_errors(n)
        pt = curve.get(n)
        rows.append([n, *w, *se, pt.value if pt else None, pt.se if pt else None])
    header = ["n", "w0", "wx", "wy", "wz", "se0", "sex", "sey", "sez", "lambda_min", "lambda_se"]
    params = {
        "epsilon": args.epsilon,
        "model": model.kind,
        "ncor": model.n_cor,
        "nmax": n_max,
        "collisions": 2 * n_max,
        "trajectories": args.trajectories,
        "seed": args.seed,
        "shards": args.shards,
        "policy": {"z": policy.z, "require_stable_tail": policy.require_stable_tail},
    }
    _write_outputs(args, header, rows, {"ncg_empirical": ncg}, params)
    return {"ncg": ncg}


# analytic


def _analytic(args) -> dict:
    f = named_correlation(args.model)
    n_max = args.nmax or _default_nmax(args.ncor)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        ncg = predicted_ncg(args.epsilon, f, args.ncor, n_max)
        if args.action == "ncg":
            print(ncg)
            return {"ncg": ncg}
        curve = eigenvalue_curve(lambda n: analytic_channel(n, args.epsilon, f, args.ncor), range(1, n_max + 1))
        rows = []
        for pt in curve:
            ch = analytic_channel(pt.n, args.epsilon, f, args.ncor)
            inter = pt.channel
            rows.append([pt.n, *ch.weights, *inter.weights, pt.value])
    header = ["n", "w0", "wx", "wy", "wz", "iw0", "iwx", "iwy", "iwz", "lambda_min"]
    params = {"epsilon": args.epsilon, "model": args.model, "ncor": args.ncor, "nmax": n_max}
    _write_outputs(args, header, rows, {"ncg_predicted": ncg}, params)
    return {"ncg": ncg}


# sweep


def _sweep(args) -> dict:
    f = named_correlation(args.model)
    rows = []
    for ncor in args.ncor:
        n_max = _default_nmax(ncor)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            try:
                ncg_a = predicted_ncg(args.epsilon, f, ncor, n_max)
            except ColsimError:
                ncg_a = None
        ncg_e = None
        if args.with_mc:
            model = CorrelationModel.uncorrelated() if args.model == "uncorrelated" else CorrelationModel(args.model, ncor)
            cfg = EnsembleConfig(
                SamplerConfig(args.epsilon, 2 * n_max, model, args.seed),
                tuple(range(1, 2 * n_max + 1)),
                args.trajectories,
                shards=args.shards,
                threads=args.threads,
            )
            est = run_ensemble(cfg)
            try:
                ncg_e = detect_ncg(eigenvalue_curve(est, range(1, n_max + 1)), CrossingPolicy(args.z))
            except ColsimError:
                ncg_e = None
        log.info("ncor=%s analytic=%s empirical=%s", ncor, ncg_a, ncg_e)
        rows.append([args.model, args.epsilon, ncor, ncg_a, ncg_e])
    params = {
        "epsilon": args.epsilon,
        "model": args.model,
        "ncor": list(args.ncor),
        "with_mc": args.with_mc,
        "trajectories": args.trajectories if args.with_mc else None,
        "seed": args.seed,
        "shards": args.shards,
        "policy": {"z": args.z, "require_stable_tail": True},
    }
    _write_outputs(args, ["model", "epsilon", "ncor", "ncg_analytic", "ncg_empirical"], rows, {}, params)
    return {}


# corr


def _corr(args) -> dict:
    model = _model(args)
    cfg = SamplerConfig(args.epsilon, args.n, model, args.seed)
    curve = None
    for start in range(0, args.trajectories, BLOCK):
        seqs = sample_jumps(cfg, np.arange(start, min(start + BLOCK, args.trajectories)))
        part = correlation_function(seqs, args.hmax)
        curve = part if curve is None else curve.merge(part)
    fitted = None
    if model.kind in ("step", "exponential"):
        try:
            fitted = fit_correlation_length(curve, model.kind)
        except ColsimError:
            fitted = None
    rows = [
        [int(h), g if d > 0 else None, se if d > 0 else None]
        for h, g, se, d in zip(curve.lags, curve.gamma, curve.standard_error, curve.denominator)
    ]
    params = {
        "epsilon": args.epsilon,
        "model": model.kind,
        "ncor": model.n_cor,
        "n": args.n,
        "trajectories": args.trajectories,
        "seed": args.seed,
        "hmax": args.hmax,
    }
    _write_outputs(args, ["h", "gamma_h", "se_h"], rows, {"ncor_fitted": fitted}, params)
    return {"ncor_fitted": fitted}


# continuum


def _continuum(args) -> dict:
    f = named_correlation(args.f)
    integral = continuum_bracket(f, args.tau, args.T, args.gamma)
    rows = []
    delta = args.delta
    for _ in range(args.halvings + 1):
        s = riemann_sum(f, ContinuumParams(args.gamma, args.tau, args.T, delta))
        rows.append([delta, s, integral, abs(s - integral)])
        delta /= 2.0
    params = {
        "gamma": args.gamma,
        "tau": args.tau,
        "T": args.T,
        "delta": args.delta,
        "f": args.f,
        "halvings": args.halvings,
    }
    _write_outputs(args, ["delta", "riemann_sum", "integral", "abs_error"], rows, {"integral": integral}, params)
    return {"integral": integral}


# argument parsing


def _ncor_range(text: str) -> list[int]:
    parts = text.split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b[:step], got {text!r}") from None
    if len(nums) not in (1, 2, 3) or (len(nums) == 3 and nums[2] < 1):
        raise argparse.ArgumentTypeError(f"expected a:b[:step], got {text!r}")
    a, b = nums[0], nums[1] if len(nums) > 1 else nums[0]
    values = list(range(a, b + 1, nums[2] if len(nums) == 3 else 1))
    if not values or values[0] < 1:
        raise argparse.ArgumentTypeError(f"expected a nonempty range of positive integers, got {text!r}")
    return values


def _positive_int(text: str) -> int:
    try:
        value = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1 or value != float(text):
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _default_seed() -> int:
    raw = os.environ.get("COLSIM_SEED")
    return int(raw) if raw else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"colsim {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def model_args(p, eps_default, ncor_type=_positive_int):
        p.add_argument("--model", choices=("uncorrelated", "step", "exponential"), default="step")
        p.add_argument("--ncor", type=ncor_type, help="correlation length in collisions (sweep: a:b[:step])")
        p.add_argument("--epsilon", type=float, default=eps_default, help="jump probability per channel, 0 < eps < 0.25 (Monte Carlo also accepts 0)")

    def mc_args(p, trajectories):
        p.add_argument("--trajectories", type=_positive_int, default=trajectories)
        p.add_argument("--seed", type=int, default=_default_seed(), help="default: $COLSIM_SEED or 0")
        p.add_argument("--shards", type=_positive_int, default=8)
        p.add_argument("--threads", type=_positive_int, default=None, help="worker cap, default: all cores")

    def out_arg(p):
        p.add_argument("--out", help="CSV output path (manifest written alongside)")

    p = sub.add_parser("simulate", help="Monte Carlo channel estimates and lambda(2n,n) curve")
    model_args(p, 0.001)
    mc_args(p, 10**6)
    p.add_argument("--nmax", type=_positive_int, default=40, help="largest n of the lambda(2n,n) curve")
    p.add_argument("--z", type=float, default=2.0, help="standard-error multiplier for n_CG detection")
    p.add_argument("--first-crossing", action="store_true", help="accept the first up-crossing")
    out_arg(p)

    p = sub.add_parser("analytic", help="closed-form weights, lambda curve and predicted n_CG")
    p.add_argument("action", nargs="?", choices=("curve", "ncg"), default="curve")
    model_args(p, 0.001)
    p.add_argument("--nmax", type=_positive_int, default=None)
    out_arg(p)

    p = sub.add_parser("sweep", help="n_CG versus n_cor")
    model_args(p, 0.001, ncor_type=_ncor_range)
    p.add_argument("--with-mc", action="store_true", help="also detect n_CG from Monte Carlo")
    mc_args(p, 10**6)
    p.add_argument("--z", type=float, default=2.0)
    out_arg(p)

    p = sub.add_parser("corr", help="environment correlation function Gamma(h)")
    model_args(p, 0.01)
    mc_args(p, 10**5)
    p.add_argument("--n", type=_positive_int, default=100, help="collisions per trajectory")
    p.add_argument("--hmax", type=_positive_int, default=50)
    out_arg(p)

    p = sub.add_parser("continuum", help="Riemann sum versus continuum integral")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--T", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--f", choices=("step", "exponential"), default="step")
    p.add_argument("--halvings", type=int, default=5)
    out_arg(p)
    return parser


def _validate(parser: argparse.ArgumentParser, args) -> None:
    if hasattr(args, "epsilon"):
        # Monte Carlo commands accept the degenerate eps = 0
        zero_ok = args.command in ("simulate", "corr")
        lowest_ok = args.epsilon >= 0.0 if zero_ok else args.epsilon > 0.0
        if not (lowest_ok and args.epsilon < 0.25):
            bound = "0 <= epsilon" if zero_ok else "0 < epsilon"
            parser.error(f"argument --epsilon: must satisfy {bound} < 0.25, got {args.epsilon}")
    if hasattr(args, "model"):
        if args.model == "uncorrelated":
            args.ncor = (args.ncor or [1]) if args.command == "sweep" else None
        elif args.ncor is None:
            parser.error(f"argument --ncor: required for the {args.model} model")
    if args.command == "continuum":
        for name in ("gamma", "tau", "T", "delta"):
            if getattr(args, name) <= 0:
                parser.error(f"argument --{name}: must be positive")
        if args.gamma * args.delta >= 0.25:
            parser.error("argument --delta: gamma * delta must be < 0.25")
        if args.halvings < 0:
            parser.error("argument --halvings: must be >= 0")
    if args.command == "corr" and args.hmax >= args.n:
        parser.error("argument --hmax: must be smaller than --n")
    if hasattr(args, "z") and args.z < 0:
        parser.error("argument --z: must be >= 0")
    if hasattr(args, "seed") and not 0 <= args.seed < 2**64:
        parser.error("argument --seed: must fit in 64 unsigned bits")


COMMANDS = {
    "simulate": _simulate,
    "analytic": _analytic,
    "sweep": _sweep,
    "corr": _corr,
    "continuum": _continuum,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        _validate(parser, args)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except (ColsimError, ValueError, ArithmeticError) as exc:
        print(f"colsim {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
