"""Command-line driver.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import guarantees as G
from .experiments import (
    SCHEMA_VERSION,
    ConfigError,
    ObjectiveSpec,
    data_scaled_penalty,
    parse_config,
    results_to_csv,
    run_experiment,
)
from .linalg import random_orthonormal
from .multilinear import random_low_rank
from .operators import dense_operator, gaussian_operator, mask_from_linear, random_mask, read_mask
from .solvers import InfeasibleSystemError, SolverConfig, solve_completion, solve_equality, solve_noisy
from .tensor_core import format_tensor, read_tensor

EXIT_USAGE = 2
EXIT_NUMERICAL = 3

SOLVE_COLUMNS = ["schema", "objective", "alpha", "iteration", "objective_value", "feasibility", "relative_error"]
CERT_COLUMNS = [
    "schema", "kind", "ranks", "estimate", "samples", "verdict", "seed", "witness_norm",
    "delta_hat", "theta", "alpha_lower_bound", "alpha_at_threshold",
]


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    return "" if x is None else f"{float(x):.17g}"


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _log(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


def _solver_config(args, b, reference) -> SolverConfig:
    rho = data_scaled_penalty(b, args.penalty) if args.penalty_mode == "data" else args.penalty
    return SolverConfig(
        max_iters=args.max_iters, tol_rel_change=args.tol, tol_feas=args.tol_feas,
        penalty=rho, relaxation=args.relaxation, reference_solution=reference,
    )


def _objectives(args):
    specs = args.objective or ["trace-norm"]
    try:
        return [ObjectiveSpec.parse(s) for s in specs]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _solve_csv(runs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SOLVE_COLUMNS)
    for obj, report in runs:
        for h in report.history:
            w.writerow([SCHEMA_VERSION, obj.kind, _fmt(obj.alpha), h.iteration, _fmt(h.objective),
                        _fmt(h.feasibility), _fmt(h.relative_error)])
    return buf.getvalue()


def _read_tensor(path):
    try:
        return read_tensor(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read tensor {path}: {exc}") from None


# -- subcommands ---------------------------------------------------------------

def cmd_gen(args) -> None:
    rng = np.random.default_rng(args.seed)
    try:
        t = random_low_rank(args.shape, args.ranks, rng)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, format_tensor(t))


def cmd_complete(args) -> None:
    x0 = _read_tensor(args.tensor)
    if args.mask:
        try:
            mask = read_mask(args.mask, x0.shape)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read mask {args.mask}: {exc}") from None
    elif args.p is not None:
        try:
            mask = random_mask(x0.shape, args.p, np.random.default_rng(args.seed))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        raise UsageError("complete needs --p or --mask")
    if mask.m == 0:
        raise UsageError("the mask observes no entries")
    b = mask.apply(x0)
    observed = np.where(mask.mask_array(), x0, 0.0)
    runs = []
    for spec in _objectives(args):
        obj = spec.resolve(x0)
        report = solve_completion(observed, mask, obj, _solver_config(args, b, x0))
        _log(args, f"{obj.label()}: {report.status} after {report.iterations_used} iterations, "
                   f"relative error {report.history[-1].relative_error:.3e}")
        runs.append((obj, report))
    _emit(args, _solve_csv(runs))


def cmd_recover(args) -> None:
    x0 = _read_tensor(args.tensor)
    rng = np.random.default_rng(args.seed)
    op = gaussian_operator(x0.shape, args.m, rng)
    b = op.apply(x0)
    if args.noise > 0:
        b = b + args.noise * np.linalg.norm(b) / np.sqrt(b.size) * rng.standard_normal(b.size)
    runs = []
    for spec in _objectives(args):
        obj = spec.resolve(x0)
        cfg = _solver_config(args, b, x0)
        if args.lam is not None:
            report = solve_noisy(op, b, args.lam, obj, cfg)
        else:
            report = solve_equality(op, b, obj, cfg)
        _log(args, f"{obj.label()}: {report.status} after {report.iterations_used} iterations")
        runs.append((obj, report))
    _emit(args, _solve_csv(runs))


def _certify_operator(args, rng):
    shape = tuple(args.shape)
    size = int(np.prod(shape))
    if size > 2**16:
        raise UsageError(f"domain of {size} entries is too large to certify")
    if args.mask:
        return read_mask(args.mask, shape)
    if args.operator == "gaussian":
        if args.m is None:
            raise UsageError("gaussian operator needs --m")
        return gaussian_operator(shape, args.m, rng)
    if args.operator == "mask":
        if args.p is None:
            raise UsageError("mask operator needs --p")
        return random_mask(shape, args.p, rng)
    if args.operator == "empty-mask":
        return mask_from_linear(shape, [])
    if args.operator == "orthogonal":
        return dense_operator(shape, random_orthonormal(size, size, rng))
    raise UsageError(f"unknown operator {args.operator!r}")


def cmd_certify(args) -> None:
    rng = np.random.default_rng(args.seed)
    op = _certify_operator(args, rng)
    ranks = tuple(args.ranks)
    if len(ranks) != len(op.shape):
        raise UsageError("need one rank per mode")
    s = args.spectral_norm
    norms = [s] * len(ranks)
    alpha = args.alpha if args.alpha is not None else 10.0 * s
    seed = args.seed

    reports = [
        G.check_nsp(op, ranks, args.samples, seed, args.refine),
        G.check_nsp_augmented(op, ranks, alpha, norms, args.samples, seed, args.refine),
    ]
    rip = G.estimate_rip(op, ranks, args.rip_samples, args.rip_steps, seed)
    reports.append(rip)
    # exact-recovery conditions are stated at the pattern (I_1, ..., 2 r_n, ..., I_N)
    patterns = []
    for n in range(len(ranks)):
        pattern = list(op.shape)
        pattern[n] = min(2 * ranks[n], op.shape[n])
        patterns.append(G.estimate_rip(op, pattern, args.rip_samples, args.rip_steps, seed))
    reports.extend(patterns)
    reports.append(G.estimate_ssp(op, args.samples, args.refine, seed))

    delta_pattern = max(r.estimate for r in patterns)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CERT_COLUMNS)
    for r in reports:
        theta = bound = None
        if r.kind == "rip" and r.estimate < 1:
            theta = G.theta(r.estimate)
            if theta < 1:
                bound = G.alpha_lower_bound(r.estimate, s)
        w.writerow([
            SCHEMA_VERSION, r.kind, r.details.get("ranks", " ".join(map(str, ranks))), _fmt(r.estimate),
            r.samples_used, r.verdict, "" if r.seed is None else r.seed,
            _fmt(r.details.get("witness_norm")), _fmt(r.details.get("delta_hat")),
            _fmt(theta), _fmt(bound), _fmt(G.alpha_lower_bound(G.rip_threshold_augmented(), s)),
        ])
    _log(args, f"max pattern delta {delta_pattern:.4f}; plain threshold {G.rip_threshold_plain():.4f}, "
               f"augmented threshold {G.rip_threshold_augmented():.4f}")
    _emit(args, buf.getvalue())


def cmd_experiment(args) -> None:
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except ConfigError as exc:
        raise UsageError(f"invalid config {args.config}:\n{exc}") from None
    if args.out is None and cfg.output:
        args.out = cfg.output
    results = run_experiment(cfg)
    _log(args, f"{cfg.trials} trial(s) x {len(cfg.objectives)} objective(s) done")
    _emit(args, results_to_csv(results))


def cmd_theta(args) -> None:
    try:
        _emit(args, f"{G.theta(args.delta):.17g}\n")
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_alpha_bound(args) -> None:
    try:
        _emit(args, f"{G.alpha_lower_bound(args.delta, args.spectral_norm):.17g}\n")
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- parser --------------------------------------------------------------------

def _add_solver_flags(p) -> None:
    p.add_argument("--objective", action="append",
                   help="trace-norm | augmented:<multiple>[:fro|spec|abs]; repeatable")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-8, help="relative-change tolerance")
    p.add_argument("--tol-feas", type=float, default=1e-9)
    p.add_argument("--penalty", type=float, default=0.5)
    p.add_argument("--penalty-mode", choices=["data", "absolute"], default="data",
                   help="'data' divides --penalty by the RMS of the measurements")
    p.add_argument("--relaxation", type=float, default=1.0)


def _common_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags with suppressed defaults so that a
    # value given before the subcommand is not overwritten
    def d(value):
        return argparse.SUPPRESS if suppress else value

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=d(0))
    common.add_argument("--out", default=d(None), help="output file (default: stdout)")
    common.add_argument("--quiet", action="store_true", default=d(False))
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tenrec", parents=[_common_flags(False)],
                                     description="Low-rank tensor recovery by trace-norm minimization.")
    common = _common_flags(True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a random low-rank tensor")
    p.add_argument("shape", type=int, nargs="+")
    p.add_argument("--ranks", type=int, nargs="+", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("complete", parents=[common], help="tensor completion from sampled entries")
    p.add_argument("tensor")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--p", type=float)
    g.add_argument("--mask")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("recover", parents=[common], help="recovery from Gaussian measurements")
    p.add_argument("tensor")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0, help="noise level relative to measurement RMS")
    p.add_argument("--lam", type=float, default=None, help="use the penalized noisy model")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("certify", parents=[common], help="sampled NSP / RIP / SSP certificates")
    p.add_argument("--operator", choices=["gaussian", "mask", "empty-mask", "orthogonal"], default="gaussian")
    p.add_argument("--shape", type=int, nargs="+", required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--mask")
    p.add_argument("--ranks", type=int, nargs="+", required=True)
    p.add_argument("--alpha", type=float, default=None, help="default: 10 x --spectral-norm")
    p.add_argument("--spectral-norm", type=float, default=1.0, help="max_i ||X0_(i)||_2")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--refine", type=int, default=10)
    p.add_argument("--rip-samples", type=int, default=200)
    p.add_argument("--rip-steps", type=int, default=50)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("experiment", parents=[common], help="run a key=value experiment config")
    p.add_argument("config")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("theta", parents=[common], help="evaluate theta(delta)")
    p.add_argument("delta", type=float)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("alpha-bound", parents=[common], help="smallest alpha allowed at a given delta")
    p.add_argument("delta", type=float)
    p.add_argument("--spectral-norm", type=float, default=1.0)
    p.set_defaults(func=cmd_alpha_bound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleSystemError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
