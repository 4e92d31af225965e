"""Command-line entry point for reproducible experiments.

Exit codes: 0 success, 2 usage or validation error, 3 LP solver failure,
4 runtime experiment failure.  Every command is deterministic given its
flags; --seed fully controls the randomness of sweeps.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import harness
from .lecam import lower_bound_certificate
from .priors import SolverError, construct_prior_pair

__all__ = ["main", "parse_n_grid"]


def parse_n_grid(spec: str) -> tuple:
    """Geometric grid spec "start:stop:xfactor", endpoints inclusive."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"n-grid must look like start:stop:xfactor, got {spec!r}")
    try:
        start, stop, factor = int(parts[0]), int(parts[1]), float(parts[2])
    except ValueError as exc:
        raise ValueError(f"could not parse n-grid {spec!r}: {exc}") from None
    if start < 2 or stop < start:
        raise ValueError(f"n-grid needs 2 <= start <= stop, got {spec!r}")
    if factor <= 1.0:
        raise ValueError(f"n-grid factor must exceed 1, got {factor}")
    out = []
    n = float(start)
    while n <= stop * (1.0 + 1e-9):
        out.append(int(round(n)))
        n *= factor
    return tuple(out)


def _workers_from_env() -> int:
    try:
        return int(os.environ.get("IPMLAB_THREADS", "0"))
    except ValueError:
        return 0


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _cmd_priors(args) -> int:
    try:
        pair = construct_prior_pair(args.K, args.tau, args.grid)
    except ValueError as exc:
        return _fail(str(exc), 2)
    except SolverError as exc:
        return _fail(f"LP solver failure: {exc}", 3)
    with open(args.out, "w") as fh:
        json.dump(pair.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"gap = {pair.gap:.12g}")
    print(f"kappa = {pair.kappa:.12g}")
    print(f"wrote {args.out}")
    return 0


def _cmd_certificate(args) -> int:
    if (args.n is None) == (args.n_grid is None):
        return _fail("provide exactly one of --n or --n-grid", 2)
    try:
        if args.n is not None:
            cert = lower_bound_certificate(args.n, args.beta, args.gamma, args.d,
                                           c=args.c, tau=args.tau, grid_size=args.grid)
            certs = (cert,)
        else:
            grid = parse_n_grid(args.n_grid)
            certs = harness.certificate_sweep(grid, args.beta, args.gamma, args.d,
                                              c=args.c, tau=args.tau,
                                              grid_size=args.grid)
    except ValueError as exc:
        return _fail(str(exc), 2)
    except SolverError as exc:
        return _fail(f"LP solver failure: {exc}", 3)
    if args.out:
        payload = certs[0].to_json() if args.n is not None else [c.to_json() for c in certs]
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {args.out}")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(harness.certificates_csv(certs))
        print(f"wrote {args.csv}")
    if args.svg:
        from .plotting import save_certificate_plot

        save_certificate_plot(certs, args.svg)
        print(f"wrote {args.svg}")
    for cert in certs:
        flag = "  [flagged: value <= 0]" if cert.flagged else ""
        print(f"n={cert.n}: value = {cert.value:.6g}{flag}")
    return 0


def _cmd_rate_sweep(args) -> int:
    try:
        grid = parse_n_grid(args.n_grid)
        config = harness.RateSweepConfig(
            target=args.target, d=args.d, beta=args.beta, gamma=args.gamma,
            n_grid=grid, reps=args.reps, master_seed=args.seed, M=args.M,
            carrier_level=args.carrier_level, c=args.c, grid_size=args.grid,
            L_max=args.L_max, workers=_workers_from_env(),
        )
        config.validate()
    except ValueError as exc:
        return _fail(str(exc), 2)
    try:
        report = harness.rate_sweep(config)
    except Exception as exc:  # replicate failures surface as exit 4
        return _fail(f"experiment failed: {exc}", 4)
    with open(args.out, "w") as fh:
        fh.write(report.csv_text())
    slope_path = args.slope_out
    if slope_path is None:
        base = args.out[:-4] if args.out.endswith(".csv") else args.out
        slope_path = base + ".slope.json"
    with open(slope_path, "w") as fh:
        json.dump(report.slope_summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.svg:
        from .plotting import save_rate_plot

        save_rate_plot(report, args.svg)
        print(f"wrote {args.svg}")
    print(f"wrote {args.out}")
    print(f"wrote {slope_path}")
    print(f"slope = {report.slope:.4f} +- {report.slope_stderr:.4f} "
          f"(theory {report.theoretical_exponent:.4f})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipmlab",
        description="Exact wavelet-domain metrics, prior construction, "
                    "lower-bound certificates, and Monte Carlo rate sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("priors", help="construct a moment-matched prior pair")
    p.add_argument("--K", type=int, required=True, help="matched moment order is 2K")
    p.add_argument("--tau", type=float, default=1.0, help="support radius")
    p.add_argument("--grid", type=int, default=2001, help="symmetric grid size")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=_cmd_priors)

    p = sub.add_parser("certificate", help="finite-sample lower-bound certificate")
    p.add_argument("--n", type=int, help="single sample size")
    p.add_argument("--n-grid", help="geometric grid start:stop:xfactor")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--c", type=float, default=2.0, help="moment-order constant")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=2001)
    p.add_argument("--out", help="JSON output path")
    p.add_argument("--csv", help="CSV output path (sweeps)")
    p.add_argument("--svg", help="figure output path")
    p.set_defaults(func=_cmd_certificate)

    p = sub.add_parser("rate-sweep", help="Monte Carlo error-vs-n sweep")
    p.add_argument("--target", required=True,
                   choices=["null", "boundary", "hard", "dudley"])
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-grid", required=True, help="geometric grid start:stop:xfactor")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--slope-out", help="slope summary JSON path (default: <out>.slope.json)")
    p.add_argument("--svg", help="figure output path")
    p.add_argument("--M", type=float, default=1.0, help="smoothness-ball radius")
    p.add_argument("--carrier-level", type=int, default=9,
                   help="boundary family resolution")
    p.add_argument("--c", type=float, default=2.0, help="hard family moment constant")
    p.add_argument("--grid", type=int, default=2001, help="hard family prior grid")
    p.add_argument("--L-max", type=int, default=None,
                   help="dudley truncation (default: from the largest n)")
    p.set_defaults(func=_cmd_rate_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
