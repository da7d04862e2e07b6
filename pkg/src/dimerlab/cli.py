"""Command-line harness: dimerlab <subcommand> ...

Exit codes: 0 pass, 2 usage error, 3 check failure, 4 internal error.
Outputs go to --out, or to $DIMERLAB_OUT, or to ./dimerlab-out.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .rng import GENERATOR_NAME

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_INTERNAL = 0, 2, 3, 4
OUT_ENV = "DIMERLAB_OUT"


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Floats with 17 significant digits for lossless round-trips."""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def out_dir(args) -> Path:
    d = Path(args.out or os.environ.get(OUT_ENV) or "dimerlab-out")
    d.mkdir(parents=True, exist_ok=True)
    return d


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


@dataclass
class ExperimentConfig:
    command: str
    params: dict

    def digest(self) -> str:
        blob = json.dumps({"command": self.command, "params": self.params}, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    config: ExperimentConfig
    seeds: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    wall_seconds: float = 0.0
    generator: str = GENERATOR_NAME
    version: str = __version__

    def write(self, path: Path) -> None:
        data = asdict(self)
        data["config_hash"] = self.config.digest()
        path.write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")


# ---------------------------------------------------------------------------
# argument helpers


def parse_domain(text: str):
    from .lattice import DomainSpec

    kind, _, args = text.partition(":")
    try:
        vals = [float(v) for v in args.split(",")] if args else []
        if kind == "halfplane" and not vals:
            return DomainSpec.halfplane()
        if kind == "disk" and len(vals) <= 3:
            r = vals[0] if vals else 1.0
            c = complex(vals[1], vals[2]) if len(vals) == 3 else 0j
            return DomainSpec.disk(r, c)
        if kind == "rect" and len(vals) in (0, 2):
            return DomainSpec.rectangle(*vals) if vals else DomainSpec.rectangle()
    except ValueError:
        pass
    raise UsageError(f"bad domain {text!r}; use halfplane, disk[:r[,cx,cy]] or rect[:a,b]")


def load_region(path: str):
    from .lattice import LatticeError, region_from_json

    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read region file: {exc}") from exc
    try:
        return region_from_json(text)
    except (LatticeError, ValueError) as exc:
        raise UsageError(f"malformed region file {path}: {exc}") from exc


def load_tiling(path: str):
    from .enumeration import Tiling

    try:
        return Tiling.from_text(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"malformed tiling file {path}: {exc}") from exc


def load_points(path: str) -> list[complex]:
    """JSON list of [x, y] pairs."""
    try:
        pts = json.loads(Path(path).read_text())
        return [complex(float(p[0]), float(p[1])) for p in pts]
    except (OSError, ValueError, TypeError, IndexError) as exc:
        raise UsageError(f"malformed points file {path}: {exc}") from exc


def int_pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected i,j, got {text!r}") from exc
    return a, b


# ---------------------------------------------------------------------------
# subcommands


def cmd_region(args) -> int:
    from .lattice import (
        approximate_domain,
        build_even_rectangle,
        make_temperleyan,
        region_to_json,
        validate_temperleyan,
    )

    if args.rect:
        m, n = args.rect
        region = make_temperleyan(build_even_rectangle(m, n, args.epsilon or 1.0), args.root or (0, 0))
    else:
        if not args.epsilon:
            raise UsageError("--epsilon is required with --domain")
        region = approximate_domain(parse_domain(args.domain), args.epsilon)
    report = validate_temperleyan(region)
    d = out_dir(args)
    (d / args.name).write_text(region_to_json(region))
    print(json.dumps({"cells": len(region.cells), "root": list(region.root), "checks": report}))
    return EXIT_OK if all(report.values()) else EXIT_FAIL


def cmd_count(args) -> int:
    from .enumeration import count_tilings

    region = load_region(args.region)
    print(count_tilings(region))
    return EXIT_OK


def cmd_sample(args) -> int:
    from .sampler import sample_tiling_kasteleyn, sample_tiling_wilson

    region = load_region(args.region)
    fn = sample_tiling_wilson if args.algo == "wilson" else sample_tiling_kasteleyn
    d = out_dir(args)
    t0 = time.perf_counter()
    for s in range(args.samples):
        t = fn(region, args.seed, stream=s)
        (d / f"tiling_{s:06d}.txt").write_text(t.to_text())
    meta = {"seed": args.seed, "algo": args.algo, "samples": args.samples, "cells": len(region.cells),
            "streams": [0, args.samples], "generator": GENERATOR_NAME, "version": __version__,
            "seconds": time.perf_counter() - t0}
    (d / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_height(args) -> int:
    from .height import ConsistencyError, height_function

    region = load_region(args.region)
    tiling = load_tiling(args.tiling)
    try:
        hf = height_function(region, tiling)
    except ConsistencyError as exc:
        raise UsageError(str(exc)) from exc
    text = hf.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_render(args) -> int:
    from .height import height_function
    from .render import render_tiling_svg

    region = load_region(args.region)
    tiling = load_tiling(args.tiling)
    if args.heights:
        hf = height_function(region, tiling)
        svg = render_tiling_svg(region, tiling, hf.values, hf.grid)
    else:
        svg = render_tiling_svg(region, tiling)
    if args.out:
        Path(args.out).write_text(svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def cmd_moments(args) -> int:
    from .moments import k_point_moment, quadrature_moment

    domain = parse_domain(args.domain)
    pts = load_points(args.points)
    if args.k is not None and args.k != len(pts):
        raise UsageError(f"--k {args.k} but {len(pts)} points given")
    if args.method == "quadrature":
        if domain.kind != "halfplane":
            raise UsageError("quadrature is implemented on the half-plane")
        res = quadrature_moment(pts)
    else:
        res = k_point_moment(domain, pts)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "method", "value", "error_estimate"])
    w.writerow([len(pts), res.method, fmt(res.value), fmt(res.error_estimate)])
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_gff(args) -> int:
    from .gff import TestFunction, analytic_covariance, moment_stats, pair_many, tail_bound

    domain = parse_domain(args.domain)
    if domain.kind != "rectangle":
        raise UsageError("the free field is sampled on rectangles")
    try:
        phis = [TestFunction.parse(p, domain.a, domain.b) for p in args.phi]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    X = pair_many(domain, phis, args.samples, args.modes, args.seed)
    d = out_dir(args)
    write_csv(d / "gff_pairings.csv", ["sample"] + [p.label for p in phis],
              ([s] + list(row) for s, row in enumerate(X)))
    rows = []
    for k, p in enumerate(phis):
        var, sk, _, ku, _ = moment_stats(X[:, k])
        rows.append([p.label, X[:, k].mean(), var, analytic_covariance(domain, p, p, args.modes),
                     tail_bound(domain, p, args.modes), sk, ku])
    write_csv(d / "gff_summary.csv",
              ["phi", "mean", "variance", "variance_mode_sum", "tail_bound", "skewness", "excess_kurtosis"], rows)
    RunManifest(ExperimentConfig("gff", vars_clean(args)), [args.seed]).write(d / "manifest.json")
    return EXIT_OK


def vars_clean(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def cmd_verify(args) -> int:
    from .acceptance import BUDGETS, exact_suite, montecarlo_suite

    budget = BUDGETS[args.budget]
    t0 = time.perf_counter()
    results = []
    if args.suite in ("exact", "all"):
        for r in exact_suite():
            print(r.line(), flush=True)
            results.append(r)
    if args.suite in ("montecarlo", "all"):
        for r in montecarlo_suite(budget):
            print(r.line(), flush=True)
            results.append(r)
    d = out_dir(args)
    cfg = ExperimentConfig("verify", {"suite": args.suite, "budget": asdict(budget)})
    man = RunManifest(cfg, [budget.seed], [r.to_dict() for r in results], time.perf_counter() - t0)
    man.write(d / "manifest.json")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_experiment(args) -> int:
    from .acceptance import Budget, check_covariance, check_gaussianity, check_mean_height
    from .experiment import covariance_target, observable_variance_target, run_square
    from .gff import moment_stats
    from .height import height_csv

    Ns = args.N
    if any(N % 2 == 0 or N < 3 for N in Ns):
        raise UsageError("lattice sizes must be odd and at least 3")
    t0 = time.perf_counter()
    runs = {N: run_square(N, args.samples, args.seed, stream=N) for N in Ns}
    d = out_dir(args)
    target = covariance_target()
    write_csv(d / "covariance.csv", ["N", "samples", "covariance", "standard_error", "target", "relative_deviation"],
              ([N, r.samples, *r.covariance(), target, (r.covariance()[0] - target) / target]
               for N, r in sorted(runs.items())))
    rows = []
    for N, r in sorted(runs.items()):
        var, sk, se_sk, ku, se_ku = moment_stats(r.centered_observable())
        rows.append([N, r.samples, var, observable_variance_target(), sk, se_sk, ku, se_ku])
    write_csv(d / "gaussianity.csv", ["N", "samples", "variance", "variance_target", "skewness", "skewness_se",
                                      "excess_kurtosis", "kurtosis_se"], rows)
    for N, r in runs.items():
        (d / f"mean_height_N{N}.csv").write_text(height_csv(r.grid, np.round(r.mean_height(), 6)))
    checks = []
    if len(runs) >= 2:
        b = Budget("cli", {N: args.samples for N in Ns}, 0, 0.10, 0.1, 0.2, 0.10, 0.1, 0.02, 0.05, args.seed)
        big = runs[max(runs)]
        checks = [check_covariance(runs, b), check_gaussianity(big, b), check_mean_height(big, b)]
        for c in checks:
            print(c.line())
    man = RunManifest(ExperimentConfig("experiment", vars_clean(args)), [args.seed],
                      [c.to_dict() for c in checks], time.perf_counter() - t0)
    man.write(d / "manifest.json")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimerlab", description="Domino tilings, height functions and the free field.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("region", help="build a Temperleyan region and write it as JSON")
    s.add_argument("--rect", type=int_pair, help="odd m,n rectangle with lower-left cell (0,0)")
    s.add_argument("--root", type=int_pair, help="root cell for --rect (default 0,0)")
    s.add_argument("--domain", default="rect:1,1", help="rect[:a,b] or disk[:r[,cx,cy]] for approximation")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--name", default="region.json")
    s.add_argument("--out")
    s.set_defaults(func=cmd_region)

    s = sub.add_parser("count", help="exact number of domino tilings")
    s.add_argument("--region", required=True)
    s.set_defaults(func=cmd_count)

    s = sub.add_parser("sample", help="uniform random tilings")
    s.add_argument("--region", required=True)
    s.add_argument("--algo", choices=["kasteleyn", "wilson"], default="kasteleyn")
    s.add_argument("--samples", type=int, default=1)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("height", help="height function of a tiling as CSV")
    s.add_argument("--region", required=True)
    s.add_argument("--tiling", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_height)

    s = sub.add_parser("moments", help="continuum k-point moments")
    s.add_argument("--domain", default="halfplane")
    s.add_argument("--points", required=True, help="JSON list of [x, y]")
    s.add_argument("--k", type=int)
    s.add_argument("--method", choices=["pairing", "quadrature"], default="pairing")
    s.add_argument("--out")
    s.set_defaults(func=cmd_moments)

    s = sub.add_parser("gff", help="pairings of free-field samples with test functions")
    s.add_argument("--domain", default="rect:1,1")
    s.add_argument("--modes", type=int, default=4096)
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--phi", action="append", default=None, help="eigen:j,k or bump:x,y,r[,tilt]; repeatable")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_gff)

    s = sub.add_parser("render", help="SVG picture of a tiling")
    s.add_argument("--region", required=True)
    s.add_argument("--tiling", required=True)
    s.add_argument("--heights", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("verify", help="run the acceptance checks")
    s.add_argument("--suite", choices=["exact", "montecarlo", "all"], default="exact")
    s.add_argument("--budget", choices=["small", "full"], default="small")
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("experiment", help="dimer statistics on the unit square")
    s.add_argument("--N", type=int, nargs="+", default=[21, 41, 81])
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "phi", "absent") is None:
        args.phi = ["eigen:1,1"]
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dimerlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # anything else is a bug or an environment failure
        from .lattice import LatticeError

        if isinstance(exc, LatticeError):
            print(f"dimerlab: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"dimerlab: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
