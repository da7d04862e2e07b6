"""Acceptance checks, shared by ``dimerlab verify`` and the test suite.

Each check returns a CheckResult carrying the measured value, the target,
the tolerance and the verdict. Monte Carlo checks take a Budget; the small
budget uses fewer samples and records its widened tolerances.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np
from scipy import stats

from . import enumeration, gff, greens, height, lattice, moments, sampler
from .experiment import (
    covariance_target,
    mean_height_deviation,
    observable_variance_target,
    run_square,
)
from .rng import make_generator

EIGHT_BY_EIGHT = 12988816
HALFPLANE_QUADRUPLE = (1j, 2j, 1 + 1j, -1 + 2j)


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    measured: Any
    target: Any
    tolerance: Any
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"[{verdict}] criterion {self.id:2d} {self.name}: measured={_fmt(self.measured)} "
                f"target={_fmt(self.target)} tol={_fmt(self.tolerance)} ({self.seconds:.1f} s)")

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_fmt(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _timed(fn: Callable[..., CheckResult]) -> Callable[..., CheckResult]:
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@dataclass(frozen=True)
class Budget:
    name: str
    samples: dict  # N -> dimer samples
    gff_samples: int
    cov_tol: float
    skew_tol: float
    kurt_tol: float
    var_tol: float
    mean_tol: float
    gff_var_tol: float
    wick_tol: float
    seed: int = 20240611


FULL = Budget("full", {21: 50_000, 41: 100_000, 81: 300_000}, 100_000,
              0.10, 0.1, 0.2, 0.10, 0.1, 0.02, 0.05)
SMALL = Budget("small", {21: 2_000, 41: 2_000, 81: 2_000}, 10_000,
               0.50, 0.3, 0.6, 0.25, 0.3, 0.06, 0.15)
BUDGETS = {"full": FULL, "small": SMALL}


# ---------------------------------------------------------------------------
# exact suite


def product_formula(m: int, n: int) -> int:
    """Domino tilings of an m x n rectangle from the closed product over cosines."""
    import mpmath

    with mpmath.workdps(50):
        val = mpmath.mpf(1)
        for j in range(1, m + 1):
            for k in range(1, n + 1):
                val *= (4 * mpmath.cos(mpmath.pi * j / (m + 1)) ** 2
                        + 4 * mpmath.cos(mpmath.pi * k / (n + 1)) ** 2) ** mpmath.mpf(0.25)
        return int(mpmath.nint(val))


def random_cells(rng: np.random.Generator, size: int, box: int = 5) -> frozenset:
    """Random connected cell set grown from (0, 0) inside a box x box window."""
    cells = {(0, 0)}
    while len(cells) < size:
        i, j = list(cells)[rng.integers(len(cells))]
        di, dj = ((1, 0), (-1, 0), (0, 1), (0, -1))[rng.integers(4)]
        c = (i + di, j + dj)
        if 0 <= c[0] < box and 0 <= c[1] < box:
            cells.add(c)
    return frozenset(cells)


@_timed
def check_counting(seed: int = 1) -> CheckResult:
    rng = make_generator(seed)
    mismatches = []
    counts = []
    for _ in range(20):
        cells = random_cells(rng, int(rng.integers(2, 17)))
        det = enumeration.count_tilings(cells)
        brute = sum(1 for _ in enumeration.iter_tilings(cells))
        counts.append(brute)
        if det != brute:
            mismatches.append(sorted(cells))
    rect = enumeration.count_tilings(frozenset((i, j) for i in range(8) for j in range(8)))
    oracle = product_formula(8, 8)
    ok = not mismatches and rect == EIGHT_BY_EIGHT == oracle
    return CheckResult(1, "exact counting", ok, {"mismatches": len(mismatches), "8x8": rect},
                       {"mismatches": 0, "8x8": EIGHT_BY_EIGHT}, "exact",
                       details={"random_counts": counts, "product_formula": oracle})


def corner_region() -> lattice.TemperleyanRegion:
    return lattice.make_temperleyan(lattice.build_even_rectangle(3, 3), (0, 0))


@_timed
def check_uniformity(samples: int = 20_000, seed: int = 2) -> CheckResult:
    region = corner_region()
    tilings = enumeration.enumerate_tilings(region)
    index = {t: k for k, t in enumerate(tilings)}
    ck = np.zeros(len(tilings), np.int64)
    cw = np.zeros(len(tilings), np.int64)
    for s in range(samples):
        ck[index[sampler.sample_tiling_kasteleyn(region, seed, stream=s)]] += 1
        cw[index[sampler.sample_tiling_wilson(region, seed, stream=s)]] += 1
    pk = float(stats.chisquare(ck).pvalue)
    pw = float(stats.chisquare(cw).pvalue)
    p2 = float(stats.chi2_contingency(np.vstack([ck, cw]))[1])
    ok = len(tilings) == 4 and min(pk, pw, p2) > 1e-3
    return CheckResult(2, "sampler uniformity", ok,
                       {"tilings": len(tilings), "p_kasteleyn": pk, "p_wilson": pw, "p_two_sample": p2},
                       {"tilings": 4}, "p > 0.001",
                       details={"kasteleyn_counts": ck.tolist(), "wilson_counts": cw.tolist()})


def height_corpus() -> list[tuple[str, lattice.TemperleyanRegion, str, int]]:
    """(label, region, sampler, samples) adding up to 10^4 tilings."""
    rect = lambda m, n: lattice.make_temperleyan(lattice.build_even_rectangle(m, n), (0, 0))
    el = lattice.Polyomino.from_cells(
        [(i, j) for i in range(7) for j in range(3)] + [(i, j) for i in range(3) for j in range(3, 7)])
    return [
        ("rect 3x3", rect(3, 3), "wilson", 1000),
        ("rect 5x5", rect(5, 5), "wilson", 1000),
        ("rect 9x7", rect(9, 7), "wilson", 1500),
        ("square N=21", lattice.approximate_domain(lattice.DomainSpec.rectangle(), 1 / 21), "wilson", 2500),
        ("square N=41", lattice.approximate_domain(lattice.DomainSpec.rectangle(), 1 / 41), "wilson", 2500),
        ("L-shape", lattice.make_temperleyan(el, (6, 0)), "kasteleyn", 500),
        ("disk eps=1/6", lattice.approximate_domain(lattice.DomainSpec.disk(), 1 / 6), "kasteleyn", 500),
        ("rect 5x3 kasteleyn", rect(5, 3), "kasteleyn", 500),
    ]


@_timed
def check_heights(seed: int = 3) -> CheckResult:
    total = 0
    bad = 0
    per = {}
    for k, (label, region, algo, n) in enumerate(height_corpus()):
        grid = height.VertexGrid.of(region)
        fails = 0
        if algo == "wilson":
            geom = sampler.rectangle_geometry(region)
            rng = make_generator(seed, k)
            for _ in range(n):
                hm, vm = sampler.wilson_masks(geom, rng)
                ch, cv = height.masks_to_crossings(grid, hm, vm, geom.x0, geom.y0)
                try:
                    h = height.heights_from_crossings(grid, ch, cv)
                except height.ConsistencyError:
                    fails += 1
                    continue
                fails += (height.face_rule_violations(grid, h) + height.boundary_rule_violations(grid, h)) > 0
        else:
            for s in range(n):
                t = sampler.sample_tiling_kasteleyn(region, seed, stream=1000 * k + s)
                try:
                    h = height.height_function(region, t, grid).values
                except height.ConsistencyError:
                    fails += 1
                    continue
                fails += (height.face_rule_violations(grid, h) + height.boundary_rule_violations(grid, h)) > 0
        per[label] = {"samples": n, "failures": int(fails)}
        total += n
        bad += fails
    return CheckResult(3, "height validity", bad == 0 and total >= 10_000,
                       {"tilings": total, "failures": int(bad)}, {"failures": 0}, "exact", details=per)


@_timed
def check_pairing_identity(seed: int = 4) -> CheckResult:
    rng = make_generator(seed)
    worst = 0.0
    for k in (2, 4, 6, 8):
        for _ in range(100):
            xs = rng.standard_normal(k) + 1j * rng.standard_normal(k)
            d = moments.pairing_det(xs)
            s = moments.pairing_sum(xs)
            worst = max(worst, abs(d - s) / abs(s))
    return CheckResult(4, "pairing determinant", worst < 1e-9, worst, 0.0, 1e-9)


def random_upper(rng, n):
    return [complex(rng.uniform(-2, 2), rng.uniform(0.2, 2)) for _ in range(n)]


@_timed
def check_two_point(seed: int = 5) -> CheckResult:
    rng = make_generator(seed)
    worst_q = 0.0
    for _ in range(10):
        while True:
            p, q = random_upper(rng, 2)
            if abs(p - q) > 0.2:
                break
        res = moments.two_point_quadrature(p, q)
        worst_q = max(worst_q, abs(res.value - moments.two_point_closed(p, q)))
    H = lattice.DomainSpec.halfplane()
    worst_g = 0.0
    for _ in range(100):
        p, q = random_upper(rng, 2)
        worst_g = max(worst_g, abs(moments.two_point_closed(p, q) + 16 / math.pi * greens.g_dirichlet(H, p, q)))
    ok = worst_q < 1e-6 and worst_g < 1e-12
    return CheckResult(5, "two-point moment", ok, {"quadrature": worst_q, "green_identity": worst_g},
                       0.0, {"quadrature": 1e-6, "green_identity": 1e-12})


@_timed
def check_spectral(cutoff: int = 1000, seed: int = 6) -> CheckResult:
    rng = make_generator(seed)
    R = lattice.DomainSpec.rectangle()
    worst = 0.0
    pairs = []
    while len(pairs) < 5:
        z1 = complex(*rng.uniform(0.1, 0.9, 2))
        z2 = complex(*rng.uniform(0.1, 0.9, 2))
        if abs(z1.real - z2.real) > 0.1 and abs(z1.imag - z2.imag) > 0.1:
            pairs.append((z1, z2))
    for z1, z2 in pairs:
        err = abs(greens.spectral_gD_check(R, z1, z2, cutoff) - greens.g_rectangle_images(z1, z2))
        worst = max(worst, float(err))
    return CheckResult(6, "spectral Green's function", worst < 1e-6, worst, 0.0, 1e-6,
                       details={"cutoff": cutoff, "pairs": pairs})


@_timed
def check_gff_suite(budget: Budget = FULL) -> CheckResult:
    R = lattice.DomainSpec.rectangle()
    f1 = gff.TestFunction.eigen(1, 1)
    f2 = gff.TestFunction.eigen(1, 2)
    X = gff.pair_many(R, [f1, f2], budget.gff_samples, seed=budget.seed, stream=10)
    var1 = float(X[:, 0].var(ddof=1))
    var_err = abs(var1 * 2 * math.pi**2 - 1)
    C = np.array([[1 / (2 * math.pi**2), 0.0], [0.0, 1 / (5 * math.pi**2)]])
    w1 = gff.wick_check(np.c_[X[:, 0], X[:, 0], X[:, 0], X[:, 0]], np.full((4, 4), C[0, 0]))
    w2 = gff.wick_check(np.c_[X[:, 0], X[:, 0], X[:, 1], X[:, 1]],
                        np.array([[C[a][b] for b in (0, 0, 1, 1)] for a in (0, 0, 1, 1)]))
    H = lattice.DomainSpec.halfplane()
    kp = moments.k_point_moment(H, HALFPLANE_QUADRUPLE).value
    quad = moments.quadrature_moment(list(HALFPLANE_QUADRUPLE)).value
    k_err = abs(kp - quad) / abs(kp)
    ok = var_err < budget.gff_var_tol and max(w1.relative_deviation, w2.relative_deviation) < budget.wick_tol \
        and k_err < 1e-4
    return CheckResult(10, "free field suite", ok,
                       {"var_rel": var_err, "wick_x4": w1.relative_deviation,
                        "wick_x1x1x2x2": w2.relative_deviation, "k4_rel": k_err},
                       {"var": 1 / (2 * math.pi**2), "k4": kp},
                       {"var_rel": budget.gff_var_tol, "wick": budget.wick_tol, "k4_rel": 1e-4},
                       details={"samples": budget.gff_samples, "k4_quadrature": quad})


@_timed
def check_conformal(order: int = 40) -> CheckResult:
    maps = [gff.Mobius.disk_automorphism(0.3), gff.Mobius.disk_automorphism(-0.2 + 0.4j, 1.0),
            gff.Mobius.disk_automorphism(0.5j, -2.0)]
    dens = [gff.TestFunction.bump(0.1 + 0.2j, 0.4), gff.TestFunction.bump(-0.2 + 0j, 0.5, 0.7)]
    worst = 0.0
    rows = []
    for om in dens:
        for f in maps:
            vx, vy = gff.conformal_invariance_check(om, f, order=order)
            rel = abs(vx - vy) / vx
            worst = max(worst, rel)
            rows.append({"density": om.label, "VarX": vx, "VarY": vy})
    return CheckResult(11, "conformal invariance", worst < 1e-3, worst, 0.0, 1e-3, details={"cases": rows})


def exact_suite() -> list[CheckResult]:
    return [check_counting(), check_uniformity(), check_heights(), check_pairing_identity(), check_two_point(),
            check_spectral()]


# ---------------------------------------------------------------------------
# Monte Carlo suite


def run_dimer_experiments(budget: Budget = FULL, progress=None) -> dict:
    return {N: run_square(N, n, budget.seed, stream=N, progress=progress) for N, n in budget.samples.items()}


@_timed
def check_covariance(runs: dict, budget: Budget = FULL) -> CheckResult:
    target = covariance_target()
    rows = {}
    for N in sorted(runs):
        c, se = runs[N].covariance()
        exact = height.exact_height_moments(runs[N].grid.region, runs[N].vp, runs[N].vq)[2]
        rows[N] = {"cov": c, "se": se, "rel_dev": (c - target) / target, "exact_finite_N": exact}
    Ns = sorted(runs)
    last = rows[Ns[-1]]
    monotone = all(
        abs(rows[b]["cov"] - target) <= abs(rows[a]["cov"] - target) + 2 * math.hypot(rows[a]["se"], rows[b]["se"])
        for a, b in zip(Ns, Ns[1:])
    )
    ok = abs(last["rel_dev"]) < budget.cov_tol and monotone
    return CheckResult(7, "height covariance", ok,
                       {"rel_dev_N81": last["rel_dev"], "monotone": monotone}, target,
                       {"rel_dev": budget.cov_tol, "monotone": "2 combined SE"}, details=rows)


@_timed
def check_gaussianity(run, budget: Budget = FULL) -> CheckResult:
    x = run.centered_observable()
    var, sk, se_sk, ku, se_ku = gff.moment_stats(x)
    target = observable_variance_target()
    vrel = var / target - 1
    ok = abs(sk) < budget.skew_tol and abs(ku) < budget.kurt_tol and abs(vrel) < budget.var_tol
    return CheckResult(8, "Gaussianity", ok, {"skewness": sk, "excess_kurtosis": ku, "var_rel": vrel},
                       {"variance": target}, {"skew": budget.skew_tol, "kurt": budget.kurt_tol,
                                              "var_rel": budget.var_tol},
                       details={"N": run.N, "samples": run.samples, "variance": var,
                                "skew_se": se_sk, "kurt_se": se_ku})


@_timed
def check_mean_height(run, budget: Budget = FULL) -> CheckResult:
    dev, nv = mean_height_deviation(run)
    return CheckResult(9, "mean height", dev < budget.mean_tol, dev, 0.0, budget.mean_tol,
                       details={"N": run.N, "samples": run.samples, "vertices": nv})


def montecarlo_suite(budget: Budget = FULL, runs: dict | None = None, progress=None) -> list[CheckResult]:
    runs = runs or run_dimer_experiments(budget, progress)
    big = runs[max(runs)]
    return [check_covariance(runs, budget), check_gaussianity(big, budget), check_mean_height(big, budget),
            check_gff_suite(budget), check_conformal()]
