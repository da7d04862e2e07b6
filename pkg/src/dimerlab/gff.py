"""Massless free field on a rectangle from its Dirichlet eigen-expansion.

F = sum_i c_i f_i / sqrt(-lambda_i) with c_i i.i.d. standard normal. Only
pairings with test functions are ever evaluated; F itself is not a function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .greens import DomainError, EigenMode, g_disk, rectangle_modes
from .lattice import DomainSpec
from .moments import pairings
from .rng import make_generator

DEFAULT_MODES = 64 * 64


class ContractError(ValueError):
    pass


# ---------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class TestFunction:
    """Vectorised real function phi(x, y) with an optional disk support."""

    __test__ = False  # keep pytest from collecting this class

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str = "phi"
    smoothness: str = "C1"
    support: tuple[complex, float] | None = None  # (centre, radius)

    def __call__(self, x, y):
        return self.func(np.asarray(x, float), np.asarray(y, float))

    def at(self, z):
        z = np.asarray(z, complex)
        return self(z.real, z.imag)

    @classmethod
    def eigen(cls, j: int, k: int, a: float = 1.0, b: float = 1.0) -> "TestFunction":
        mode = EigenMode(j, k, a, b)
        return cls(mode, f"eigen:{j},{k}", "Cinf")

    @classmethod
    def bump(cls, center: complex, radius: float, tilt: float = 0.0) -> "TestFunction":
        """exp(-1/(1 - r^2)) on |z - center| < radius, times 1 + tilt * (x - cx) / radius."""
        center = complex(center)

        def f(x, y):
            r2 = ((x - center.real) ** 2 + (y - center.imag) ** 2) / radius**2
            inside = r2 < 1
            val = np.zeros(np.broadcast(x, y).shape)
            val[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
            return val * (1.0 + tilt * (x - center.real) / radius)

        return cls(f, f"bump:{center.real},{center.imag},{radius},{tilt}", "Cinf", (center, radius))

    @classmethod
    def parse(cls, text: str, a: float = 1.0, b: float = 1.0) -> "TestFunction":
        """'eigen:j,k', 'bump:x,y,r' or 'bump:x,y,r,tilt'."""
        kind, _, args = text.partition(":")
        try:
            vals = [float(s) for s in args.split(",")]
            if kind == "eigen" and len(vals) == 2:
                return cls.eigen(int(vals[0]), int(vals[1]), a, b)
            if kind == "bump" and len(vals) in (3, 4):
                return cls.bump(complex(vals[0], vals[1]), vals[2], *vals[3:])
        except ValueError:
            pass
        raise ContractError(f"unrecognised test function {text!r}")


# ---------------------------------------------------------------------------
# sampling and pairing


def _rect(domain) -> tuple[float, float]:
    if isinstance(domain, DomainSpec):
        if domain.kind != "rectangle":
            raise DomainError("the free field is sampled on rectangles only")
        return domain.a, domain.b
    a, b = domain
    return float(a), float(b)


@dataclass(frozen=True, eq=False)
class GFFSample:
    a: float
    b: float
    modes: tuple[EigenMode, ...]
    coefficients: np.ndarray

    @property
    def cutoff(self) -> int:
        return len(self.modes)


def sample_gff(domain, M: int = DEFAULT_MODES, seed: int = 0, stream: int = 0) -> GFFSample:
    a, b = _rect(domain)
    if M < 1:
        raise ValueError("need at least one mode")
    modes = tuple(rectangle_modes(M, a, b))
    c = make_generator(seed, stream).standard_normal(M)
    return GFFSample(a, b, modes, c)


def gauss_grid(n: int, a: float, b: float):
    t, w = np.polynomial.legendre.leggauss(n)
    x, wx = (t + 1) * a / 2, w * a / 2
    y, wy = (t + 1) * b / 2, w * b / 2
    return x, wx, y, wy


def projections(phi: Callable, modes: Sequence[EigenMode], a: float = 1.0, b: float = 1.0,
                order: int | None = None) -> np.ndarray:
    """<phi, f_i> for each mode by tensor Gauss-Legendre quadrature.

    The default order 2*jmax + 64 integrates phi * f_i exactly for
    polynomial-like phi and resolves the oscillation of every mode.
    """
    jmax = max(max(m.j for m in modes), max(m.k for m in modes))
    Q = order or 2 * jmax + 64
    x, wx, y, wy = gauss_grid(Q, a, b)
    P = np.asarray(phi(x[:, None], y[None, :]), float) * wx[:, None] * wy[None, :]
    js = np.arange(1, jmax + 1)
    Sx = np.sin(math.pi * js[None, :] * x[:, None] / a)
    Sy = np.sin(math.pi * js[None, :] * y[:, None] / b)
    full = Sx.T @ P @ Sy * (2.0 / math.sqrt(a * b))
    jj = np.array([m.j for m in modes]) - 1
    kk = np.array([m.k for m in modes]) - 1
    return full[jj, kk]


def mode_weights(phi: Callable, modes: Sequence[EigenMode], a=1.0, b=1.0) -> np.ndarray:
    """<phi, f_i> / sqrt(-lambda_i)."""
    lam = np.array([m.eigenvalue for m in modes])
    return projections(phi, modes, a, b) / np.sqrt(-lam)


def pair(sample: GFFSample, phi: Callable) -> float:
    return float(sample.coefficients @ mode_weights(phi, sample.modes, sample.a, sample.b))


def pair_many(domain, phis: Sequence[Callable], n_samples: int, M: int = DEFAULT_MODES,
              seed: int = 0, stream: int = 0, chunk: int = 2048) -> np.ndarray:
    """(n_samples, len(phis)) array of pairings for independent field samples.

    Sample s uses the coefficient vector that ``sample_gff`` would draw as the
    s-th block of M normals from the same stream; coefficients are generated
    in chunks so memory stays O(chunk * M).
    """
    a, b = _rect(domain)
    modes = rectangle_modes(M, a, b)
    W = np.stack([mode_weights(p, modes, a, b) for p in phis], axis=1)
    rng = make_generator(seed, stream)
    out = np.empty((n_samples, len(phis)))
    for s in range(0, n_samples, chunk):
        m = min(chunk, n_samples - s)
        out[s:s + m] = rng.standard_normal((m, M)) @ W
    return out


def analytic_covariance(domain, phi1: Callable, phi2: Callable, M: int = DEFAULT_MODES) -> float:
    """sum_i <phi1, f_i><phi2, f_i> / (-lambda_i) over the first M modes."""
    a, b = _rect(domain)
    modes = rectangle_modes(M, a, b)
    return float(mode_weights(phi1, modes, a, b) @ mode_weights(phi2, modes, a, b))


def tail_bound(domain, phi: Callable, M: int = DEFAULT_MODES, factor: int = 4) -> float:
    """Estimate of sum_{i > M} <phi, f_i>^2 / (-lambda_i) from modes M..factor*M."""
    a, b = _rect(domain)
    modes = rectangle_modes(factor * M, a, b)
    w = mode_weights(phi, modes, a, b)
    tail = float((w[M:] ** 2).sum())
    # the remaining tail beyond factor*M is bounded by the last block scaled by 1/(factor-1)
    return tail * factor / (factor - 1)


def field_covariance(domain, z1: complex, z2: complex, M: int = DEFAULT_MODES) -> float:
    """E(F(z1) F(z2)) as the truncated mode sum sum_i f_i(z1) f_i(z2) / (-lambda_i)."""
    a, b = _rect(domain)
    return float(sum(m.at(z1) * m.at(z2) / -m.eigenvalue for m in rectangle_modes(M, a, b)))


# ---------------------------------------------------------------------------
# Wick moments


@dataclass
class WickReport:
    empirical: float
    predicted: float
    standard_error: float
    relative_deviation: float
    covariances: np.ndarray = field(repr=False)


def wick_check(values: np.ndarray, covariance: np.ndarray | None = None) -> WickReport:
    """Fourth joint moment E(X1 X2 X3 X4) against the three-pairing Wick sum.

    ``values`` has shape (n, 4): pairings of n field samples with four test
    functions (repeat columns for E(X^4) style checks). The prediction uses
    ``covariance`` when given, otherwise the empirical covariance matrix.
    """
    X = np.asarray(values, float)
    if X.ndim != 2 or X.shape[1] != 4:
        raise ContractError("need an (n, 4) array of pairings")
    if len(X) < 10_000:
        raise ContractError("Wick checks need at least 10^4 samples")
    C = np.asarray(covariance) if covariance is not None else (X.T @ X) / len(X)
    prod = X.prod(axis=1)
    emp = float(prod.mean())
    se = float(prod.std(ddof=1) / math.sqrt(len(X)))
    pred = float(sum(math.prod(C[i, j] for i, j in pr) for pr in pairings(range(4))))
    rel = abs(emp - pred) / abs(pred) if pred else abs(emp)
    return WickReport(emp, pred, se, rel, C)


# ---------------------------------------------------------------------------
# conformal invariance on the disk


@dataclass(frozen=True)
class Mobius:
    """z -> (al z + be) / (ga z + de)."""

    al: complex
    be: complex
    ga: complex
    de: complex

    def __post_init__(self):
        if abs(self.al * self.de - self.be * self.ga) < 1e-14:
            raise ContractError("degenerate Mobius map")

    @classmethod
    def disk_automorphism(cls, a: complex, rotation: float = 0.0) -> "Mobius":
        """z -> e^{i rotation} (z - a) / (1 - conj(a) z)."""
        a = complex(a)
        if abs(a) >= 1:
            raise ContractError("automorphism parameter must lie in the unit disk")
        e = complex(np.exp(1j * rotation))
        return cls(e, -e * a, -a.conjugate(), 1)

    def __call__(self, z):
        z = np.asarray(z, complex)
        return (self.al * z + self.be) / (self.ga * z + self.de)

    def derivative(self, z):
        z = np.asarray(z, complex)
        return (self.al * self.de - self.be * self.ga) / (self.ga * z + self.de) ** 2

    def inverse(self) -> "Mobius":
        return Mobius(self.de, -self.be, -self.ga, self.al)

    def image_circle(self, center: complex, radius: float) -> tuple[complex, float]:
        """Image of a circle (assumed not through the pole) as (centre, radius)."""
        p = self(center + radius * np.exp(2j * math.pi * np.array([0, 1, 2]) / 3))
        a, b, c = p
        # circumcentre of three points
        d = 2 * (a.real * (b.imag - c.imag) + b.real * (c.imag - a.imag) + c.real * (a.imag - b.imag))
        if abs(d) < 1e-14:
            raise ContractError("circle maps to a line")
        ux = (abs(a) ** 2 * (b.imag - c.imag) + abs(b) ** 2 * (c.imag - a.imag) + abs(c) ** 2 * (a.imag - b.imag)) / d
        uy = (abs(a) ** 2 * (c.real - b.real) + abs(b) ** 2 * (a.real - c.real) + abs(c) ** 2 * (b.real - a.real)) / d
        o = complex(ux, uy)
        return o, float(abs(a - o))


def _check_disk_bijection(f: Mobius, domain_v: DomainSpec, domain_u: DomainSpec):
    """f must send the boundary circle of V onto that of U and V's centre inside U."""
    if domain_v.kind != "disk" or domain_u.kind != "disk":
        raise ContractError("conformal check is implemented for disk-to-disk maps")
    th = np.linspace(0, 2 * math.pi, 17)[:-1]
    zb = domain_v.center + domain_v.radius * np.exp(1j * th)
    on = np.abs(np.abs(f(zb) - domain_u.center) - domain_u.radius)
    if on.max() > 1e-9 * domain_u.radius or not domain_u.contains(complex(f(domain_v.center))):
        raise ContractError("map is not a bijection between the two disks")


def _disk_nodes(center: complex, radius: float, n_r: int, n_t: int):
    """Polar product rule: Gauss-Legendre in r, trapezoid in angle."""
    t, w = np.polynomial.legendre.leggauss(n_r)
    r = (t + 1) * radius / 2
    wr = w * radius / 2 * r
    th = 2 * math.pi * np.arange(n_t) / n_t
    z = center + r[:, None] * np.exp(1j * th)[None, :]
    wz = wr[:, None] * np.full(n_t, 2 * math.pi / n_t)[None, :]
    return z.ravel(), wz.ravel()


def _potential(density: Callable, support: tuple[complex, float], z: np.ndarray, domain: DomainSpec,
               order: int) -> np.ndarray:
    """u(z) = int density(w) (-g_D(z, w)) dA(w), polar coordinates centred at each z.

    Centring at z turns the log singularity into r log r; substituting
    r = s^2 makes the radial integrand smooth enough for Gauss-Legendre.
    """
    c, R = support
    t, w = np.polynomial.legendre.leggauss(order)
    s01, ws01 = (t + 1) / 2, w / 2
    n_t = 2 * order
    th = 2 * math.pi * (np.arange(n_t) + 0.5) / n_t
    e = np.exp(1j * th)
    out = np.empty(len(z))
    for k, z0 in enumerate(z):
        # distance from z0 to the support circle along each direction
        d = z0 - c
        bdot = (np.conj(e) * d).real
        disc = bdot**2 - (abs(d) ** 2 - R**2)
        rmax = -bdot + np.sqrt(np.maximum(disc, 0.0))
        s = s01[:, None] * np.sqrt(rmax)[None, :]
        r = s * s
        ws = ws01[:, None] * np.sqrt(rmax)[None, :]
        pts = z0 + r * e[None, :]
        dens = density(pts)
        gw = -_green(domain, z0, pts)
        # dA = r dr dth, dr = 2 s ds
        out[k] = (dens * gw * r * 2 * s * ws).sum() * (2 * math.pi / n_t)
    return out


def _green(domain: DomainSpec, z1, z2):
    if domain.kind == "disk":
        return g_disk(z1, z2, domain.center, domain.radius)
    raise ContractError("conformal check is implemented for disks")


def dirichlet_energy(density: Callable, support: tuple[complex, float], domain: DomainSpec,
                     order: int = 48) -> float:
    """int int density(z1) density(z2) (-g_D(z1, z2)) dA dA."""
    z, wz = _disk_nodes(support[0], support[1], order, 2 * order)
    dens = density(z)
    keep = dens != 0
    u = _potential(density, support, z[keep], domain, order)
    return float((dens[keep] * wz[keep] * u).sum())


def conformal_invariance_check(omega: TestFunction, f: Mobius, domain_u: DomainSpec | None = None,
                               domain_v: DomainSpec | None = None, order: int = 48) -> tuple[float, float]:
    """(VarX, VarY) for X = int_U omega F and Y = int_V (f^* omega) F.

    omega is a 2-form density on U with disk support; f maps V onto U and
    the pullback density is omega(f(y)) |f'(y)|^2, supported on the preimage
    disk of omega's support.
    """
    domain_u = domain_u or DomainSpec.disk()
    domain_v = domain_v or DomainSpec.disk()
    if omega.support is None:
        raise ContractError("the density needs a disk support")
    _check_disk_bijection(f, domain_v, domain_u)
    var_x = dirichlet_energy(omega.at, omega.support, domain_u, order)
    finv = f.inverse()
    pre = finv.image_circle(*omega.support)

    def pulled(y):
        return omega.at(f(y)) * np.abs(f.derivative(y)) ** 2

    var_y = dirichlet_energy(pulled, pre, domain_v, order)
    return var_x, var_y


# ---------------------------------------------------------------------------
# comparison with the dimer observable


@dataclass
class ComparisonRow:
    epsilon: float
    samples: int
    variance: float
    variance_target: float
    variance_ratio: float
    skewness: float
    skewness_se: float
    excess_kurtosis: float
    kurtosis_se: float
    ks_distance: float
    ks_pvalue: float


def moment_stats(x: np.ndarray) -> tuple[float, float, float, float, float]:
    """(variance, skewness, its SE, excess kurtosis, its SE) with normal-theory errors."""
    x = np.asarray(x, float)
    n = len(x)
    var = float(x.var(ddof=1))
    sk = float(stats.skew(x, bias=False))
    ku = float(stats.kurtosis(x, bias=False))
    se_sk = math.sqrt(6.0 * n * (n - 1) / ((n - 2) * (n + 1) * (n + 3)))
    se_ku = 2 * se_sk * math.sqrt((n * n - 1) / ((n - 3) * (n + 5)))
    return var, sk, se_sk, ku, se_ku


def dimer_gff_comparison(dimer: dict[float, np.ndarray], gff_pairs: np.ndarray,
                        variance_target: float | None = None) -> list[ComparisonRow]:
    """Compare dimer smoothed observables (keyed by epsilon) with (4/sqrt(pi)) * pair.

    The distance is the two-sample Kolmogorov-Smirnov statistic on
    standardised values, so it tests the shape of the law separately from
    the variance ratio.
    """
    g = 4 / math.sqrt(math.pi) * np.asarray(gff_pairs, float)
    target = variance_target if variance_target is not None else float(g.var(ddof=1))
    gz = (g - g.mean()) / g.std()
    rows = []
    for eps in sorted(dimer, reverse=True):
        x = np.asarray(dimer[eps], float)
        var, sk, se_sk, ku, se_ku = moment_stats(x)
        xz = (x - x.mean()) / x.std()
        ks = stats.ks_2samp(xz, gz)
        rows.append(ComparisonRow(eps, len(x), var, target, var / target, sk, se_sk, ku, se_ku,
                                  float(ks.statistic), float(ks.pvalue)))
    return rows


def limit_variance(domain, phi: Callable, M: int = DEFAULT_MODES) -> float:
    """(16/pi) * sum_i <phi, f_i>^2 / (-lambda_i)."""
    return 16 / math.pi * analytic_covariance(domain, phi, phi, M)

