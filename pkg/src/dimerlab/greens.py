"""Continuum Green's functions, Dirichlet eigenmodes and the F+/F- kernels.

Conventions: Delta g_D(z1, .) = delta_{z1} with g_D = 0 on the boundary, so
g_D ~ (1/2pi) log|z2 - z1| near the diagonal and g_D < 0 inside. Points are
complex numbers x + iy. Rectangles are [0, a] x [0, b]; the disk default
basepoint is the leftmost boundary point; the half-plane basepoint is infinity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import DomainSpec

TWO_PI = 2.0 * math.pi


class SingularityError(ValueError):
    pass


class DomainError(ValueError):
    pass


def _check_pair(domain: DomainSpec, z1: complex, z2: complex):
    if z1 == z2:
        raise SingularityError("coincident points")
    for z in (z1, z2):
        if not domain.contains(z):
            raise DomainError(f"{z} is not inside the {domain.kind}")


# ---------------------------------------------------------------------------
# conformal maps to the upper half-plane


def cayley(domain: DomainSpec):
    """Mobius map of the disk onto the upper half-plane, basepoint -> infinity.

    Returns (f, f') as callables on complex arrays.
    """
    if domain.kind != "disk":
        raise DomainError("Cayley map is only defined for disks")
    c, r = domain.center, domain.radius
    u = (domain.resolved_basepoint - c) / r  # unit complex number

    def f(z):
        w = -(np.asarray(z) - c) / (r * u)  # basepoint goes to -1, hence to infinity
        return 1j * (1 - w) / (1 + w)

    def df(z):
        w = -(np.asarray(z) - c) / (r * u)
        return 2j / (1 + w) ** 2 / (r * u)

    return f, df


def disk_automorphism(a: complex, rotation: float = 0.0):
    """z -> e^{i rotation} (z - a) / (1 - conj(a) z) on the unit disk, with derivative."""
    a = complex(a)
    if abs(a) >= 1:
        raise DomainError("automorphism parameter must lie in the unit disk")
    e = np.exp(1j * rotation)

    def f(z):
        z = np.asarray(z)
        return e * (z - a) / (1 - np.conj(a) * z)

    def df(z):
        z = np.asarray(z)
        return e * (1 - abs(a) ** 2) / (1 - np.conj(a) * z) ** 2

    return f, df


# ---------------------------------------------------------------------------
# Dirichlet Green's function


def g_halfplane(z1, z2):
    z1 = np.asarray(z1, complex)
    z2 = np.asarray(z2, complex)
    return np.log(np.abs((z2 - z1) / (z2 - np.conj(z1)))) / TWO_PI


def g_disk(z1, z2, center: complex = 0j, radius: float = 1.0):
    """Closed form (1/2pi) log|(w2 - w1) / (1 - conj(w1) w2)| on the unit-scaled disk."""
    w1 = (np.asarray(z1, complex) - center) / radius
    w2 = (np.asarray(z2, complex) - center) / radius
    return np.log(np.abs((w2 - w1) / (1 - np.conj(w1) * w2))) / TWO_PI


def _log_abs_sinh(u):
    """log|sinh u| for complex u, stable for large |Re u|."""
    u = np.asarray(u, complex)
    s = np.where(u.real >= 0, 1.0, -1.0)
    v = u * s
    return v.real - math.log(2.0) + np.log(np.abs(-np.expm1(-2 * v)))


def g_rectangle_images(z1, z2, a: float = 1.0, b: float = 1.0, tol: float = 1e-12):
    """Rectangle Dirichlet Green's function by the method of images.

    Image charges: +1 at w and -w, -1 at conj(w) and -conj(w), repeated over
    the lattice 2a Z + 2b i Z. The sum over the vertical period is done in
    closed form (product formula for sinh); the horizontal sum converges
    like exp(-pi |m| a / b) and is truncated once the tail falls below tol.
    """
    z = np.asarray(z2, complex)
    w = np.asarray(z1, complex)
    k = math.pi / (2 * b)
    m_max = int(math.ceil(math.log(1.0 / tol) * b / (math.pi * a))) + 2
    total = np.zeros(np.broadcast(z, w).shape)
    for m in range(-m_max, m_max + 1):
        shift = 2 * m * a
        total = total + (
            _log_abs_sinh(k * (z - w - shift))
            + _log_abs_sinh(k * (z + w - shift))
            - _log_abs_sinh(k * (z - np.conj(w) - shift))
            - _log_abs_sinh(k * (z + np.conj(w) - shift))
        )
    return total / TWO_PI


def g_dirichlet(domain: DomainSpec, z1: complex, z2: complex) -> float:
    z1, z2 = complex(z1), complex(z2)
    _check_pair(domain, z1, z2)
    if domain.kind == "halfplane":
        return float(g_halfplane(z1, z2))
    if domain.kind == "disk":
        f, _ = cayley(domain)
        return float(g_halfplane(f(z1), f(z2)))
    return float(g_rectangle_images(z1, z2, domain.a, domain.b))


# ---------------------------------------------------------------------------
# eigenmodes


@dataclass(frozen=True)
class EigenMode:
    """Dirichlet eigenfunction (2/sqrt(ab)) sin(pi j x/a) sin(pi k y/b)."""

    j: int
    k: int
    a: float = 1.0
    b: float = 1.0

    @property
    def eigenvalue(self) -> float:
        return -math.pi**2 * (self.j**2 / self.a**2 + self.k**2 / self.b**2)

    @property
    def norm_constant(self) -> float:
        return 2.0 / math.sqrt(self.a * self.b)

    def __call__(self, x, y):
        return (
            self.norm_constant
            * np.sin(math.pi * self.j * np.asarray(x) / self.a)
            * np.sin(math.pi * self.k * np.asarray(y) / self.b)
        )

    def at(self, z):
        z = np.asarray(z, complex)
        return self(z.real, z.imag)


def rectangle_modes(M: int, a: float = 1.0, b: float = 1.0) -> list[EigenMode]:
    """The M lowest modes, ordered by -eigenvalue then (j, k)."""
    if M < 1:
        raise ValueError("need at least one mode")
    R = 1
    while True:
        cand = [(j, k) for j in range(1, R + 1) for k in range(1, R + 1)]
        lam = lambda jk: jk[0] ** 2 / a**2 + jk[1] ** 2 / b**2
        cand.sort(key=lambda jk: (lam(jk), jk))
        # everything with j or k = R+1 has lam above this threshold
        bound = min((R + 1) ** 2 / a**2 + 1 / b**2, 1 / a**2 + (R + 1) ** 2 / b**2)
        safe = [jk for jk in cand if lam(jk) < bound]
        if len(safe) >= M:
            return [EigenMode(j, k, a, b) for j, k in safe[:M]]
        R *= 2


def spectral_gD_check(domain: DomainSpec, z1: complex, z2: complex, cutoff: int) -> float:
    """Partial spectral sum over modes with j, k <= cutoff: sum f(z1) f(z2) / lambda."""
    if domain.kind != "rectangle":
        raise DomainError("spectral sum is implemented for rectangles")
    z1, z2 = complex(z1), complex(z2)
    if z1 == z2:
        raise SingularityError("coincident points")
    a, b = domain.a, domain.b
    j = np.arange(1, cutoff + 1)
    sx = np.sin(math.pi * j * z1.real / a) * np.sin(math.pi * j * z2.real / a)
    sy = np.sin(math.pi * j * z1.imag / b) * np.sin(math.pi * j * z2.imag / b)
    lam = -math.pi**2 * ((j[:, None] / a) ** 2 + (j[None, :] / b) ** 2)
    return float((4.0 / (a * b)) * (sx[:, None] * sy[None, :] / lam).sum())


# ---------------------------------------------------------------------------
# analytic Neumann difference and F kernels


def _neumann_halfplane(w1, w1p, w2, path=None):
    roots = (w1, np.conj(w1), w1p, np.conj(w1p))
    signs = (1, 1, -1, -1)
    val = sum(s * np.log(w2 - r) for s, r in zip(signs, roots)) / TWO_PI
    winding = 0
    if path is not None:
        # continue each log along the path, count full turns against the principal branch
        pts = np.asarray(list(path) + [w2], complex)
        cont = 0.0
        for s, r in zip(signs, roots):
            ang = np.unwrap(np.angle(pts - r))
            cont += s * ang[-1]
        principal = sum(s * np.angle(w2 - r) for s, r in zip(signs, roots))
        winding = int(round((cont - principal) / TWO_PI))
    return complex(val) + 1j * winding, winding


def neumann_diff(domain: DomainSpec, z1: complex, z1p: complex, z2: complex, path=None):
    """Analytic Neumann difference tilde g_N(z1, z2) - tilde g_N(z1', z2).

    The imaginary part is multivalued (+1 per counterclockwise turn of z2
    about z1). The value returned is the sum of principal logs of the four
    linear factors, continued along ``path`` (a sequence of points ending
    just before z2) when given; the second return value counts the extra
    turns picked up relative to the principal branch.
    """
    z1, z1p, z2 = complex(z1), complex(z1p), complex(z2)
    if z2 in (z1, z1p):
        raise SingularityError("z2 coincides with a pole")
    if z1 == z1p:
        return 0j, 0
    if domain.kind == "halfplane":
        return _neumann_halfplane(z1, z1p, z2, path)
    if domain.kind == "disk":
        f, _ = cayley(domain)
        mapped = None if path is None else [complex(f(p)) for p in path]
        return _neumann_halfplane(complex(f(z1)), complex(f(z1p)), complex(f(z2)), mapped)
    raise DomainError("analytic Neumann difference needs a half-plane or disk")


def f_kernels(domain: DomainSpec, z1, z2):
    """(F+, F-) with -4 d_{z1} tilde g_N = F+ dz1 + F- d conj(z1)."""
    z1 = np.asarray(z1, complex)
    z2 = np.asarray(z2, complex)
    if np.any(z1 == z2):
        raise SingularityError("coincident points")
    if domain.kind == "halfplane":
        return 2 / (math.pi * (z2 - z1)), 2 / (math.pi * (z2 - np.conj(z1)))
    if domain.kind == "disk":
        f, df = cayley(domain)
        w1, w2, d = f(z1), f(z2), df(z1)
        return 2 * d / (math.pi * (w2 - w1)), 2 * np.conj(d) / (math.pi * (w2 - np.conj(w1)))
    raise DomainError("F kernels need a half-plane or disk")


def f0_f1(domain: DomainSpec, z1, z2):
    """Components with F+- = -2 (F0 +- F1)."""
    fp, fm = f_kernels(domain, z1, z2)
    return -(fp + fm) / 4, -(fp - fm) / 4
