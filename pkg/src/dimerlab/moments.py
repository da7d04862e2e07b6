"""Continuum moments of the centered height function.

* ``pairing_det`` / ``pairing_sum``: the antisymmetric Cauchy-type matrix
  m_ij = 1/(x_j - x_i) and its expansion over perfect pairings.
* ``two_point_closed``: (8/pi^2) Re log((conj p - q)/(p - q)) on the half-plane.
* ``two_point_quadrature`` and ``contour_moment``: the signed sum of iterated
  contour integrals of F-kernel determinants along disjoint paths, evaluated
  by composite Gauss-Legendre quadrature. Used as an independent oracle.
* ``k_point_moment``: (-16/pi)^(k/2) times the pairing sum of Green's functions.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .greens import SingularityError, g_dirichlet
from .lattice import DomainSpec

BASE_NODES = 32
QUAD_TOL = 1e-8
MAX_NODES = 1024
START_OFFSET = 1e-6


class ArityError(ValueError):
    pass


class ContractError(ValueError):
    """A path does not end at its point or does not start on the boundary."""


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class MomentResult:
    value: float
    method: str  # closedForm | quadrature | pairingSum | monteCarlo
    error_estimate: float = 0.0

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error estimate must be nonnegative")


# ---------------------------------------------------------------------------
# pairing identities


def _check_distinct(xs):
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            if xs[i] == xs[j]:
                raise SingularityError(f"repeated point {xs[i]}")


def cauchy_antisymmetric(xs: Sequence[complex]) -> np.ndarray:
    xs = np.asarray(xs, complex)
    d = xs[None, :] - xs[:, None]
    np.fill_diagonal(d, 1.0)
    m = 1.0 / d
    np.fill_diagonal(m, 0.0)
    return m


def pairing_det(xs: Sequence[complex]) -> complex:
    xs = [complex(x) for x in xs]
    _check_distinct(xs)
    if len(xs) % 2:
        return 0j
    if not xs:
        return 1 + 0j
    return complex(np.linalg.det(cauchy_antisymmetric(xs)))


def pairings(items: Sequence[int]):
    """All perfect pairings of items, as lists of 2-tuples."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k in range(len(rest)):
        partner = rest[k]
        remaining = rest[:k] + rest[k + 1:]
        for tail in pairings(remaining):
            yield [(first, partner)] + tail


def pairing_sum(xs: Sequence[complex]) -> complex:
    xs = [complex(x) for x in xs]
    if len(xs) % 2:
        raise ArityError("pairing sum needs an even number of points")
    _check_distinct(xs)
    total = 0j
    for pr in pairings(range(len(xs))):
        term = 1 + 0j
        for i, j in pr:
            term /= (xs[i] - xs[j]) ** 2
        total += term
    return total


# ---------------------------------------------------------------------------
# two-point closed form and k-point moments


def two_point_closed(p: complex, q: complex) -> float:
    p, q = complex(p), complex(q)
    if p == q:
        raise SingularityError("coincident points")
    if p.imag <= 0 or q.imag <= 0:
        raise ValueError("points must lie in the upper half-plane")
    return 8 / math.pi**2 * math.log(abs((p.conjugate() - q) / (p - q)))


def k_point_moment(domain: DomainSpec, ps: Sequence[complex]) -> MomentResult:
    ps = [complex(p) for p in ps]
    _check_distinct(ps)
    k = len(ps)
    if k % 2:
        return MomentResult(0.0, "closedForm", 0.0)
    g = {}
    for i in range(k):
        for j in range(i + 1, k):
            g[(i, j)] = g_dirichlet(domain, ps[i], ps[j])
    total = 0.0
    for pr in pairings(range(k)):
        total += math.prod(g[(i, j)] for i, j in pr)
    return MomentResult((-16 / math.pi) ** (k // 2) * total, "pairingSum", 0.0)


# ---------------------------------------------------------------------------
# integration paths


@dataclass(frozen=True)
class IntegrationPath:
    """Piecewise-linear path from a boundary point to an interior endpoint."""

    vertices: tuple[complex, ...]

    @classmethod
    def of(cls, *pts) -> "IntegrationPath":
        if len(pts) < 2:
            raise PathError("a path needs at least two vertices")
        return cls(tuple(complex(p) for p in pts))

    @property
    def start(self) -> complex:
        return self.vertices[0]

    @property
    def end(self) -> complex:
        return self.vertices[-1]

    def nodes(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Legendre nodes z and weights dz (complex) with n nodes per segment."""
        t, w = np.polynomial.legendre.leggauss(n)
        zs, ws = [], []
        for a, b in zip(self.vertices[:-1], self.vertices[1:]):
            zs.append((a + b) / 2 + (b - a) / 2 * t)
            ws.append((b - a) / 2 * w)
        return np.concatenate(zs), np.concatenate(ws)


def _seg_dist(p1, p2, q1, q2) -> float:
    """Minimum distance between segments p1p2 and q1q2 in the plane."""

    def pt_seg(p, a, b):
        d = b - a
        if d == 0:
            return abs(p - a)
        t = max(0.0, min(1.0, ((p - a) * d.conjugate()).real / abs(d) ** 2))
        return abs(p - (a + t * d))

    def cross(u, v):
        return (u.conjugate() * v).imag

    d1, d2 = p2 - p1, q2 - q1
    c1, c2 = cross(d1, q1 - p1), cross(d1, q2 - p1)
    c3, c4 = cross(d2, p1 - q1), cross(d2, p2 - q1)
    if c1 * c2 < 0 and c3 * c4 < 0:
        return 0.0
    return min(pt_seg(p1, q1, q2), pt_seg(p2, q1, q2), pt_seg(q1, p1, p2), pt_seg(q2, p1, p2))


def path_distance(a: IntegrationPath, b: IntegrationPath) -> float:
    return min(
        _seg_dist(p1, p2, q1, q2)
        for p1, p2 in zip(a.vertices[:-1], a.vertices[1:])
        for q1, q2 in zip(b.vertices[:-1], b.vertices[1:])
    )


def check_paths(paths: Sequence[IntegrationPath], ends: Sequence[complex], min_sep: float = 1e-9):
    if len(paths) != len(ends):
        raise PathError("need one path per point")
    for p, z in zip(paths, ends):
        if abs(p.end - complex(z)) > 1e-12:
            raise ContractError(f"path ends at {p.end}, expected {z}")
        # paths may start up to START_OFFSET inside the half-plane
        if not 0 <= p.start.imag <= START_OFFSET:
            raise ContractError(f"path must start on the real axis, starts at {p.start}")
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            if path_distance(paths[i], paths[j]) < min_sep:
                raise PathError(f"paths {i} and {j} intersect")


def default_paths(points: Sequence[complex]) -> list[IntegrationPath]:
    """Straight segments from the real axis, shifted sideways until disjoint.

    Each path runs from (Re z + d, 0) to z, with d tried in the order
    0, +s, -s, +2s, -2s, ... (s = a quarter of the smallest pairwise distance)
    until it stays at least 0.05 x that distance away from earlier paths
    and from all other endpoints.
    """
    pts = [complex(p) for p in points]
    _check_distinct(pts)
    dmin = min((abs(a - b) for a, b in itertools.combinations(pts, 2)), default=1.0)
    sep = 0.05 * dmin
    step = 0.25 * dmin
    chosen: list[IntegrationPath] = []
    for idx in sorted(range(len(pts)), key=lambda k: (pts[k].imag, pts[k].real)):
        z = pts[idx]
        for k in range(200):
            d = step * ((k + 1) // 2) * (1 if k % 2 else -1) if k else 0.0
            path = IntegrationPath.of(complex(z.real + d, 0.0), z)
            others = [pts[o] for o in range(len(pts)) if o != idx]
            ok = all(_seg_dist(path.start, path.end, w, w) >= sep for w in others)
            ok = ok and all(path_distance(path, q) >= sep for _, q in chosen)
            if ok:
                chosen.append((idx, path))
                break
        else:
            raise PathError(f"could not route a disjoint path to {z}")
    chosen.sort(key=lambda t: t[0])
    return [p for _, p in chosen]


# ---------------------------------------------------------------------------
# contour-integral moment formula on the half-plane


def _derangements(k: int):
    for perm in itertools.permutations(range(k)):
        if all(perm[i] != i for i in range(k)):
            inv = sum(1 for i in range(k) for j in range(i + 1, k) if perm[i] > perm[j])
            yield perm, -1 if inv % 2 else 1


def _signed_term(paths, n, signs):
    """Iterated integral of det[2/(pi (x_j - x_i))] for one sign vector.

    The determinant is expanded by the Leibniz formula over derangements
    (the diagonal vanishes); each permutation term factors into cycles and
    is contracted with einsum, so the k-fold integral costs O(n^3) per cycle.
    """
    k = len(paths)
    xs, ws = [], []
    for p, s in zip(paths, signs):
        z, w = p.nodes(n)
        if s < 0:
            z, w = np.conj(z), np.conj(w)
        xs.append(z)
        ws.append(w)
    c = 2 / math.pi
    kern = {}
    for i in range(k):
        for j in range(k):
            if i != j:
                kern[(i, j)] = c / (xs[j][None, :] - xs[i][:, None])
    total = 0j
    for perm, sgn in _derangements(k):
        # split into cycles and integrate each cycle independently
        seen = [False] * k
        val = 1 + 0j
        for st in range(k):
            if seen[st]:
                continue
            cyc = [st]
            seen[st] = True
            nxt = perm[st]
            while nxt != st:
                cyc.append(nxt)
                seen[nxt] = True
                nxt = perm[nxt]
            mat = np.eye(len(xs[cyc[0]]), dtype=complex)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                mat = (mat * ws[a][None, :]) @ kern[(a, b)]
            val *= np.trace(mat)
        total += sgn * val
    return total


def contour_moment(points: Sequence[complex], paths: Sequence[IntegrationPath] | None = None,
                   n: int | None = None) -> complex:
    """Signed sum over sign vectors of iterated integrals, at fixed node count.

    Normalised by (-1)^(k/2): read literally, the determinant convention of
    the contour formula gives the negative of the closed two-point form for
    k = 2; the explicit four-term expansion of the two-point case fixes the
    sign, and k = 4 is unaffected.
    """
    k = len(points)
    if k not in (2, 4):
        raise ArityError("contour quadrature is implemented for k = 2 and 4")
    paths = list(paths) if paths is not None else default_paths(points)
    check_paths(paths, points)
    n = n or BASE_NODES
    total = 0j
    for signs in itertools.product((1, -1), repeat=k):
        if signs[0] < 0:
            continue  # the flipped vector contributes the complex conjugate
        term = _signed_term(paths, n, signs)
        total += math.prod(signs) * 2 * term.real
    return (-1) ** (k // 2) * total


def quadrature_moment(points, paths=None) -> MomentResult:
    """Contour formula with node doubling until successive values agree to 1e-8."""
    paths = list(paths) if paths is not None else default_paths(points)
    n = BASE_NODES
    prev = contour_moment(points, paths, n).real
    while True:
        n *= 2
        cur = contour_moment(points, paths, n).real
        err = abs(cur - prev)
        if err < QUAD_TOL or n >= MAX_NODES:
            return MomentResult(cur, "quadrature", err)
        prev = cur


def two_point_quadrature(p: complex, q: complex, path1: IntegrationPath | None = None,
                         path2: IntegrationPath | None = None) -> MomentResult:
    """The four double integrals of the two-point expansion, each by Gauss-Legendre.

    -(4/pi^2) [I(z1, z2) - I(conj z1, z2) - I(z1, conj z2) + I(conj z1, conj z2)]
    with I = iint dz1 dz2 / (z2 - z1)^2 along the two paths.
    """
    p, q = complex(p), complex(q)
    if path1 is None or path2 is None:
        path1, path2 = default_paths([p, q])
    check_paths([path1, path2], [p, q])

    def estimate(n):
        z1, w1 = path1.nodes(n)
        z2, w2 = path2.nodes(n)
        total = 0j
        for s1, s2, coef in ((1, 1, -1), (-1, 1, 1), (1, -1, 1), (-1, -1, -1)):
            a, wa = (z1, w1) if s1 > 0 else (np.conj(z1), np.conj(w1))
            b, wb = (z2, w2) if s2 > 0 else (np.conj(z2), np.conj(w2))
            total += coef * (wa @ (1.0 / (b[None, :] - a[:, None]) ** 2) @ wb)
        return (4 / math.pi**2 * total).real

    n = BASE_NODES
    prev = estimate(n)
    while True:
        n *= 2
        cur = estimate(n)
        err = abs(cur - prev)
        if err < QUAD_TOL or n >= MAX_NODES:
            return MomentResult(float(cur), "quadrature", float(err))
        prev = cur
