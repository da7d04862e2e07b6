"""Polyominoes on the square lattice and Temperleyan regions.

Cells are integer pairs ``(i, j)`` naming the unit square whose lower-left
corner is ``(i, j)``. The lattice spacing ``epsilon`` is carried alongside and
only used when mapping to continuum coordinates ``(i * epsilon, j * epsilon)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

Cell = tuple[int, int]
Vertex = tuple[int, int]

# counterclockwise edges of the unit cell as vertex offsets
_CELL_EDGES = (((0, 0), (1, 0)), ((1, 0), (1, 1)), ((1, 1), (0, 1)), ((0, 1), (0, 0)))


class LatticeError(ValueError):
    """Base class for construction failures."""


class ParityError(LatticeError):
    pass


class PlacementError(LatticeError):
    pass


class ValidationError(LatticeError):
    pass


class ResolutionError(LatticeError):
    pass


def is_even_cell(cell: Cell) -> bool:
    return cell[0] % 2 == 0 and cell[1] % 2 == 0


def is_black(cell: Cell) -> bool:
    """Checkerboard colour: black cells have even coordinate sum."""
    return (cell[0] + cell[1]) % 2 == 0


def _boundary_cycle(cells: frozenset[Cell]) -> list[Vertex]:
    """Trace the counterclockwise boundary of a cell set.

    Returns the closed vertex path (first vertex not repeated). Raises
    ValidationError when the boundary is not a single simple closed curve.
    """
    if not cells:
        return []
    out: dict[Vertex, Vertex] = {}
    directed = set()
    for (i, j) in cells:
        for (a, b) in _CELL_EDGES:
            directed.add(((i + a[0], j + a[1]), (i + b[0], j + b[1])))
    for u, v in directed:
        if (v, u) in directed:
            continue
        if u in out:
            raise ValidationError(f"boundary touches itself at vertex {u}")
        out[u] = v
    start = min(out)
    path = [start]
    v = out[start]
    while v != start:
        path.append(v)
        v = out[v]
        if len(path) > len(out):
            raise ValidationError("boundary walk did not close")
    if len(path) != len(out):
        raise ValidationError("region has holes or several components")
    return path


def _corners(path: list[Vertex]) -> list[tuple[Vertex, str]]:
    corners = []
    n = len(path)
    for k in range(n):
        p, v, q = path[k - 1], path[k], path[(k + 1) % n]
        din = (v[0] - p[0], v[1] - p[1])
        dout = (q[0] - v[0], q[1] - v[1])
        cross = din[0] * dout[1] - din[1] * dout[0]
        if cross > 0:
            corners.append((v, "convex"))
        elif cross < 0:
            corners.append((v, "concave"))
    return corners


def corner_square(vertex: Vertex, kind: str, path: list[Vertex]) -> Cell:
    """The cell at a corner that contains the interior angle bisector."""
    k = path.index(vertex)
    p, q = path[k - 1], path[(k + 1) % len(path)]
    din = np.sign([vertex[0] - p[0], vertex[1] - p[1]])
    dout = np.sign([q[0] - vertex[0], q[1] - vertex[1]])
    quad = dout - din if kind == "convex" else din - dout
    return (vertex[0] + (int(quad[0]) - 1) // 2, vertex[1] + (int(quad[1]) - 1) // 2)


@dataclass(frozen=True)
class Polyomino:
    cells: frozenset[Cell]
    epsilon: float = 1.0
    boundary: tuple[Vertex, ...] = field(default=(), compare=False)
    corners: tuple[tuple[Vertex, str], ...] = field(default=(), compare=False)

    @classmethod
    def from_cells(cls, cells: Iterable[Cell], epsilon: float = 1.0) -> "Polyomino":
        cells = frozenset((int(i), int(j)) for i, j in cells)
        if not cells:
            raise ValidationError("a polyomino needs at least one cell")
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        path = _boundary_cycle(cells)
        # a simple closed boundary alone does not exclude disconnected pieces
        if len(_components(cells)) != 1:
            raise ValidationError("cells are not connected")
        return cls(cells, float(epsilon), tuple(path), tuple(_corners(path)))

    def __len__(self) -> int:
        return len(self.cells)

    def corner_squares(self) -> list[Cell]:
        path = list(self.boundary)
        return [corner_square(v, kind, path) for v, kind in self.corners]

    def boundary_edges(self) -> list[tuple[Vertex, Vertex, str, str, int]]:
        """Straight boundary sides as (start, end, start kind, end kind, length)."""
        cs = list(self.corners)
        out = []
        for k in range(len(cs)):
            (a, ka), (b, kb) = cs[k], cs[(k + 1) % len(cs)]
            out.append((a, b, ka, kb, abs(b[0] - a[0]) + abs(b[1] - a[1])))
        return out

    def is_even(self) -> bool:
        return all(is_even_cell(c) for c in self.corner_squares())

    def boundary_adjacent_cells(self) -> set[Cell]:
        out = set()
        for (i, j) in self.cells:
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                if (i + di, j + dj) not in self.cells:
                    out.add((i, j))
                    break
        return out


def _components(cells: Iterable[Cell]) -> list[set[Cell]]:
    todo = set(cells)
    comps = []
    while todo:
        seed = todo.pop()
        comp = {seed}
        stack = [seed]
        while stack:
            i, j = stack.pop()
            for nb in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
                if nb in todo:
                    todo.remove(nb)
                    comp.add(nb)
                    stack.append(nb)
        comps.append(comp)
    return comps


@dataclass(frozen=True)
class TemperleyanRegion:
    parent: Polyomino
    root: Cell
    cells: frozenset[Cell]

    @property
    def epsilon(self) -> float:
        return self.parent.epsilon

    @property
    def vertex_set(self) -> frozenset[Vertex]:
        return vertices_of(self.cells)

    def __len__(self) -> int:
        return len(self.cells)

    def reference_vertex(self) -> Vertex:
        """Root-cell corner pinned to height 0 (lexicographically first present)."""
        i, j = self.root
        verts = self.vertex_set
        for v in sorted([(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]):
            if v in verts:
                return v
        raise ValidationError("root cell shares no vertex with the region")

    def to_json(self) -> str:
        return region_to_json(self)


def vertices_of(cells: Iterable[Cell]) -> frozenset[Vertex]:
    return frozenset((i + a, j + b) for (i, j) in cells for a in (0, 1) for b in (0, 1))


def build_even_rectangle(m: int, n: int, epsilon: float = 1.0) -> Polyomino:
    """m x n block of cells with lower-left corner at the origin; m, n odd."""
    if m < 1 or n < 1:
        raise ValueError("sides must be positive")
    if m % 2 == 0 or n % 2 == 0:
        raise ParityError(f"even polyomino rectangle needs odd sides, got {m}x{n}")
    return Polyomino.from_cells(((i, j) for i in range(m) for j in range(n)), epsilon)


def make_temperleyan(parent: Polyomino, root: Cell) -> TemperleyanRegion:
    if not parent.is_even():
        raise ValidationError("parent polyomino is not even (a corner square is odd)")
    root = (int(root[0]), int(root[1]))
    if root not in parent.cells:
        raise PlacementError(f"root {root} is not a cell of the parent")
    if not is_even_cell(root):
        raise ParityError(f"root {root} does not have the parity of the corner squares")
    if root not in parent.boundary_adjacent_cells():
        raise PlacementError(f"root {root} is not adjacent to the boundary")
    cells = parent.cells - {root}
    return TemperleyanRegion(parent, root, cells)


def validate_temperleyan(region) -> dict[str, bool]:
    """Structural checks; accepts a TemperleyanRegion or a bare Polyomino."""
    if isinstance(region, Polyomino):
        parent, root = region, None
        cells = region.cells
    else:
        parent, root, cells = region.parent, region.root, region.cells
    report = {}
    # connectivity is a property of the parent: a root in a one-cell-wide strip may split the region
    report["connectivity"] = len(_components(parent.cells)) == 1
    report["corner_parity"] = parent.is_even()
    report["edge_parity"] = all(
        (length % 2 == 1) == (ka == kb) for _, _, ka, kb, length in parent.boundary_edges()
    )
    report["root_parity"] = root is not None and is_even_cell(root)
    report["root_on_boundary"] = root is not None and root in parent.boundary_adjacent_cells()
    black = sum(1 for c in cells if is_black(c))
    report["balanced_coloring"] = 2 * black == len(cells)
    return report


# ---------------------------------------------------------------------------
# continuum domains


@dataclass(frozen=True)
class DomainSpec:
    """Continuum domain with a marked boundary point.

    kind is "halfplane", "disk" or "rectangle". Rectangles are [0, a] x [0, b];
    disks are given by center and radius. ``basepoint`` is a complex number,
    or None for the half-plane's point at infinity.
    """

    kind: str
    a: float = 1.0
    b: float = 1.0
    center: complex = 0j
    radius: float = 1.0
    basepoint: complex | None = None

    def __post_init__(self):
        if self.kind not in ("halfplane", "disk", "rectangle"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "rectangle" and (self.a <= 0 or self.b <= 0):
            raise ValueError("rectangle sides must be positive")
        if self.kind == "disk" and self.radius <= 0:
            raise ValueError("disk radius must be positive")
        bp = self.resolved_basepoint
        if bp is not None and abs(self.boundary_distance(bp)) > 1e-9:
            raise ValueError(f"basepoint {bp} is not on the boundary")

    @classmethod
    def halfplane(cls) -> "DomainSpec":
        return cls("halfplane")

    @classmethod
    def rectangle(cls, a: float = 1.0, b: float = 1.0, basepoint: complex | None = None):
        return cls("rectangle", a=a, b=b, basepoint=basepoint)

    @classmethod
    def disk(cls, radius: float = 1.0, center: complex = 0j, basepoint: complex | None = None):
        return cls("disk", center=complex(center), radius=radius, basepoint=basepoint)

    @property
    def resolved_basepoint(self) -> complex | None:
        if self.basepoint is not None:
            return complex(self.basepoint)
        if self.kind == "disk":
            return self.center - self.radius
        if self.kind == "rectangle":
            return 0j
        return None

    def contains(self, z: complex) -> bool:
        z = complex(z)
        if self.kind == "halfplane":
            return z.imag > 0
        if self.kind == "disk":
            return abs(z - self.center) < self.radius
        return 0 < z.real < self.a and 0 < z.imag < self.b

    def boundary_distance(self, z: complex) -> float:
        """Signed distance to the boundary, positive inside."""
        z = complex(z)
        if self.kind == "halfplane":
            return z.imag
        if self.kind == "disk":
            return self.radius - abs(z - self.center)
        dx = min(z.real, self.a - z.real)
        dy = min(z.imag, self.b - z.imag)
        if dx >= 0 and dy >= 0:
            return min(dx, dy)
        return -math.hypot(min(dx, 0.0), min(dy, 0.0))


def _segment_point_distance(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Distance from each point p[k] to the nearest of the segments a[s]->b[s]."""
    d = b - a
    ap = p[:, None, :] - a[None, :, :]
    t = np.clip((ap * d[None]).sum(-1) / np.maximum((d * d).sum(-1), 1e-300)[None], 0, 1)
    closest = a[None] + t[..., None] * d[None]
    return np.sqrt(((p[:, None, :] - closest) ** 2).sum(-1)).min(axis=1)


def boundary_polygon(poly: Polyomino) -> np.ndarray:
    """Boundary vertices in continuum coordinates, shape (k, 2)."""
    return np.array(poly.boundary, dtype=float) * poly.epsilon


def hausdorff_to_domain(poly: Polyomino, spec: DomainSpec, samples: int = 4000) -> float:
    """Hausdorff distance between the polyomino boundary and the domain boundary."""
    verts = np.array([v for v, _ in poly.corners], dtype=float) * poly.epsilon
    a = verts
    b = np.roll(verts, -1, axis=0)
    t = np.linspace(0, 1, 9)[:-1]
    edge_pts = (a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]).reshape(-1, 2)
    s = np.linspace(0, 1, samples, endpoint=False)
    if spec.kind == "disk":
        c = np.array([spec.center.real, spec.center.imag])
        d1 = np.abs(np.linalg.norm(edge_pts - c, axis=1) - spec.radius).max()
        ang = 2 * np.pi * s
        circ = c + spec.radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    elif spec.kind == "rectangle":
        d1 = max(abs(spec.boundary_distance(complex(x, y))) for x, y in edge_pts)
        per = 2 * (spec.a + spec.b)
        u = s * per
        circ = np.array([_rect_perimeter_point(spec.a, spec.b, ui) for ui in u])
    else:
        raise ValueError("Hausdorff distance needs a bounded domain")
    d2 = max(_segment_point_distance(a, b, chunk).max() for chunk in np.array_split(circ, 8))
    return float(max(d1, d2))


def _rect_perimeter_point(a: float, b: float, u: float) -> tuple[float, float]:
    if u < a:
        return (u, 0.0)
    u -= a
    if u < b:
        return (a, u)
    u -= b
    if u < a:
        return (a - u, b)
    return (0.0, b - (u - a))


def _nearest_odd(x: float) -> int:
    k = int(math.floor(x))
    if k % 2 == 0:
        # both k-1 and k+1 are odd; choose the closer, smaller on a tie
        return k + 1 if (k + 1 - x) < (x - (k - 1)) else max(k - 1, 1)
    return k


def _coarse_union(squares: Iterable[tuple[int, int]]) -> set[Cell]:
    """Union of 3x3 cell blocks at (2a, 2b): the even polyomino over coarse squares."""
    cells = set()
    for a, b in squares:
        for di in range(3):
            for dj in range(3):
                cells.add((2 * a + di, 2 * b + dj))
    return cells


def _choose_root(poly: Polyomino, basepoint: complex) -> Cell:
    eps = poly.epsilon
    candidates = [c for c in poly.boundary_adjacent_cells() if is_even_cell(c)]
    if not candidates:
        raise ResolutionError("no boundary cell with corner parity")

    def dist(c):
        x, y = (c[0] + 0.5) * eps, (c[1] + 0.5) * eps
        return math.hypot(x - basepoint.real, y - basepoint.imag)

    return min(candidates, key=lambda c: (round(dist(c), 12), c))


def approximate_domain(spec: DomainSpec, epsilon: float) -> TemperleyanRegion:
    """Temperleyan staircase approximation of a rectangle or disk at spacing epsilon."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if spec.kind == "rectangle":
        m, n = _nearest_odd(spec.a / epsilon), _nearest_odd(spec.b / epsilon)
        if m < 3 or n < 3:
            raise ResolutionError(f"epsilon={epsilon} too coarse for a {spec.a}x{spec.b} rectangle")
        parent = build_even_rectangle(m, n, epsilon)
    elif spec.kind == "disk":
        c, r = spec.center, spec.radius
        lo_a = math.floor((c.real - r) / (2 * epsilon)) - 2
        hi_a = math.ceil((c.real + r) / (2 * epsilon)) + 2
        lo_b = math.floor((c.imag - r) / (2 * epsilon)) - 2
        hi_b = math.ceil((c.imag + r) / (2 * epsilon)) + 2
        # shrink by half a cell so outward staircase corners and inward notches balance
        squares = [
            (a, b)
            for a in range(lo_a, hi_a + 1)
            for b in range(lo_b, hi_b + 1)
            if abs(complex((2 * a + 1.5) * epsilon, (2 * b + 1.5) * epsilon) - c) < r - 0.5 * epsilon
        ]
        if not squares:
            raise ResolutionError(f"epsilon={epsilon} too coarse for radius {r}")
        comps = _components(squares)
        squares = max(comps, key=len)
        try:
            parent = Polyomino.from_cells(_coarse_union(squares), epsilon)
        except ValidationError as exc:
            raise ResolutionError(f"staircase boundary not simple at epsilon={epsilon}: {exc}")
        if not parent.is_even():
            raise ResolutionError(f"staircase repair failed parity at epsilon={epsilon}")
    else:
        raise ValueError("only rectangle and disk domains can be discretized")
    bp = spec.resolved_basepoint
    root = _choose_root(parent, bp)
    rx, ry = (root[0] + 0.5) * epsilon, (root[1] + 0.5) * epsilon
    if math.hypot(rx - bp.real, ry - bp.imag) > 2 * epsilon:
        raise ResolutionError(f"no legal root within 2*epsilon of basepoint {bp}")
    region = make_temperleyan(parent, root)
    if hausdorff_to_domain(parent, spec) > 2 * epsilon + 1e-12:
        raise ResolutionError(f"boundary not within 2*epsilon of the domain at epsilon={epsilon}")
    return region


# ---------------------------------------------------------------------------
# JSON format: {"epsilon": e, "rootCell": [i, j], "cells": [[i, j], ...]}


def region_to_json(region: TemperleyanRegion) -> str:
    doc = {
        "epsilon": region.epsilon,
        "rootCell": [region.root[0], region.root[1]],
        "cells": [[i, j] for i, j in sorted(region.cells)],
    }
    return json.dumps(doc)


def region_from_json(text: str) -> TemperleyanRegion:
    try:
        doc = json.loads(text)
        eps = float(doc["epsilon"])
        root = (int(doc["rootCell"][0]), int(doc["rootCell"][1]))
        cells = {(int(c[0]), int(c[1])) for c in doc["cells"]}
    except (KeyError, TypeError, IndexError, ValueError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed region JSON: {exc}") from exc
    if root in cells:
        raise ValidationError("root cell must not be listed among the region cells")
    parent = Polyomino.from_cells(cells | {root}, eps)
    return make_temperleyan(parent, root)
