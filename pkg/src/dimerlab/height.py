"""Height functions of domino tilings and their empirical statistics.

Sign convention: black cells have even coordinate sum. Walking along a
lattice edge with a black cell on the left, h goes up by 1 when no domino
crosses the edge and down by 3 when one does. Heights are pinned to 0 at the
region's reference vertex (a corner of the removed root cell).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numba
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .enumeration import Tiling
from .lattice import Polyomino, TemperleyanRegion, Vertex


class ConsistencyError(RuntimeError):
    """A tiling produced inconsistent height increments (sampler bug)."""


class ShapeError(ValueError):
    pass


class DegeneratePairError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class VertexGrid:
    """Bounding-box array layout of a region's vertices and edges.

    Arrays are indexed [x - x0, y - y0]. ``hedge[x, y]`` marks the lattice
    edge (x, y)-(x+1, y); ``vedge[x, y]`` marks (x, y)-(x, y+1). An edge
    belongs to the region when it borders at least one region cell.
    """

    region: TemperleyanRegion
    x0: int
    y0: int
    inside: np.ndarray
    hedge: np.ndarray
    vedge: np.ndarray
    reference: Vertex

    @classmethod
    def of(cls, region: TemperleyanRegion) -> "VertexGrid":
        cells = np.array(sorted(region.cells), dtype=np.int64).reshape(-1, 2)
        if len(cells) == 0:
            i, j = region.root
            ref = (i, j)
            z = np.zeros((2, 2), bool)
            return cls(region, i, j, z, np.zeros((2, 2), bool), np.zeros((2, 2), bool), ref)
        x0, y0 = cells.min(axis=0)
        x1, y1 = cells.max(axis=0)
        W, H = x1 - x0 + 2, y1 - y0 + 2
        cm = np.zeros((W + 1, H + 1), bool)
        cm[cells[:, 0] - x0 + 1, cells[:, 1] - y0 + 1] = True
        # padded cell mask: cm[x+1, y+1] is cell (x, y)
        inside = cm[1:, 1:] | cm[:-1, 1:] | cm[1:, :-1] | cm[:-1, :-1]
        hedge = cm[1:, 1:] | cm[1:, :-1]  # cell above or below the edge
        vedge = cm[1:, 1:] | cm[:-1, 1:]  # cell right or left
        return cls(region, int(x0), int(y0), inside, hedge, vedge, region.reference_vertex())

    @property
    def shape(self) -> tuple[int, int]:
        return self.inside.shape

    def index(self, v: Vertex) -> tuple[int, int]:
        return (v[0] - self.x0, v[1] - self.y0)

    @cached_property
    def parity(self) -> np.ndarray:
        xs = np.arange(self.shape[0])[:, None] + self.x0
        ys = np.arange(self.shape[1])[None, :] + self.y0
        return ((xs + ys) & 1).astype(np.int64)

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer vertex coordinates broadcast over the grid."""
        xs = np.arange(self.shape[0])[:, None] + self.x0
        ys = np.arange(self.shape[1])[None, :] + self.y0
        return np.broadcast_to(xs, self.shape), np.broadcast_to(ys, self.shape)

    @cached_property
    def traversal(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Breadth-first spanning tree from the reference vertex.

        Returns (child flat index, parent flat index, step code) in BFS order;
        step codes 0..3 = +x, -x, +y, -y from parent to child.
        """
        W, H = self.shape
        rx, ry = self.index(self.reference)
        seen = np.zeros((W, H), bool)
        seen[rx, ry] = True
        q = deque([(rx, ry)])
        child, parent, step = [], [], []
        while q:
            x, y = q.popleft()
            nbrs = (
                (x + 1, y, 0, x < W - 1 and self.hedge[x, y]),
                (x - 1, y, 1, x > 0 and self.hedge[x - 1, y]),
                (x, y + 1, 2, y < H - 1 and self.vedge[x, y]),
                (x, y - 1, 3, y > 0 and self.vedge[x, y - 1]),
            )
            for nx, ny, code, ok in nbrs:
                if ok and not seen[nx, ny]:
                    seen[nx, ny] = True
                    q.append((nx, ny))
                    child.append(nx * H + ny)
                    parent.append(x * H + y)
                    step.append(code)
        if seen.sum() != self.inside.sum():
            raise ShapeError("region vertex graph is not connected")
        return np.array(child, np.int64), np.array(parent, np.int64), np.array(step, np.int64)

    @cached_property
    def cell_index(self) -> tuple[np.ndarray, np.ndarray]:
        """Array indices of each region cell's lower-left vertex."""
        cells = np.array(sorted(self.region.cells), dtype=np.int64).reshape(-1, 2)
        return cells[:, 0] - self.x0, cells[:, 1] - self.y0

    @cached_property
    def boundary_heights(self) -> tuple[tuple[np.ndarray, np.ndarray], np.ndarray]:
        """Array indices of boundary vertices and their tiling-independent heights."""
        if not self.region.cells:
            return (np.zeros(0, np.int64), np.zeros(0, np.int64)), np.zeros(0, np.int64)
        path, _, hb = boundary_data(self.region)
        idx = np.array([self.index(v) for v in path], dtype=np.int64)
        return (idx[:, 0], idx[:, 1]), hb

    def continuum(self, v: Vertex) -> tuple[float, float]:
        eps = self.region.epsilon
        return (v[0] * eps, v[1] * eps)

    def nearest_vertex(self, point: Sequence[float]) -> Vertex:
        """Nearest region vertex to a continuum point; lexicographic tie-break."""
        eps = self.region.epsilon
        X, Y = self.coords
        d2 = (X * eps - point[0]) ** 2 + (Y * eps - point[1]) ** 2
        d2 = np.where(self.inside, d2, np.inf)
        best = d2.min()
        # round before comparing so exact ties (e.g. half-integer targets) break lexicographically
        cand = np.argwhere(np.isclose(d2, best, rtol=0, atol=1e-12 * max(eps * eps, 1e-300)))
        x, y = min(map(tuple, cand))
        v = (int(x) + self.x0, int(y) + self.y0)
        if math.sqrt(best) > 2 * eps + 1e-12:
            raise ValueError(f"no region vertex within 2*epsilon of {tuple(point)}")
        return v


@dataclass(frozen=True, eq=False)
class HeightField:
    grid: VertexGrid
    values: np.ndarray  # int64 over the bounding box; 0 outside

    def __getitem__(self, v: Vertex) -> int:
        x, y = self.grid.index(v)
        if not (0 <= x < self.grid.shape[0] and 0 <= y < self.grid.shape[1]) or not self.grid.inside[x, y]:
            raise KeyError(v)
        return int(self.values[x, y])

    def as_dict(self) -> dict[Vertex, int]:
        xs, ys = np.nonzero(self.grid.inside)
        return {(int(x) + self.grid.x0, int(y) + self.grid.y0): int(self.values[x, y]) for x, y in zip(xs, ys)}

    def to_csv(self) -> str:
        return height_csv(self.grid, self.values)


def crossing_masks(grid: VertexGrid, tiling: Tiling) -> tuple[np.ndarray, np.ndarray]:
    """Which region edges are crossed by a domino (same layout as hedge/vedge)."""
    W, H = grid.shape
    ch = np.zeros((W, H), bool)
    cv = np.zeros((W, H), bool)
    for i, j, o in tiling.dominoes:
        x, y = i - grid.x0, j - grid.y0
        if o == "H":
            cv[x + 1, y] = True  # edge (i+1, j)-(i+1, j+1)
        else:
            ch[x, y + 1] = True  # edge (i, j+1)-(i+1, j+1)
    return ch, cv


def masks_to_crossings(grid: VertexGrid, hmask: np.ndarray, vmask: np.ndarray, ox: int, oy: int):
    """Crossing masks from H/V domino masks whose [0, 0] is cell (ox, oy)."""
    W, H = grid.shape
    ch = np.zeros((W, H), bool)
    cv = np.zeros((W, H), bool)
    dx, dy = ox - grid.x0, oy - grid.y0
    m, n = hmask.shape
    cv[dx + 1:dx + 1 + m, dy:dy + n] |= hmask
    ch[dx:dx + m, dy + 1:dy + 1 + n] |= vmask
    return ch, cv


def increments(grid: VertexGrid, ch: np.ndarray, cv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Height change along +x and +y edges."""
    s = 1 - 2 * grid.parity  # +1 where x + y is even
    dh = s * (1 - 4 * ch.astype(np.int64))
    dv = -s * (1 - 4 * cv.astype(np.int64))
    return dh, dv


@numba.njit(cache=True)
def _accumulate(H, child, parent, step, dh, dv, out):
    for k in range(child.shape[0]):
        c = child[k]
        p = parent[k]
        code = step[k]
        if code == 0:
            out[c] = out[p] + dh[p]
        elif code == 1:
            out[c] = out[p] - dh[c]
        elif code == 2:
            out[c] = out[p] + dv[p]
        else:
            out[c] = out[p] - dv[c]


def heights_from_crossings(grid: VertexGrid, ch: np.ndarray, cv: np.ndarray, check: bool = True) -> np.ndarray:
    dh, dv = increments(grid, ch, cv)
    W, H = grid.shape
    out = np.zeros(W * H, np.int64)
    child, parent, step = grid.traversal
    _accumulate(H, child, parent, step, dh.ravel(), dv.ravel(), out)
    h = out.reshape(W, H)
    if check:
        _check_consistent(grid, h, dh, dv)
    return h


def _check_consistent(grid, h, dh, dv):
    okh = (h[1:, :] - h[:-1, :] == dh[:-1, :]) | ~grid.hedge[:-1, :]
    okv = (h[:, 1:] - h[:, :-1] == dv[:, :-1]) | ~grid.vedge[:, :-1]
    if not (okh.all() and okv.all()):
        raise ConsistencyError("height increments do not close around some face")


def face_rule_violations(grid: VertexGrid, h: np.ndarray) -> int:
    """Region cells whose four corner heights are not four consecutive integers."""
    x, y = grid.cell_index
    if len(x) == 0:
        return 0
    c = np.stack([h[x, y], h[x + 1, y], h[x + 1, y + 1], h[x, y + 1]], axis=1)
    c.sort(axis=1)
    return int((c - c[:, :1] != np.arange(4)).any(axis=1).sum())


def boundary_rule_violations(grid: VertexGrid, h: np.ndarray) -> int:
    """Boundary vertices whose height differs from the tiling-independent boundary value."""
    (x, y), hb = grid.boundary_heights
    return int((h[x, y] != hb).sum())


def height_function(region: TemperleyanRegion, tiling: Tiling, grid: VertexGrid | None = None) -> HeightField:
    grid = grid or VertexGrid.of(region)
    if not tiling.is_valid_on(region.cells):
        raise ConsistencyError("tiling does not partition the region")
    ch, cv = crossing_masks(grid, tiling)
    return HeightField(grid, heights_from_crossings(grid, ch, cv))


def height_function_dfs(region: TemperleyanRegion, tiling: Tiling) -> dict[Vertex, int]:
    """Reference implementation: depth-first walk with per-edge rule, pure Python."""
    cells = region.cells
    crossed = set()
    for i, j, o in tiling.dominoes:
        if o == "H":
            crossed.add(((i + 1, j), (i + 1, j + 1)))
        else:
            crossed.add(((i, j + 1), (i + 1, j + 1)))

    def step(u, v):
        # edge u -> v; cell on the left of the direction of travel
        dx, dy = v[0] - u[0], v[1] - u[1]
        if dx == 1:
            left, right = (u[0], u[1]), (u[0], u[1] - 1)
        elif dx == -1:
            left, right = (v[0], v[1] - 1), (v[0], v[1])
        elif dy == 1:
            left, right = (u[0] - 1, u[1]), (u[0], u[1])
        else:
            left, right = (v[0], v[1]), (v[0] - 1, v[1])
        if left not in cells and right not in cells:
            return None
        present = left if left in cells else right
        black_left = ((present[0] + present[1]) % 2 == 0) == (present == left)
        key = (min(u, v), max(u, v))
        base = 1 if black_left else -1
        return -3 * base if key in crossed else base

    ref = region.reference_vertex()
    h = {ref: 0}
    stack = [ref]
    while stack:
        u = stack.pop()
        for d in ((0, 1), (1, 0), (0, -1), (-1, 0)):
            v = (u[0] + d[0], u[1] + d[1])
            inc = step(u, v)
            if inc is None:
                continue
            if v in h:
                if h[v] != h[u] + inc:
                    raise ConsistencyError(f"inconsistent heights at {u}->{v}")
                continue
            h[v] = h[u] + inc
            stack.append(v)
    return h


# ---------------------------------------------------------------------------
# centering and statistics


@dataclass(frozen=True, eq=False)
class MeanField:
    """Exact vertex-wise mean: total / count."""

    grid: VertexGrid
    total: np.ndarray
    count: int

    def fraction(self, v: Vertex) -> Fraction:
        x, y = self.grid.index(v)
        return Fraction(int(self.total[x, y]), self.count)

    @property
    def values(self) -> np.ndarray:
        return self.total / self.count


@dataclass(frozen=True, eq=False)
class CenteredField:
    grid: VertexGrid
    values: np.ndarray
    count: int

    def __getitem__(self, v) -> float:
        return float(self.values[self.grid.index(v)])


def center(samples: Sequence[HeightField]) -> tuple[list[CenteredField], MeanField]:
    if len(samples) < 2:
        raise ValueError("need at least two samples to center")
    grid = samples[0].grid
    for s in samples[1:]:
        if s.grid.region.cells != grid.region.cells or s.values.shape != samples[0].values.shape:
            raise ShapeError("samples come from different regions")
    total = np.zeros(grid.shape, dtype=object if len(samples) > 2**20 else np.int64)
    for s in samples:
        total = total + s.values
    mean = MeanField(grid, total, len(samples))
    n = len(samples)
    # h - total/n = (n*h - total)/n keeps the subtraction exact before the final division
    out = [CenteredField(grid, np.where(grid.inside, (n * s.values - total) / n, 0.0), n) for s in samples]
    return out, mean


def covariance_with_error(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Unbiased sample covariance and its jackknife standard error."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = len(x)
    if n < 3:
        raise ValueError("need at least three samples")
    sx, sy, sxy = x.sum(), y.sum(), (x * y).sum()
    cov = (sxy - sx * sy / n) / (n - 1)
    # leave-one-out covariances in closed form
    sx_i, sy_i, sxy_i = sx - x, sy - y, sxy - x * y
    loo = (sxy_i - sx_i * sy_i / (n - 1)) / (n - 2)
    se = math.sqrt((n - 1) / n * ((loo - loo.mean()) ** 2).sum())
    return float(cov), se


def covariance_empirical(samples: Sequence[HeightField], p, q) -> tuple[float, float]:
    grid = samples[0].grid
    vp, vq = grid.nearest_vertex(p), grid.nearest_vertex(q)
    if vp == vq:
        raise DegeneratePairError(f"points {p} and {q} map to the same vertex {vp}")
    xp = np.array([s[vp] for s in samples])
    xq = np.array([s[vq] for s in samples])
    return covariance_with_error(xp, xq)


def phi_weights(grid: VertexGrid, phi: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """eps^2 * phi(x) on region vertices, zero elsewhere."""
    eps = grid.region.epsilon
    X, Y = grid.coords
    w = np.asarray(phi(X * eps, Y * eps), dtype=float) * eps * eps
    return np.where(grid.inside, np.broadcast_to(w, grid.shape), 0.0)


def smoothed_observable(sample, phi: Callable) -> float:
    """eps^2 * sum over region vertices of phi(x) * h0(x) for a centered sample."""
    return float((phi_weights(sample.grid, phi) * sample.values).sum())


# ---------------------------------------------------------------------------
# exact moments from the inverse Kasteleyn matrix


def _path_terms(grid: VertexGrid, v: Vertex):
    """h(v) = const + sum coef * [domino (black, white) present] along the BFS tree path."""
    child, parent, step = grid.traversal
    H = grid.shape[1]
    up = {int(c): (int(p), int(s)) for c, p, s in zip(child, parent, step)}
    cells = grid.region.cells
    x, y = grid.index(v)
    node = x * H + y
    const = 0
    terms = []
    while node in up:
        p, code = up[node]
        # the +x / +y edge starts at the lower vertex; walking it backwards flips the sign
        lower = p if code in (0, 2) else node
        sgn = 1 if code in (0, 2) else -1
        lx, ly = divmod(lower, H)
        gx, gy = lx + grid.x0, ly + grid.y0
        s_par = 1 if (gx + gy) % 2 == 0 else -1
        if code in (0, 1):
            a, b = (gx, gy - 1), (gx, gy)  # horizontal edge, crossed by a vertical domino
            s_edge = s_par
        else:
            a, b = (gx - 1, gy), (gx, gy)  # vertical edge, crossed by a horizontal domino
            s_edge = -s_par
        const += sgn * s_edge
        if a in cells and b in cells:
            blk, wht = (a, b) if (a[0] + a[1]) % 2 == 0 else (b, a)
            terms.append((blk, wht, -4 * sgn * s_edge))
        node = p
    return const, terms


def exact_height_moments(region: TemperleyanRegion, u: Vertex, v: Vertex) -> tuple[float, float, float]:
    """(E h(u), E h(v), Cov(h(u), h(v))) for the uniform tiling measure, exactly up to rounding.

    Single-edge probabilities are K(b,w) K^{-1}(w,b) and two-edge covariances
    -K(b1,w1) K(b2,w2) K^{-1}(w1,b2) K^{-1}(w2,b1); only the columns of K^{-1}
    indexed by black cells on the two height paths are solved for.
    """
    from scipy.sparse.linalg import splu

    from .enumeration import kasteleyn_matrix

    grid = VertexGrid.of(region)
    K = kasteleyn_matrix(region.cells)
    bi = {c: k for k, c in enumerate(K.black)}
    wi = {c: k for k, c in enumerate(K.white)}
    n = len(K.black)
    r, c = zip(*K.entries) if K.entries else ((), ())
    A = sp.csc_matrix((list(K.entries.values()), (r, c)), shape=(n, n), dtype=float)
    cu, tu = _path_terms(grid, u)
    cv, tv = _path_terms(grid, v)
    blacks = sorted({bi[t[0]] for t in tu + tv})
    col = {b: k for k, b in enumerate(blacks)}
    if blacks:
        rhs = np.zeros((n, len(blacks)))
        rhs[blacks, np.arange(len(blacks))] = 1.0
        X = splu(A).solve(rhs)  # X[:, k] = K^{-1}[:, blacks[k]]
    else:
        X = np.zeros((n, 0))

    def arrays(terms):
        b = np.array([bi[t[0]] for t in terms], np.int64)
        w = np.array([wi[t[1]] for t in terms], np.int64)
        k = np.array([K.entries[(bb, ww)] for bb, ww in zip(b, w)], float)
        coef = np.array([t[2] for t in terms], float)
        cols = np.array([col[bb] for bb in b], np.int64)
        return b, w, k, coef, cols

    bu, wu, ku, au, colu = arrays(tu)
    bv, wv, kv, av, colv = arrays(tv)
    pu = ku * X[wu, colu] if len(tu) else np.zeros(0)
    pv = kv * X[wv, colv] if len(tv) else np.zeros(0)
    mean_u = cu + float(au @ pu)
    mean_v = cv + float(av @ pv)
    if not (len(tu) and len(tv)):
        return mean_u, mean_v, 0.0
    # cov[e, f] = -K_e K_f Kinv(w_e, b_f) Kinv(w_f, b_e)
    cov = -(ku[:, None] * kv[None, :]) * X[wu[:, None], colv[None, :]] * X[wv[None, :], colu[:, None]]
    same = (bu[:, None] == bv[None, :]) & (wu[:, None] == wv[None, :])
    cov = np.where(same, pu[:, None] * (1 - pu[:, None]), cov)
    return mean_u, mean_v, float(au @ cov @ av)


# ---------------------------------------------------------------------------
# mean height prediction


def boundary_data(region: TemperleyanRegion) -> tuple[list[Vertex], np.ndarray, np.ndarray]:
    """Boundary walk from the reference vertex with turning and lattice heights.

    Returns (vertices in counterclockwise order, accumulated turning in right
    angles, deterministic lattice height). Turning counts +1 at convex and -1
    at concave corners, starting at 0 at the reference vertex.
    """
    poly = Polyomino.from_cells(region.cells, region.epsilon)
    path = list(poly.boundary)
    ref = region.reference_vertex()
    if ref not in path:
        raise ShapeError("reference vertex is not on the boundary")
    k0 = path.index(ref)
    path = path[k0:] + path[:k0]
    kinds = dict(poly.corners)
    cells = region.cells
    turning = np.zeros(len(path))
    heights = np.zeros(len(path), np.int64)
    t = 0
    h = 0
    for k in range(1, len(path)):
        u, v = path[k - 1], path[k]
        if u in kinds and k - 1 > 0:
            t += 1 if kinds[u] == "convex" else -1
        dx, dy = v[0] - u[0], v[1] - u[1]
        # region is on the left of a counterclockwise walk
        if dx == 1:
            left = (u[0], u[1])
        elif dx == -1:
            left = (v[0], v[1] - 1)
        elif dy == 1:
            left = (u[0] - 1, u[1])
        else:
            left = (v[0], v[1])
        assert left in cells
        h += 1 if (left[0] + left[1]) % 2 == 0 else -1
        turning[k] = t
        heights[k] = h
    return path, turning, heights


def predict_mean_height(region: TemperleyanRegion) -> np.ndarray:
    """Discrete harmonic extension of (2/pi) x boundary turning.

    Boundary data is the accumulated turning (in right angles) plus a
    constant chosen so it matches the deterministic lattice boundary heights
    on average; interior values solve the 5-point Laplace equation. Returned
    on the region's VertexGrid layout (NaN outside).
    """
    grid = VertexGrid.of(region)
    path, turning, hb = boundary_data(region)
    # vertices next to the root notch sit on the jump of the data; skip them
    keep = np.ones(len(path), bool)
    keep[:3] = False
    keep[-2:] = False
    offset = float(np.mean((hb - turning)[keep] if keep.any() else hb - turning))
    W, H = grid.shape
    fixed = np.full((W, H), np.nan)
    for v, t in zip(path, turning):
        fixed[grid.index(v)] = t + offset
    inside = grid.inside
    unknown = inside & np.isnan(fixed)
    idx = -np.ones((W, H), np.int64)
    idx[unknown] = np.arange(unknown.sum())
    n = int(unknown.sum())
    rows, cols, vals = [], [], []
    rhs = np.zeros(n)
    xs, ys = np.nonzero(unknown)
    for x, y in zip(xs, ys):
        r = idx[x, y]
        rows.append(r)
        cols.append(r)
        vals.append(4.0)
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if idx[nx, ny] >= 0:
                rows.append(r)
                cols.append(idx[nx, ny])
                vals.append(-1.0)
            else:
                rhs[r] += fixed[nx, ny]
    out = fixed.copy()
    if n:
        A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        out[unknown] = spla.spsolve(A, rhs)[idx[unknown]]
    return np.where(inside, out, np.nan)


# ---------------------------------------------------------------------------
# CSV


def height_csv(grid: VertexGrid, values: np.ndarray) -> str:
    """Rows run from y = y0 upward, columns from x = x0; '*' marks non-region vertices."""
    W, H = grid.shape
    lines = [f"# origin x0={grid.x0} y0={grid.y0}; row k is y=y0+k, column c is x=x0+c"]
    for y in range(H):
        row = []
        for x in range(W):
            if grid.inside[x, y]:
                v = values[x, y]
                row.append(str(int(v)) if float(v).is_integer() else repr(float(v)))
            else:
                row.append("*")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def parse_height_csv(text: str) -> tuple[int, int, list[list[int | None]]]:
    lines = text.strip().splitlines()
    head = lines[0]
    x0 = int(head.split("x0=")[1].split()[0])
    y0 = int(head.split("y0=")[1].split(";")[0])
    rows = [[None if t == "*" else int(t) for t in line.split(",")] for line in lines[1:]]
    return x0, y0, rows
