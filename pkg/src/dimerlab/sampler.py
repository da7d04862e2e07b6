"""Exact uniform samplers for domino tilings.

Two independent routes:

* ``sample_tiling_kasteleyn`` works on any tileable region. It walks cells in
  lexicographic order and places a domino at the first free cell with its
  conditional probability ``K[b, w] * Kinv[w, b]``, then deletes that row and
  column from the inverse by a rank-one update.
* ``sample_tiling_wilson`` handles odd x odd rectangles with a corner removed:
  a uniform spanning tree of the grid of even cells (Wilson's algorithm) is
  pushed through Temperley's bijection.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .enumeration import ImbalanceError, Tiling, kasteleyn_matrix
from .lattice import Cell, TemperleyanRegion, is_black
from .rng import make_generator

REFRESH_EVERY = 256
PIVOT_FLOOR = 1e-8


class NoTilingError(ValueError):
    pass


class UnsupportedRegionError(ValueError):
    pass


class TreeStructureError(ValueError):
    pass


def _cells(region) -> frozenset[Cell]:
    return region.cells if hasattr(region, "cells") else frozenset(region)


# ---------------------------------------------------------------------------
# Kasteleyn sequential sampler


@dataclass
class SamplerState:
    cells: frozenset[Cell]
    K: np.ndarray
    Kinv: np.ndarray
    black_index: dict[Cell, int]
    white_index: dict[Cell, int]
    active_black: np.ndarray
    active_white: np.ndarray
    rng: np.random.Generator
    placed: list
    steps_since_refresh: int = 0

    def refresh(self):
        ab = np.flatnonzero(self.active_black)
        aw = np.flatnonzero(self.active_white)
        self.Kinv[:] = 0.0
        if len(ab):
            self.Kinv[np.ix_(aw, ab)] = np.linalg.inv(self.K[np.ix_(ab, aw)])
        self.steps_since_refresh = 0

    def edge_probability(self, a: Cell, b: Cell) -> float:
        if not is_black(a):
            a, b = b, a
        r, c = self.black_index[a], self.white_index[b]
        return float(self.K[r, c] * self.Kinv[c, r])

    def remove(self, a: Cell, b: Cell):
        if not is_black(a):
            a, b = b, a
        r, c = self.black_index[a], self.white_index[b]
        piv = self.Kinv[c, r]
        self.active_black[r] = False
        self.active_white[c] = False
        self.steps_since_refresh += 1
        if abs(piv) < PIVOT_FLOOR or self.steps_since_refresh >= REFRESH_EVERY:
            self.refresh()
            return
        col = self.Kinv[:, r].copy()
        row = self.Kinv[c, :].copy()
        self.Kinv -= np.outer(col, row) / piv
        self.Kinv[c, :] = 0.0
        self.Kinv[:, r] = 0.0


def _init_state(region, rng) -> SamplerState:
    cells = _cells(region)
    try:
        K = kasteleyn_matrix(cells)
    except ImbalanceError as exc:
        raise NoTilingError(str(exc)) from exc
    Kd = K.dense()
    n = Kd.shape[0]
    if n:
        sign, logdet = np.linalg.slogdet(Kd)
        # |det| is a nonnegative integer, so anything below 1/2 is zero
        if sign == 0 or logdet < np.log(0.5):
            raise NoTilingError("region has no domino tiling")
    st = SamplerState(
        cells=cells,
        K=Kd,
        Kinv=np.zeros((n, n)),
        black_index={c: k for k, c in enumerate(K.black)},
        white_index={c: k for k, c in enumerate(K.white)},
        active_black=np.ones(n, bool),
        active_white=np.ones(n, bool),
        rng=rng,
        placed=[],
    )
    st.refresh()
    return st


def sample_tiling_kasteleyn(region, seed: int, stream: int = 0) -> Tiling:
    rng = make_generator(seed, stream)
    st = _init_state(region, rng)
    covered: set[Cell] = set()
    for (i, j) in sorted(st.cells):
        if (i, j) in covered:
            continue
        options = [(o, nb) for o, nb in (("H", (i + 1, j)), ("V", (i, j + 1)))
                   if nb in st.cells and nb not in covered]
        probs = np.array([st.edge_probability((i, j), nb) for _, nb in options])
        if abs(probs.sum() - 1.0) > 1e-6:
            st.refresh()
            probs = np.array([st.edge_probability((i, j), nb) for _, nb in options])
        probs = np.clip(probs, 0.0, None)
        if probs.sum() <= 0:
            raise NoTilingError(f"no admissible domino at {(i, j)}")
        u = rng.random() * probs.sum()
        k = int(np.searchsorted(np.cumsum(probs), u, side="right"))
        o, nb = options[min(k, len(options) - 1)]
        st.remove((i, j), nb)
        covered.update(((i, j), nb))
        st.placed.append((i, j, o))
    return Tiling.of(st.placed)


# ---------------------------------------------------------------------------
# Wilson + Temperley


@dataclass(frozen=True)
class RectangleGeometry:
    """Odd x odd rectangle of cells at an even origin with a corner root."""

    x0: int
    y0: int
    m: int
    n: int
    root: Cell

    @property
    def tree_shape(self) -> tuple[int, int]:
        return ((self.m + 1) // 2, (self.n + 1) // 2)

    @property
    def root_vertex(self) -> int:
        A, B = self.tree_shape
        return ((self.root[0] - self.x0) // 2) * B + (self.root[1] - self.y0) // 2


def rectangle_geometry(region: TemperleyanRegion) -> RectangleGeometry:
    cells = region.parent.cells
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    x0, y0 = min(xs), min(ys)
    m, n = max(xs) - x0 + 1, max(ys) - y0 + 1
    if len(cells) != m * n or m % 2 == 0 or n % 2 == 0 or x0 % 2 or y0 % 2:
        raise UnsupportedRegionError("Wilson sampler needs an odd x odd rectangle parent")
    corners = {(x0, y0), (x0 + m - 1, y0), (x0, y0 + n - 1), (x0 + m - 1, y0 + n - 1)}
    if region.root not in corners:
        raise UnsupportedRegionError("Wilson sampler needs the root at a corner cell")
    return RectangleGeometry(x0, y0, m, n, region.root)


@dataclass(frozen=True)
class SpanningTree:
    """Parent pointers on an A x B grid (vertex a*B + b), root has parent -1."""

    shape: tuple[int, int]
    root: int
    parent: np.ndarray

    def edges(self) -> set[tuple[int, int]]:
        return {(min(v, int(p)), max(v, int(p))) for v, p in enumerate(self.parent) if p >= 0}

    def validate(self):
        A, B = self.shape
        par = np.asarray(self.parent)
        if par.shape != (A * B,):
            raise TreeStructureError("parent array has the wrong size")
        if par[self.root] != -1:
            raise TreeStructureError("root must have no parent")
        for v, p in enumerate(par):
            if v == self.root:
                continue
            if p < 0 or p >= A * B:
                raise TreeStructureError(f"vertex {v} has no parent")
            da, db = abs(v // B - p // B), abs(v % B - p % B)
            if da + db != 1:
                raise TreeStructureError(f"parent of {v} is not a grid neighbour")
        depth = np.full(A * B, -1)
        depth[self.root] = 0
        for v in range(A * B):
            path = []
            u = v
            while depth[u] < 0:
                path.append(u)
                if len(path) > A * B:
                    raise TreeStructureError("parent pointers contain a cycle")
                u = par[u]
            for w in reversed(path):
                depth[w] = depth[u] + 1
                u = w


@numba.njit(cache=True)
def _wilson_resume(A, B, in_tree, nxt, state, dirs):
    """Run Wilson's algorithm on the A x B grid until done or out of randomness.

    state = [next start index, current walk vertex or -1, walk start].
    Returns True when the tree is complete.
    """
    pos = 0
    nd = dirs.shape[0]
    i = state[0]
    u = state[1]
    start = state[2]
    N = A * B
    while i < N:
        if u < 0:
            if in_tree[i]:
                i += 1
                continue
            start = i
            u = i
        while not in_tree[u]:
            v = -1
            while v < 0:
                if pos >= nd:
                    state[0] = i
                    state[1] = u
                    state[2] = start
                    return False
                d = dirs[pos]
                pos += 1
                a = u // B
                b = u - a * B
                if d == 0:
                    if a + 1 < A:
                        v = u + B
                elif d == 1:
                    if a > 0:
                        v = u - B
                elif d == 2:
                    if b + 1 < B:
                        v = u + 1
                else:
                    if b > 0:
                        v = u - 1
            nxt[u] = v
            u = v
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
        u = -1
        i += 1
    state[0] = i
    state[1] = -1
    return True


def wilson_tree(shape: tuple[int, int], root: int, rng: np.random.Generator) -> SpanningTree:
    """Uniform spanning tree of the grid graph rooted at ``root``."""
    A, B = shape
    in_tree = np.zeros(A * B, np.bool_)
    in_tree[root] = True
    nxt = np.full(A * B, -1, np.int64)
    state = np.array([0, -1, 0], np.int64)
    chunk = 64 * A * B + 64
    while True:
        dirs = rng.integers(0, 4, size=chunk, dtype=np.uint8)
        if _wilson_resume(A, B, in_tree, nxt, state, dirs):
            break
    nxt[root] = -1
    return SpanningTree((A, B), int(root), nxt)


@numba.njit(cache=True)
def _temperley_masks(A, B, root, parent, hmask, vmask):
    """Fill H/V domino masks (cell coords relative to the rectangle origin).

    Returns False if the dual of the tree complement is not a spanning tree.
    """
    m = 2 * A - 1
    n = 2 * B - 1
    used = np.zeros((m, n), np.bool_)
    for v in range(A * B):
        if v == root:
            continue
        a = v // B
        b = v - a * B
        p = parent[v]
        pa = p // B
        pb = p - pa * B
        ex = a + pa
        ey = b + pb
        used[2 * a, 2 * b] = True
        used[ex, ey] = True
        if pa == a + 1:
            hmask[2 * a, 2 * b] = True
        elif pa == a - 1:
            hmask[2 * a - 1, 2 * b] = True
        elif pb == b + 1:
            vmask[2 * a, 2 * b] = True
        else:
            vmask[2 * a, 2 * b - 1] = True
    # dual tree: breadth first from the outer face through unused edge cells
    nf = (A - 1) * (B - 1)
    queue = np.empty(nf, np.int64)
    head = 0
    tail = 0
    seen = np.zeros((m, n), np.bool_)
    # faces next to the boundary are reached from the outer face
    for fx in range(1, m, 2):
        for fy in range(1, n, 2):
            for k in range(4):
                if k == 0:
                    ex, ey, ox, oy = fx + 1, fy, fx + 2, fy
                elif k == 1:
                    ex, ey, ox, oy = fx - 1, fy, fx - 2, fy
                elif k == 2:
                    ex, ey, ox, oy = fx, fy + 1, fx, fy + 2
                else:
                    ex, ey, ox, oy = fx, fy - 1, fx, fy - 2
                outer = ox < 0 or ox >= m or oy < 0 or oy >= n
                if outer and (not used[ex, ey]) and (not seen[fx, fy]):
                    seen[fx, fy] = True
                    used[ex, ey] = True
                    used[fx, fy] = True
                    _pair(fx, fy, ex, ey, hmask, vmask)
                    queue[tail] = fx * n + fy
                    tail += 1
    while head < tail:
        f = queue[head]
        head += 1
        fx = f // n
        fy = f - fx * n
        for k in range(4):
            if k == 0:
                ex, ey, ox, oy = fx + 1, fy, fx + 2, fy
            elif k == 1:
                ex, ey, ox, oy = fx - 1, fy, fx - 2, fy
            elif k == 2:
                ex, ey, ox, oy = fx, fy + 1, fx, fy + 2
            else:
                ex, ey, ox, oy = fx, fy - 1, fx, fy - 2
            if ox < 0 or ox >= m or oy < 0 or oy >= n:
                continue
            if used[ex, ey] or seen[ox, oy]:
                continue
            seen[ox, oy] = True
            used[ex, ey] = True
            used[ox, oy] = True
            _pair(ox, oy, ex, ey, hmask, vmask)
            queue[tail] = ox * n + oy
            tail += 1
    if tail != nf:
        return False
    # every cell except the root is covered exactly once
    return used.sum() == m * n - 1


@numba.njit(cache=True)
def _pair(fx, fy, ex, ey, hmask, vmask):
    if ex == fx + 1:
        hmask[fx, fy] = True
    elif ex == fx - 1:
        hmask[ex, ey] = True
    elif ey == fy + 1:
        vmask[fx, fy] = True
    else:
        vmask[ex, ey] = True


def tree_to_masks(tree: SpanningTree) -> tuple[np.ndarray, np.ndarray]:
    A, B = tree.shape
    hmask = np.zeros((2 * A - 1, 2 * B - 1), np.bool_)
    vmask = np.zeros_like(hmask)
    if not _temperley_masks(A, B, tree.root, np.asarray(tree.parent, np.int64), hmask, vmask):
        raise TreeStructureError("tree complement does not give a dual spanning tree")
    return hmask, vmask


def masks_to_tiling(hmask, vmask, x0: int = 0, y0: int = 0) -> Tiling:
    hs = np.argwhere(hmask)
    vs = np.argwhere(vmask)
    return Tiling(frozenset(
        [(int(i) + x0, int(j) + y0, "H") for i, j in hs] + [(int(i) + x0, int(j) + y0, "V") for i, j in vs]
    ))


def temperley_bijection(tree: SpanningTree, origin: tuple[int, int] = (0, 0)) -> Tiling:
    """Spanning tree of the even-cell grid -> tiling of the rectangle minus root."""
    tree.validate()
    hmask, vmask = tree_to_masks(tree)
    return masks_to_tiling(hmask, vmask, *origin)


def inverse_temperley(tiling: Tiling, shape: tuple[int, int], root: int,
                      origin: tuple[int, int] = (0, 0)) -> SpanningTree:
    """Tiling of the rectangle minus root -> spanning tree (each even cell points across its domino)."""
    A, B = shape
    x0, y0 = origin
    partner = tiling.partner_map()
    parent = np.full(A * B, -1, np.int64)
    for v in range(A * B):
        if v == root:
            if (x0 + 2 * (v // B), y0 + 2 * (v % B)) in partner:
                raise TreeStructureError("root cell is covered")
            continue
        a, b = divmod(v, B)
        cell = (x0 + 2 * a, y0 + 2 * b)
        if cell not in partner:
            raise TreeStructureError(f"even cell {cell} is uncovered")
        px, py = partner[cell]
        dx, dy = px - cell[0], py - cell[1]
        pa, pb = a + dx, b + dy
        if not (0 <= pa < A and 0 <= pb < B):
            raise TreeStructureError(f"domino at {cell} leaves the vertex grid")
        parent[v] = pa * B + pb
    tree = SpanningTree((A, B), root, parent)
    tree.validate()
    return tree


def wilson_masks(geom: RectangleGeometry, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """One uniform tiling as (hmask, vmask) relative to the rectangle origin."""
    tree = wilson_tree(geom.tree_shape, geom.root_vertex, rng)
    return tree_to_masks(tree)


def sample_tiling_wilson(region: TemperleyanRegion, seed: int, stream: int = 0) -> Tiling:
    geom = rectangle_geometry(region)
    rng = make_generator(seed, stream)
    hmask, vmask = wilson_masks(geom, rng)
    return masks_to_tiling(hmask, vmask, geom.x0, geom.y0)
