"""Exact tiling enumeration and counting via Kasteleyn matrices.

These routines are the ground truth the samplers and statistics are checked
against, so everything here is exact integer arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .lattice import Cell, Polyomino, TemperleyanRegion, is_black

MAX_ENUMERATION_CELLS = 36


class SizeGuardError(ValueError):
    pass


class ImbalanceError(ValueError):
    pass


class TilingError(ValueError):
    pass


Domino = tuple[int, int, str]


def domino_cells(d: Domino) -> tuple[Cell, Cell]:
    i, j, o = d
    return ((i, j), (i + 1, j)) if o == "H" else ((i, j), (i, j + 1))


@dataclass(frozen=True)
class Tiling:
    """Set of dominoes (i, j, 'H'|'V'); H covers (i,j),(i+1,j), V covers (i,j),(i,j+1)."""

    dominoes: frozenset[Domino]

    @classmethod
    def of(cls, dominoes: Iterable[Domino]) -> "Tiling":
        return cls(frozenset((int(i), int(j), str(o)) for i, j, o in dominoes))

    def __len__(self) -> int:
        return len(self.dominoes)

    def covered(self) -> set[Cell]:
        out = set()
        for d in self.dominoes:
            out.update(domino_cells(d))
        return out

    def partner_map(self) -> dict[Cell, Cell]:
        out = {}
        for d in self.dominoes:
            a, b = domino_cells(d)
            out[a], out[b] = b, a
        return out

    def is_valid_on(self, cells) -> bool:
        seen = set()
        for d in self.dominoes:
            if d[2] not in ("H", "V"):
                return False
            for c in domino_cells(d):
                if c in seen:
                    return False
                seen.add(c)
        return seen == set(cells)

    def to_text(self) -> str:
        lines = [f"{i} {j} {o}" for i, j, o in sorted(self.dominoes)]
        return "\n".join(lines) + "\n\n"

    @classmethod
    def from_text(cls, text: str) -> "Tiling":
        dominoes = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                break
            i, j, o = line.split()
            if o not in ("H", "V"):
                raise TilingError(f"bad orientation {o!r}")
            dominoes.append((int(i), int(j), o))
        return cls.of(dominoes)


def _cells_of(region) -> frozenset[Cell]:
    if isinstance(region, (TemperleyanRegion, Polyomino)):
        return region.cells
    return frozenset(region)


def iter_tilings(cells: Iterable[Cell]) -> Iterator[Tiling]:
    """Backtracking over the lexicographically first uncovered cell, H before V."""
    order = sorted(cells)
    free = set(order)
    placed: list[Domino] = []

    def rec(k: int):
        while k < len(order) and order[k] not in free:
            k += 1
        if k == len(order):
            yield Tiling(frozenset(placed))
            return
        i, j = order[k]
        for o, other in (("H", (i + 1, j)), ("V", (i, j + 1))):
            if other in free:
                free.discard((i, j))
                free.discard(other)
                placed.append((i, j, o))
                yield from rec(k + 1)
                placed.pop()
                free.add((i, j))
                free.add(other)

    yield from rec(0)


def enumerate_tilings(region) -> list[Tiling]:
    cells = _cells_of(region)
    if len(cells) > MAX_ENUMERATION_CELLS:
        raise SizeGuardError(f"{len(cells)} cells exceeds the enumeration guard of {MAX_ENUMERATION_CELLS}")
    return list(iter_tilings(cells))


# ---------------------------------------------------------------------------
# Kasteleyn matrix


@dataclass(frozen=True)
class KasteleynMatrix:
    """Signed adjacency between black (rows) and white (columns) cells.

    Gauge: horizontal edges +1, the vertical edge between (i, j) and (i, j+1)
    carries (-1)**i, so every 2x2 face has alternating product -1.
    """

    black: tuple[Cell, ...]
    white: tuple[Cell, ...]
    entries: dict[tuple[int, int], int]

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.black), len(self.white))

    def position(self, a: Cell, b: Cell) -> tuple[int, int]:
        """Matrix position of the adjacency between cells a and b (either order)."""
        if not is_black(a):
            a, b = b, a
        return self._bindex[a], self._windex[b]

    @property
    def _bindex(self) -> dict[Cell, int]:
        return {c: k for k, c in enumerate(self.black)}

    @property
    def _windex(self) -> dict[Cell, int]:
        return {c: k for k, c in enumerate(self.white)}

    def dense(self, dtype=float) -> np.ndarray:
        out = np.zeros(self.shape, dtype=dtype)
        for (r, c), v in self.entries.items():
            out[r, c] = v
        return out

    def rows(self) -> list[dict[int, int]]:
        rows: list[dict[int, int]] = [dict() for _ in self.black]
        for (r, c), v in self.entries.items():
            rows[r][c] = v
        return rows

    def face_products(self) -> list[complex]:
        """Alternating product b1w1 / (w1b2) * b2w2 / (w2b1) around each 2x2 face."""
        cells = set(self.black) | set(self.white)
        bi, wi = self._bindex, self._windex
        out = []
        for (i, j) in cells:
            quad = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            if not all(q in cells for q in quad):
                continue
            # cycle alternates colours; pick black members
            b = [q for q in quad if is_black(q)]
            w = [q for q in quad if not is_black(q)]
            k = lambda x, y: complex(self.entries[(bi[x], wi[y])])
            out.append(k(b[0], w[0]) * k(b[1], w[1]) / (k(b[1], w[0]) * k(b[0], w[1])))
        return out


def hole_cuts(cells) -> set[Cell]:
    """Vertical edges (by lower cell) whose sign flips to fix faces around holes.

    Around a cycle of cell centres the plain gauge gives (-1)^(A) with A the
    enclosed area; Kasteleyn needs (-1)^(A - I), I the number of enclosed
    lattice points (Pick). Each enclosed missing cell c therefore flips every
    vertical edge cut by a ray leaving c to the left, between rows c_y and
    c_y + 1. Simply connected regions get no cuts.
    """
    cells = set(cells)
    if not cells:
        return set()
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    x0, x1, y0, y1 = min(xs) - 1, max(xs) + 1, min(ys) - 1, max(ys) + 1
    outside = {(x0, y0)}
    stack = [(x0, y0)]
    while stack:
        i, j = stack.pop()
        for nb in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if x0 <= nb[0] <= x1 and y0 <= nb[1] <= y1 and nb not in cells and nb not in outside:
                outside.add(nb)
                stack.append(nb)
    cut: set[Cell] = set()
    for cx in range(x0, x1 + 1):
        for cy in range(y0, y1 + 1):
            if (cx, cy) in cells or (cx, cy) in outside:
                continue
            for x in range(x0, cx):
                if (x, cy) in cells and (x, cy + 1) in cells:
                    cut ^= {(x, cy)}
    return cut


def edge_sign(a: Cell, b: Cell) -> int:
    if a[1] == b[1]:
        return 1
    return -1 if min(a[0], b[0]) % 2 else 1


def kasteleyn_matrix(region) -> KasteleynMatrix:
    cells = _cells_of(region)
    black = tuple(sorted(c for c in cells if is_black(c)))
    white = tuple(sorted(c for c in cells if not is_black(c)))
    if len(black) != len(white):
        raise ImbalanceError(f"{len(black)} black vs {len(white)} white cells")
    windex = {c: k for k, c in enumerate(white)}
    cut = hole_cuts(cells)
    entries = {}
    for r, (i, j) in enumerate(black):
        for nb in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if nb in windex:
                flip = -1 if nb[0] == i and (i, min(j, nb[1])) in cut else 1
                entries[(r, windex[nb])] = flip * edge_sign((i, j), nb)
    K = KasteleynMatrix(black, white, entries)
    bad = [p for p in K.face_products() if abs(p + 1) > 1e-12]
    if bad:
        raise AssertionError("Kasteleyn face condition violated")  # gauge bug
    return K


def bareiss_determinant(rows: list[dict[int, int]], n: int) -> int:
    """Exact determinant of a sparse integer matrix by fraction-free elimination.

    Rows are dicts column -> value. Bareiss rescales every remaining row at
    every step; here a row untouched by a step is left alone and remembers
    the step ``t`` it was last current at. Its true value at step ``s`` is
    ``stored * p_s / p_t`` (the scale factors telescope), so an update only
    visits rows with a nonzero in the pivot column. All quotients are exact.
    """
    rows = [dict(r) for r in rows]
    if len(rows) != n:
        raise ValueError("matrix must be square")
    level = [0] * n
    pivots = [1]
    col_rows: dict[int, set[int]] = {}
    for r, row in enumerate(rows):
        for c in row:
            col_rows.setdefault(c, set()).add(r)
    active = set(range(n))
    sign = 1
    for k in range(1, n + 1):
        col = k - 1
        cand = [r for r in col_rows.pop(col, ()) if r in active and rows[r].get(col, 0) != 0]
        if not cand:
            return 0
        piv_r = min(cand, key=lambda r: (len(rows[r]), r))
        if sum(1 for r in active if r < piv_r) % 2:
            sign = -sign
        active.discard(piv_r)
        prow = _bring_up(rows[piv_r], level[piv_r], k - 1, pivots)
        p = prow[col]
        for r in cand:
            if r == piv_r:
                continue
            row = rows[r]
            pt = pivots[level[r]]
            a_rk = row.pop(col)
            new = {c: p * v for c, v in row.items()}
            for c, v in prow.items():
                if c != col:
                    new[c] = new.get(c, 0) - a_rk * v
            row = {}
            for c, v in new.items():
                if v:
                    q, rem = divmod(v, pt)
                    assert rem == 0, "inexact Bareiss quotient"
                    row[c] = q
                    col_rows.setdefault(c, set()).add(r)
            rows[r] = row
            level[r] = k
        pivots.append(p)
    return sign * pivots[-1]


def _bring_up(row: dict[int, int], t: int, s: int, pivots: list[int]) -> dict[int, int]:
    if t == s:
        return row
    num, den = pivots[s], pivots[t]
    return {c: v * num // den for c, v in row.items()}


def count_tilings(region) -> int:
    """Exact number of domino tilings, |det K|."""
    cells = _cells_of(region)
    if len(cells) % 2:
        return 0
    if not cells:
        return 1
    try:
        K = kasteleyn_matrix(cells)
    except ImbalanceError:
        return 0
    return abs(bareiss_determinant(K.rows(), K.shape[0]))
