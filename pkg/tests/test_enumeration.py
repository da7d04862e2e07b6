import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from dimerlab.acceptance import product_formula, random_cells
from dimerlab.enumeration import (
    SizeGuardError,
    Tiling,
    TilingError,
    bareiss_determinant,
    count_tilings,
    enumerate_tilings,
    iter_tilings,
    kasteleyn_matrix,
)
from dimerlab.lattice import build_even_rectangle, make_temperleyan
from dimerlab.rng import make_generator


def rect_cells(m, n):
    return frozenset((i, j) for i in range(m) for j in range(n))


@pytest.mark.parametrize("m,n,count", [(2, 2, 2), (2, 3, 3), (4, 4, 36), (8, 8, 12988816)])
def test_rectangle_counts(m, n, count):
    assert count_tilings(rect_cells(m, n)) == count


def test_product_formula_oracle():
    assert product_formula(8, 8) == 12988816
    assert product_formula(6, 7) == count_tilings(rect_cells(6, 7))


def test_degenerate_counts():
    assert count_tilings(frozenset()) == 1
    assert count_tilings(rect_cells(3, 3)) == 0  # odd cell count
    assert count_tilings(frozenset({(0, 0), (1, 1)})) == 0  # two blacks


def test_corner_region_has_four_tilings_and_matrix_tree_agrees():
    r = make_temperleyan(build_even_rectangle(3, 3), (0, 0))
    assert count_tilings(r) == 4
    # spanning trees of the 2x2 grid graph by the matrix-tree theorem
    L = np.array([[2, -1, -1, 0], [-1, 2, 0, -1], [-1, 0, 2, -1], [0, -1, -1, 2]])
    assert round(np.linalg.det(L[1:, 1:])) == 4


def test_matrix_tree_5x5():
    r = make_temperleyan(build_even_rectangle(5, 5), (0, 0))
    A = B = 3
    L = np.zeros((9, 9))
    for a, b in itertools.product(range(A), range(B)):
        for da, db in ((1, 0), (0, 1)):
            if a + da < A and b + db < B:
                u, v = a * B + b, (a + da) * B + b + db
                L[u, u] += 1
                L[v, v] += 1
                L[u, v] -= 1
                L[v, u] -= 1
    assert round(np.linalg.det(L[1:, 1:])) == 192 == count_tilings(r)


@given(st.integers(0, 2**32 - 1), st.integers(2, 16))
def test_kasteleyn_matches_enumeration(seed, size):
    cells = random_cells(make_generator(seed), size)
    assert count_tilings(cells) == sum(1 for _ in iter_tilings(cells))


def test_regions_with_holes():
    ring = [(i, j) for i in range(3) for j in range(3) if (i, j) != (1, 1)]
    assert count_tilings(ring) == 2 == len(enumerate_tilings(ring))
    # the region that first exposed the hole-face sign
    cells = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (1, 3), (2, 0), (2, 1), (2, 2), (2, 3)]
    assert count_tilings(cells) == 3 == len(enumerate_tilings(cells))
    # two holes, one with an even number of missing cells
    big = {(i, j) for i in range(6) for j in range(6)} - {(1, 1), (3, 3), (3, 4)}
    big -= {(5, 5)}
    assert count_tilings(big) == len(enumerate_tilings(big))


def test_face_products():
    K = kasteleyn_matrix(rect_cells(6, 5))
    assert all(p == -1 for p in K.face_products())


@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_bareiss_matches_sympy(n, seed):
    rng = make_generator(seed)
    M = rng.integers(-3, 4, size=(n, n))
    rows = [{c: int(v) for c, v in enumerate(row) if v} for row in M]
    assert bareiss_determinant(rows, n) == sympy.Matrix(M.tolist()).det()


def test_big_integer_determinant():
    r = make_temperleyan(build_even_rectangle(21, 21), (0, 0))
    n = count_tilings(r)
    # Temperley: tilings of the corner-deleted rectangle = spanning trees of the 11x11 grid
    A = B = 11
    L = sympy.zeros(A * B, A * B)
    for a, b in itertools.product(range(A), range(B)):
        for da, db in ((1, 0), (0, 1)):
            if a + da < A and b + db < B:
                u, v = a * B + b, (a + da) * B + b + db
                L[u, u] += 1
                L[v, v] += 1
                L[u, v] -= 1
                L[v, u] -= 1
    assert n == L[1:, 1:].det(method="bareiss")


def test_enumeration_guard():
    with pytest.raises(SizeGuardError):
        enumerate_tilings(rect_cells(6, 7))


def test_tilings_are_valid_and_distinct():
    cells = rect_cells(4, 3)
    ts = enumerate_tilings(cells)
    assert len(ts) == len(set(ts)) == 11
    assert all(t.is_valid_on(cells) for t in ts)


def test_tiling_text_round_trip():
    for t in enumerate_tilings(rect_cells(4, 4)):
        text = t.to_text()
        assert text.endswith("\n\n")
        assert Tiling.from_text(text) == t
        assert Tiling.from_text(text).to_text() == text


@pytest.mark.parametrize("text", ["0 0 X\n\n", "0 H\n\n", "a b H\n\n"])
def test_bad_tiling_text(text):
    with pytest.raises((TilingError, ValueError)):
        Tiling.from_text(text)
