import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dimerlab.enumeration import Tiling, enumerate_tilings
from dimerlab.height import (
    DegeneratePairError,
    ShapeError,
    VertexGrid,
    boundary_data,
    boundary_rule_violations,
    center,
    covariance_empirical,
    covariance_with_error,
    exact_height_moments,
    face_rule_violations,
    height_csv,
    height_function,
    height_function_dfs,
    parse_height_csv,
    phi_weights,
    predict_mean_height,
    smoothed_observable,
)
from dimerlab.lattice import DomainSpec, Polyomino, approximate_domain, build_even_rectangle, make_temperleyan
from dimerlab.sampler import sample_tiling_kasteleyn, sample_tiling_wilson

DATA = Path(__file__).parent / "data"


class CellRegion:
    """Minimal region stand-in with an explicit reference vertex."""

    def __init__(self, cells, reference):
        self.cells = frozenset(cells)
        self.epsilon = 1.0
        self.root = reference
        self._ref = reference

    def reference_vertex(self):
        return self._ref


def corner(m, n):
    return make_temperleyan(build_even_rectangle(m, n), (0, 0))


def test_brick_strip_golden():
    cells = [(i, j) for i in range(6) for j in range(2)]
    region = CellRegion(cells, (0, 0))
    tiling = Tiling.of([(i, j, "H") for i in (0, 2, 4) for j in (0, 1)])
    hf = height_function(region, tiling)
    assert hf.to_csv() == (DATA / "brick_2x6.csv").read_text()


def test_local_rule_differences():
    r = corner(7, 7)
    t = sample_tiling_wilson(r, 1)
    hf = height_function(r, t)
    crossed = set()
    for i, j, o in t.dominoes:
        crossed.add(((i + 1, j), (i + 1, j + 1)) if o == "H" else ((i, j + 1), (i + 1, j + 1)))
    g = hf.grid
    for x in range(g.shape[0] - 1):
        for y in range(g.shape[1]):
            if g.hedge[x, y]:
                d = abs(hf[(x + g.x0 + 1, y + g.y0)] - hf[(x + g.x0, y + g.y0)])
                e = ((x + g.x0, y + g.y0), (x + g.x0 + 1, y + g.y0))
                assert d == (3 if e in crossed else 1)


@given(st.integers(0, 2**32 - 1))
def test_face_and_boundary_rules_kasteleyn(seed):
    r = approximate_domain(DomainSpec.disk(), 1 / 5)
    hf = height_function(r, sample_tiling_kasteleyn(r, seed))
    assert face_rule_violations(hf.grid, hf.values) == 0
    assert boundary_rule_violations(hf.grid, hf.values) == 0


def test_adjacent_boundary_vertices_differ_by_one():
    r = corner(9, 7)
    path, _, _ = boundary_data(r)
    for s in range(1000):
        hf = height_function(r, sample_tiling_wilson(r, 2, s))
        vals = [hf[v] for v in path]
        assert all(abs(a - b) == 1 for a, b in zip(vals, vals[1:] + vals[:1]))


def test_traversal_independence():
    r = approximate_domain(DomainSpec.disk(), 1 / 6)
    for s in range(10):
        t = sample_tiling_kasteleyn(r, 4, s)
        hf = height_function(r, t)
        assert hf.as_dict() == height_function_dfs(r, t)


def test_reference_vertex_pinned():
    r = corner(5, 5)
    hf = height_function(r, sample_tiling_wilson(r, 0))
    assert hf[r.reference_vertex()] == 0


def test_center_identical_fields_zero():
    r = corner(5, 5)
    hf = height_function(r, sample_tiling_wilson(r, 0))
    cf, mean = center([hf, hf])
    assert all(np.all(c.values == 0) for c in cf)
    assert mean.fraction(r.reference_vertex()) == 0


def test_center_mean_zero_exactly():
    r = corner(41, 41)
    hs = [height_function(r, sample_tiling_wilson(r, 8, s)) for s in range(300)]
    cf, mean = center(hs)
    total = sum(c.values * c.count for c in cf)
    assert np.all(np.abs(total) < 1e-6)
    v = (20, 20)
    assert mean.fraction(v) == sum(h[v] for h in hs) / __import__("fractions").Fraction(len(hs))


def test_center_shape_error():
    a = height_function(corner(5, 5), sample_tiling_wilson(corner(5, 5), 0))
    b = height_function(corner(7, 5), sample_tiling_wilson(corner(7, 5), 0))
    with pytest.raises(ShapeError):
        center([a, b])


def test_unique_tiling_centered_zero():
    r = make_temperleyan(build_even_rectangle(3, 1), (0, 0))
    hs = [height_function(r, sample_tiling_kasteleyn(r, 0, s)) for s in range(3)]
    cf, _ = center(hs)
    assert all(np.all(c.values == 0) for c in cf)


def test_covariance_symmetry_and_degenerate_pair():
    r = approximate_domain(DomainSpec.rectangle(), 1 / 21)
    hs = [height_function(r, sample_tiling_wilson(r, 6, s)) for s in range(600)]
    cf, _ = center(hs)
    with pytest.raises(DegeneratePairError):
        covariance_empirical(cf, (0.3, 0.3), (0.301, 0.3))
    X = np.array([[c.values[hs[0].grid.index(v)] for v in [(5, 10), (16, 10), (10, 5)]] for c in cf])
    C = np.cov(X.T)
    assert np.all(np.linalg.eigvalsh(C) > -1e-10)


def test_covariance_mirror_symmetry_exact():
    # the 9x9 corner region is symmetric under the diagonal swap (x, y) -> (y, x)
    r = corner(9, 9)
    _, _, c1 = exact_height_moments(r, (2, 6), (5, 5))
    _, _, c2 = exact_height_moments(r, (6, 2), (5, 5))
    assert abs(c1 - c2) < 1e-10


def test_exact_moments_match_enumeration():
    r = corner(5, 5)
    hs = [height_function(r, t) for t in enumerate_tilings(r)]
    for u, v in [((2, 2), (4, 3)), ((1, 3), (3, 1)), ((3, 3), (3, 3))]:
        a = np.array([h[u] for h in hs], float)
        b = np.array([h[v] for h in hs], float)
        mu, mv, c = exact_height_moments(r, u, v)
        assert abs(mu - a.mean()) < 1e-10 and abs(mv - b.mean()) < 1e-10
        assert abs(c - (np.mean(a * b) - a.mean() * b.mean())) < 1e-10


def test_covariance_with_error_jackknife():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(500)
    y = 0.5 * x + rng.standard_normal(500)
    c, se = covariance_with_error(x, y)
    assert abs(c - np.cov(x, y)[0, 1]) < 1e-12
    n = len(x)
    loo = [np.cov(np.delete(x, i), np.delete(y, i))[0, 1] for i in range(n)]
    assert abs(se - math.sqrt((n - 1) / n * np.sum((np.array(loo) - np.mean(loo)) ** 2))) < 1e-12


def test_smoothed_observable_zero_phi():
    r = corner(9, 9)
    hs = [height_function(r, sample_tiling_wilson(r, 1, s)) for s in range(5)]
    cf, _ = center(hs)
    assert smoothed_observable(cf[0], lambda x, y: 0 * x) == 0


def test_smoothed_observable_weights():
    r = corner(5, 5)
    g = VertexGrid.of(r)
    w = phi_weights(g, lambda x, y: np.ones_like(x))
    # vertex (0, 0) touches only the removed root cell
    assert abs(w.sum() - 35 * r.epsilon**2) < 1e-12


def test_boundary_data_square_steps():
    r = approximate_domain(DomainSpec.rectangle(), 1 / 9)
    path, turning, heights = boundary_data(r)
    steps = np.diff(turning)
    # four corners of the square plus the root notch (+1, -1, -1 ... net zero)
    assert turning[-1] - turning[0] in (3, 4)
    assert set(np.unique(steps)) <= {-1, 0, 1}
    assert np.all(np.abs(np.diff(heights)) == 1)


def test_boundary_data_disk_total():
    r = approximate_domain(DomainSpec.disk(), 1 / 10)
    poly = Polyomino.from_cells(r.cells)
    convex = sum(k == "convex" for _, k in poly.corners)
    concave = sum(k == "concave" for _, k in poly.corners)
    assert convex - concave == 4


def test_predicted_mean_is_discrete_harmonic():
    r = approximate_domain(DomainSpec.rectangle(), 1 / 15)
    g = VertexGrid.of(r)
    pred = predict_mean_height(r)
    path, _, _ = boundary_data(r)
    onb = np.zeros(g.shape, bool)
    for v in path:
        onb[g.index(v)] = True
    for x in range(1, g.shape[0] - 1):
        for y in range(1, g.shape[1] - 1):
            if g.inside[x, y] and not onb[x, y]:
                lap = pred[x + 1, y] + pred[x - 1, y] + pred[x, y + 1] + pred[x, y - 1] - 4 * pred[x, y]
                assert abs(lap) < 1e-9


def test_height_csv_round_trip():
    r = approximate_domain(DomainSpec.disk(), 1 / 6)
    hf = height_function(r, sample_tiling_kasteleyn(r, 0))
    text = height_csv(hf.grid, hf.values)
    x0, y0, rows = parse_height_csv(text)
    assert (x0, y0) == (hf.grid.x0, hf.grid.y0)
    for k, row in enumerate(rows):
        for c, val in enumerate(row):
            if val is None:
                assert not hf.grid.inside[c, k]
            else:
                assert val == hf.values[c, k]
    assert "*" in text
