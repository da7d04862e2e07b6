import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dimerlab.greens import (
    DomainError,
    EigenMode,
    SingularityError,
    cayley,
    f0_f1,
    f_kernels,
    g_dirichlet,
    g_disk,
    g_halfplane,
    g_rectangle_images,
    neumann_diff,
    rectangle_modes,
    spectral_gD_check,
)
from dimerlab.gff import Mobius
from dimerlab.lattice import DomainSpec

H = DomainSpec.halfplane()
D = DomainSpec.disk()
S = DomainSpec.rectangle()

upper = st.builds(complex, st.floats(-3, 3), st.floats(0.05, 3))
in_disk = st.builds(lambda r, t: 0.95 * r * complex(math.cos(t), math.sin(t)), st.floats(0, 1), st.floats(0, 2 * math.pi))
in_square = st.builds(complex, st.floats(0.02, 0.98), st.floats(0.02, 0.98))


def test_halfplane_value():
    assert abs(g_dirichlet(H, 1j, 2j) - math.log(1 / 3) / (2 * math.pi)) < 1e-15
    assert abs(g_dirichlet(H, 1j, 2j) - (-0.1748489)) < 1e-6


@pytest.mark.parametrize("dom,strat", [(H, upper), (D, in_disk), (S, in_square)])
def test_symmetry(dom, strat):
    @given(strat, strat)
    def check(z1, z2):
        if abs(z1 - z2) < 1e-6:
            return
        assert abs(g_dirichlet(dom, z1, z2) - g_dirichlet(dom, z2, z1)) < 1e-10

    check()


def test_vanishes_at_boundary():
    assert abs(g_halfplane(1j, 0.3 + 1e-12j)) < 1e-11
    assert abs(g_disk(0.2 + 0.1j, 0.999999999 * np.exp(0.7j))) < 1e-8
    assert abs(g_rectangle_images(0.3 + 0.4j, 1e-12 + 0.5j)) < 1e-11
    assert abs(g_rectangle_images(0.3 + 0.4j, 0.6 + 1j)) < 1e-11


def test_negative_inside():
    for dom, z1, z2 in [(H, 1j, 2 + 1j), (D, 0.1, -0.5j), (S, 0.2 + 0.2j, 0.8 + 0.7j)]:
        assert g_dirichlet(dom, z1, z2) < 0


def test_errors():
    with pytest.raises(SingularityError):
        g_dirichlet(H, 1j, 1j)
    with pytest.raises(DomainError):
        g_dirichlet(H, 1j, -1j)
    with pytest.raises(DomainError):
        g_dirichlet(D, 0, 2)
    with pytest.raises(DomainError):
        g_dirichlet(S, 0.5j, 1.5)


@pytest.mark.parametrize("dom,z0", [(H, 0.3 + 0.7j), (D, 0.2 - 0.4j), (S, 0.3 + 0.6j)])
def test_near_diagonal_bounded(dom, z0):
    vals = []
    for d in (1e-2, 1e-4, 1e-6):
        z2 = z0 + d * np.exp(0.3j)
        vals.append(g_dirichlet(dom, z0, z2) - math.log(d) / (2 * math.pi))
    assert abs(vals[1] - vals[2]) < 1e-3
    assert abs(vals[0] - vals[2]) < 1e-1


def test_disk_two_mobius_choices():
    # pull back through the Cayley map with two different basepoints
    d1 = DomainSpec.disk(basepoint=-1)
    d2 = DomainSpec.disk(basepoint=1j)
    rng = np.random.default_rng(1)
    for _ in range(50):
        z1, z2 = 0.9 * np.sqrt(rng.random(2)) * np.exp(2j * np.pi * rng.random(2))
        f1, _ = cayley(d1)
        f2, _ = cayley(d2)
        a = g_halfplane(f1(z1), f1(z2))
        b = g_halfplane(f2(z1), f2(z2))
        assert abs(a - b) < 1e-10
        assert abs(a - g_disk(z1, z2)) < 1e-10


def test_disk_automorphism_invariance():
    m = Mobius.disk_automorphism(0.4 - 0.2j, 0.9)
    z1, z2 = 0.1 + 0.3j, -0.5 + 0.2j
    assert abs(g_disk(z1, z2) - g_disk(m(z1), m(z2))) < 1e-12


def test_scaled_disk():
    dom = DomainSpec.disk(2.0, 1 + 1j)
    assert abs(g_dirichlet(dom, 1 + 1j + 0.4, 1 + 1j - 0.6j) - g_disk(0.2, -0.3j)) < 1e-12


def test_images_against_spectral():
    z1, z2 = 0.3 + 0.4j, 0.7 + 0.6j
    assert abs(spectral_gD_check(S, z1, z2, 200) - g_dirichlet(S, z1, z2)) < 1e-6


def test_images_nonsquare_against_spectral():
    dom = DomainSpec.rectangle(2.0, 0.7)
    z1, z2 = 0.5 + 0.3j, 1.4 + 0.4j
    assert abs(spectral_gD_check(dom, z1, z2, 400) - g_rectangle_images(z1, z2, 2.0, 0.7)) < 1e-6


def test_spectral_truncation_shrinks():
    z1, z2 = 0.25 + 0.5j, 0.75 + 0.5j
    exact = g_dirichlet(S, z1, z2)
    errs = [abs(spectral_gD_check(S, z1, z2, M) - exact) for M in (10, 20, 40, 80, 160)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def _square_polar_integral(z0, fn, n=60):
    """int over the unit square of fn(z) by polar coordinates about z0, r = s^2."""
    corners = [1 + 1j, 1j, 0, 1]
    angs = sorted(np.angle(c - z0) % (2 * np.pi) for c in corners)
    edges = list(angs) + [angs[0] + 2 * np.pi]
    t, w = np.polynomial.legendre.leggauss(n)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        th = (a + b) / 2 + (b - a) / 2 * t
        wt = (b - a) / 2 * w
        e = np.exp(1j * th)
        # distance to the square boundary along e
        with np.errstate(divide="ignore"):
            tx = np.where(e.real > 0, (1 - z0.real) / e.real, np.where(e.real < 0, -z0.real / e.real, np.inf))
            ty = np.where(e.imag > 0, (1 - z0.imag) / e.imag, np.where(e.imag < 0, -z0.imag / e.imag, np.inf))
        rmax = np.minimum(tx, ty)
        s = (t[:, None] + 1) / 2 * np.sqrt(rmax)[None, :]
        ws = w[:, None] / 2 * np.sqrt(rmax)[None, :]
        r = s * s
        z = z0 + r * e[None, :]
        total += (fn(z) * r * 2 * s * ws * wt[None, :]).sum()
    return total


def test_green_reproduces_eigenfunction():
    f1 = EigenMode(1, 1)
    z0 = 0.3 + 0.45j
    val = _square_polar_integral(z0, lambda z: f1.at(z) * g_rectangle_images(z0, z))
    assert abs(val - f1.at(z0) / f1.eigenvalue) < 1e-6


def test_eigenmodes_orthonormal_and_vanish():
    modes = rectangle_modes(30, 1.5, 0.8)
    t, w = np.polynomial.legendre.leggauss(80)
    x, wx = (t + 1) * 0.75, w * 0.75
    y, wy = (t + 1) * 0.4, w * 0.4
    F = np.array([m(x[:, None], y[None, :]) for m in modes])
    G = np.einsum("ixy,jxy,x,y->ij", F, F, wx, wy)
    assert np.abs(G - np.eye(len(modes))).max() < 1e-8
    for m in modes:
        assert abs(m(0.0, 0.3)) < 1e-12 and abs(m(1.5, 0.3)) < 1e-12 and abs(m(0.4, 0.8)) < 1e-12


def test_eigenmode_is_laplacian_eigenfunction():
    sympy = pytest.importorskip("sympy")
    x, y, a, b = sympy.symbols("x y a b", positive=True)
    j, k = 2, 3
    f = 2 / sympy.sqrt(a * b) * sympy.sin(sympy.pi * j * x / a) * sympy.sin(sympy.pi * k * y / b)
    lam = -sympy.pi**2 * (j**2 / a**2 + k**2 / b**2)
    assert sympy.simplify(sympy.diff(f, x, 2) + sympy.diff(f, y, 2) - lam * f) == 0
    m = EigenMode(j, k, 1.3, 0.7)
    assert abs(m.eigenvalue - float(lam.subs({a: 1.3, b: 0.7}))) < 1e-12


def test_modes_sorted_by_eigenvalue():
    modes = rectangle_modes(200, 1.0, 2.0)
    lam = [-m.eigenvalue for m in modes]
    assert lam == sorted(lam)
    assert len({(m.j, m.k) for m in modes}) == 200


# ---------------------------------------------------------------------------
# Neumann difference and F kernels


def test_neumann_zero_and_real_axis():
    assert neumann_diff(H, 1j, 1j, 2 + 1j) == (0j, 0)
    for x in np.linspace(-3, 3, 13):
        val, _ = neumann_diff(H, 0.4 + 1j, -1 + 0.5j, complex(x, 0))
        assert abs(val.imag) < 1e-12


def test_neumann_closed_form():
    z1, z1p, z2 = 0.3 + 1j, -0.5 + 2j, 1.2 + 0.4j
    val, _ = neumann_diff(H, z1, z1p, z2)
    ref = np.log((z2 - z1) * (z2 - np.conj(z1)) / ((z2 - z1p) * (z2 - np.conj(z1p)))) / (2 * np.pi)
    assert abs(val.real - ref.real) < 1e-12


def test_neumann_normal_derivative_vanishes():
    z1, z1p = 0.4 + 1j, -1 + 0.5j
    h = 1e-4
    for x in (-2.0, 0.1, 1.7):
        up = neumann_diff(H, z1, z1p, complex(x, h))[0].real
        dn = neumann_diff(H, z1, z1p, complex(x, -h))[0].real
        assert abs((up - dn) / (2 * h)) < 1e-6


def test_neumann_winding():
    z1, z1p, z2 = 0.5 + 1j, -1 + 2j, 0.5 + 1.4j
    loop = [z1 + 0.4j * np.exp(2j * np.pi * t) for t in np.linspace(0, 1, 200)[:-1]]
    plain, w0 = neumann_diff(H, z1, z1p, z2, path=[z2])
    turned, w1 = neumann_diff(H, z1, z1p, z2, path=loop)
    assert w0 == 0 and w1 == 1
    assert abs(turned - plain - 1j) < 1e-12


def test_neumann_errors():
    with pytest.raises(SingularityError):
        neumann_diff(H, 1j, 2j, 1j)
    with pytest.raises(DomainError):
        neumann_diff(S, 0.2 + 0.2j, 0.5 + 0.5j, 0.7 + 0.3j)


def test_f_kernels_values():
    fp, fm = f_kernels(H, 1j, 2j)
    assert abs(fp - (-2j / np.pi)) < 1e-15
    assert abs(fm - 2 / (3j * np.pi)) < 1e-15
    with pytest.raises(SingularityError):
        f_kernels(H, 1j, 1j)


def test_f_kernels_vanish_at_basepoint():
    vals = [abs(f_kernels(H, 1j, complex(0, y))[0]) for y in (1e2, 1e4, 1e6)]
    assert vals[-1] < 1e-6 and vals[0] > vals[1] > vals[2]
    fp, fm = f_kernels(D, 0.2j, -1 + 1e-9)
    assert abs(fp) < 1e-6 and abs(fm) < 1e-6
    f, df = cayley(D)
    z = 0.3 - 0.2j
    assert abs(df(z) - (f(z + 1e-6) - f(z - 1e-6)) / 2e-6) < 1e-6
    assert f(0.5j).imag > 0


@pytest.mark.parametrize("dom,z1,z1p,z2", [
    (H, 0.3 + 0.8j, -1 + 1j, 1.1 + 0.5j),
    (D, 0.2 + 0.3j, -0.1 - 0.5j, 0.5 - 0.2j),
])
def test_f_kernels_finite_differences(dom, z1, z1p, z2):
    d = 1e-5

    def N(z):
        return neumann_diff(dom, z, z1p, z2)[0]

    fp, fm = f_kernels(dom, z1, z2)
    dx = -4 * (N(z1 + d) - N(z1 - d)) / (2 * d)
    dy = -4 * (N(z1 + 1j * d) - N(z1 - 1j * d)) / (2 * d)
    for got, want in ((dx, fp + fm), (dy, 1j * fp - 1j * fm)):
        assert abs(got - want) / abs(want) < 1e-4


def test_f0_f1_single_valued():
    z1 = 0.3 + 1j
    loop = z1 + 0.5 * np.exp(2j * np.pi * np.linspace(0, 1, 401))
    f0, f1 = f0_f1(H, z1, loop)
    assert abs(f0[-1] - f0[0]) < 1e-8 and abs(f1[-1] - f1[0]) < 1e-8
    fp, fm = f_kernels(H, z1, loop)
    assert np.allclose(fp, -2 * (f0 + f1)) and np.allclose(fm, -2 * (f0 - f1))
