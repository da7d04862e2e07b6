import math

import numpy as np
import pytest

from dimerlab.greens import EigenMode, g_dirichlet, rectangle_modes
from dimerlab.gff import (
    ContractError,
    Mobius,
    TestFunction,
    analytic_covariance,
    conformal_invariance_check,
    dirichlet_energy,
    field_covariance,
    moment_stats,
    pair,
    pair_many,
    sample_gff,
    tail_bound,
    dimer_gff_comparison,
    limit_variance,
    wick_check,
)
from dimerlab.lattice import DomainSpec

SQ = DomainSpec.rectangle()
N = 100_000


def test_sample_reproducible():
    a = sample_gff(SQ, 256, seed=5)
    b = sample_gff(SQ, 256, seed=5)
    c = sample_gff(SQ, 256, seed=6)
    assert np.array_equal(a.coefficients, b.coefficients)
    assert not np.array_equal(a.coefficients, c.coefficients)
    assert a.cutoff == 256


def test_pair_many_matches_sample_gff():
    phi = TestFunction.bump(0.4 + 0.5j, 0.3)
    xs = pair_many(SQ, [phi], 3, M=64, seed=9, chunk=2)
    # the first sample uses the first block of M normals
    assert abs(xs[0, 0] - pair(sample_gff(SQ, 64, seed=9), phi)) < 1e-12


def test_coefficients_standard_normal():
    modes = rectangle_modes(4)
    phis = [TestFunction.eigen(m.j, m.k) for m in modes]
    X = pair_many(SQ, phis, N, M=16, seed=1)
    C = X * np.sqrt([-m.eigenvalue for m in modes])
    var = C.var(axis=0)
    assert np.all(np.abs(var - 1) < 0.02)
    R = np.corrcoef(C.T)
    assert np.abs(R - np.eye(4)).max() < 0.02


def test_single_mode_variance_and_mean():
    X = pair_many(SQ, [TestFunction.eigen(1, 1)], N, M=64, seed=2)[:, 0]
    assert abs(X.var() / (1 / (2 * math.pi**2)) - 1) < 0.02
    assert abs(X.mean()) < 3 * X.std() / math.sqrt(N)


def test_mode_covariances():
    phis = [TestFunction.eigen(1, 1), TestFunction.eigen(1, 2), TestFunction.eigen(2, 2)]
    X = pair_many(SQ, phis, N, M=64, seed=3)
    C = np.cov(X.T)
    lam = np.array([EigenMode(1, 1).eigenvalue, EigenMode(1, 2).eigenvalue, EigenMode(2, 2).eigenvalue])
    se = np.sqrt(np.outer(-1 / lam, -1 / lam) / N)
    assert np.all(np.abs(C - np.diag(-1 / lam)) < 4 * se)


def test_bump_covariance_against_mode_sum():
    p1 = TestFunction.bump(0.35 + 0.4j, 0.25)
    p2 = TestFunction.bump(0.6 + 0.55j, 0.3, tilt=0.5)
    X = pair_many(SQ, [p1, p2], N, M=1024, seed=4)
    want = analytic_covariance(SQ, p1, p2, 1024)
    assert abs(np.cov(X.T)[0, 1] / want - 1) < 0.03
    assert abs(X[:, 1].mean()) < 3 * X[:, 1].std() / math.sqrt(N)


def test_pair_linear():
    s = sample_gff(SQ, 512, seed=0)
    p1 = TestFunction.bump(0.5 + 0.5j, 0.3)
    p2 = TestFunction.eigen(2, 1)
    comb = lambda x, y: 2.5 * p1(x, y) - 0.7 * p2(x, y)
    assert abs(pair(s, comb) - (2.5 * pair(s, p1) - 0.7 * pair(s, p2))) < 1e-12


def test_truncation_stability():
    phi = TestFunction.bump(0.3 + 0.6j, 0.2)
    M = 256
    diff = analytic_covariance(SQ, phi, phi, 2 * M) - analytic_covariance(SQ, phi, phi, M)
    assert 0 <= diff < tail_bound(SQ, phi, M)


def test_field_covariance_is_minus_green():
    z1, z2 = 0.3 + 0.4j, 0.7 + 0.6j
    got = field_covariance(SQ, z1, z2, M=64 * 64)
    assert abs(got + g_dirichlet(SQ, z1, z2)) < 2e-3


def test_wick_single_coefficient():
    rng = np.random.default_rng(0)
    c = rng.standard_normal(400_000)
    assert abs(np.mean(c**4) - 3) < 0.05
    rep = wick_check(np.repeat(c[:, None], 4, axis=1), np.ones((4, 4)))
    assert rep.predicted == 3 and rep.relative_deviation < 0.02


def test_wick_eigen_pairs():
    f1, f2 = TestFunction.eigen(1, 1), TestFunction.eigen(1, 2)
    X = pair_many(SQ, [f1, f2], N, M=64, seed=8)
    v1 = 1 / (2 * math.pi**2)
    v2 = 1 / (5 * math.pi**2)
    r1 = wick_check(X[:, [0, 0, 0, 0]], np.full((4, 4), v1))
    assert abs(r1.predicted - 3 * v1**2) < 1e-15
    assert r1.relative_deviation < 0.05
    cov = np.array([[v1, v1, 0, 0], [v1, v1, 0, 0], [0, 0, v2, v2], [0, 0, v2, v2]])
    r2 = wick_check(X[:, [0, 0, 1, 1]], cov)
    assert abs(r2.predicted - v1 * v2) < 1e-15
    assert r2.relative_deviation < 0.05


def test_wick_contract():
    with pytest.raises(ContractError):
        wick_check(np.zeros((100, 4)))
    with pytest.raises(ContractError):
        wick_check(np.zeros((20000, 3)))


def test_test_function_parse():
    f = TestFunction.parse("eigen:2,3")
    assert abs(f(0.2, 0.3) - EigenMode(2, 3)(0.2, 0.3)) < 1e-15
    b = TestFunction.parse("bump:0.5,0.5,0.2,0.1")
    assert b.support == (0.5 + 0.5j, 0.2)
    assert b(0.9, 0.9) == 0 and b(0.5, 0.5) > 0
    with pytest.raises(ContractError):
        TestFunction.parse("gauss:1")
    with pytest.raises(ContractError):
        TestFunction.parse("eigen:x,y")


def test_dirichlet_energy_radial_bump_closed_form():
    # for a radial density on a disk centred at 0, u solves -Lap u = rho with u = 0 on the boundary
    rho = lambda z: np.where(np.abs(z) < 0.5, 1.0, 0.0)
    e = dirichlet_energy(rho, (0j, 0.5), DomainSpec.disk(), order=48)
    # int int (-g) over the disk of radius R inside the unit disk, uniform density:
    # u(r) = (R^2 - r^2)/4 + (R^2/2) log(1/R) for r < R, energy = 2 pi int u r dr
    R = 0.5
    want = 2 * math.pi * (R**4 / 16 + R**4 / 4 * math.log(1 / R))
    assert abs(e - want) < 1e-6


def test_conformal_identity_exact():
    om = TestFunction.bump(0.1 + 0.2j, 0.4)
    vx, vy = conformal_invariance_check(om, Mobius(1, 0, 0, 1), order=24)
    assert vx == vy


@pytest.mark.parametrize("a", [0.3, -0.2 + 0.4j])
def test_conformal_automorphism(a):
    om = TestFunction.bump(0.2 - 0.1j, 0.35, tilt=0.3)
    vx, vy = conformal_invariance_check(om, Mobius.disk_automorphism(a), order=40)
    assert abs(vx - vy) / vx < 1e-3


def test_conformal_rotation_radial():
    om = TestFunction.bump(0j, 0.5)
    vx, vy = conformal_invariance_check(om, Mobius.disk_automorphism(0, 1.1), order=24)
    assert abs(vx - vy) / vx < 1e-10


def test_conformal_contract_errors():
    om = TestFunction.bump(0j, 0.3)
    with pytest.raises(ContractError):
        conformal_invariance_check(om, Mobius(2, 0, 0, 1))
    with pytest.raises(ContractError):
        conformal_invariance_check(TestFunction.eigen(1, 1), Mobius(1, 0, 0, 1))
    with pytest.raises(ContractError):
        Mobius.disk_automorphism(1.2)
    with pytest.raises(ContractError):
        Mobius(1, 1, 1, 1)


def test_mobius_inverse_and_circle():
    m = Mobius.disk_automorphism(0.3 - 0.1j, 0.4)
    z = np.array([0.1 + 0.2j, -0.5j])
    assert np.allclose(m.inverse()(m(z)), z)
    c, r = m.image_circle(0.2 + 0.1j, 0.3)
    pts = m(0.2 + 0.1j + 0.3 * np.exp(1j * np.linspace(0, 6, 9)))
    assert np.allclose(np.abs(pts - c), r)


def test_moment_stats_and_comparison():
    rng = np.random.default_rng(5)
    x = rng.standard_normal(50_000) * 2
    var, sk, se_sk, ku, se_ku = moment_stats(x)
    assert abs(var / 4 - 1) < 0.03 and abs(sk) < 3 * se_sk and abs(ku) < 3 * se_ku
    g = rng.standard_normal(50_000) * 2 * math.sqrt(math.pi) / 4
    rows = dimer_gff_comparison({0.1: x, 0.05: rng.standard_normal(50_000) * 2}, g, 4.0)
    assert [r.epsilon for r in rows] == [0.1, 0.05]
    assert all(abs(r.variance_ratio - 1) < 0.03 and r.ks_pvalue > 1e-3 for r in rows)


def test_limit_variance_eigen():
    assert abs(limit_variance(SQ, TestFunction.eigen(1, 1), 256) - 16 / (math.pi * 2 * math.pi**2)) < 1e-10
