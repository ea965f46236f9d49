import math

import numpy as np
import pytest

from pointcomb import (
    Box,
    CrystComb,
    EuclideanLattice,
    LatticeComb,
    PointMeasurePatch,
    TrigPoly,
    VanHoveBoxes,
    comb_atoms,
    diffraction_exact,
    diffraction_numeric,
    eberlein_autocorrelation,
    exact_autocorrelation,
    exact_ft,
    fb_coefficient,
    fb_spectrum,
    materialize,
    materialized,
    point_masses,
)
from pointcomb.classify import krein_check
from pointcomb.errors import CoverageError

PHI = (1.0 + math.sqrt(5.0)) / 2.0
Z = EuclideanLattice([[1.0]])
VH1 = VanHoveBoxes(1, 1.0)


def test_00_sign_convention_lock():
    """Transform convention oracle, run before anything else relies on it:
    the comb on 2Z transforms exactly to 0.5 * comb on (1/2)Z, and the
    Fourier-Bohr average of the materialized comb reproduces those masses."""
    two_z = LatticeComb(EuclideanLattice([[2.0]]))
    hat = exact_ft(two_z)
    assert hat.lattice.basis[0, 0] == pytest.approx(0.5)
    assert hat.amplitude == pytest.approx(0.5)

    patch = materialized(two_z, VH1, 200)
    for k in (0.0, 0.5, 1.0):
        c = fb_coefficient(patch, [k], VH1, 200)
        assert abs(c - 0.5) < 5e-3  # boundary term 0.5/400
    for k in (0.25, 0.75):
        assert abs(fb_coefficient(patch, [k], VH1, 200)) < 5e-3


def test_boundary_volume_examples():
    vh = VanHoveBoxes(1, 1.0)
    assert vh.boundary_volume(10, 1.0) == pytest.approx(4.0)  # 22 - 18
    vh2 = VanHoveBoxes(2, 1.0)
    assert vh2.boundary_volume(10, 1.0) == pytest.approx(160.0)  # 484 - 324
    r10 = vh.boundary_ratio(10, 1.0)
    r20 = vh.boundary_ratio(20, 1.0)
    assert r20 == pytest.approx(0.5 * r10)
    with pytest.raises(ValueError):
        vh.boundary_volume(1, 1.5)


def test_fb_coefficient_integer_comb_closed_forms():
    patch = materialized(LatticeComb(Z), VH1, 100)
    assert fb_coefficient(patch, [0.0], VH1, 100) == pytest.approx(201 / 200)
    assert fb_coefficient(patch, [1.0], VH1, 100) == pytest.approx(201 / 200)
    # alternating sum over 201 integers is 1
    assert fb_coefficient(patch, [0.5], VH1, 100) == pytest.approx(1 / 200)


def test_fb_coverage_error():
    patch = materialize(LatticeComb(Z), Box([-50.0], [50.0]))
    with pytest.raises(CoverageError):
        fb_coefficient(patch, [0.0], VH1, 100)


def test_fb_spectrum_threshold_filtering():
    patch = materialized(LatticeComb(Z), VH1, 100)
    spec = fb_spectrum(patch, [[0.0], [0.25], [0.5], [1.0]], VH1, 100, threshold=0.1)
    kept = sorted(spec.freqs[:, 0].tolist())
    assert kept == [0.0, 1.0]


def test_fb_spectrum_empty_patch():
    empty = PointMeasurePatch(np.zeros((0, 1)), np.zeros(0), Box([-200.0], [200.0]))
    spec = fb_spectrum(empty, [[0.0], [0.5]], VH1, 100, threshold=0.0)
    assert len(spec) == 0


def test_fb_spectrum_fibonacci_against_exact(fib_comb, fib_patch_10k, fib_vh):
    hat = exact_ft(fib_comb)
    window = Box([0.0], [3.0])
    pts, masses = comb_atoms(hat, window, min_abs=0.01)
    spec = fb_spectrum(fib_patch_10k, pts, fib_vh, 10_000, threshold=0.01)
    assert len(spec) == len(pts)
    for f, m in zip(pts, masses):
        c = spec.coefficient_at(f)
        assert abs(c - m) < 5e-3


def test_exact_ft_psf():
    hat = exact_ft(LatticeComb(Z))
    assert hat.lattice.basis[0, 0] == pytest.approx(1.0)
    assert hat.amplitude == pytest.approx(1.0)


def test_exact_ft_modulated_comb():
    comb = CrystComb(Z, ((0.0,),), (TrigPoly(((0.25,),), (1.0,)),))
    hat = exact_ft(comb)
    pts, masses = comb_atoms(hat, Box([-2.0], [2.0]))
    assert pts.ravel().tolist() == pytest.approx([-1.75, -0.75, 0.25, 1.25])
    assert masses == pytest.approx(np.ones(4))


def test_exact_ft_merges_coinciding_dual_cosets():
    # frequencies 0.25 and 1.25 land on the same dual coset of Z
    comb = CrystComb(
        Z, ((0.0,),), (TrigPoly(((0.25,), (1.25,)), (1.0, 2.0)),)
    )
    hat = exact_ft(comb)
    assert len(hat.translates) == 1
    pts, masses = comb_atoms(hat, Box([0.0], [0.5]))
    assert pts.ravel().tolist() == pytest.approx([0.25])
    assert masses[0] == pytest.approx(3.0)


def test_exact_ft_cryst_matches_fb_oracle():
    rng = np.random.default_rng(17)
    comb = CrystComb(
        Z,
        ((0.3,), (0.55,)),
        (
            TrigPoly(((100 / 400,), (0.0,)), (0.5 + 0.25j, 0.25)),
            TrigPoly(((40 / 400,),), (1.0 - 0.5j,)),
        ),
    )
    hat = exact_ft(comb)
    patch = materialized(comb, VH1, 200)
    pts, masses = comb_atoms(hat, Box([0.01], [0.99]))
    assert len(pts) >= 2
    for f, m in zip(pts, masses):
        c = fb_coefficient(patch, f, VH1, 200)
        assert abs(c - m) < 1e-12  # grid frequencies cancel exactly at n=200


def test_exact_ft_model_comb_masses(fib_comb, fib_cps):
    hat = exact_ft(fib_comb)
    assert hat.scale == pytest.approx(fib_cps.dens)
    pts, masses = comb_atoms(hat, Box([-0.1], [0.1]), min_abs=0.01)
    at0 = masses[np.argmin(np.abs(pts[:, 0]))]
    assert at0 == pytest.approx(PHI / math.sqrt(5.0), abs=1e-12)


def test_eberlein_integer_comb_closed_form():
    patch = materialized(LatticeComb(Z), VH1, 100)
    gamma = eberlein_autocorrelation(patch, VH1, 100, 3.0)
    zs = gamma.positions[:, 0]
    assert sorted(zs.tolist()) == pytest.approx([-3, -2, -1, 0, 1, 2, 3])
    for z in range(-3, 4):
        expected = (201 - abs(z)) / 200
        assert gamma.weight_at([float(z)]) == pytest.approx(expected)


def test_eberlein_single_atom():
    n = 50
    patch = PointMeasurePatch([[0.0]], [1.0], Box([-n - 1.0], [n + 1.0]))
    gamma = eberlein_autocorrelation(patch, VH1, n, 3.0)
    assert len(gamma) == 1
    assert gamma.weight_at([0.0]) == pytest.approx(1.0 / (2 * n))


def test_eberlein_fibonacci_matches_tent(fib_comb, fib_patch_10k, fib_vh, fib_cps):
    gamma = eberlein_autocorrelation(fib_patch_10k, fib_vh, 10_000, 5.0)
    exact = exact_autocorrelation(fib_comb)
    pts, masses = comb_atoms(exact, gamma.region)
    assert len(pts) == len(gamma)
    lookup = {round(p[0], 6): m for p, m in zip(pts, masses)}
    for z, w in zip(gamma.positions, gamma.weights):
        m = lookup[round(z[0], 6)]
        assert abs(w - m) < 5e-3


def test_eberlein_hermitian_exact():
    comb = CrystComb(
        Z, ((0.0,), (0.4,)),
        (TrigPoly(((0.25,),), (1.0 + 2.0j,)), TrigPoly(((0.1,),), (0.5 - 1.0j,))),
    )
    patch = materialized(comb, VH1, 60)
    gamma = eberlein_autocorrelation(patch, VH1, 60, 4.0)
    for z in gamma.positions:
        assert gamma.weight_at(-z) == np.conj(gamma.weight_at(z))
    a0 = gamma.weight_at(np.zeros(1))
    assert a0.real > 0
    assert np.abs(gamma.weights).max() <= a0.real + 1e-12


def test_eberlein_krein_consistency(fib_patch_small, fib_vh):
    gamma = eberlein_autocorrelation(fib_patch_small, fib_vh, 200, 5.0)
    tol = 10.0 * fib_vh.boundary_ratio(200, 5.0)
    report = krein_check(gamma, tol)
    assert report.passed, report


def test_diffraction_integer_comb():
    spec = diffraction_exact(LatticeComb(Z), Box([-2.5], [2.5]))
    assert len(spec) == 5
    assert np.all(np.abs(spec.coeffs - 1.0) < 1e-12)


def test_diffraction_fibonacci_center_peak(fib_comb):
    spec = diffraction_exact(fib_comb, Box([-0.1], [0.1]), min_intensity=0.01)
    peak = spec.coefficient_at([0.0])
    assert peak.real == pytest.approx((PHI / math.sqrt(5.0)) ** 2, abs=1e-12)


def test_diffraction_numeric_vs_exact(fib_comb, fib_patch_10k, fib_vh):
    window = Box([0.0], [3.0])
    exact = diffraction_exact(fib_comb, window, min_intensity=0.01)
    numeric_amp = fb_spectrum(fib_patch_10k, exact.freqs, fib_vh, 10_000, threshold=0.0)
    numeric = diffraction_numeric(numeric_amp)
    for f, inten in zip(exact.freqs, exact.coeffs):
        got = numeric.coefficient_at(f)
        assert abs(got.real - inten.real) < 1e-2


def test_diffraction_intensities_real_nonnegative(fib_patch_small, fib_vh):
    spec = fb_spectrum(fib_patch_small, [[0.0], [0.7236], [1.17]], fib_vh, 200, 0.0)
    intens = diffraction_numeric(spec)
    assert np.all(np.abs(intens.coeffs.imag) == 0)
    assert np.all(intens.coeffs.real >= 0)


def test_point_masses_cryst():
    comb = CrystComb(
        Z, ((0.25,),), (TrigPoly(((0.5,),), (2.0,)),)
    )
    vals = point_masses(comb, [[0.25], [1.25], [0.5]])
    assert vals[0] == pytest.approx(2.0 * np.exp(2j * np.pi * 0.5 * 0.25))
    assert vals[1] == pytest.approx(2.0 * np.exp(2j * np.pi * 0.5 * 1.25))
    assert vals[2] == pytest.approx(0.0)


def test_psf_consistency_random_lattices():
    """Fourier-Bohr averages of materialized lattice combs approach the
    density at dual points, and decay like O(1/n) at half-dual offsets.

    In one dimension the half-offset phase sums are exactly +-1, so the
    doubled index gives exactly half the value.  In two dimensions the phase
    sums fluctuate with the box boundary, so the decay is checked against
    the explicit alternating-sum envelope instead (triangular bases: inner
    alternating fiber sums are at most one in modulus, leaving at most one
    contribution per outer row)."""
    rng = np.random.default_rng(23)
    one_d = [EuclideanLattice([[rng.uniform(0.5, 2.0)]]) for _ in range(3)]
    two_d = []
    while len(two_d) < 3:
        a, c = rng.uniform(0.7, 1.9, 2)
        b = rng.uniform(-1.0, 1.0)
        if 0.5 <= a * c <= 4.0:
            two_d.append(EuclideanLattice(np.array([[a, 0.0], [b, c]])))
    for lat in one_d + two_d:
        d = lat.dim
        comb = LatticeComb(lat)
        vh = VanHoveBoxes(d, 1.0)
        n = 100 if d == 1 else 60
        patch = materialized(comb, vh, 2 * n)
        dual = lat.dual()
        radius = 2.5 * float(np.abs(dual.basis).max()) + 0.1
        _, dual_pts = dual.points_in_box([-radius] * d, [radius] * d)
        order = np.argsort(np.linalg.norm(dual_pts, axis=1), kind="stable")
        dual_pts = dual_pts[order][:5]
        ratio = vh.boundary_ratio(n, 1.0)
        for f in dual_pts:
            c = fb_coefficient(patch, f, vh, n)
            assert abs(c - lat.density()) <= 2.0 * ratio * max(lat.density(), 1.0)
        if d == 1:
            for h in (0.5, 1.5, 2.5, 3.5, 4.5):
                f = dual.basis @ np.array([h])
                c1 = abs(fb_coefficient(patch, f, vh, n))
                c2 = abs(fb_coefficient(patch, f, vh, 2 * n))
                assert c2 <= 0.5 * c1 + 1e-12
        else:
            a = lat.basis[0, 0]
            for j in range(5):
                f = dual.basis @ np.array([0.0, j + 0.5])
                for m in (n, 2 * n):
                    rows = 2.0 * m / a + 2.0
                    envelope = rows / vh.volume(m)
                    assert abs(fb_coefficient(patch, f, vh, m)) <= envelope


def test_exact_numeric_agreement_bound():
    comb = CrystComb(
        Z, ((0.2,),), (TrigPoly(((0.125,), (0.375,)), (1.0, -0.5j)),)
    )
    hat = exact_ft(comb)
    pts, masses = comb_atoms(hat, Box([0.05], [0.95]))
    for n in (100, 200, 400):
        patch = materialized(comb, VH1, n)
        ratio = VH1.boundary_ratio(n, 1.0)
        bound = 3.0 * comb.polys[0].abs_coeff_sum() * ratio
        for f, m in zip(pts, masses):
            c = fb_coefficient(patch, f, VH1, n)
            assert abs(c - m) <= bound
