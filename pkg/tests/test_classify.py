import math

import numpy as np
import pytest

from pointcomb import (
    Box,
    CrystComb,
    EuclideanLattice,
    IntervalWindow,
    LatticeComb,
    PointMeasurePatch,
    TrigPoly,
    VanHoveBoxes,
    eberlein_autocorrelation,
    materialize,
    materialized,
)
from pointcomb.classify import (
    density_profile,
    detect_structure_1d,
    dichotomy_report,
    eps_almost_periods,
    fit_trig_polys,
    flc_meyer_check,
    krein_check,
    reconstruct_comb,
    separation_and_window_counts,
    verify_structure,
)
from conftest import example_34_points

PHI = (1.0 + math.sqrt(5.0)) / 2.0
Z = EuclideanLattice([[1.0]])
VH1 = VanHoveBoxes(1, 1.0)


def test_density_profile_integer_comb():
    patch = materialize(LatticeComb(Z), Box([-100.0], [100.0]))
    prof = density_profile(patch, VH1, [50])
    row = prof.rows[0]
    assert row["udens"] == pytest.approx(101 / 100)
    assert row["uudens"] == pytest.approx(101 / 100)
    assert row["uudens"] >= row["udens"]


def test_density_profile_unbounded_window_counts():
    pts = example_34_points(100.0)
    patch = PointMeasurePatch(pts[:, None], np.ones(len(pts)), Box([0.0], [100.0]))
    vh = VanHoveBoxes(1, 0.5)
    prof = density_profile(patch, vh, [1])
    assert prof.rows[0]["uudens"] >= 90.0
    assert prof.rows[0]["uudens"] >= prof.rows[0]["udens"]


def test_density_profile_empty_set():
    patch = PointMeasurePatch(np.zeros((0, 1)), np.zeros(0), Box([-50.0], [50.0]))
    prof = density_profile(patch, VH1, [10])
    assert prof.rows[0]["udens"] == 0.0
    assert prof.rows[0]["uudens"] == 0.0


def test_separation_examples(fib_patch_small):
    gap, count, _ = separation_and_window_counts(
        fib_patch_small.positions, Box([0.0], [1.0]), 0.25
    )
    assert gap == pytest.approx(1.0, abs=1e-9)

    pts = np.concatenate([np.arange(0.0, 10.0), np.arange(0.0, 10.0) + 1e-4])
    gap, _, _ = separation_and_window_counts(np.sort(pts)[:, None], Box([0.0], [1.0]), 0.5)
    assert gap == pytest.approx(1e-4, abs=1e-12)

    gap, count, _ = separation_and_window_counts(
        np.array([[0.0], [1.0], [2.0]]), Box([0.0], [2.5]), 0.25
    )
    assert count == 3


def test_window_count_bound_coherence(fib_patch_small):
    kbox = Box([0.0], [1.0])
    _, max_count, _ = separation_and_window_counts(
        fib_patch_small.positions, kbox, 0.25
    )
    assert max_count <= math.ceil(1.0 / 1.0) + 1
    vh = VanHoveBoxes(1, 0.5)
    prof = density_profile(fib_patch_small, vh, [1])
    assert prof.rows[0]["uudens"] <= max_count / kbox.volume() + 1e-9


def test_flc_integer_comb():
    patch = materialize(LatticeComb(Z), Box([-40.0], [40.0]))
    rep = flc_meyer_check(patch, 10.0)
    assert rep.meyer_consistent
    assert rep.min_separation == pytest.approx(1.0)
    assert rep.diff_count == 21


def test_flc_fibonacci_matches_difference_projection(fib_cps, fib_window):
    patch = fib_cps.project_points(fib_window, Box([-25.0], [25.0]))
    rep = flc_meyer_check(patch, 10.0)
    assert rep.meyer_consistent
    # oracle: the projected difference set, stars in the open difference window
    oracle = fib_cps.project_points(IntervalWindow(-PHI, PHI), Box([-10.0], [10.0]))
    ox = oracle.positions[:, 0]
    diffs, _ = __import__("pointcomb.classify", fromlist=["x"])._pairwise_differences(
        patch.positions, 10.0
    )
    for z in diffs[:, 0]:
        assert np.min(np.abs(ox - z)) < 1e-9
    from pointcomb.classify import _min_separation

    assert rep.min_separation >= _min_separation(ox[:, None]) - 1e-9
    assert rep.min_separation > 0.3


def test_flc_flags_accumulating_differences():
    pts = example_34_points(60.0)
    patch = PointMeasurePatch(pts[:, None], np.ones(len(pts)), Box([0.0], [60.0]))
    rep = flc_meyer_check(patch, 5.0, separation_tol=1e-3)
    assert not rep.meyer_consistent


def test_detect_structure_constructed_example():
    fit = detect_structure_1d(np.array([0.0, 1.0, 2.0, 3.0, 0.3, 1.3, 2.3]))
    assert fit.found
    assert fit.lattice.basis[0, 0] == pytest.approx(1.0, abs=1e-12)
    taus = [t[0] for t in fit.translates]
    assert taus == pytest.approx([0.0, 0.3], abs=1e-12)
    assert fit.max_residual < 1e-12


def test_detect_structure_incommensurate_union():
    pts = np.sort(np.concatenate([np.arange(0.0, 50.0),
                                  math.sqrt(2.0) * np.arange(0.0, 36.0)]))
    fit = detect_structure_1d(pts, max_translates=20)
    assert not fit.found


def test_detect_structure_fibonacci_not_found(fib_cps, fib_window):
    patch = fib_cps.project_points(fib_window, Box([0.0], [200.0]))
    fit = detect_structure_1d(patch.positions[:, 0], max_translates=20)
    assert not fit.found


def test_detect_then_verify_consistent():
    rng = np.random.default_rng(4)
    pts = np.sort(np.concatenate([
        0.7 * np.arange(0, 40) + 0.11,
        0.7 * np.arange(0, 40) + 0.37,
    ]))
    fit = detect_structure_1d(pts)
    assert fit.found
    patch = PointMeasurePatch(pts[:, None], np.ones(len(pts)),
                              Box([0.0], [pts[-1] + 1.0]))
    res = verify_structure(patch, fit.lattice, fit.translates)
    assert res <= 1e-9


def test_verify_structure_examples(fib_cps, fib_window):
    comb = CrystComb(Z, ((0.0,), (0.3,)),
                     (TrigPoly.constant(1.0, 1), TrigPoly.constant(2.0, 1)))
    patch = materialize(comb, Box([-20.0], [20.0]))
    assert verify_structure(patch, Z, comb.translates) < 1e-12

    zpatch = materialize(LatticeComb(Z), Box([-20.0], [20.0]))
    res = verify_structure(zpatch, EuclideanLattice([[2.0]]), ((0.0,),))
    assert res == pytest.approx(1.0)

    fib = fib_cps.project_points(fib_window, Box([0.0], [100.0]))
    res = verify_structure(fib, EuclideanLattice([[3.0 - PHI]]), ((0.0,),))
    assert res > 0.1


def test_fit_trig_polys_example():
    comb = CrystComb(Z, ((0.0,),), (TrigPoly(((0.0,), (0.25,)), (2.0, 1.0)),))
    patch = materialize(comb, Box([0.0], [63.0]))
    fit = fit_trig_polys(patch, Z, comb.translates)
    poly = fit.polys[0]
    got = dict(zip((round(f[0], 9) for f in poly.freqs), poly.coeffs))
    assert set(got) == {0.0, 0.25}
    assert got[0.0] == pytest.approx(2.0, abs=1e-10)
    assert got[0.25] == pytest.approx(1.0, abs=1e-10)
    assert fit.fit_residual < 1e-10


def test_fit_trig_polys_constant_comb():
    patch = materialize(LatticeComb(Z), Box([0.0], [63.0]))
    fit = fit_trig_polys(patch, Z, ((0.0,),))
    assert len(fit.polys[0].freqs) == 1
    assert fit.polys[0].freqs[0][0] == pytest.approx(0.0)
    assert fit.polys[0].coeffs[0] == pytest.approx(1.0)


def test_fit_trig_polys_two_cosets_signs():
    comb = CrystComb(Z, ((0.0,), (0.5,)),
                     (TrigPoly.constant(1.0, 1), TrigPoly.constant(-1.0, 1)))
    patch = materialize(comb, Box([0.0], [63.0]))  # second coset: a 63-point block
    fit = fit_trig_polys(patch, Z, comb.translates)
    assert fit.polys[0].coeffs[0] == pytest.approx(1.0, abs=1e-12)
    assert fit.polys[1].coeffs[0] == pytest.approx(-1.0, abs=1e-12)


def test_fit_round_trip_rematerializes():
    comb = CrystComb(
        Z, ((0.1,), (0.45,)),
        (TrigPoly(((0.0,), (8 / 64,)), (0.5, 1.5)),
         TrigPoly(((24 / 64,),), (2.0 - 1.0j,))),
    )
    region = Box([-0.05], [63.55])
    patch = materialize(comb, region)
    fit = fit_trig_polys(patch, Z, comb.translates)
    rebuilt = materialize(reconstruct_comb(fit), region)
    assert rebuilt.positions == pytest.approx(patch.positions, abs=1e-9)
    assert rebuilt.weights == pytest.approx(patch.weights, abs=1e-9)


def test_krein_passes_on_autocorrelation(fib_patch_small, fib_vh):
    gamma = eberlein_autocorrelation(fib_patch_small, fib_vh, 200, 5.0)
    tol = 10.0 * fib_vh.boundary_ratio(200, 5.0)
    assert krein_check(gamma, tol).passed


def test_krein_detects_magnitude_violation():
    patch = PointMeasurePatch([[0.0], [1.0]], [1.0, 1.5], Box([-2.0], [2.0]))
    rep = krein_check(patch, 1e-6)
    assert not rep.passed
    assert rep.witness == (1.0,)


def test_krein_integer_comb_tight():
    patch = materialize(LatticeComb(Z), Box([-10.0], [10.0]))
    rep = krein_check(patch, 1e-9)
    assert rep.passed
    assert abs(rep.worst_margin) < 1e-12


def test_krein_requires_positive_mass_at_zero():
    patch = PointMeasurePatch([[1.0]], [1.0], Box([-2.0], [2.0]))
    rep = krein_check(patch, 1e-6)
    assert not rep.passed
    assert "support" in rep.reason


def test_eps_almost_periods_integer_comb():
    patch = materialize(LatticeComb(Z), Box([-30.0], [30.0]))
    accepted, gap = eps_almost_periods(patch, 0.5, Box([0.0], [20.0]))
    assert sorted(accepted[:, 0].tolist()) == pytest.approx(list(range(21)))
    assert gap == pytest.approx(1.0)


def test_eps_almost_periods_modulated_comb():
    comb = CrystComb(Z, ((0.0,),), (TrigPoly(((0.25,),), (1.0,)),))
    patch = materialized(comb, VH1, 40)
    accepted, _ = eps_almost_periods(patch, 0.1, Box([0.0], [20.0]))
    assert len(accepted) >= 2
    for t in accepted[:, 0]:
        assert abs(t / 4.0 - round(t / 4.0)) < 1e-9


def test_eps_almost_periods_fibonacci_autocorrelation(fib_patch_small, fib_vh):
    gamma = eberlein_autocorrelation(fib_patch_small, fib_vh, 200, 60.0)
    a0 = gamma.weight_at([0.0]).real
    accepted, gap = eps_almost_periods(gamma, 0.5 * a0, Box([0.0], [40.0]))
    assert len(accepted) >= 3
    assert gap is not None and gap < 40.0


def test_dichotomy_integer_comb():
    rep = dichotomy_report(LatticeComb(Z), Box([-0.5], [2.5]), (0.3, 0.1, 0.03))
    assert rep.counts == (3, 3, 3)
    assert rep.classification == "crystalline-type"


def test_dichotomy_fibonacci(fib_comb):
    rep = dichotomy_report(fib_comb, Box([0.0], [3.0]), (0.3, 0.1, 0.03, 0.01))
    assert rep.classification == "dense-type"
    for a, b in zip(rep.counts, rep.counts[1:]):
        assert b >= 1.5 * a


def test_dichotomy_cryst_comb():
    comb = CrystComb(Z, ((0.0,), (0.3,)),
                     (TrigPoly.constant(1.0, 1), TrigPoly.constant(1.0, 1)))
    rep = dichotomy_report(comb, Box([-0.5], [2.5]), (0.3, 0.1, 0.03))
    assert rep.classification == "crystalline-type"


def test_dichotomy_lattice_never_dense():
    for basis in ([[1.0]], [[0.7]], [[2.3]]):
        rep = dichotomy_report(LatticeComb(EuclideanLattice(basis)),
                               Box([-0.5], [2.5]), (0.3, 0.1, 0.03, 0.01))
        assert rep.classification != "dense-type"


def test_dichotomy_grid_scan_path():
    patch = materialized(LatticeComb(Z), VH1, 400)
    rep = dichotomy_report(patch, Box([-0.5], [2.5]), (0.4, 0.35),
                           vh=VH1, n=400)
    assert rep.source == "grid-scan"
    assert rep.counts == (3, 3)


def test_dichotomy_rejects_unordered_thresholds():
    with pytest.raises(ValueError):
        dichotomy_report(LatticeComb(Z), Box([-0.5], [0.5]), (0.1, 0.3))
