import numpy as np
import pytest

from pointcomb import (
    GroupDescriptor,
    GroupElement,
    RegionBox,
    character,
    dual_group,
    haar_volume,
    pair,
)
from pointcomb.groups import HAAR_COUNTING, HAAR_NORMALIZED


def test_dual_group_shapes():
    r1 = GroupDescriptor(1)
    assert dual_group(r1).euclidean_dim == 1
    assert dual_group(r1).cyclic_orders == ()

    z2 = GroupDescriptor(0, (2,))
    assert dual_group(z2).cyclic_orders == (2,)

    mixed = GroupDescriptor(2, (3,))
    d = dual_group(mixed)
    assert d.euclidean_dim == 2 and d.cyclic_orders == (3,)


def test_dual_group_flips_finite_haar():
    g = GroupDescriptor(0, (4,))
    assert g.finite_haar == HAAR_NORMALIZED
    d = dual_group(g)
    assert d.finite_haar == HAAR_COUNTING
    assert dual_group(d).finite_haar == HAAR_NORMALIZED
    assert g.finite_total_mass == 1.0
    assert d.finite_total_mass == 4.0


def test_pair_examples():
    r1 = GroupDescriptor(1)
    assert pair(character(r1, real=(0.5,)), GroupElement(r1, real=(2.0,))) == pytest.approx(1.0)

    z2 = GroupDescriptor(0, (2,))
    val = pair(character(z2, finite=(1,)), GroupElement(z2, finite=(1,)))
    assert val == pytest.approx(-1.0, abs=1e-12)

    val = pair(character(r1, real=(0.25,)), GroupElement(r1, real=(1.0,)))
    assert val == pytest.approx(1j, abs=1e-12)


def test_pair_unit_modulus_large_arguments():
    r1 = GroupDescriptor(1)
    for k, x in [(1e6, 123456.789), (3.7, -9.9e5), (0.123456, 7.2e5)]:
        v = pair(character(r1, real=(k,)), GroupElement(r1, real=(x,)))
        assert abs(abs(v) - 1.0) < 1e-12


def test_pair_shape_error():
    r1 = GroupDescriptor(1)
    r2 = GroupDescriptor(2)
    with pytest.raises(ValueError):
        pair(character(r2, real=(1.0, 0.0)), GroupElement(r1, real=(1.0,)))


def test_pair_homomorphism_and_conjugate():
    rng = np.random.default_rng(7)
    g = GroupDescriptor(2, (3, 4))
    for _ in range(50):
        chi = character(g, real=rng.uniform(-3, 3, 2),
                        finite=rng.integers(0, 12, 2))
        x = GroupElement(g, real=rng.uniform(-20, 20, 2),
                         finite=rng.integers(0, 12, 2))
        y = GroupElement(g, real=rng.uniform(-20, 20, 2),
                         finite=rng.integers(0, 12, 2))
        lhs = pair(chi, x + y)
        rhs = pair(chi, x) * pair(chi, y)
        assert abs(lhs - rhs) < 1e-10
        assert abs(pair(chi, -x) - np.conj(pair(chi, x))) < 1e-12


def test_haar_volume_examples():
    r1 = GroupDescriptor(1)
    assert haar_volume(r1, RegionBox((-5.0,), (5.0,))) == pytest.approx(10.0)

    z4 = GroupDescriptor(0, (4,))
    assert haar_volume(z4, RegionBox((), (), frozenset({(0,)}))) == pytest.approx(0.25)

    r2 = GroupDescriptor(2)
    assert haar_volume(r2, RegionBox((0.0, 0.0), (1.0, 2.0))) == pytest.approx(2.0)


def test_haar_volume_counting_side():
    z4 = dual_group(GroupDescriptor(0, (4,)))
    assert haar_volume(z4, RegionBox((), (), frozenset({(0,)}))) == pytest.approx(1.0)
    assert haar_volume(z4, RegionBox((), ())) == pytest.approx(4.0)


def test_haar_volume_degenerate_box():
    r1 = GroupDescriptor(1)
    with pytest.raises(ValueError):
        haar_volume(r1, RegionBox((1.0,), (0.0,)))


def test_haar_volume_additive_over_disjoint_boxes():
    g = GroupDescriptor(1, (2,))
    whole = haar_volume(g, RegionBox((0.0,), (3.0,)))
    left = haar_volume(g, RegionBox((0.0,), (1.2,)))
    right = haar_volume(g, RegionBox((1.2,), (3.0,)))
    assert whole == pytest.approx(left + right)
    half_a = haar_volume(g, RegionBox((0.0,), (3.0,), frozenset({(0,)})))
    half_b = haar_volume(g, RegionBox((0.0,), (3.0,), frozenset({(1,)})))
    assert whole == pytest.approx(half_a + half_b)


def test_residues_are_reduced():
    z6 = GroupDescriptor(0, (6,))
    el = GroupElement(z6, finite=(-1,))
    assert el.finite == (5,)
    assert (el + el).finite == (4,)
