"""Cut-and-project schemes with Euclidean or finite internal groups.

A scheme couples a physical space R^d to an internal group H through a
lattice that projects injectively to the physical side and densely to the
internal side.  Windows select internal fibers; weight functions generalize
windows to weighted combs and carry closed-form Fourier transforms so that
every numerical average downstream has an exact counterpart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import UnsupportedTransformError
from .groups import HAAR_NORMALIZED, GroupDescriptor, dual_group
from .lattices import EuclideanLattice
from .patches import Box, PointMeasurePatch

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Windows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalWindow:
    """Half-open interval [a, b) in a 1-dimensional Euclidean internal space.

    Half-open by convention so stars landing exactly on a boundary are
    classified deterministically.
    """

    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("window must have positive length")

    def contains(self, y):
        y = np.asarray(y, dtype=float).reshape(-1)
        return (y >= self.a) & (y < self.b)

    def haar_measure(self, internal: GroupDescriptor) -> float:
        return self.b - self.a

    def bounding_box(self):
        return np.array([self.a]), np.array([self.b])


@dataclass(frozen=True)
class BoxWindow:
    """Half-open axis box prod_i [lo_i, hi_i) in R^n."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ValueError("box window bounds must be nonempty and equal length")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError("box window must have positive volume")

    def contains(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        return np.all((y >= lo) & (y < hi), axis=1)

    def haar_measure(self, internal: GroupDescriptor) -> float:
        return float(np.prod(np.array(self.hi) - np.array(self.lo)))

    def bounding_box(self):
        return np.array(self.lo), np.array(self.hi)


@dataclass(frozen=True)
class UnionWindow:
    """Finite union of pairwise disjoint interval/box windows, so the Haar
    measure stays closed-form."""

    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise ValueError("empty union window")
        boxes = [p.bounding_box() for p in self.parts]
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                lo = np.maximum(boxes[i][0], boxes[j][0])
                hi = np.minimum(boxes[i][1], boxes[j][1])
                if np.all(hi > lo):
                    raise ValueError("union window parts must be pairwise disjoint")

    def contains(self, y):
        masks = [p.contains(y) for p in self.parts]
        return reduce(np.logical_or, masks)

    def haar_measure(self, internal: GroupDescriptor) -> float:
        return sum(p.haar_measure(internal) for p in self.parts)

    def bounding_box(self):
        los = np.stack([p.bounding_box()[0] for p in self.parts])
        his = np.stack([p.bounding_box()[1] for p in self.parts])
        return los.min(axis=0), his.max(axis=0)


@dataclass(frozen=True)
class SubsetWindow:
    """A subset of a finite internal group, given as residue tuples."""

    elements: frozenset

    def __post_init__(self):
        els = frozenset(tuple(int(v) for v in e) for e in self.elements)
        if not els:
            raise ValueError("empty subset window")
        object.__setattr__(self, "elements", els)

    def contains(self, residues):
        residues = np.atleast_2d(np.asarray(residues, dtype=np.int64))
        return np.array([tuple(row) in self.elements for row in residues], dtype=bool)

    def haar_measure(self, internal: GroupDescriptor) -> float:
        if internal.finite_haar == HAAR_NORMALIZED:
            return len(self.elements) / internal.finite_order
        return float(len(self.elements))


# ---------------------------------------------------------------------------
# Weight functions on the internal group and their transforms
# ---------------------------------------------------------------------------
#
# Every weight exposes:
#   values(y)            complex values at internal points (array or residues)
#   support_radius()     radius beyond which it vanishes (None = unbounded)
#   level_radius(level)  radius beyond which |value| < level
#   transform(internal)  the function y -> integral chi_y(t) h(t) dtheta(t)
#                        on the dual internal group


def _interval_transform_values(a, b, y):
    y = np.asarray(y, dtype=float).reshape(-1)
    out = np.empty(y.shape, dtype=complex)
    small = np.abs(y) < 1e-12
    ys = np.where(small, 1.0, y)
    out[:] = (np.exp(2j * np.pi * ys * b) - np.exp(2j * np.pi * ys * a)) / (
        2j * np.pi * ys
    )
    out[small] = b - a
    return out


@dataclass(frozen=True)
class IndicatorWeight:
    """Indicator function of a window."""

    window: object

    def values(self, y):
        return self.window.contains(y).astype(complex)

    def support_radius(self):
        if isinstance(self.window, SubsetWindow):
            return 0.0
        lo, hi = self.window.bounding_box()
        return float(np.max(np.abs(np.concatenate([lo, hi]))))

    def level_radius(self, level):
        return self.support_radius()

    def transform(self, internal: GroupDescriptor):
        if isinstance(self.window, SubsetWindow):
            table = {}
            for t in _enumerate_group(internal.cyclic_orders):
                table[t] = 1.0 + 0.0j if t in self.window.elements else 0.0j
            return TableWeight(table, internal.cyclic_orders).transform(internal)
        if isinstance(self.window, IntervalWindow):
            return IntervalTransform(self.window.a, self.window.b)
        if isinstance(self.window, BoxWindow):
            return BoxTransform(self.window.lo, self.window.hi)
        if isinstance(self.window, UnionWindow):
            terms = tuple(
                (1.0 + 0.0j, IndicatorWeight(p).transform(internal))
                for p in self.window.parts
            )
            return CombinationWeight(terms)
        raise UnsupportedTransformError(f"no transform for window {self.window!r}")


@dataclass(frozen=True)
class TentWeight:
    """The autocorrelation of an interval indicator: max(0, (b-a) - |y|).

    Continuous, compactly supported on (-(b-a), b-a), positive definite.
    """

    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("tent must come from a positive-length interval")

    @property
    def length(self):
        return self.b - self.a

    def values(self, y):
        y = np.asarray(y, dtype=float).reshape(-1)
        return np.maximum(0.0, self.length - np.abs(y)).astype(complex)

    def support_radius(self):
        return self.length

    def level_radius(self, level):
        return self.length

    def transform(self, internal: GroupDescriptor):
        return TentTransform(self.a, self.b)


@dataclass(frozen=True)
class TableWeight:
    """One complex value per element of a finite internal group."""

    table: dict
    orders: tuple

    def __post_init__(self):
        orders = tuple(int(q) for q in self.orders)
        table = {
            tuple(int(v) % q for v, q in zip(k, orders)): complex(c)
            for k, c in self.table.items()
        }
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "table", table)

    def values(self, residues):
        residues = np.atleast_2d(np.asarray(residues, dtype=np.int64))
        return np.array(
            [self.table.get(tuple(int(v) % q for v, q in zip(row, self.orders)), 0.0j)
             for row in residues],
            dtype=complex,
        )

    def support_radius(self):
        return 0.0

    def level_radius(self, level):
        return 0.0

    def transform(self, internal: GroupDescriptor):
        # hat over the primal group: (1/|K|) sum_t chi_b(t) h(t); the dual
        # table lives on the counting-measure side.
        order = 1
        for q in self.orders:
            order *= q
        out = {}
        for b in _enumerate_group(self.orders):
            acc = 0.0j
            for t, h in self.table.items():
                phase = sum(bb * tt / q for bb, tt, q in zip(b, t, self.orders))
                acc += h * complex(math.cos(TWO_PI * phase), math.sin(TWO_PI * phase))
            out[b] = acc / order if internal.finite_haar == HAAR_NORMALIZED else acc
        return TableWeight(out, self.orders)


@dataclass(frozen=True)
class CombinationWeight:
    """Finite complex-linear combination of weights; transforms termwise."""

    terms: tuple  # of (complex coefficient, weight)

    def values(self, y):
        acc = None
        for c, w in self.terms:
            v = complex(c) * w.values(y)
            acc = v if acc is None else acc + v
        return acc

    def support_radius(self):
        radii = [w.support_radius() for _, w in self.terms]
        return None if any(r is None for r in radii) else max(radii)

    def level_radius(self, level):
        k = len(self.terms)
        radii = []
        for c, w in self.terms:
            ac = abs(complex(c))
            if ac == 0.0:
                radii.append(0.0)
                continue
            r = w.level_radius(level / (k * ac))
            if r is None:
                return None
            radii.append(r)
        return max(radii)

    def transform(self, internal: GroupDescriptor):
        return CombinationWeight(
            tuple((complex(c), w.transform(internal)) for c, w in self.terms)
        )


@dataclass(frozen=True)
class IntervalTransform:
    """Closed form of the interval indicator on the dual line:
    y -> (e^{2 pi i y b} - e^{2 pi i y a}) / (2 pi i y), value b-a at 0."""

    a: float
    b: float

    def values(self, y):
        return _interval_transform_values(self.a, self.b, y)

    def support_radius(self):
        return None

    def level_radius(self, level):
        if level <= 0:
            return None
        return max(self.b - self.a, 1.0 / (math.pi * level))

    def transform(self, internal: GroupDescriptor):
        raise UnsupportedTransformError("iterated transforms are not provided")


@dataclass(frozen=True)
class BoxTransform:
    """Product of interval transforms, one per axis."""

    lo: tuple
    hi: tuple

    def values(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        out = np.ones(y.shape[0], dtype=complex)
        for j, (a, b) in enumerate(zip(self.lo, self.hi)):
            out *= _interval_transform_values(a, b, y[:, j])
        return out

    def support_radius(self):
        return None

    def level_radius(self, level):
        if level <= 0:
            return None
        sides = [b - a for a, b in zip(self.lo, self.hi)]
        top = float(np.prod(sides))
        return max(max(sides), top / (math.pi * max(level, 1e-300)))

    def transform(self, internal: GroupDescriptor):
        raise UnsupportedTransformError("iterated transforms are not provided")


@dataclass(frozen=True)
class TentTransform:
    """|interval transform|^2: the Fejer-type kernel (sin(pi L y) / (pi y))^2."""

    a: float
    b: float

    def values(self, y):
        v = _interval_transform_values(self.a, self.b, y)
        return (v * np.conj(v)).astype(complex)

    def support_radius(self):
        return None

    def level_radius(self, level):
        if level <= 0:
            return None
        return max(self.b - self.a, 1.0 / (math.pi * math.sqrt(level)))

    def transform(self, internal: GroupDescriptor):
        raise UnsupportedTransformError("iterated transforms are not provided")


@dataclass(frozen=True)
class ReflectedConjugateWeight:
    """y -> conj(inner(-y)); closed under reflection-conjugation of combs."""

    inner: object

    def values(self, y):
        y = np.asarray(y)
        return np.conj(self.inner.values(-y))

    def support_radius(self):
        return self.inner.support_radius()

    def level_radius(self, level):
        return self.inner.level_radius(level)

    def transform(self, internal: GroupDescriptor):
        raise UnsupportedTransformError(
            "transform of a reflected weight is not provided"
        )


def weight_transform(weight, internal: GroupDescriptor):
    """Closed-form transform of a weight on ``internal``, evaluated on the
    dual internal group (convention: integral of chi(t) h(t) dtheta(t))."""
    return weight.transform(internal)


def autocorrelation_weight(weight, internal: GroupDescriptor):
    """The closed form of h * reflected-conj(h) when one exists.

    Interval indicators give the tent, finite tables convolve exactly;
    other variants return None (no closed form in the supported family).
    """
    if isinstance(weight, IndicatorWeight):
        if isinstance(weight.window, IntervalWindow):
            return TentWeight(weight.window.a, weight.window.b)
        if isinstance(weight.window, SubsetWindow):
            table = {
                t: (1.0 + 0.0j if t in weight.window.elements else 0.0j)
                for t in _enumerate_group(internal.cyclic_orders)
            }
            return autocorrelation_weight(
                TableWeight(table, internal.cyclic_orders), internal
            )
        return None
    if isinstance(weight, TableWeight):
        orders = weight.orders
        order = 1
        for q in orders:
            order *= q
        norm = order if internal.finite_haar == HAAR_NORMALIZED else 1
        out = {}
        for s in _enumerate_group(orders):
            acc = 0.0j
            for t in _enumerate_group(orders):
                tm = tuple((a - b) % q for a, b, q in zip(t, s, orders))
                acc += weight.table.get(t, 0.0j) * weight.table.get(tm, 0.0j).conjugate()
            out[s] = acc / norm
        return TableWeight(out, orders)
    return None


def reflect_conjugate_weight(weight):
    if isinstance(weight, TentWeight):
        return weight  # even and real
    if isinstance(weight, TableWeight):
        return TableWeight(
            {tuple(-v % q for v, q in zip(k, weight.orders)): complex(c).conjugate()
             for k, c in weight.table.items()},
            weight.orders,
        )
    if isinstance(weight, ReflectedConjugateWeight):
        return weight.inner
    return ReflectedConjugateWeight(weight)


def _enumerate_group(orders):
    """All residue tuples of prod Z_q in lexicographic order."""
    if not orders:
        return [()]
    out = [()]
    for q in orders:
        out = [t + (r,) for t in out for r in range(q)]
    return out


# ---------------------------------------------------------------------------
# Hermite normal form (column style), for the dual of a finite-internal scheme
# ---------------------------------------------------------------------------

def _hnf_columns(mat):
    """Column-reduce an integer matrix (D x m, rank D) to a lower-triangular
    D x D basis of the lattice its columns generate."""
    a = np.array(mat, dtype=np.int64)
    d, m = a.shape
    cols = [a[:, j].copy() for j in range(m)]
    basis = []
    for row in range(d):
        while True:
            nz = [c for c in cols if c[row] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda c: abs(int(c[row])))
            c0, c1 = nz[0], nz[1]
            c1 -= (c1[row] // c0[row]) * c0
        pivot = None
        rest = []
        for c in cols:
            if pivot is None and c[row] != 0:
                pivot = c
            else:
                rest.append(c)
        if pivot is None:
            raise ValueError("generators do not span the space")
        if pivot[row] < 0:
            pivot = -pivot
        basis.append(pivot)
        cols = rest
    # canonical form: 0 <= B[i][j] < B[i][i] for j < i
    for i in range(d):
        for j in range(i):
            q = basis[j][i] // basis[i][i]
            basis[j] = basis[j] - q * basis[i]
    return np.stack(basis, axis=1)


# ---------------------------------------------------------------------------
# The scheme
# ---------------------------------------------------------------------------

EUCLIDEAN_INTERNAL = "euclidean"
FINITE_INTERNAL = "finite"


class CutProjectScheme:
    """Physical space R^d, internal group H, and a lattice between them.

    Two variants are supported:

    * ``euclidean``: H = R^n and the lattice is a full-rank lattice in
      R^{d+n}; the star map reads off the last n coordinates.
    * ``finite``: H is a finite abelian product and the lattice is the graph
      of a homomorphism from a base lattice in R^d onto H.

    Injectivity of the physical projection and denseness of the internal one
    are checked exactly in the finite variant; in the Euclidean variant they
    are number-theoretic, so construction performs a finite-scale collision
    check and records both as declared assumptions in ``assumptions``.
    """

    def __init__(self):
        raise TypeError("use CutProjectScheme.euclidean or .finite_internal")

    @classmethod
    def _blank(cls):
        return object.__new__(cls)

    # -- constructors --------------------------------------------------

    @classmethod
    def euclidean(cls, lattice: EuclideanLattice, physical_dim: int,
                  check_radius: float = 50.0):
        self = cls._blank()
        d = int(physical_dim)
        n = lattice.dim - d
        if d < 1 or n < 0:
            raise ValueError("need 1 <= physical_dim <= lattice dimension")
        self.kind = EUCLIDEAN_INTERNAL
        self.physical_dim = d
        self.internal = GroupDescriptor(n, ())
        self.lattice = lattice
        self.base = None
        self.star_images = None
        self.dens = 1.0 / lattice.det_abs
        self.assumptions = {}
        self._check_injectivity(check_radius)
        return self

    @classmethod
    def finite_internal(cls, base: EuclideanLattice, star_images, orders,
                        finite_haar: str = HAAR_NORMALIZED):
        self = cls._blank()
        orders = tuple(int(q) for q in orders)
        imgs = np.asarray(star_images, dtype=np.int64)
        if imgs.shape != (base.dim, len(orders)):
            raise ValueError("star_images must be (base dim) x (number of factors)")
        imgs = imgs % np.array(orders, dtype=np.int64)
        imgs.setflags(write=False)
        self.kind = FINITE_INTERNAL
        self.physical_dim = base.dim
        self.internal = GroupDescriptor(0, orders, finite_haar)
        self.lattice = None
        self.base = base
        self.star_images = imgs
        self.dens = base.density() / self.internal.finite_total_mass
        self.assumptions = {}
        self._check_surjectivity()
        return self

    # -- construction checks -------------------------------------------

    def _check_injectivity(self, radius):
        d = self.physical_dim
        n = self.internal.euclidean_dim
        scale = float(np.abs(self.lattice.basis).max())
        r = max(radius, 4.0 * scale)
        lo = np.full(d + n, -r)
        hi = np.full(d + n, r)
        coords, pts = self.lattice.points_in_box(lo, hi)
        nonzero = np.any(coords != 0, axis=1)
        phys = np.abs(pts[nonzero, :d])
        if phys.size and np.any(np.all(phys < 1e-9, axis=1)):
            raise ValueError(
                "physical projection is not injective on the lattice "
                f"(collision found within radius {r})"
            )
        self.assumptions["projection_injective"] = (
            f"no collision among lattice points of radius <= {r}; "
            "assumed beyond that scale"
        )
        self.assumptions["internal_dense"] = (
            "assumed (irrationality condition, not finitely certifiable)"
        )

    def _check_surjectivity(self):
        orders = self.internal.cyclic_orders
        full = self.internal.finite_order
        seen = {(0,) * len(orders)}
        frontier = list(seen)
        gens = [tuple(int(v) for v in row) for row in self.star_images]
        while frontier:
            nxt = []
            for el in frontier:
                for g in gens:
                    cand = tuple((a + b) % q for a, b, q in zip(el, g, orders))
                    if cand not in seen:
                        seen.add(cand)
                        nxt.append(cand)
            frontier = nxt
        if len(seen) != full:
            raise ValueError(
                "star images do not generate the internal group; the internal "
                "projection is not dense"
            )
        self.assumptions["internal_dense"] = "exact: star images generate the group"
        self.assumptions["projection_injective"] = "exact: graph of a homomorphism"

    # -- basic maps ------------------------------------------------------

    @property
    def rank(self):
        return self.lattice.dim if self.kind == EUCLIDEAN_INTERNAL else self.base.dim

    def star(self, coords):
        """Internal image of the lattice point with the given integer coordinates."""
        coords = np.atleast_2d(np.asarray(coords, dtype=np.int64))
        if self.kind == EUCLIDEAN_INTERNAL:
            pts = coords.astype(float) @ self.lattice.basis.T
            return pts[:, self.physical_dim:]
        out = coords @ self.star_images
        return out % np.array(self.internal.cyclic_orders, dtype=np.int64)

    def physical(self, coords):
        coords = np.atleast_2d(np.asarray(coords, dtype=np.int64))
        if self.kind == EUCLIDEAN_INTERNAL:
            pts = coords.astype(float) @ self.lattice.basis.T
            return pts[:, : self.physical_dim]
        return coords.astype(float) @ self.base.basis.T

    def enumerate_region(self, region: Box, star_lo=None, star_hi=None):
        """Lattice points with physical part in ``region``.

        For a Euclidean internal space a bounded internal slab
        [star_lo, star_hi] is required (the fiber is infinite otherwise).
        Returns ``(coords, physical points, stars)``.
        """
        if region.dim != self.physical_dim:
            raise ValueError("region dimension mismatch")
        if self.kind == EUCLIDEAN_INTERNAL:
            n = self.internal.euclidean_dim
            if n > 0 and (star_lo is None or star_hi is None):
                raise ValueError("internal bounds required for a Euclidean internal space")
            lo = np.concatenate([region.lo, np.atleast_1d(star_lo)]) if n else region.lo
            hi = np.concatenate([region.hi, np.atleast_1d(star_hi)]) if n else region.hi
            coords, pts = self.lattice.points_in_box(lo, hi)
            return coords, pts[:, : self.physical_dim], pts[:, self.physical_dim:]
        coords, pts = self.base.points_in_box(region.lo, region.hi)
        return coords, pts, self.star(coords)

    # -- model sets -------------------------------------------------------

    def project_points(self, window, region: Box) -> PointMeasurePatch:
        """The cut-and-project set of ``window`` inside ``region``, as a unit-
        weight patch.  Window membership is exact at half-open boundaries."""
        if self.kind == EUCLIDEAN_INTERNAL and self.internal.euclidean_dim > 0:
            wlo, whi = window.bounding_box()
            pad = 1e-9
            coords, phys, stars = self.enumerate_region(region, wlo - pad, whi + pad)
            mask = window.contains(stars)
        else:
            coords, phys, stars = self.enumerate_region(region)
            mask = window.contains(stars) if self.internal.cyclic_orders else \
                np.ones(len(coords), dtype=bool)
        coords, phys = coords[mask], phys[mask]
        return PointMeasurePatch(
            phys, np.ones(len(phys), dtype=complex), region, int_coords=coords
        )

    def model_set_density(self, window) -> float:
        """Exact density dens(scheme) * Haar measure of the window."""
        return self.dens * window.haar_measure(self.internal)

    def density_estimate(self, window, region: Box) -> float:
        patch = self.project_points(window, region)
        return len(patch) / region.volume()

    # -- duality ----------------------------------------------------------

    def dual(self) -> "CutProjectScheme":
        """The dual scheme on the dual groups, built on the annihilator lattice."""
        if self.kind == EUCLIDEAN_INTERNAL:
            return CutProjectScheme.euclidean(self.lattice.dual(), self.physical_dim)

        orders = self.internal.cyclic_orders
        k = len(orders)
        d = self.base.dim
        v0 = self.base.dual().basis  # columns are dual generators of the base
        lcm = 1
        for q in orders:
            lcm = lcm * q // math.gcd(lcm, q)
        # shift of the physical coordinates (in v0-units, times lcm) induced by
        # each dual-internal generator e_j
        shift = np.zeros((d, k), dtype=np.int64)
        for j, q in enumerate(orders):
            shift[:, j] = -(self.star_images[:, j] * (lcm // q))
        gens = np.concatenate([lcm * np.eye(d, dtype=np.int64), shift], axis=1)
        h = _hnf_columns(gens)
        coord_basis = h.astype(float) / lcm   # dual base lattice, in v0-units
        dual_base = EuclideanLattice(v0 @ coord_basis)

        # star image of each dual generator: the unique b with
        # coords + sum_j b_j * star_images[:, j] / q_j integral
        imgs = np.zeros((d, k), dtype=np.int64)
        for col in range(d):
            c = coord_basis[:, col]
            found = False
            for b in _enumerate_group(orders):
                s = sum(
                    bb * self.star_images[:, j].astype(float) / q
                    for j, (bb, q) in enumerate(zip(b, orders))
                )
                val = c + s
                if np.all(np.abs(val - np.rint(val)) < 1e-9):
                    imgs[col, :] = b
                    found = True
                    break
            if not found:
                raise ValueError("inconsistent star data: no annihilator image found")
        flipped = dual_group(self.internal).finite_haar
        dual_cps = CutProjectScheme.finite_internal(dual_base, imgs, orders, flipped)
        _verify_annihilator(self, dual_cps)
        return dual_cps


def _verify_annihilator(primal: CutProjectScheme, dual: CutProjectScheme):
    """pair((k, b), (x, star x)) = 1 for all generator pairs, to 1e-10."""
    orders = primal.internal.cyclic_orders
    for i in range(primal.base.dim):
        x = primal.base.basis[:, i]
        a = primal.star_images[i, :]
        for l in range(dual.base.dim):
            w = dual.base.basis[:, l]
            b = dual.star_images[l, :]
            phase = float(np.dot(w, x)) + sum(
                int(bb) * int(aa) / q for bb, aa, q in zip(b, a, orders)
            )
            if abs(phase - round(phase)) > 1e-10:
                raise ValueError("dual lattice fails the annihilator identity")


def fibonacci_cps(check_radius: float = 50.0) -> CutProjectScheme:
    """The golden-ratio scheme in R x R whose projected set with window
    [-1, phi-1) is the Fibonacci chain."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    basis = np.array([[1.0, phi], [1.0, 1.0 - phi]])
    return CutProjectScheme.euclidean(EuclideanLattice(basis), 1, check_radius)
