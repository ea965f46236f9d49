"""Exact symbolic pure point measures and their finite materializations.

Three comb shapes are supported: a uniform lattice comb, a crystallographic
comb (finitely many lattice cosets carrying trigonometric-polynomial
weights), and a model comb (a cut-and-project scheme with an internal weight
function).  ``materialize`` is the only bridge to numerical patches, so every
approximation step is explicit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cps import CutProjectScheme, reflect_conjugate_weight
from .errors import UnsupportedTransformError
from .lattices import EuclideanLattice
from .patches import Box, PointMeasurePatch

MATERIALIZE_WEIGHT_FLOOR = 1e-14
CANON_TOL = 1e-9


def _cis(phase):
    """exp(2 pi i phase) with the phase reduced mod 1 first."""
    ph = np.mod(np.asarray(phase, dtype=float), 1.0)
    return np.exp(2j * np.pi * ph)


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """P(x) = sum_j c_j exp(2 pi i f_j . x) with distinct frequencies."""

    freqs: tuple      # of coordinate tuples
    coeffs: tuple     # of complex

    def __post_init__(self):
        freqs = tuple(tuple(float(v) for v in f) for f in self.freqs)
        coeffs = tuple(complex(c) for c in self.coeffs)
        if len(freqs) != len(coeffs):
            raise ValueError("frequency/coefficient count mismatch")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def constant(cls, value, dim):
        return cls(((0.0,) * dim,), (complex(value),))

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape[0], dtype=complex)
        for f, c in zip(self.freqs, self.coeffs):
            out += c * _cis(x @ np.array(f))
        return out

    def abs_coeff_sum(self):
        return sum(abs(c) for c in self.coeffs)


def _merge_terms(freqs, coeffs, tol=CANON_TOL):
    """Sum coefficients of frequencies that coincide within ``tol``."""
    order = sorted(range(len(freqs)), key=lambda i: freqs[i])
    out_f, out_c = [], []
    for i in order:
        f, c = freqs[i], coeffs[i]
        if out_f and all(abs(a - b) <= tol for a, b in zip(out_f[-1], f)):
            out_c[-1] += c
        else:
            out_f.append(f)
            out_c.append(c)
    return out_f, out_c


def canonical_cryst_parts(lattice, translates, polys, tol=CANON_TOL):
    """Reduce translates mod the lattice and frequencies mod its dual.

    Reduction preserves the measure: moving a frequency f -> f - k with k in
    the dual lattice multiplies its coefficient by exp(2 pi i k . tau) on the
    coset of tau, and coinciding translates are merged by adding their
    polynomials.
    """
    dual = lattice.dual()
    reduced = []
    for tau, poly in zip(translates, polys):
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        res, _ = lattice.reduce_mod(tau)
        terms_f, terms_c = [], []
        for f, c in zip(poly.freqs, poly.coeffs):
            fr, _ = dual.reduce_mod(np.array(f))
            k = np.array(f) - fr
            phase = float(np.dot(k, res))
            terms_f.append(tuple(fr))
            terms_c.append(complex(c) * complex(_cis(phase)))
        terms_f, terms_c = _merge_terms(terms_f, terms_c, tol)
        reduced.append((tuple(res), TrigPoly(tuple(terms_f), tuple(terms_c))))

    # merge translates that coincide mod the lattice
    merged = []
    for tau, poly in reduced:
        hit = None
        for idx, (t2, _) in enumerate(merged):
            diff = np.array(tau) - np.array(t2)
            centered, _ = lattice.reduce_mod(diff)
            cc = lattice.coords_of(centered)
            cc = cc - np.rint(cc)
            if np.all(np.abs(cc @ lattice.basis.T) <= tol):
                hit = idx
                break
        if hit is None:
            merged.append((tau, poly))
        else:
            t2, p2 = merged[hit]
            f, c = _merge_terms(
                list(p2.freqs) + list(poly.freqs),
                list(p2.coeffs) + list(poly.coeffs),
                tol,
            )
            merged[hit] = (t2, TrigPoly(tuple(f), tuple(c)))
    merged.sort(key=lambda item: item[0])
    translates = tuple(t for t, _ in merged)
    polys = tuple(p for _, p in merged)
    return translates, polys


@dataclass(frozen=True, eq=False)
class LatticeComb:
    """amplitude * sum_{x in lattice} delta_x."""

    lattice: EuclideanLattice
    amplitude: complex = 1.0 + 0.0j

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    @property
    def dim(self):
        return self.lattice.dim


@dataclass(frozen=True, eq=False)
class CrystComb:
    """sum_i sum_{x in lattice + tau_i} P_i(x) delta_x, stored canonically:
    translates reduced mod the lattice, frequencies mod the dual lattice."""

    lattice: EuclideanLattice
    translates: tuple
    polys: tuple

    def __post_init__(self):
        if len(self.translates) != len(self.polys):
            raise ValueError("one polynomial per translate required")
        t, p = canonical_cryst_parts(self.lattice, self.translates, self.polys)
        object.__setattr__(self, "translates", t)
        object.__setattr__(self, "polys", p)

    @property
    def dim(self):
        return self.lattice.dim


@dataclass(frozen=True, eq=False)
class ModelComb:
    """scale * sum_{x in projected lattice} h(star x) delta_{x + offset}."""

    cps: CutProjectScheme
    weight: object
    scale: complex = 1.0 + 0.0j
    offset: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "scale", complex(self.scale))
        if self.offset is not None:
            off = tuple(float(v) for v in self.offset)
            if len(off) != self.cps.physical_dim:
                raise ValueError("offset dimension mismatch")
            if all(v == 0.0 for v in off):
                off = None
            object.__setattr__(self, "offset", off)

    @property
    def dim(self):
        return self.cps.physical_dim


SymbolicComb = (LatticeComb, CrystComb, ModelComb)


def as_cryst(comb: LatticeComb) -> CrystComb:
    d = comb.dim
    return CrystComb(
        comb.lattice, ((0.0,) * d,), (TrigPoly.constant(comb.amplitude, d),)
    )


# ---------------------------------------------------------------------------
# materialize / translate / reflect
# ---------------------------------------------------------------------------

def materialize(comb, region: Box) -> PointMeasurePatch:
    """Evaluate a symbolic comb pointwise on a bounded region.

    Model-comb weights below ``MATERIALIZE_WEIGHT_FLOOR`` in modulus are
    dropped; with the plain indicator weight this reproduces project_points
    exactly, half-open boundaries included.
    """
    if isinstance(comb, LatticeComb):
        coords, pts = comb.lattice.points_in_box(region.lo, region.hi)
        w = np.full(len(pts), comb.amplitude, dtype=complex)
        return PointMeasurePatch(pts, w, region, int_coords=coords)

    if isinstance(comb, CrystComb):
        all_pos, all_w, all_ic = [], [], []
        for i, (tau, poly) in enumerate(zip(comb.translates, comb.polys)):
            tau = np.array(tau)
            coords, pts = comb.lattice.points_in_box(region.lo - tau, region.hi - tau)
            pos = pts + tau
            all_pos.append(pos)
            all_w.append(poly(pos))
            ic = np.concatenate(
                [np.full((len(coords), 1), i, dtype=np.int64), coords], axis=1
            )
            all_ic.append(ic)
        pos = np.concatenate(all_pos) if all_pos else np.zeros((0, comb.dim))
        w = np.concatenate(all_w) if all_w else np.zeros(0, dtype=complex)
        ic = np.concatenate(all_ic) if all_ic else None
        return PointMeasurePatch(pos, w, region, int_coords=ic)

    if isinstance(comb, ModelComb):
        radius = comb.weight.support_radius()
        if radius is None:
            raise UnsupportedTransformError(
                "cannot materialize a model comb whose weight has unbounded "
                "support; evaluate its atoms at explicit candidates instead"
            )
        gen_region = region
        if comb.offset is not None:
            gen_region = region.shift(-np.array(comb.offset))
        if comb.cps.kind == "euclidean" and comb.cps.internal.euclidean_dim > 0:
            n = comb.cps.internal.euclidean_dim
            coords, phys, stars = comb.cps.enumerate_region(
                gen_region, [-radius - 1e-9] * n, [radius + 1e-9] * n
            )
        else:
            coords, phys, stars = comb.cps.enumerate_region(gen_region)
        w = comb.scale * comb.weight.values(stars)
        keep = np.abs(w) > MATERIALIZE_WEIGHT_FLOOR
        pos = phys[keep]
        if comb.offset is not None:
            pos = pos + np.array(comb.offset)
        return PointMeasurePatch(pos, w[keep], region, int_coords=coords[keep])

    raise TypeError(f"not a symbolic comb: {comb!r}")


def translate_comb(comb, t):
    """Shift every support point by +t; crystallographic translates are
    re-canonicalized, model combs accumulate a physical offset."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if isinstance(comb, LatticeComb):
        return translate_comb(as_cryst(comb), t)
    if isinstance(comb, CrystComb):
        # the translated measure weighs x by P_i(x - t): same frequencies,
        # coefficients picked up the phase exp(-2 pi i f . t)
        polys = tuple(
            TrigPoly(
                p.freqs,
                tuple(
                    c * complex(_cis(-float(np.dot(np.array(f), t))))
                    for f, c in zip(p.freqs, p.coeffs)
                ),
            )
            for p in comb.polys
        )
        return CrystComb(
            comb.lattice,
            tuple(tuple(np.array(tau) + t) for tau in comb.translates),
            polys,
        )
    if isinstance(comb, ModelComb):
        off = np.zeros(comb.dim) if comb.offset is None else np.array(comb.offset)
        new = tuple(off + t)
        return ModelComb(comb.cps, comb.weight, comb.scale, new)
    raise TypeError(f"not a symbolic comb: {comb!r}")


def reflect_conjugate_comb(comb):
    """The measure x -> conj(mu(-x)): support reflected, weights conjugated."""
    if isinstance(comb, LatticeComb):
        return LatticeComb(comb.lattice, comb.amplitude.conjugate())
    if isinstance(comb, CrystComb):
        # new weight at x is conj(P_i(-x)): same frequencies, conjugated
        # coefficients, on the reflected coset
        new_t = tuple(tuple(-v for v in tau) for tau in comb.translates)
        new_p = tuple(
            TrigPoly(p.freqs, tuple(c.conjugate() for c in p.coeffs))
            for p in comb.polys
        )
        return CrystComb(comb.lattice, new_t, new_p)
    if isinstance(comb, ModelComb):
        off = None if comb.offset is None else tuple(-v for v in comb.offset)
        return ModelComb(
            comb.cps,
            reflect_conjugate_weight(comb.weight),
            comb.scale.conjugate(),
            off,
        )
    raise TypeError(f"not a symbolic comb: {comb!r}")
