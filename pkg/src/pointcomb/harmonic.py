"""Fourier layer: van Hove boxes, Fourier-Bohr averaging, exact transforms
of symbolic combs, volume-averaged autocorrelation, and diffraction.

Conventions, locked by the forward/backward oracle tests: a character k acts
as exp(2 pi i k.x); the Fourier-Bohr coefficient of a measure at k is the
van Hove mean of exp(-2 pi i k.x) against the measure; internal weight
transforms use the conjugate-free integral, so a lattice comb transforms to
dens * (dual comb) and a model comb to dens * (dual model comb with the
transformed weight).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, UnsupportedTransformError
from .measures import (
    CrystComb,
    LatticeComb,
    ModelComb,
    TrigPoly,
    _cis,
    materialize,
)
from .patches import Box, PointMeasurePatch

PAIR_TOL = 1e-9


# ---------------------------------------------------------------------------
# Van Hove sequence of centered boxes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VanHoveBoxes:
    """The centered family A_n = [-n s, n s]^dim.

    Nested, exhaustive, and with closed-form K-boundary volumes, which makes
    every averaging error bound computable.
    """

    dim: int
    scale: float = 1.0

    def __post_init__(self):
        if self.dim < 1 or self.scale <= 0:
            raise ValueError("need dim >= 1 and scale > 0")

    def box(self, n: int) -> Box:
        return Box.centered(n * self.scale, self.dim)

    def volume(self, n: int) -> float:
        return (2.0 * n * self.scale) ** self.dim

    def boundary_volume(self, n: int, r: float) -> float:
        """Volume of the [-r, r]^dim boundary collar of A_n: outer collar
        plus inner collar, exact for centered boxes."""
        half = n * self.scale
        if not 0 < r < half:
            raise ValueError("need 0 < r < n * scale")
        return (2.0 * (half + r)) ** self.dim - (2.0 * (half - r)) ** self.dim

    def boundary_ratio(self, n: int, r: float) -> float:
        return self.boundary_volume(n, r) / self.volume(n)


# ---------------------------------------------------------------------------
# Fourier-Bohr coefficients of patches
# ---------------------------------------------------------------------------

def fb_coefficient(patch: PointMeasurePatch, freq, vh: VanHoveBoxes, n: int) -> complex:
    """Finite-index Fourier-Bohr coefficient over A_n:
    (1 / vol A_n) sum_{x in A_n} w(x) exp(-2 pi i freq . x).

    A_n must lie inside the faithful region of the patch; otherwise the
    average would silently truncate, so a CoverageError is raised instead.
    """
    box = vh.box(n)
    patch.require_covers(box)
    freq = np.atleast_1d(np.asarray(freq, dtype=float))
    mask = box.contains_points(patch.positions)
    dots = patch.positions[mask] @ freq
    total = np.sum(patch.weights[mask] * np.conj(_cis(dots)))
    return complex(total / vh.volume(n))


@dataclass(eq=False)
class FourierBohrSpectrum:
    """Frequencies with coefficients (or intensities), sorted by decreasing
    modulus; carries the averaging metadata it was produced with."""

    freqs: np.ndarray
    coeffs: np.ndarray
    vh_index: int = None
    threshold: float = None
    vh_scale: float = None
    kind: str = "amplitude"

    def __post_init__(self):
        freqs = np.atleast_2d(np.asarray(self.freqs, dtype=float))
        coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if freqs.shape[0] != coeffs.shape[0]:
            raise ValueError("frequency/coefficient count mismatch")
        order = np.lexsort(freqs.T[::-1])
        freqs, coeffs = freqs[order], coeffs[order]
        order = np.argsort(-np.abs(coeffs), kind="stable")
        self.freqs = freqs[order]
        self.coeffs = coeffs[order]

    def __len__(self):
        return self.coeffs.shape[0]

    def coefficient_at(self, freq, tol=1e-6) -> complex:
        freq = np.atleast_1d(np.asarray(freq, dtype=float))
        mask = np.all(np.abs(self.freqs - freq) <= tol, axis=1)
        idx = np.nonzero(mask)[0]
        return complex(self.coeffs[idx[0]]) if idx.size else 0.0j


def fb_spectrum(patch, candidates, vh, n, threshold) -> FourierBohrSpectrum:
    """Evaluate fb_coefficient at every candidate frequency and keep those
    with modulus above the threshold."""
    box = vh.box(n)
    patch.require_covers(box)
    cand = np.atleast_2d(np.asarray(candidates, dtype=float))
    if cand.size == 0:
        return FourierBohrSpectrum(
            np.zeros((0, patch.dim)), np.zeros(0, complex),
            vh_index=n, threshold=threshold, vh_scale=vh.scale,
        )
    mask = box.contains_points(patch.positions)
    pos = patch.positions[mask]
    w = patch.weights[mask]
    vol = vh.volume(n)
    out = np.zeros(cand.shape[0], dtype=complex)
    chunk = max(1, int(4e6 // max(len(pos), 1)))
    for start in range(0, cand.shape[0], chunk):
        sub = cand[start: start + chunk]
        dots = pos @ sub.T
        out[start: start + chunk] = (w[:, None] * np.conj(_cis(dots))).sum(axis=0) / vol
    keep = np.abs(out) > threshold
    return FourierBohrSpectrum(
        cand[keep], out[keep], vh_index=n, threshold=threshold, vh_scale=vh.scale
    )


# ---------------------------------------------------------------------------
# Exact transforms of symbolic combs
# ---------------------------------------------------------------------------

def exact_ft(comb):
    """The measure-level Fourier transform, as a symbolic comb on the dual
    group.

    * lattice comb: dens * comb on the dual lattice (Poisson summation);
    * crystallographic comb: each coset/frequency pair (tau_i, chi_j, c_ij)
      contributes the dual-coset atom family
      dens * c_ij * exp(-2 pi i (y - chi_j) . tau_i) on dual lattice + chi_j,
      with coinciding dual cosets merged by coefficient addition;
    * model comb: dens * model comb on the dual scheme with the transformed
      weight.
    """
    if isinstance(comb, LatticeComb):
        dens = comb.lattice.density()
        return LatticeComb(comb.lattice.dual(), comb.amplitude * dens)

    if isinstance(comb, CrystComb):
        dens = comb.lattice.density()
        dual = comb.lattice.dual()
        translates = []
        polys = []
        for tau, poly in zip(comb.translates, comb.polys):
            tau_v = np.array(tau)
            for f, c in zip(poly.freqs, poly.coeffs):
                phase = complex(_cis(float(np.dot(np.array(f), tau_v))))
                translates.append(tuple(f))
                polys.append(
                    TrigPoly((tuple(-tau_v),), (dens * c * phase,))
                )
        return CrystComb(dual, tuple(translates), tuple(polys))

    if isinstance(comb, ModelComb):
        if comb.offset is not None:
            raise UnsupportedTransformError(
                "exact transform of a translated model comb is not supported; "
                "transform the centered comb and modulate numerically"
            )
        transformed = comb.weight.transform(comb.cps.internal)
        return ModelComb(comb.cps.dual(), transformed, comb.scale * comb.cps.dens)

    raise TypeError(f"not a symbolic comb: {comb!r}")


def point_masses(comb, freqs, tol=1e-8) -> np.ndarray:
    """Atom masses of a symbolic comb at explicit points (0 off the support).

    For a Euclidean-internal model comb the support is a dense projection
    set, so membership of an arbitrary point is not decidable; use
    ``comb_atoms`` to generate candidates with their masses instead.
    """
    pts = np.atleast_2d(np.asarray(freqs, dtype=float))
    if isinstance(comb, LatticeComb):
        out = np.zeros(pts.shape[0], dtype=complex)
        out[comb.lattice.contains(pts, tol)] = comb.amplitude
        return out
    if isinstance(comb, CrystComb):
        out = np.zeros(pts.shape[0], dtype=complex)
        for tau, poly in zip(comb.translates, comb.polys):
            on = comb.lattice.contains(pts - np.array(tau), tol)
            if on.any():
                out[on] += poly(pts[on])
        return out
    if isinstance(comb, ModelComb):
        if comb.cps.kind != "finite":
            raise UnsupportedTransformError(
                "point masses of a Euclidean-internal model comb require "
                "explicit candidates; use comb_atoms"
            )
        base = comb.cps.base
        off = np.zeros(comb.dim) if comb.offset is None else np.array(comb.offset)
        out = np.zeros(pts.shape[0], dtype=complex)
        shifted = pts - off
        on = base.contains(shifted, tol)
        if on.any():
            coords = np.rint(base.coords_of(shifted[on])).astype(np.int64)
            stars = comb.cps.star(coords)
            out[on] = comb.scale * comb.weight.values(stars)
        return out
    raise TypeError(f"not a symbolic comb: {comb!r}")


def comb_atoms(comb, box: Box, min_abs: float = 0.0):
    """Positions and masses of the comb's atoms inside ``box`` whose modulus
    exceeds ``min_abs``.

    For a model comb whose weight has unbounded support (a transformed
    window), ``min_abs`` must be positive: the closed-form decay bound of the
    weight then truncates the internal search slab.
    """
    if isinstance(comb, LatticeComb):
        _, pts = comb.lattice.points_in_box(box.lo, box.hi)
        masses = np.full(len(pts), comb.amplitude, dtype=complex)
    elif isinstance(comb, CrystComb):
        pos, ms = [], []
        for tau, poly in zip(comb.translates, comb.polys):
            tau_v = np.array(tau)
            _, pts = comb.lattice.points_in_box(box.lo - tau_v, box.hi - tau_v)
            pos.append(pts + tau_v)
            ms.append(poly(pts + tau_v))
        pts = np.concatenate(pos) if pos else np.zeros((0, comb.dim))
        masses = np.concatenate(ms) if ms else np.zeros(0, complex)
    elif isinstance(comb, ModelComb):
        scale_abs = abs(comb.scale)
        radius = comb.weight.support_radius()
        if radius is None:
            if min_abs <= 0 or scale_abs == 0:
                raise UnsupportedTransformError(
                    "atoms of an unbounded-support weight need min_abs > 0"
                )
            radius = comb.weight.level_radius(min_abs / scale_abs)
        gen_box = box if comb.offset is None else box.shift(-np.array(comb.offset))
        if comb.cps.kind == "euclidean" and comb.cps.internal.euclidean_dim > 0:
            m = comb.cps.internal.euclidean_dim
            coords, phys, stars = comb.cps.enumerate_region(
                gen_box, [-radius - 1e-9] * m, [radius + 1e-9] * m
            )
        else:
            coords, phys, stars = comb.cps.enumerate_region(gen_box)
        masses = comb.scale * comb.weight.values(stars)
        pts = phys if comb.offset is None else phys + np.array(comb.offset)
    else:
        raise TypeError(f"not a symbolic comb: {comb!r}")

    keep = np.abs(masses) > min_abs if min_abs > 0 else np.abs(masses) > 0
    pts, masses = pts[keep], masses[keep]
    order = np.lexsort(pts.T[::-1])
    return pts[order], masses[order]


# ---------------------------------------------------------------------------
# Eberlein (volume-averaged) autocorrelation
# ---------------------------------------------------------------------------

def eberlein_autocorrelation(patch, vh, n, max_radius, tol=PAIR_TOL):
    """gamma_n on the difference set, restricted to |z| <= max_radius:

        gamma_n({z}) = (1/vol A_n) sum_{x, x-z in supp cap A_n} w(x) conj(w(x-z))

    Every pair within the radius is enumerated (no tolerance matching can
    miss one), differences are clustered exactly, and the z < 0 half is
    produced as the mirror conjugate, so Hermitian symmetry holds exactly.
    """
    box = vh.box(n)
    patch.require_covers(box)
    R = float(max_radius)
    if R <= 0:
        raise ValueError("max_radius must be positive")
    if R > n * vh.scale:
        raise CoverageError("max_radius exceeds the averaging box")
    d = patch.dim
    out_region = Box.centered(R, d)
    sub = patch.restrict(box)
    vol = vh.volume(n)
    m = len(sub)
    if m == 0:
        return PointMeasurePatch(np.zeros((0, d)), np.zeros(0, complex), out_region)

    pos, w = sub.positions, sub.weights
    first = pos[:, 0]
    lo_idx = np.searchsorted(first, first - R - tol, side="left")
    counts = np.arange(m) - lo_idx + 1
    starts = np.concatenate([[0], np.cumsum(counts)])
    total = int(starts[-1])
    i_idx = np.repeat(np.arange(m), counts)
    rel = np.arange(total) - np.repeat(starts[:-1], counts)
    j_idx = lo_idx[i_idx] + rel

    z = pos[i_idx] - pos[j_idx]
    within = np.all(np.abs(z) <= R + tol, axis=1)
    z, i_idx, j_idx = z[within], i_idx[within], j_idx[within]
    prod = w[i_idx] * np.conj(w[j_idx])

    # canonical sign: keep the lexicographically nonnegative representative
    neg = np.zeros(len(z), dtype=bool)
    undecided = np.ones(len(z), dtype=bool)
    for col in range(d):
        zc = z[:, col]
        neg |= undecided & (zc < -tol)
        undecided &= np.abs(zc) <= tol
    z[neg] = -z[neg]
    prod[neg] = np.conj(prod[neg])
    is_zero = undecided  # i == j pairs only, positions being distinct

    order = np.lexsort(z.T[::-1])
    z, prod, is_zero = z[order], prod[order], is_zero[order]

    # cluster consecutive equal differences
    if len(z) == 0:
        return PointMeasurePatch(np.zeros((0, d)), np.zeros(0, complex), out_region)
    new = np.ones(len(z), dtype=bool)
    new[1:] = np.any(np.abs(np.diff(z, axis=0)) > tol, axis=1)
    cluster_starts = np.nonzero(new)[0]
    sums = np.add.reduceat(prod, cluster_starts)
    zsum = np.add.reduceat(z, cluster_starts, axis=0)
    sizes = np.diff(np.concatenate([cluster_starts, [len(z)]]))
    zmean = zsum / sizes[:, None]
    zero_cluster = is_zero[cluster_starts]
    zmean[zero_cluster] = 0.0
    # gamma(0) = sum |w|^2 is real; strip vectorized-multiply rounding dust
    sums = np.where(zero_cluster, sums.real.astype(complex), sums)

    atoms_z = [zmean]
    atoms_w = [sums / vol]
    mirror = ~zero_cluster
    if mirror.any():
        atoms_z.append(-zmean[mirror])
        atoms_w.append(np.conj(sums[mirror]) / vol)
    return PointMeasurePatch(
        np.concatenate(atoms_z), np.concatenate(atoms_w), out_region
    )


# ---------------------------------------------------------------------------
# Diffraction
# ---------------------------------------------------------------------------

def diffraction_exact(comb, window: Box, min_intensity: float = 0.0) -> FourierBohrSpectrum:
    """Intensities |mass of the transform|^2 on the exact transform support
    inside ``window`` (atoms below ``min_intensity`` dropped)."""
    hat = exact_ft(comb)
    min_abs = math.sqrt(min_intensity) if min_intensity > 0 else 0.0
    pts, masses = comb_atoms(hat, window, min_abs)
    intensities = (masses * np.conj(masses)).real.astype(complex)
    return FourierBohrSpectrum(pts, intensities, kind="intensity")


def diffraction_numeric(spectrum: FourierBohrSpectrum) -> FourierBohrSpectrum:
    """Intensities |c|^2 of a numerically obtained coefficient spectrum."""
    return FourierBohrSpectrum(
        spectrum.freqs,
        (spectrum.coeffs * np.conj(spectrum.coeffs)).real.astype(complex),
        vh_index=spectrum.vh_index,
        threshold=spectrum.threshold,
        vh_scale=spectrum.vh_scale,
        kind="intensity",
    )


def exact_autocorrelation(comb: ModelComb) -> ModelComb:
    """The exact autocorrelation of a model comb:
    dens * |scale|^2 * model comb with weight h * reflected-conj(h)."""
    from .cps import autocorrelation_weight

    if not isinstance(comb, ModelComb):
        raise TypeError("exact autocorrelation is provided for model combs")
    acw = autocorrelation_weight(comb.weight, comb.cps.internal)
    if acw is None:
        raise UnsupportedTransformError(
            "no closed-form autocorrelation weight for this weight variant"
        )
    scale = comb.cps.dens * abs(comb.scale) ** 2
    return ModelComb(comb.cps, acw, scale)


def materialized(comb, vh: VanHoveBoxes, n: int, pad: float = 1.0) -> PointMeasurePatch:
    """Materialize a comb on A_n padded by ``pad`` so A_n itself is covered."""
    half = n * vh.scale + pad
    return materialize(comb, Box.centered(half, vh.dim))


# ---------------------------------------------------------------------------
# Spectrum CSV export
# ---------------------------------------------------------------------------

def spectrum_csv_text(spectrum: FourierBohrSpectrum, header_lines=()) -> str:
    d = spectrum.freqs.shape[1] if len(spectrum) else 1
    cols = [f"re_freq_{i + 1}" for i in range(d)] + ["abs_coeff", "re_coeff", "im_coeff"]
    lines = [f"# {line}" for line in header_lines]
    lines.append(
        f"# vh_index: {spectrum.vh_index} threshold: {spectrum.threshold} "
        f"vh_scale: {spectrum.vh_scale} kind: {spectrum.kind}"
    )
    lines.append(",".join(cols))
    for f, c in zip(spectrum.freqs, spectrum.coeffs):
        vals = [f"{v:.17g}" for v in f]
        vals += [f"{abs(c):.17g}", f"{c.real:.17g}", f"{c.imag:.17g}"]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def write_spectrum_csv(spectrum: FourierBohrSpectrum, path, header_lines=()):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(spectrum_csv_text(spectrum, header_lines))
