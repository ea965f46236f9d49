"""Finite-scale classification of point sets and pure point measures:
density estimators, uniform-discreteness and window-count tests, difference
set (Meyer-type) consistency, lattice-plus-translates structure recovery,
trigonometric-polynomial fitting, positive-definiteness necessary
conditions, almost-period search, and the crystalline-versus-dense spectrum
dichotomy detector.

Everything here is a consistency statement at a declared finite scale; the
reports record the radius, stride, or index actually checked and never claim
an asymptotic property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CoverageError
from .harmonic import (
    VanHoveBoxes,
    comb_atoms,
    exact_ft,
    fb_spectrum,
)
from .lattices import EuclideanLattice
from .measures import CrystComb, LatticeComb, ModelComb, TrigPoly
from .patches import Box, PointMeasurePatch

SymbolicTypes = (LatticeComb, CrystComb, ModelComb)


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------

def _pairwise_differences(positions, radius, tol=1e-9):
    """Distinct difference vectors of a sorted point array within the radius.

    Returns (diffs, counts): canonical (lexicographically nonnegative)
    representatives including 0, with pair multiplicities.  All pairs are
    enumerated; nothing is matched by tolerance, so no pair can be missed.
    """
    pos = np.atleast_2d(positions)
    m, d = pos.shape
    if m == 0:
        return np.zeros((0, d)), np.zeros(0, dtype=np.int64)
    first = pos[:, 0]
    lo_idx = np.searchsorted(first, first - radius - tol, side="left")
    counts = np.arange(m) - lo_idx + 1
    starts = np.concatenate([[0], np.cumsum(counts)])
    total = int(starts[-1])
    i_idx = np.repeat(np.arange(m), counts)
    rel = np.arange(total) - np.repeat(starts[:-1], counts)
    j_idx = lo_idx[i_idx] + rel
    z = pos[i_idx] - pos[j_idx]
    within = np.all(np.abs(z) <= radius + tol, axis=1)
    z = z[within]
    neg = np.zeros(len(z), dtype=bool)
    undecided = np.ones(len(z), dtype=bool)
    for col in range(d):
        zc = z[:, col]
        neg |= undecided & (zc < -tol)
        undecided &= np.abs(zc) <= tol
    z[neg] = -z[neg]
    order = np.lexsort(z.T[::-1])
    z = z[order]
    if len(z) == 0:
        return np.zeros((0, d)), np.zeros(0, dtype=np.int64)
    new = np.ones(len(z), dtype=bool)
    new[1:] = np.any(np.abs(np.diff(z, axis=0)) > tol, axis=1)
    cstarts = np.nonzero(new)[0]
    sizes = np.diff(np.concatenate([cstarts, [len(z)]]))
    zsum = np.add.reduceat(z, cstarts, axis=0)
    return zsum / sizes[:, None], sizes


def _min_separation(positions, tol=1e-9):
    """Smallest pairwise distance by a sorted sweep on the first coordinate."""
    pos = np.atleast_2d(positions)
    m = pos.shape[0]
    if m < 2:
        return math.inf
    order = np.lexsort(pos.T[::-1])
    pos = pos[order]
    best = math.inf
    for i in range(m - 1):
        j = i + 1
        while j < m and pos[j, 0] - pos[i, 0] < best:
            dist = float(np.linalg.norm(pos[j] - pos[i]))
            if dist < best:
                best = dist
            j += 1
    return best


def _lookup_weights(patch: PointMeasurePatch, queries, tol=1e-9):
    """Weights of the patch at the query points; (values, found mask)."""
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    vals = np.zeros(q.shape[0], dtype=complex)
    found = np.zeros(q.shape[0], dtype=bool)
    grid = max(tol * 10.0, 1e-8)
    table = {}
    for idx, p in enumerate(patch.positions):
        table.setdefault(tuple(np.round(p / grid).astype(np.int64)), []).append(idx)
    d = q.shape[1]
    offsets = [()]
    for _ in range(d):
        offsets = [t + (o,) for t in offsets for o in (-1, 0, 1)]
    for i, p in enumerate(q):
        key = np.round(p / grid).astype(np.int64)
        for off in offsets:
            cand = table.get(tuple(key + np.array(off, dtype=np.int64)))
            if not cand:
                continue
            for idx in cand:
                if np.all(np.abs(patch.positions[idx] - p) <= tol):
                    vals[i] += patch.weights[idx]
                    found[i] = True
    return vals, found


def _sweep_grid(lo, hi, stride, anchor):
    """Stride grid covering [lo, hi] per axis, anchored so ``anchor`` is a
    grid point whenever it is feasible."""
    axes = []
    for l, h, a in zip(lo, hi, anchor):
        if h < l:
            return None
        k0 = math.ceil((l - a) / stride - 1e-12)
        k1 = math.floor((h - a) / stride + 1e-12)
        axes.append(a + stride * np.arange(k0, k1 + 1))
    return axes


def _count_in_windows(positions, win_lo, win_hi, centers_axes, tol=1e-9):
    """Max point count over closed windows centers + [win_lo, win_hi]."""
    pos = np.atleast_2d(positions)
    d = pos.shape[1]
    if any(a.size == 0 for a in centers_axes):
        return 0, None
    if d == 1:
        xs = pos[:, 0]
        grid = centers_axes[0]
        left = np.searchsorted(xs, grid + win_lo[0] - tol, side="left")
        right = np.searchsorted(xs, grid + win_hi[0] + tol, side="right")
        counts = right - left
        k = int(np.argmax(counts))
        return int(counts[k]), np.array([grid[k]])
    best, best_at = 0, None
    mesh = np.meshgrid(*centers_axes, indexing="ij")
    centers = np.stack([m.ravel() for m in mesh], axis=1)
    for c in centers:
        mask = np.all(
            (pos >= c + win_lo - tol) & (pos <= c + win_hi + tol), axis=1
        )
        n = int(mask.sum())
        if n > best:
            best, best_at = n, c
    return best, best_at


# ---------------------------------------------------------------------------
# densities and discreteness
# ---------------------------------------------------------------------------

@dataclass
class DensityProfile:
    rows: list
    stride_divisor: int
    sweep_anchor: tuple
    uudens_growth_flag: bool

    def udens(self):
        return [r["udens"] for r in self.rows]

    def uudens(self):
        return [r["uudens"] for r in self.rows]


def density_profile(patch: PointMeasurePatch, vh: VanHoveBoxes, n_list,
                    stride_divisor: int = 8) -> DensityProfile:
    """Per index n: the plain count density over the region-centered
    translate of A_n, and the sup over swept translates inside the region.

    The sweep grid is anchored at the region center, so the plain estimate
    is one of the swept windows and udens <= uudens holds by construction.
    """
    center = patch.region.center()
    rows = []
    for n in n_list:
        half = n * vh.scale
        if np.any(2 * half > patch.region.sides() + 1e-9):
            raise CoverageError(f"A_{n} does not fit inside the patch region")
        stride = 2.0 * half / stride_divisor
        lo = patch.region.lo + half
        hi = patch.region.hi - half
        axes = _sweep_grid(lo, hi, stride, center)
        vol = vh.volume(n)
        centered = Box(center - half, center + half)
        udens = int(centered.contains_points(patch.positions).sum()) / vol
        best = 0
        if patch.dim == 1:
            xs = patch.positions[:, 0]
            grid = axes[0]
            left = np.searchsorted(xs, grid - half - 1e-9, side="left")
            right = np.searchsorted(xs, grid + half + 1e-9, side="right")
            best = int((right - left).max()) if grid.size else 0
        else:
            best, _ = _count_in_windows(
                patch.positions, np.full(patch.dim, -half),
                np.full(patch.dim, half), axes,
            )
        rows.append({
            "n": int(n),
            "udens": udens,
            "uudens": best / vol,
            "stride": stride,
        })
    growth = len(rows) >= 2 and rows[-1]["uudens"] > 1.5 * max(rows[0]["uudens"], 1e-300)
    return DensityProfile(rows, stride_divisor, tuple(center), growth)


def separation_and_window_counts(positions, kbox: Box, stride: float):
    """Exact minimum pairwise gap and the largest point count in any closed
    translate of ``kbox`` slid at the given stride."""
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    if pos.shape[0] < 1:
        raise ValueError("need at least one point")
    min_gap = _min_separation(pos)
    lo = pos.min(axis=0) - kbox.hi
    hi = pos.max(axis=0) - kbox.lo
    axes = _sweep_grid(lo, hi, stride, pos.min(axis=0) - kbox.lo)
    max_count, at = _count_in_windows(pos, kbox.lo, kbox.hi, axes)
    return min_gap, max_count, at


@dataclass
class FlcReport:
    radius: float
    diff_count: int
    min_separation: float
    meyer_consistent: bool
    separation_tol: float
    witness: tuple = None


def flc_meyer_check(patch: PointMeasurePatch, radius: float,
                    separation_tol: float = 1e-3) -> FlcReport:
    """Difference-set test at finite radius: computes D_R = (supp - supp)
    within ``radius`` and checks that D_R is uniformly separated.

    Consistency at this radius is necessary for the support to sit in a
    Meyer set; it proves nothing beyond the radius checked.
    """
    if np.any(patch.region.sides() < 2 * radius - 1e-9):
        raise CoverageError("patch region must have sides >= 2 * radius")
    diffs, _ = _pairwise_differences(patch.positions, radius)
    full = np.concatenate([diffs, -diffs[np.any(np.abs(diffs) > 1e-12, axis=1)]])
    sep = _min_separation(full)
    witness = None
    if not sep > separation_tol:
        witness = (float(sep),)
    return FlcReport(
        radius=float(radius),
        diff_count=int(len(full)),
        min_separation=float(sep),
        meyer_consistent=bool(sep > separation_tol),
        separation_tol=separation_tol,
        witness=witness,
    )


# ---------------------------------------------------------------------------
# lattice + finite-translates structure
# ---------------------------------------------------------------------------

@dataclass
class StructureFit:
    lattice: EuclideanLattice
    translates: tuple
    max_residual: float
    found: bool
    reason: str = ""
    polys: tuple = None
    fit_residual: float = None
    notes: dict = field(default_factory=dict)


def _agcd(a, b, tol, max_iter=64):
    """Euclid with remainders below ``tol`` treated as zero."""
    a, b = abs(a), abs(b)
    if a < b:
        a, b = b, a
    for _ in range(max_iter):
        if b <= tol:
            return a
        a, b = b, a - math.floor(a / b) * b
    return b if b > tol else a


def detect_structure_1d(points, tol: float = 1e-9, max_translates: int = 20,
                        recurrence_fraction: float = 0.6) -> StructureFit:
    """Find g > 0 and residues F with the points inside gZ + F, at scale tol.

    The generator is the approximate GCD (Euclid with tolerance, 64
    iterations) of the *recurrent* differences: difference values realized by
    nearly as many pairs as the point count allows.  Restricting to
    recurrent differences keeps inter-coset offsets (which need not be
    commensurate with the period) out of the GCD.  Failures are results, not
    exceptions, and carry the best attempt.
    """
    pts = np.sort(np.asarray(points, dtype=float).reshape(-1))
    n = pts.size
    fail = StructureFit(EuclideanLattice([[1.0]]), (), math.inf, False)
    if n < 3:
        fail.reason = "need at least 3 points"
        return fail
    span = float(pts[-1] - pts[0])
    if span <= tol:
        fail.reason = "points are coincident"
        return fail

    diffs, counts = _pairwise_differences(pts[:, None], span / 2.0, tol)
    dvals = diffs[:, 0]
    pos_mask = dvals > 10.0 * tol
    dvals, counts = dvals[pos_mask], counts[pos_mask]
    expected = n * (1.0 - dvals / span)
    recurrent = dvals[counts >= recurrence_fraction * np.maximum(expected, 1.0)]
    if recurrent.size == 0:
        fail.reason = "no recurrent difference (no period at this scale)"
        return fail

    g = float(recurrent[0])
    for z in recurrent[1:]:
        g = _agcd(g, float(z), tol)
        if g <= 10.0 * tol:
            break
    floor = max(10.0 * tol, span * 1e-12)
    if g <= floor:
        fail.reason = "approximate gcd collapsed below tolerance (incommensurate)"
        return fail

    translates, residual = _cluster_residues(pts, g, tol)
    if len(translates) > max_translates:
        fail.reason = (
            f"{len(translates)} residue clusters exceed the translate cap "
            f"{max_translates}"
        )
        fail.notes["g"] = g
        return fail

    g, translates, residual = _refine_structure(pts, g, translates)
    ok = residual <= max(tol, 1e-12)
    return StructureFit(
        EuclideanLattice([[g]]),
        tuple((float(t),) for t in translates),
        float(residual),
        ok,
        "" if ok else f"residual {residual:.3g} above tolerance {tol:.3g}",
        notes={"recurrent_differences": int(recurrent.size)},
    )


def _cluster_residues(pts, g, tol):
    # points sit within tol of their coset, so intra-cluster gaps stay below
    # 2 tol; distinct translates must be separated by more than 4 tol
    res = np.mod(pts, g)
    order = np.argsort(res)
    res = res[order]
    gaps = np.diff(res)
    wrap = (res[0] + g) - res[-1]
    thr = max(4.0 * tol, g * 1e-9)
    cuts = np.nonzero(gaps > thr)[0]
    clusters = np.split(res, cuts + 1)
    if wrap <= thr and len(clusters) > 1:
        clusters[0] = np.concatenate([clusters[-1] - g, clusters[0]])
        clusters = clusters[:-1]
    centers = []
    residual = 0.0
    for c in clusters:
        mid = float(np.mean(c))
        residual = max(residual, float(np.max(np.abs(c - mid))))
        centers.append(mid % g)
    return sorted(centers), residual


def _refine_structure(pts, g, translates):
    """One linear least-squares pass over x = m * g + tau_k with the current
    assignment; improves g and the residues for noisy inputs."""
    translates = np.asarray(translates, dtype=float)
    res = np.mod(pts, g)
    dist = np.abs(res[:, None] - translates[None, :])
    dist = np.minimum(dist, g - dist)
    assign = np.argmin(dist, axis=1)
    m = np.round((pts - translates[assign]) / g)
    k = translates.size
    a = np.zeros((pts.size, k + 1))
    a[:, 0] = m
    a[np.arange(pts.size), 1 + assign] = 1.0
    sol, *_ = np.linalg.lstsq(a, pts, rcond=None)
    g2 = float(sol[0])
    if g2 <= 0:
        g2 = g
        taus = translates
    else:
        taus = sol[1:]
    fitted = m * g2 + taus[assign]
    residual = float(np.max(np.abs(pts - fitted))) if pts.size else math.inf
    taus = np.mod(taus, g2)
    taus[taus > g2 - max(1e-9, g2 * 1e-12)] -= g2  # wrap residues sitting at g back to 0
    taus = np.sort(np.abs(np.where(np.abs(taus) < 1e-15, 0.0, taus)))
    return g2, taus.tolist(), residual


def verify_structure(patch: PointMeasurePatch, lattice: EuclideanLattice,
                     translates) -> float:
    """Max distance from any support point to the nearest coset
    lattice + tau.  Valid when residuals are well below the covering radius
    (coordinates are rounded, not solved as a closest-vector problem)."""
    if len(patch) == 0:
        return 0.0
    best = np.full(len(patch), np.inf)
    for tau in translates:
        shifted = patch.positions - np.atleast_1d(np.asarray(tau, dtype=float))
        c = lattice.coords_of(shifted)
        err = (c - np.rint(c)) @ lattice.basis.T
        best = np.minimum(best, np.linalg.norm(err, axis=1))
    return float(best.max())


def fit_trig_polys(patch: PointMeasurePatch, lattice: EuclideanLattice,
                   translates, coset_tol: float = 1e-6,
                   freq_rel_threshold: float = 1e-6,
                   freq_cap: int = 32) -> StructureFit:
    """Recover per-coset trigonometric polynomials from a patch supported on
    lattice + translates.

    Per coset, the weights on a complete integer-coordinate grid block are
    Fourier-analyzed (exact recovery when the true frequencies sit on the
    block grid), candidate frequencies are mapped to canonical dual-lattice
    representatives, and the coefficients are refined by least squares over
    all coset points.
    """
    translates = [np.atleast_1d(np.asarray(t, dtype=float)) for t in translates]
    d = lattice.dim
    if len(patch) == 0:
        raise ValueError("empty patch")

    # assign every point to its nearest coset
    dists = []
    for tau in translates:
        c = lattice.coords_of(patch.positions - tau)
        err = (c - np.rint(c)) @ lattice.basis.T
        dists.append(np.linalg.norm(err, axis=1))
    dists = np.stack(dists, axis=1)
    assign = np.argmin(dists, axis=1)
    max_residual = float(dists[np.arange(len(patch)), assign].max())
    if max_residual > coset_tol:
        raise ValueError(
            f"patch is not supported on the given structure (residual "
            f"{max_residual:.3g} > {coset_tol:.3g})"
        )

    dual = lattice.dual()
    polys = []
    fit_residual = 0.0
    warnings = {}
    for i, tau in enumerate(translates):
        sel = assign == i
        pts = patch.positions[sel]
        w = patch.weights[sel]
        coords = np.rint(lattice.coords_of(pts - tau)).astype(np.int64)
        block_start, block_shape = _full_block(coords)
        if block_shape is None or int(np.prod(block_shape)) < 32 or np.min(block_shape) < 4:
            raise CoverageError(
                f"coset {i}: no complete integer grid block large enough for "
                "frequency analysis"
            )
        arr = np.zeros(tuple(block_shape), dtype=complex)
        inside = np.all(
            (coords >= block_start) & (coords < block_start + block_shape), axis=1
        )
        arr[tuple((coords[inside] - block_start).T)] = w[inside]
        spec = np.fft.fftn(arr) / arr.size
        amp = np.abs(spec)
        thr = max(freq_rel_threshold * amp.max(), 1e-13)
        bins = np.argwhere(amp > thr)
        if bins.shape[0] > freq_cap:
            warnings[i] = f"{bins.shape[0]} candidate frequencies, keeping top {freq_cap}"
            top = np.argsort(-amp[tuple(bins.T)])[:freq_cap]
            bins = bins[top]
        grid = bins / np.asarray(block_shape, dtype=float)
        freqs = grid @ dual.basis.T  # canonical representatives mod dual lattice
        design = np.exp(2j * np.pi * (pts @ freqs.T))
        coeffs, *_ = np.linalg.lstsq(design, w, rcond=None)
        poly = TrigPoly(tuple(tuple(f) for f in freqs), tuple(coeffs))
        fit_residual = max(fit_residual, float(np.abs(poly(pts) - w).max()))
        polys.append(poly)

    return StructureFit(
        lattice,
        tuple(tuple(t) for t in translates),
        max_residual,
        True,
        polys=tuple(polys),
        fit_residual=float(fit_residual),
        notes={"warnings": warnings} if warnings else {},
    )


def _full_block(coords):
    """Largest complete axis-aligned block of integer coordinates, found by
    greedily trimming the bounding box on the emptiest boundary slab."""
    if coords.shape[0] == 0:
        return None, None
    have = set(map(tuple, coords))
    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    d = coords.shape[1]
    while True:
        shape = hi - lo + 1
        if np.any(shape < 1):
            return None, None
        volume = int(np.prod(shape))
        inside = np.all((coords >= lo) & (coords <= hi), axis=1)
        if int(inside.sum()) == volume:
            return lo, shape.astype(np.int64)
        # trim the boundary slab with the lowest fill
        best_axis, best_side, best_fill = 0, 0, 2.0
        for ax in range(d):
            for side in (0, 1):
                val = lo[ax] if side == 0 else hi[ax]
                slab = coords[:, ax] == val
                slab &= inside
                slab_vol = volume // int(shape[ax])
                fill = int(slab.sum()) / max(slab_vol, 1)
                if fill < best_fill:
                    best_axis, best_side, best_fill = ax, side, fill
        if best_side == 0:
            lo = lo.copy()
            lo[best_axis] += 1
        else:
            hi = hi.copy()
            hi[best_axis] -= 1


def reconstruct_comb(fit: StructureFit) -> CrystComb:
    """Assemble the crystallographic comb described by a successful fit."""
    if not fit.found or fit.polys is None:
        raise ValueError("fit carries no polynomials")
    return CrystComb(fit.lattice, fit.translates, fit.polys)


# ---------------------------------------------------------------------------
# positive definiteness necessary conditions
# ---------------------------------------------------------------------------

@dataclass
class KreinReport:
    passed: bool
    worst_margin: float
    witness: tuple = None
    reason: str = ""


def krein_check(patch: PointMeasurePatch, tol: float) -> KreinReport:
    """Necessary conditions for the atom function a of a positive definite
    pure point measure: |a(x)| <= a(0), and the quadratic bound
    |a(x+t) - a(x)|^2 <= 2 a(0) (a(0) - Re a(t)) over support pairs with
    x + t inside the faithful region (absent atoms count as 0).

    Margins are normalized by a(0) (respectively a(0)^2) so ``tol`` is
    scale-free.  Failures are results carrying the worst witness.
    """
    a0 = patch.weight_at(np.zeros(patch.dim))
    if a0 == 0.0j:
        return KreinReport(False, -math.inf, None, "0 is not in the support")
    if a0.real <= 0 or abs(a0.imag) > tol * max(abs(a0), 1.0):
        return KreinReport(False, -math.inf, None, f"a(0) = {a0} is not real positive")
    a0r = a0.real

    margins = (a0r - np.abs(patch.weights)) / a0r
    worst = float(margins.min())
    witness = tuple(patch.positions[int(np.argmin(margins))])
    if worst < -tol:
        return KreinReport(False, worst, witness, "|a(x)| exceeds a(0)")

    pos, w = patch.positions, patch.weights
    m = len(patch)
    for k in range(m):
        t = pos[k]
        at = w[k]
        rhs = 2.0 * a0r * (a0r - at.real)
        sums = pos + t
        inside = patch.region.contains_points(sums)
        if not inside.any():
            continue
        vals, _ = _lookup_weights(patch, sums[inside])
        lhs = np.abs(vals - w[inside]) ** 2
        marg = (rhs - lhs) / (a0r * a0r)
        kmin = float(marg.min())
        if kmin < worst:
            worst = kmin
            idx = int(np.argmin(marg))
            witness = (tuple(pos[inside][idx]), tuple(t))
    passed = worst >= -tol
    return KreinReport(passed, worst, witness,
                       "" if passed else "quadratic bound violated")


def eps_almost_periods(patch: PointMeasurePatch, eps: float, search_box: Box,
                       tol: float = 1e-9):
    """Translations t in the difference set inside ``search_box`` with
    sup_x |a(x) - a(x - t)| < eps over the overlap region (absent atoms are
    weight 0).  Returns the accepted translations and, in one dimension, the
    largest gap between consecutive ones as a relative-denseness proxy."""
    d = patch.dim
    radius = float(np.max(np.abs(np.concatenate([search_box.lo, search_box.hi]))))
    diffs, _ = _pairwise_differences(patch.positions, radius, tol)
    full = np.concatenate([diffs, -diffs[np.any(np.abs(diffs) > 1e-12, axis=1)]])
    inside = search_box.contains_points(full)
    cands = full[inside]
    order = np.lexsort(cands.T[::-1])
    cands = cands[order]

    accepted = []
    for t in cands:
        overlap = patch.region.intersect(patch.region.shift(t))
        if overlap is None:
            continue
        sup = 0.0
        mask = overlap.contains_points(patch.positions)
        if mask.any():
            vals, _ = _lookup_weights(patch, patch.positions[mask] - t, tol)
            sup = float(np.abs(patch.weights[mask] - vals).max())
        shifted = patch.positions + t
        mask2 = overlap.contains_points(shifted)
        if mask2.any():
            _, found = _lookup_weights(patch, shifted[mask2], tol)
            miss = ~found
            if miss.any():
                sup = max(sup, float(np.abs(patch.weights[mask2][miss]).max()))
        if sup < eps:
            accepted.append(t)
    accepted = np.array(accepted) if accepted else np.zeros((0, d))
    max_gap = None
    if d == 1 and len(accepted) >= 2:
        xs = np.sort(accepted[:, 0])
        max_gap = float(np.diff(xs).max())
    return accepted, max_gap


# ---------------------------------------------------------------------------
# crystalline-versus-dense dichotomy detector
# ---------------------------------------------------------------------------

@dataclass
class DichotomyReport:
    thresholds: tuple
    counts: tuple
    classification: str
    window: tuple
    source: str
    vh_index: int = None

    def to_dict(self):
        return {
            "thresholds": list(self.thresholds),
            "counts": list(self.counts),
            "classification": self.classification,
            "window": list(self.window),
            "source": self.source,
            "vh_index": self.vh_index,
        }


def _classify_counts(counts):
    counts = list(counts)
    if len(counts) < 2:
        return "inconclusive"
    saturating = abs(counts[-1] - counts[-2]) <= 0.1 * max(counts[-1], 1)
    growing = all(
        counts[i + 1] >= 1.5 * counts[i] and counts[i] > 0
        for i in range(len(counts) - 1)
    )
    if saturating:
        return "crystalline-type"
    if growing:
        return "dense-type"
    return "inconclusive"


@dataclass
class ClassificationReport:
    """Bundle of the finite-scale classification results for one patch.

    Every estimate records the scale it was computed at (window, stride,
    van Hove indices, radius); nothing here claims an asymptotic property.
    """

    min_separation: float
    max_count: int
    window: tuple
    sweep_stride: float
    udens: list
    uudens: list
    density_rows: list
    flc: FlcReport
    structure: StructureFit
    dichotomy: DichotomyReport
    witnesses: dict

    def to_dict(self):
        out = {
            "min_separation": self.min_separation if math.isfinite(self.min_separation) else None,
            "max_count": self.max_count,
            "window": [list(self.window[0]), list(self.window[1])],
            "sweep_stride": self.sweep_stride,
            "udens": self.udens,
            "uudens": self.uudens,
            "density_rows": self.density_rows,
            "witnesses": self.witnesses,
        }
        out["flc"] = None if self.flc is None else {
            "radius": self.flc.radius,
            "diff_count": self.flc.diff_count,
            "min_separation": self.flc.min_separation,
            "meyer_consistent": self.flc.meyer_consistent,
        }
        if self.structure is None:
            out["structure"] = None
        else:
            fit = self.structure
            out["structure"] = {
                "found": fit.found,
                "reason": fit.reason,
                "generator": fit.lattice.basis[0, 0] if fit.found else None,
                "translates": [list(t) for t in fit.translates],
                "max_residual": fit.max_residual if math.isfinite(fit.max_residual) else None,
            }
        out["dichotomy"] = None if self.dichotomy is None else self.dichotomy.to_dict()
        return out


def build_classification_report(patch: PointMeasurePatch, *, kbox: Box,
                                sweep_stride: float, vh: VanHoveBoxes = None,
                                n_list=(), flc_radius: float = None,
                                structure_tol: float = 1e-6,
                                dichotomy_subject=None,
                                dichotomy_window: Box = None,
                                dichotomy_thresholds=()) -> ClassificationReport:
    """Run the classification battery on a patch and collect the report."""
    witnesses = {}
    min_gap, max_count, at = separation_and_window_counts(
        patch.positions, kbox, sweep_stride
    )
    if at is not None:
        witnesses["max_count_at"] = [float(v) for v in np.atleast_1d(at)]

    udens = uudens = density_rows = None
    if n_list:
        prof = density_profile(patch, vh, n_list)
        udens, uudens, density_rows = prof.udens(), prof.uudens(), prof.rows

    flc = flc_meyer_check(patch, flc_radius) if flc_radius else None
    if flc is not None and not flc.meyer_consistent:
        witnesses["flc_min_separation"] = flc.min_separation

    structure = None
    if patch.dim == 1:
        structure = detect_structure_1d(patch.positions[:, 0], tol=structure_tol)

    dich = None
    if dichotomy_subject is not None and dichotomy_window is not None \
            and dichotomy_thresholds:
        dich = dichotomy_report(dichotomy_subject, dichotomy_window,
                                dichotomy_thresholds, vh=vh,
                                n=n_list[-1] if n_list else None)
    return ClassificationReport(
        min_separation=min_gap,
        max_count=max_count,
        window=(kbox.lo.tolist(), kbox.hi.tolist()),
        sweep_stride=sweep_stride,
        udens=udens,
        uudens=uudens,
        density_rows=density_rows,
        flc=flc,
        structure=structure,
        dichotomy=dich,
        witnesses=witnesses,
    )


def _refine_peak(patch, vh, n, cluster_freqs, spacing, rounds=2):
    """Zoom twice around a cluster's best frequency; the refined maximum."""
    from .harmonic import fb_coefficient

    vals = [abs(fb_coefficient(patch, [f], vh, n)) for f in cluster_freqs]
    center = float(cluster_freqs[int(np.argmax(vals))])
    best = max(vals)
    step = spacing
    for _ in range(rounds):
        step /= 4.0
        local = center + step * np.arange(-4, 5)
        lv = [abs(fb_coefficient(patch, [f], vh, n)) for f in local]
        k = int(np.argmax(lv))
        if lv[k] > best:
            best = lv[k]
            center = float(local[k])
    return best


def dichotomy_report(subject, window: Box, thresholds, vh: VanHoveBoxes = None,
                     n: int = None, cps=None) -> DichotomyReport:
    """Count spectrum peaks above each threshold and classify the trend.

    A symbolic comb is analyzed through its exact transform (atom masses are
    closed-form, so counts are exact).  A patch uses Fourier-Bohr averaging:
    against dual-projection candidates when a scheme is attached, else a
    uniform grid scan with local refinement (one-dimensional only; grid
    sidelobe floors limit the smallest usable threshold).
    """
    thresholds = tuple(float(t) for t in thresholds)
    if any(b >= a for a, b in zip(thresholds, thresholds[1:])) or not thresholds:
        raise ValueError("thresholds must be strictly decreasing")
    if isinstance(subject, SymbolicTypes):
        pts, masses = comb_atoms(exact_ft(subject), window, min_abs=thresholds[-1])
        absmass = np.abs(masses)
        counts = tuple(int((absmass > eps).sum()) for eps in thresholds)
        return DichotomyReport(
            thresholds, counts, _classify_counts(counts),
            (window.lo.tolist(), window.hi.tolist()), "exact-transform",
        )

    patch = subject
    if vh is None or n is None:
        raise ValueError("patch input needs a van Hove spec and index")
    if cps is not None:
        dual = cps.dual()
        eps_min = thresholds[-1]
        if dual.kind == "euclidean" and dual.internal.euclidean_dim > 0:
            m = dual.internal.euclidean_dim
            slab = max(2.0, cps.dens / (math.pi * eps_min))
            _, phys, _ = dual.enumerate_region(window, [-slab] * m, [slab] * m)
        else:
            _, phys, _ = dual.enumerate_region(window)
        spec = fb_spectrum(patch, phys, vh, n, threshold=eps_min)
        absc = np.abs(spec.coeffs)
        counts = tuple(int((absc > eps).sum()) for eps in thresholds)
        return DichotomyReport(
            thresholds, counts, _classify_counts(counts),
            (window.lo.tolist(), window.hi.tolist()),
            "dual-projection-candidates", vh_index=n,
        )

    if patch.dim != 1:
        raise ValueError("grid scan is one-dimensional; attach a scheme or comb")
    counts = []
    for eps in thresholds:
        # peaks at index n are ~1/n wide, so the scan must resolve that scale
        spacing = min(eps / 4.0, 1.0 / (4.0 * n * vh.scale))
        grid = np.arange(window.lo[0], window.hi[0] + spacing / 2, spacing)
        spec = fb_spectrum(patch, grid[:, None], vh, n, threshold=0.5 * eps)
        accepted = np.sort(spec.freqs[:, 0])
        clusters = 0
        if accepted.size:
            breaks = np.nonzero(np.diff(accepted) > 1.5 * spacing)[0]
            starts = np.concatenate([[0], breaks + 1])
            ends = np.concatenate([breaks + 1, [accepted.size]])
            for a, b in zip(starts, ends):
                peak = _refine_peak(patch, vh, n, accepted[a:b], spacing)
                if peak > eps:
                    clusters += 1
        counts.append(clusters)
    counts = tuple(counts)
    return DichotomyReport(
        thresholds, counts, _classify_counts(counts),
        (window.lo.tolist(), window.hi.tolist()), "grid-scan", vh_index=n,
    )
