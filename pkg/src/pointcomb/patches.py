"""Finite weighted point sets materialized inside a declared region.

A patch is the numerical substrate for every averaging operation.  Its
``region`` is a faithfulness contract: inside that box the patch equals the
underlying measure, so restrictions and averages taken within the region are
exact.  Operations that would shrink faithfulness shrink the region.
"""

from __future__ import annotations

import numpy as np

from .errors import CoverageError, UnboundedRegionError

COINCIDENCE_TOL = 1e-9


class Box:
    """Closed axis-aligned box [lo_1,hi_1] x ... x [lo_d,hi_d]."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be vectors of equal length")
        if np.any(hi < lo):
            raise ValueError("box with hi < lo")
        lo.setflags(write=False)
        hi.setflags(write=False)
        self.lo = lo
        self.hi = hi

    @classmethod
    def centered(cls, radius, dim=1):
        r = float(radius)
        return cls([-r] * dim, [r] * dim)

    @property
    def dim(self):
        return self.lo.shape[0]

    def __repr__(self):
        return f"Box({self.lo.tolist()}, {self.hi.tolist()})"

    def is_bounded(self):
        return bool(np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi)))

    def volume(self):
        return float(np.prod(self.hi - self.lo))

    def sides(self):
        return self.hi - self.lo

    def center(self):
        return 0.5 * (self.lo + self.hi)

    def contains_points(self, points, tol=COINCIDENCE_TOL):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=1)

    def contains_box(self, other, tol=COINCIDENCE_TOL):
        return bool(np.all(other.lo >= self.lo - tol) and np.all(other.hi <= self.hi + tol))

    def shift(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return Box(self.lo + t, self.hi + t)

    def reflect(self):
        return Box(-self.hi, -self.lo)

    def intersect(self, other):
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if np.any(hi < lo):
            return None
        return Box(lo, hi)


def _merge_duplicates(positions, weights, int_coords, tol):
    """Merge points that coincide within ``tol`` (weights added).

    Positions are assumed lexicographically sorted; coincident points from
    overlapping cosets land adjacent and are summed, matching the measure
    semantics.
    """
    n = positions.shape[0]
    if n == 0:
        return positions, weights, int_coords
    keep = np.empty(n, dtype=np.int64)
    keep[0] = 0
    m = 0
    out_w = weights.copy()
    for i in range(1, n):
        if np.all(np.abs(positions[i] - positions[keep[m]]) <= tol):
            out_w[keep[m]] += weights[i]
        else:
            m += 1
            keep[m] = i
    keep = keep[: m + 1]
    ic = int_coords[keep] if int_coords is not None else None
    return positions[keep], out_w[keep], ic


class PointMeasurePatch:
    """Weighted atoms ``sum_j w_j delta_{x_j}`` faithful on ``region``.

    Atoms are stored sorted lexicographically by position (fixing every
    downstream summation order), coincident atoms are merged on
    construction, and optional integer coordinates from the generating
    lattice are carried along for exact pair matching.
    """

    __slots__ = ("positions", "weights", "region", "int_coords")

    def __init__(self, positions, weights, region: Box, int_coords=None, _trusted=False):
        positions = np.asarray(positions, dtype=float).reshape(-1, region.dim)
        weights = np.asarray(weights, dtype=complex).reshape(-1)
        if positions.shape[0] != weights.shape[0]:
            raise ValueError("positions and weights of different lengths")
        if not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite")
        if not region.is_bounded():
            raise UnboundedRegionError("patch region must be bounded")
        if int_coords is not None:
            int_coords = np.asarray(int_coords)
            if int_coords.shape[0] != positions.shape[0]:
                raise ValueError("int_coords length mismatch")
        if not _trusted:
            if positions.size and not np.all(region.contains_points(positions)):
                raise ValueError("some points lie outside the declared region")
            order = np.lexsort(positions.T[::-1])
            positions = positions[order]
            weights = weights[order]
            if int_coords is not None:
                int_coords = int_coords[order]
            positions, weights, int_coords = _merge_duplicates(
                positions, weights, int_coords, COINCIDENCE_TOL
            )
        positions.setflags(write=False)
        weights.setflags(write=False)
        self.positions = positions
        self.weights = weights
        self.region = region
        self.int_coords = int_coords

    @property
    def dim(self):
        return self.region.dim

    def __len__(self):
        return self.positions.shape[0]

    def __repr__(self):
        return f"PointMeasurePatch({len(self)} atoms on {self.region!r})"

    def restrict(self, box: Box) -> "PointMeasurePatch":
        sub = self.region.intersect(box)
        if sub is None:
            raise ValueError("restriction box does not meet the region")
        mask = sub.contains_points(self.positions) if len(self) else np.zeros(0, bool)
        ic = self.int_coords[mask] if self.int_coords is not None else None
        return PointMeasurePatch(
            self.positions[mask], self.weights[mask], sub, ic, _trusted=True
        )

    def require_covers(self, box: Box):
        if not self.region.contains_box(box):
            raise CoverageError(
                f"averaging box {box!r} exceeds the faithful region {self.region!r}"
            )

    def weight_at(self, x, tol=COINCIDENCE_TOL) -> complex:
        """Atom weight at position x (0 if absent)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        mask = np.all(np.abs(self.positions - x) <= tol, axis=1)
        idx = np.nonzero(mask)[0]
        return complex(self.weights[idx].sum()) if idx.size else 0.0j


def translate_patch(patch: PointMeasurePatch, t) -> PointMeasurePatch:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return PointMeasurePatch(
        patch.positions + t,
        patch.weights,
        patch.region.shift(t),
        patch.int_coords,
        _trusted=True,
    )


def reflect_conjugate_patch(patch: PointMeasurePatch) -> PointMeasurePatch:
    return PointMeasurePatch(
        -patch.positions,
        np.conj(patch.weights),
        patch.region.reflect(),
        patch.int_coords,
    )


def norm_sup(patch: PointMeasurePatch) -> float:
    """sup of the atom masses, max_j |w_j|."""
    if len(patch) == 0:
        return 0.0
    return float(np.abs(patch.weights).max())


def norm_box(patch: PointMeasurePatch, kbox: Box, stride=None) -> float:
    """Largest total |weight| in any translate x + kbox with x + kbox inside
    the region, sampled on a stride grid (default stride: min side / 4).

    Windows are half-open per axis, [lo, hi), matching the package-wide
    boundary convention.  A finite patch can only bound the
    translation-bounded norm from below; this reports that lower bound at
    the given stride.
    """
    if kbox.dim != patch.dim:
        raise ValueError("window dimension mismatch")
    if np.any(kbox.sides() > patch.region.sides()):
        raise ValueError("window larger than the patch region")
    if stride is None:
        stride = float(kbox.sides().min()) / 4.0
    if stride <= 0:
        raise ValueError("stride must be positive")
    lo = patch.region.lo - kbox.lo
    hi = patch.region.hi - kbox.hi
    absw = np.abs(patch.weights)
    if len(patch) == 0:
        return 0.0
    if patch.dim == 1:
        xs = patch.positions[:, 0]
        grid = np.arange(lo[0], hi[0] + stride * 0.5, stride)
        left = np.searchsorted(xs, grid + kbox.lo[0] - COINCIDENCE_TOL, side="left")
        right = np.searchsorted(xs, grid + kbox.hi[0], side="left")
        csum = np.concatenate([[0.0], np.cumsum(absw)])
        return float((csum[right] - csum[left]).max()) if grid.size else 0.0
    axes = [np.arange(l, h + stride * 0.5, stride) for l, h in zip(lo, hi)]
    best = 0.0
    for x in _grid_iter(axes):
        mask = np.all(
            (patch.positions >= x + kbox.lo - COINCIDENCE_TOL)
            & (patch.positions < x + kbox.hi),
            axis=1,
        )
        best = max(best, float(absw[mask].sum()))
    return best


def _grid_iter(axes):
    if any(a.size == 0 for a in axes):
        return
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=1)
    for row in flat:
        yield row


def patch_csv_text(patch: PointMeasurePatch, header_lines=()) -> str:
    """CSV export: x_1..x_d,re_weight,im_weight at 17 significant digits,
    with the region recorded on a leading comment line."""
    d = patch.dim
    cols = [f"x_{i + 1}" for i in range(d)] + ["re_weight", "im_weight"]
    lines = [f"# {line}" for line in header_lines]
    lines.append(f"# region: {patch.region.lo.tolist()} {patch.region.hi.tolist()}")
    lines.append(",".join(cols))
    for pos, w in zip(patch.positions, patch.weights):
        vals = [f"{v:.17g}" for v in pos] + [f"{w.real:.17g}", f"{w.imag:.17g}"]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def write_patch_csv(patch: PointMeasurePatch, path, header_lines=()):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(patch_csv_text(patch, header_lines))
