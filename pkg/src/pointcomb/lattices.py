"""Full-rank Euclidean lattices: enumeration, dual, density, coset reduction."""

from __future__ import annotations

import numpy as np

from .errors import UnboundedRegionError

#: absolute tolerance on point coordinates for membership decisions
MEMBERSHIP_TOL = 1e-9

_ENUM_CHUNK = 2_000_000
_ENUM_LIMIT = 2_000_000_000


class EuclideanLattice:
    """A full-rank lattice in R^D given by an invertible basis matrix.

    Columns of ``basis`` are the generators.  Lattice points are carried with
    their integer coordinates everywhere; floating-point positions are
    derived from them, never primary.
    """

    def __init__(self, basis):
        basis = np.array(basis, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise ValueError("basis must be a square matrix")
        if not np.all(np.isfinite(basis)):
            raise ValueError("basis must be finite")
        det = np.linalg.det(basis)
        scale = max(np.linalg.norm(basis, axis=0).max(), 1e-300)
        if abs(det) <= 1e-12 * scale ** basis.shape[0]:
            raise ValueError("basis is numerically singular")
        basis.setflags(write=False)
        self.basis = basis
        self.dim = basis.shape[0]
        self.det_abs = abs(det)
        self._inv = np.linalg.inv(basis)
        self._inv.setflags(write=False)

    @classmethod
    def from_generators(cls, generators) -> "EuclideanLattice":
        """Build from a list of generator vectors (rows of the argument)."""
        return cls(np.array(generators, dtype=float).T)

    def __repr__(self):
        return f"EuclideanLattice(basis={self.basis.tolist()})"

    def density(self) -> float:
        """Points per unit volume, 1/|det basis|."""
        return 1.0 / self.det_abs

    def dual(self) -> "EuclideanLattice":
        """The annihilator lattice under exp(2 pi i k.x): inverse-transpose basis."""
        return EuclideanLattice(self._inv.T)

    def point(self, coords) -> np.ndarray:
        """Map integer coordinates to the lattice point basis @ coords."""
        coords = np.asarray(coords, dtype=float)
        return coords @ self.basis.T if coords.ndim == 2 else self.basis @ coords

    def coords_of(self, points) -> np.ndarray:
        """Real-valued coordinates of points in this basis."""
        points = np.asarray(points, dtype=float)
        return points @ self._inv.T if points.ndim == 2 else self._inv @ points

    def contains(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        """Boolean mask: which of the given points lie on the lattice."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        c = self.coords_of(pts)
        nearest = np.rint(c)
        err = np.abs((nearest - c) @ self.basis.T)
        return np.all(err <= tol, axis=1)

    def reduce_mod(self, x):
        """Split x = basis @ n + residue with the residue in basis.[0,1)^D.

        Returns ``(residue, n)`` with integer ``n``; the round trip
        reconstructs x to ~1e-9.
        """
        x = np.asarray(x, dtype=float)
        c = self.coords_of(x)
        n = np.floor(c + 1e-12).astype(np.int64)
        if x.ndim == 2:
            residue = x - n.astype(float) @ self.basis.T
        else:
            residue = x - self.basis @ n.astype(float)
        return residue, n

    def points_in_box(self, lo, hi, tol: float = MEMBERSHIP_TOL):
        """All lattice points in the closed box [lo, hi] (within ``tol``).

        Returns ``(coords, points)``: integer coordinates (n, D) in
        lexicographic order and the matching positions (n, D).  The box
        corners are mapped through the inverse basis, the integer bounding
        box is enumerated in memory-bounded chunks, and candidates outside
        the box are filtered out.
        """
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != (self.dim,) or hi.shape != (self.dim,):
            raise ValueError("box bounds must match the lattice dimension")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise UnboundedRegionError("points_in_box requires a bounded box")
        if np.any(hi < lo):
            raise ValueError("box with hi < lo")
        lo_e = lo - tol
        hi_e = hi + tol

        corners = np.array(
            [[(lo_e if (i >> j) & 1 == 0 else hi_e)[j] for j in range(self.dim)]
             for i in range(2 ** self.dim)]
        )
        cc = corners @ self._inv.T
        cmin = np.floor(cc.min(axis=0)).astype(np.int64) - 1
        cmax = np.ceil(cc.max(axis=0)).astype(np.int64) + 1
        sizes = (cmax - cmin + 1).astype(np.int64)
        total = 1
        for s in sizes:
            total *= int(s)
        if total > _ENUM_LIMIT:
            raise UnboundedRegionError(
                f"integer bounding box too large to enumerate ({total} candidates)"
            )

        out_coords = []
        for start in range(0, total, _ENUM_CHUNK):
            idx = np.arange(start, min(start + _ENUM_CHUNK, total), dtype=np.int64)
            coords = np.stack(np.unravel_index(idx, sizes), axis=1) + cmin
            pts = coords @ self.basis.T
            mask = np.all((pts >= lo_e) & (pts <= hi_e), axis=1)
            if mask.any():
                out_coords.append(coords[mask])
        if out_coords:
            coords = np.concatenate(out_coords, axis=0)
        else:
            coords = np.zeros((0, self.dim), dtype=np.int64)
        order = np.lexsort(coords.T[::-1])
        coords = coords[order]
        return coords, coords @ self.basis.T
