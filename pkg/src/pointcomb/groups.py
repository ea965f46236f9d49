"""Descriptors for the supported locally compact abelian groups.

Concrete groups are products R^d x Z_{q_1} x ... x Z_{q_k}.  Haar measure is
Lebesgue on the Euclidean factor; on the finite factor it is either
normalized (total mass 1, the default) or counting measure (the convention
on a dual group, so that Parseval holds with no extra constants).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi

HAAR_NORMALIZED = "normalized"
HAAR_COUNTING = "counting"


@dataclass(frozen=True)
class GroupDescriptor:
    """R^euclidean_dim x prod_i Z_{cyclic_orders[i]} with a fixed Haar normalization."""

    euclidean_dim: int
    cyclic_orders: tuple[int, ...] = ()
    finite_haar: str = HAAR_NORMALIZED

    def __post_init__(self):
        if self.euclidean_dim < 0:
            raise ValueError("euclidean_dim must be >= 0")
        object.__setattr__(self, "cyclic_orders", tuple(int(q) for q in self.cyclic_orders))
        if any(q < 2 for q in self.cyclic_orders):
            raise ValueError("cyclic orders must be >= 2")
        if self.finite_haar not in (HAAR_NORMALIZED, HAAR_COUNTING):
            raise ValueError(f"unknown Haar normalization {self.finite_haar!r}")

    @property
    def finite_order(self) -> int:
        n = 1
        for q in self.cyclic_orders:
            n *= q
        return n

    @property
    def finite_total_mass(self) -> float:
        """Haar mass of the whole finite factor under this normalization."""
        if self.finite_haar == HAAR_NORMALIZED:
            return 1.0
        return float(self.finite_order)

    def same_shape(self, other: "GroupDescriptor") -> bool:
        return (
            self.euclidean_dim == other.euclidean_dim
            and self.cyclic_orders == other.cyclic_orders
        )

    def zero(self) -> "GroupElement":
        return GroupElement(self, (0.0,) * self.euclidean_dim, (0,) * len(self.cyclic_orders))


def dual_group(g: GroupDescriptor) -> GroupDescriptor:
    """Pontryagin dual.  Same shape (R^d and Z_q are self-dual); the Haar
    normalization of the finite factor flips between normalized and counting."""
    flipped = HAAR_COUNTING if g.finite_haar == HAAR_NORMALIZED else HAAR_NORMALIZED
    return GroupDescriptor(g.euclidean_dim, g.cyclic_orders, flipped)


@dataclass(frozen=True)
class GroupElement:
    """A point of its group: real coordinates plus reduced finite residues.

    Characters are represented as elements of the dual descriptor; the
    pairing below interprets them that way.
    """

    group: GroupDescriptor
    real: tuple[float, ...] = ()
    finite: tuple[int, ...] = ()

    def __post_init__(self):
        real = tuple(float(x) for x in self.real)
        if len(real) != self.group.euclidean_dim:
            raise ValueError("real part length does not match the descriptor")
        if len(self.finite) != len(self.group.cyclic_orders):
            raise ValueError("finite part length does not match the descriptor")
        finite = tuple(int(t) % q for t, q in zip(self.finite, self.group.cyclic_orders))
        object.__setattr__(self, "real", real)
        object.__setattr__(self, "finite", finite)

    def __add__(self, other: "GroupElement") -> "GroupElement":
        if not self.group.same_shape(other.group):
            raise ValueError("elements of different groups")
        return GroupElement(
            self.group,
            tuple(a + b for a, b in zip(self.real, other.real)),
            tuple(a + b for a, b in zip(self.finite, other.finite)),
        )

    def __neg__(self) -> "GroupElement":
        return GroupElement(
            self.group,
            tuple(-a for a in self.real),
            tuple(-a for a in self.finite),
        )


Character = GroupElement


def character(g: GroupDescriptor, real=(), finite=()) -> Character:
    """Build a character of ``g`` as an element of the dual descriptor."""
    return GroupElement(dual_group(g), tuple(real), tuple(finite))


def pair(chi: Character, x: GroupElement) -> complex:
    """Character pairing chi(x) = exp(2 pi i (k.x + sum_i b_i t_i / q_i)).

    The phase is reduced mod 1 before exponentiation so large coordinates do
    not lose precision.  The result has unit modulus.
    """
    if not chi.group.same_shape(x.group):
        raise ValueError("character and element have mismatched shapes")
    phase = 0.0
    for k, xr in zip(chi.real, x.real):
        phase += math.fmod(k * xr, 1.0)
    for b, t, q in zip(chi.finite, x.finite, x.group.cyclic_orders):
        phase += math.fmod(b * t / q, 1.0)
    phase = math.fmod(phase, 1.0)
    return complex(math.cos(TWO_PI * phase), math.sin(TWO_PI * phase))


@dataclass(frozen=True)
class RegionBox:
    """An axis-aligned box in the real factor times a subset of the finite factor.

    ``finite_subset`` is a frozenset of residue tuples; ``None`` means the
    whole finite factor.
    """

    real_lo: tuple[float, ...] = ()
    real_hi: tuple[float, ...] = ()
    finite_subset: frozenset = field(default=None)

    def __post_init__(self):
        if len(self.real_lo) != len(self.real_hi):
            raise ValueError("box bounds of different lengths")


def haar_volume(g: GroupDescriptor, box: RegionBox) -> float:
    """Haar measure of ``box``: Lebesgue volume of the real part times the
    normalized (or counting) mass of the finite subset."""
    if len(box.real_lo) != g.euclidean_dim:
        raise ValueError("box dimension does not match the descriptor")
    vol = 1.0
    for lo, hi in zip(box.real_lo, box.real_hi):
        side = hi - lo
        if side < 0:
            raise ValueError("degenerate box: negative side")
        vol *= side
    if box.finite_subset is None:
        count = g.finite_order
    else:
        for el in box.finite_subset:
            if len(el) != len(g.cyclic_orders):
                raise ValueError("finite subset element of wrong length")
        count = len(box.finite_subset)
    if g.finite_haar == HAAR_NORMALIZED:
        return vol * count / g.finite_order
    return vol * count
