"""Cut-and-project schemes, pure point Dirac combs, and their Fourier
analysis: exact symbolic transforms next to Fourier-Bohr averaging over van
Hove boxes, volume-averaged autocorrelation and diffraction, and finite-scale
classification of point sets (densities, discreteness, lattice structure,
spectrum dichotomy)."""

from .cps import (
    BoxWindow,
    CombinationWeight,
    CutProjectScheme,
    IndicatorWeight,
    IntervalWindow,
    SubsetWindow,
    TableWeight,
    TentWeight,
    UnionWindow,
    fibonacci_cps,
    weight_transform,
)
from .groups import (
    Character,
    GroupDescriptor,
    GroupElement,
    RegionBox,
    character,
    dual_group,
    haar_volume,
    pair,
)
from .harmonic import (
    FourierBohrSpectrum,
    VanHoveBoxes,
    comb_atoms,
    diffraction_exact,
    diffraction_numeric,
    eberlein_autocorrelation,
    exact_autocorrelation,
    exact_ft,
    fb_coefficient,
    fb_spectrum,
    materialized,
    point_masses,
)
from .lattices import EuclideanLattice
from .measures import (
    CrystComb,
    LatticeComb,
    ModelComb,
    TrigPoly,
    materialize,
    reflect_conjugate_comb,
    translate_comb,
)
from .patches import (
    Box,
    PointMeasurePatch,
    norm_box,
    norm_sup,
    reflect_conjugate_patch,
    translate_patch,
)

__version__ = "0.1.0"
