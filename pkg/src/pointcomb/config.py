"""Scene configuration: one TOML file per scene, validated before any
computation runs.

A scene holds exactly one of a ``[cps]`` or ``[comb]`` block, a ``[run]``
block with the averaging parameters, and an ``[output]`` block.  Every
validation error names the offending key.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
import tomli

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
)
from .errors import ConfigError
from .lattices import EuclideanLattice
from .measures import CrystComb, LatticeComb, ModelComb, TrigPoly
from .patches import Box


def _complexval(raw, path):
    if isinstance(raw, (int, float)):
        return complex(raw)
    if isinstance(raw, list) and len(raw) == 2:
        return complex(float(raw[0]), float(raw[1]))
    raise ConfigError("expected a number or [re, im] pair", path)


def _require(table, key, path, kind=None):
    if key not in table:
        raise ConfigError("missing required key", f"{path}.{key}")
    val = table[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"expected {kind}", f"{path}.{key}")
    return val


def _matrix(raw, path):
    try:
        m = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"not a numeric matrix: {exc}", path) from None
    if m.ndim != 2:
        raise ConfigError("expected a list of vectors", path)
    return m


def _box(raw, path) -> Box:
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"not numeric: {exc}", path) from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigError("expected per-axis [lo, hi] pairs", path)
    if not np.all(np.isfinite(arr)):
        raise ConfigError("region must be bounded (finite bounds)", path)
    if np.any(arr[:, 1] < arr[:, 0]):
        raise ConfigError("region has hi < lo", path)
    return Box(arr[:, 0], arr[:, 1])


def _window(table, path):
    kind = _require(table, "kind", path, str)
    if kind == "interval":
        return IntervalWindow(float(_require(table, "a", path)),
                              float(_require(table, "b", path)))
    if kind == "box":
        return BoxWindow(tuple(_require(table, "lo", path, list)),
                         tuple(_require(table, "hi", path, list)))
    if kind == "union":
        parts = _require(table, "parts", path, list)
        return UnionWindow(tuple(_window(p, f"{path}.parts[{i}]")
                                 for i, p in enumerate(parts)))
    if kind == "subset":
        els = _require(table, "elements", path, list)
        return SubsetWindow(frozenset(tuple(int(v) for v in e) for e in els))
    raise ConfigError(f"unknown window kind {kind!r}", f"{path}.kind")


def _weight(table, path, window):
    kind = table.get("kind", "indicator")
    if kind == "indicator":
        if window is None:
            raise ConfigError("indicator weight needs a window", path)
        return IndicatorWeight(window)
    if kind == "tent":
        return TentWeight(float(_require(table, "a", path)),
                          float(_require(table, "b", path)))
    if kind == "table":
        orders = tuple(int(q) for q in _require(table, "orders", path, list))
        entries = _require(table, "entries", path, list)
        tab = {}
        for i, e in enumerate(entries):
            res = tuple(int(v) for v in _require(e, "residues", f"{path}.entries[{i}]", list))
            tab[res] = _complexval(_require(e, "value", f"{path}.entries[{i}]"),
                                   f"{path}.entries[{i}].value")
        return TableWeight(tab, orders)
    if kind == "combination":
        terms = _require(table, "terms", path, list)
        built = []
        for i, t in enumerate(terms):
            c = _complexval(_require(t, "coeff", f"{path}.terms[{i}]"),
                            f"{path}.terms[{i}].coeff")
            w = _weight(_require(t, "weight", f"{path}.terms[{i}]", dict),
                        f"{path}.terms[{i}].weight", window)
            built.append((c, w))
        return CombinationWeight(tuple(built))
    raise ConfigError(f"unknown weight kind {kind!r}", f"{path}.kind")


@dataclass
class RunParams:
    region: Box = None
    vh_scale: float = 1.0
    vh_n: int = 100
    threshold: float = 0.01
    tolerance: float = 0.01
    max_radius: float = 5.0
    thresholds: tuple = (0.3, 0.1, 0.03, 0.01)
    frequency_window: Box = None
    min_intensity: float = 0.01
    n_list: tuple = ()
    window_box: Box = None
    sweep_stride: float = 0.25
    flc_radius: float = None
    frequencies: tuple = None
    extras: dict = field(default_factory=dict)


@dataclass
class SceneConfig:
    cps: CutProjectScheme = None
    window: object = None
    weight: object = None
    comb: object = None
    run: RunParams = None
    out_dir: str = "."
    prefix: str = "scene"
    config_hash: str = ""
    source_path: str = ""

    def model_comb(self) -> ModelComb:
        if self.cps is None:
            raise ConfigError("this command needs a [cps] block", "cps")
        return ModelComb(self.cps, self.weight)

    def any_comb(self):
        """The configured symbolic comb: the [comb] block, or the model comb
        assembled from the [cps] block."""
        return self.comb if self.comb is not None else self.model_comb()


def _build_cps(table):
    variant = _require(table, "variant", "cps", str)
    if variant == "euclidean":
        gens = _matrix(_require(table, "generators", "cps"), "cps.generators")
        d = int(_require(table, "physical_dim", "cps"))
        try:
            lat = EuclideanLattice.from_generators(gens)
            return CutProjectScheme.euclidean(lat, d)
        except ValueError as exc:
            raise ConfigError(str(exc), "cps") from None
    if variant == "finite":
        gens = _matrix(_require(table, "base_generators", "cps"), "cps.base_generators")
        orders = [int(q) for q in _require(table, "cyclic_orders", "cps", list)]
        imgs = _require(table, "star_images", "cps", list)
        try:
            base = EuclideanLattice.from_generators(gens)
            return CutProjectScheme.finite_internal(base, imgs, orders)
        except ValueError as exc:
            raise ConfigError(str(exc), "cps") from None
    raise ConfigError(f"unknown cps variant {variant!r}", "cps.variant")


def _build_comb(table):
    variant = _require(table, "variant", "comb", str)
    gens = _matrix(_require(table, "generators", "comb"), "comb.generators")
    try:
        lat = EuclideanLattice.from_generators(gens)
    except ValueError as exc:
        raise ConfigError(str(exc), "comb.generators") from None
    if variant == "lattice":
        amp = _complexval(table.get("amplitude", 1.0), "comb.amplitude")
        return LatticeComb(lat, amp)
    if variant == "cryst":
        translates = _require(table, "translates", "comb", list)
        polys_raw = _require(table, "polys", "comb", list)
        if len(translates) != len(polys_raw):
            raise ConfigError("one polys entry per translate required", "comb.polys")
        polys = []
        for i, p in enumerate(polys_raw):
            terms = _require(p, "terms", f"comb.polys[{i}]", list)
            freqs, coeffs = [], []
            for j, t in enumerate(terms):
                freqs.append(tuple(float(v) for v in
                                   _require(t, "freq", f"comb.polys[{i}].terms[{j}]", list)))
                coeffs.append(_complexval(_require(t, "coeff", f"comb.polys[{i}].terms[{j}]"),
                                          f"comb.polys[{i}].terms[{j}].coeff"))
            polys.append(TrigPoly(tuple(freqs), tuple(coeffs)))
        translates = tuple(tuple(float(v) for v in tau) for tau in translates)
        return CrystComb(lat, translates, tuple(polys))
    raise ConfigError(f"unknown comb variant {variant!r}", "comb.variant")


def _build_run(table) -> RunParams:
    run = RunParams()
    if "region" in table:
        run.region = _box(table["region"], "run.region")
    for key, cast in [("vh_scale", float), ("vh_n", int), ("threshold", float),
                      ("tolerance", float), ("max_radius", float),
                      ("min_intensity", float), ("sweep_stride", float),
                      ("flc_radius", float)]:
        if key in table:
            try:
                setattr(run, key, cast(table[key]))
            except (TypeError, ValueError):
                raise ConfigError("not a number", f"run.{key}") from None
    if run.vh_scale <= 0:
        raise ConfigError("vh_scale must be positive", "run.vh_scale")
    if run.vh_n <= 0:
        raise ConfigError("vh_n must be a positive integer", "run.vh_n")
    if "thresholds" in table:
        run.thresholds = tuple(float(v) for v in table["thresholds"])
    if "frequency_window" in table:
        run.frequency_window = _box(table["frequency_window"], "run.frequency_window")
    if "window_box" in table:
        run.window_box = _box(table["window_box"], "run.window_box")
    if "n_list" in table:
        run.n_list = tuple(int(v) for v in table["n_list"])
    if "frequencies" in table:
        run.frequencies = tuple(tuple(float(v) for v in f) for f in table["frequencies"])
    return run


def load_scene(path) -> SceneConfig:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(str(exc), str(path)) from None
    try:
        data = tomli.loads(raw.decode("utf-8"))
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"parse error: {exc}", str(path)) from None

    scene = SceneConfig()
    scene.source_path = str(path)
    scene.config_hash = hashlib.sha256(raw).hexdigest()[:16]

    has_cps = "cps" in data
    has_comb = "comb" in data
    if has_cps == has_comb:
        raise ConfigError("exactly one of [cps] or [comb] must be present", str(path))
    if has_cps:
        scene.cps = _build_cps(data["cps"])
        if "window" in data["cps"]:
            scene.window = _window(data["cps"]["window"], "cps.window")
        if "weight" in data["cps"]:
            scene.weight = _weight(data["cps"]["weight"], "cps.weight", scene.window)
        elif scene.window is not None:
            scene.weight = IndicatorWeight(scene.window)
        else:
            raise ConfigError("cps needs a window or a weight", "cps.window")
        _check_internal_match(scene)
    else:
        scene.comb = _build_comb(data["comb"])

    scene.run = _build_run(data.get("run", {}))
    out = data.get("output", {})
    scene.out_dir = str(out.get("directory", "."))
    scene.prefix = str(out.get("prefix", "scene"))
    return scene


def _check_internal_match(scene):
    cps = scene.cps
    win = scene.window
    if win is None:
        return
    euclid = cps.kind == "euclidean"
    if euclid and isinstance(win, SubsetWindow):
        raise ConfigError("subset window needs a finite internal group", "cps.window")
    if not euclid and not isinstance(win, SubsetWindow):
        raise ConfigError("finite internal group needs a subset window", "cps.window")
    if euclid:
        n = cps.internal.euclidean_dim
        lo, _ = win.bounding_box()
        if lo.shape[0] != n:
            raise ConfigError(
                f"window dimension {lo.shape[0]} != internal dimension {n}",
                "cps.window",
            )
