"""Command-line front end.

Every subcommand reads one scene file, computes through the library, and
writes CSV/JSON artifacts.  Outputs are deterministic (fixed summation and
sort orders, no timestamps), every file starts with a ``#`` metadata header
echoing the config hash and van Hove parameters, and files are written to a
temporary name and renamed only on success, so failures leave no partial
artifacts.

Exit codes: 0 success, 1 computation-level failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import classify as cl
from . import harmonic as hm
from .config import SceneConfig, load_scene
from .errors import ConfigError, CoverageError, UnsupportedTransformError
from .measures import CrystComb, LatticeComb, ModelComb, materialize
from .patches import Box, PointMeasurePatch, patch_csv_text


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pointcomb",
        description="cut-and-project combs, exact and numerical Fourier analysis",
    )
    parser.add_argument("command", choices=[
        "points", "density", "fb", "exact-ft", "autocorr", "diffract",
        "classify", "psf-check", "dichotomy",
    ])
    parser.add_argument("config", help="scene TOML file")
    parser.add_argument("--tol", type=float, default=None,
                        help="override run.tolerance")
    parser.add_argument("--vh-n", type=int, default=None,
                        help="override run.vh_n")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap internal parallelism (recorded; the pipeline is deterministic)")
    parser.add_argument("--seed", type=int, default=None,
                        help="reserved; the pipeline is deterministic and seed-free")
    args = parser.parse_args(argv)

    try:
        scene = load_scene(args.config)
        if args.tol is not None:
            scene.run.tolerance = args.tol
        if args.vh_n is not None:
            scene.run.vh_n = args.vh_n
        handler = _HANDLERS[args.command]
        outputs, failed = handler(scene)
        _write_outputs(scene, outputs)
        return 1 if failed else 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (CoverageError, UnsupportedTransformError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _write_outputs(scene: SceneConfig, outputs: dict):
    os.makedirs(scene.out_dir, exist_ok=True)
    for name, text in outputs.items():
        path = os.path.join(scene.out_dir, name)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)


def _meta(scene: SceneConfig):
    return [
        f"config: {scene.config_hash}",
        f"van_hove: scale={scene.run.vh_scale:.17g} n={scene.run.vh_n}",
    ]


def _vh(scene: SceneConfig, dim: int) -> hm.VanHoveBoxes:
    return hm.VanHoveBoxes(dim, scene.run.vh_scale)


def _region(scene: SceneConfig, dim: int) -> Box:
    reg = scene.run.region
    if reg is None:
        raise ConfigError("missing required key", "run.region")
    if reg.dim != dim:
        raise ConfigError(
            f"region dimension {reg.dim} != physical dimension {dim}", "run.region"
        )
    return reg


def _scene_patch(scene: SceneConfig, region: Box) -> PointMeasurePatch:
    if scene.cps is not None:
        return materialize(scene.model_comb(), region)
    return materialize(scene.comb, region)


def _patch_text(patch, meta):
    return patch_csv_text(patch, header_lines=meta)


def _json_text(meta, payload) -> str:
    head = "".join(f"# {line}\n" for line in meta)
    return head + json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _comb_dim(scene: SceneConfig) -> int:
    comb = scene.any_comb()
    return comb.dim


# ---------------------------------------------------------------------------
# subcommands; each returns (outputs dict, failed flag)
# ---------------------------------------------------------------------------

def _cmd_points(scene: SceneConfig):
    dim = _comb_dim(scene)
    region = _region(scene, dim)
    patch = _scene_patch(scene, region)
    return {f"{scene.prefix}_points.csv": _patch_text(patch, _meta(scene))}, False


def _cmd_density(scene: SceneConfig):
    dim = _comb_dim(scene)
    region = _region(scene, dim)
    patch = _scene_patch(scene, region)
    vh = _vh(scene, dim)
    payload = {"estimate": len(patch) / region.volume(), "atoms": len(patch)}
    if scene.cps is not None:
        payload["exact"] = scene.cps.model_set_density(scene.window)
        payload["abs_error"] = abs(payload["exact"] - payload["estimate"])
    else:
        payload["exact"] = None
    if scene.run.n_list:
        prof = cl.density_profile(patch, vh, scene.run.n_list)
        payload["profile"] = prof.rows
        payload["uudens_growth_flag"] = prof.uudens_growth_flag
    return {f"{scene.prefix}_density.json": _json_text(_meta(scene), payload)}, False


def _candidate_frequencies(scene: SceneConfig, dim: int):
    run = scene.run
    if run.frequencies is not None:
        return np.array(run.frequencies, dtype=float)
    if scene.cps is None and scene.comb is None:
        raise ConfigError("no candidate frequencies configured", "run.frequencies")
    window = run.frequency_window
    if window is None:
        raise ConfigError("missing frequency_window for candidate generation",
                          "run.frequency_window")
    comb = scene.any_comb()
    pts, _ = hm.comb_atoms(hm.exact_ft(comb), window,
                           min_abs=math.sqrt(max(run.min_intensity, 1e-12)))
    return pts


def _cmd_fb(scene: SceneConfig):
    dim = _comb_dim(scene)
    region = _region(scene, dim)
    patch = _scene_patch(scene, region)
    vh = _vh(scene, dim)
    cand = _candidate_frequencies(scene, dim)
    spec = hm.fb_spectrum(patch, cand, vh, scene.run.vh_n, scene.run.threshold)
    text = _spectrum_text(spec, _meta(scene))
    return {f"{scene.prefix}_spectrum.csv": text}, False


def _spectrum_text(spec, meta):
    return hm.spectrum_csv_text(spec, header_lines=meta)


def _describe_comb(comb) -> dict:
    if isinstance(comb, LatticeComb):
        return {
            "kind": "lattice",
            "basis": comb.lattice.basis.tolist(),
            "amplitude": [comb.amplitude.real, comb.amplitude.imag],
        }
    if isinstance(comb, CrystComb):
        return {
            "kind": "cryst",
            "basis": comb.lattice.basis.tolist(),
            "translates": [list(t) for t in comb.translates],
            "polys": [
                {
                    "terms": [
                        {"freq": list(f), "coeff": [c.real, c.imag]}
                        for f, c in zip(p.freqs, p.coeffs)
                    ]
                }
                for p in comb.polys
            ],
        }
    if isinstance(comb, ModelComb):
        return {
            "kind": "model",
            "scheme": comb.cps.kind,
            "dens": comb.cps.dens,
            "scale": [comb.scale.real, comb.scale.imag],
            "weight": type(comb.weight).__name__,
        }
    return {"kind": "unknown"}


def _cmd_exact_ft(scene: SceneConfig):
    comb = scene.any_comb()
    hat = hm.exact_ft(comb)
    window = scene.run.frequency_window
    if window is None:
        raise ConfigError("missing required key", "run.frequency_window")
    min_abs = math.sqrt(max(scene.run.min_intensity, 1e-12))
    pts, masses = hm.comb_atoms(hat, window, min_abs=min_abs)
    spec = hm.FourierBohrSpectrum(pts, masses, vh_index=None,
                                  threshold=min_abs, vh_scale=scene.run.vh_scale)
    payload = {"transform": _describe_comb(hat), "atoms_in_window": len(spec)}
    return {
        f"{scene.prefix}_exact_ft.json": _json_text(_meta(scene), payload),
        f"{scene.prefix}_exact_spectrum.csv": _spectrum_text(spec, _meta(scene)),
    }, False


def _cmd_autocorr(scene: SceneConfig):
    dim = _comb_dim(scene)
    region = _region(scene, dim)
    patch = _scene_patch(scene, region)
    vh = _vh(scene, dim)
    gamma = hm.eberlein_autocorrelation(patch, vh, scene.run.vh_n, scene.run.max_radius)
    comb = scene.any_comb()
    exact = None
    if isinstance(comb, ModelComb):
        try:
            exact = hm.exact_autocorrelation(comb)
        except UnsupportedTransformError:
            exact = None
    meta = _meta(scene)
    if exact is None:
        return {f"{scene.prefix}_autocorr.csv": _patch_text(gamma, meta)}, False
    exact_vals = hm.point_masses(exact, gamma.positions) \
        if exact.cps.kind == "finite" else _match_model_masses(exact, gamma)
    lines = ["# " + m for m in meta]
    lines.append(f"# region: {gamma.region.lo.tolist()} {gamma.region.hi.tolist()}")
    cols = [f"z_{i+1}" for i in range(dim)] + [
        "re_weight", "im_weight", "re_exact", "im_exact", "abs_diff",
    ]
    lines.append(",".join(cols))
    for pos, w, ex in zip(gamma.positions, gamma.weights, exact_vals):
        row = [f"{v:.17g}" for v in pos]
        row += [f"{w.real:.17g}", f"{w.imag:.17g}", f"{ex.real:.17g}",
                f"{ex.imag:.17g}", f"{abs(w - ex):.17g}"]
        lines.append(",".join(row))
    return {f"{scene.prefix}_autocorr.csv": "\n".join(lines) + "\n"}, False


def _match_model_masses(exact_comb: ModelComb, gamma: PointMeasurePatch):
    """Exact atom masses of a Euclidean-internal model comb at the positions
    of a patch, by matching against the comb's own atom enumeration."""
    pts, masses = hm.comb_atoms(exact_comb, gamma.region, min_abs=0.0)
    out = np.zeros(len(gamma), dtype=complex)
    if len(pts) == 0:
        return out
    first = pts[:, 0]
    for i, z in enumerate(gamma.positions):
        a = np.searchsorted(first, z[0] - 1e-7, side="left")
        b = np.searchsorted(first, z[0] + 1e-7, side="right")
        for j in range(a, b):
            if np.all(np.abs(pts[j] - z) <= 1e-7):
                out[i] += masses[j]
    return out


def _cmd_diffract(scene: SceneConfig):
    dim = _comb_dim(scene)
    comb = scene.any_comb()
    window = scene.run.frequency_window
    if window is None:
        raise ConfigError("missing required key", "run.frequency_window")
    exact = hm.diffraction_exact(comb, window, scene.run.min_intensity)
    region = _region(scene, dim)
    patch = _scene_patch(scene, region)
    vh = _vh(scene, dim)
    numeric = hm.fb_spectrum(patch, exact.freqs, vh, scene.run.vh_n, threshold=0.0)
    meta = _meta(scene)
    lines = ["# " + m for m in meta]
    cols = [f"re_freq_{i+1}" for i in range(dim)] + [
        "intensity_exact", "intensity_numeric", "abs_diff",
    ]
    lines.append(",".join(cols))
    worst = 0.0
    for f, inten in zip(exact.freqs, exact.coeffs):
        c = numeric.coefficient_at(f)
        ni = abs(c) ** 2
        diff = abs(inten.real - ni)
        worst = max(worst, diff)
        row = [f"{v:.17g}" for v in f]
        row += [f"{inten.real:.17g}", f"{ni:.17g}", f"{diff:.17g}"]
        lines.append(",".join(row))
    lines.append(f"# max_abs_diff: {worst:.17g}")
    failed = worst > scene.run.tolerance
    return {f"{scene.prefix}_diffraction.csv": "\n".join(lines) + "\n"}, failed


def _cmd_classify(scene: SceneConfig):
    dim = _comb_dim(scene)
    region = _region(scene, dim)
    patch = _scene_patch(scene, region)
    vh = _vh(scene, dim)
    run = scene.run
    kbox = run.window_box if run.window_box is not None else Box.centered(0.5, dim)
    subject = None
    if run.frequency_window is not None and run.thresholds:
        subject = scene.any_comb()
    report = cl.build_classification_report(
        patch,
        kbox=kbox,
        sweep_stride=run.sweep_stride,
        vh=vh,
        n_list=run.n_list,
        flc_radius=run.flc_radius,
        structure_tol=run.tolerance,
        dichotomy_subject=subject,
        dichotomy_window=run.frequency_window,
        dichotomy_thresholds=run.thresholds,
    )
    payload = report.to_dict()
    return {f"{scene.prefix}_classification.json": _json_text(_meta(scene), payload)}, False


def _cmd_psf_check(scene: SceneConfig):
    comb = scene.comb
    if not isinstance(comb, LatticeComb):
        raise ConfigError("psf-check needs a [comb] block with variant = 'lattice'",
                          "comb.variant")
    dim = comb.dim
    vh = _vh(scene, dim)
    n = scene.run.vh_n
    dens = comb.lattice.density() * comb.amplitude
    dual = comb.lattice.dual()
    radius = 3.0 * float(np.abs(dual.basis).max())
    _, dual_pts = dual.points_in_box([-radius] * dim, [radius] * dim)
    order = np.argsort(np.linalg.norm(dual_pts, axis=1), kind="stable")
    dual_pts = dual_pts[order][:5]
    offs = _half_offsets(dim)[:5]
    non_dual = offs @ dual.basis.T

    patch = hm.materialized(comb, vh, 2 * n)
    rows = []
    worst = 0.0
    for f in dual_pts:
        c = hm.fb_coefficient(patch, f, vh, n)
        err = abs(c - dens)
        worst = max(worst, err)
        rows.append({"freq": f.tolist(), "kind": "dual", "abs_error": err})
    decay_ok = True
    for f in non_dual:
        c1 = abs(hm.fb_coefficient(patch, f, vh, n))
        c2 = abs(hm.fb_coefficient(patch, f, vh, 2 * n))
        ok = c2 <= 0.6 * c1 + 1e-15
        decay_ok = decay_ok and ok
        rows.append({
            "freq": f.tolist(), "kind": "non-dual",
            "abs_at_n": c1, "abs_at_2n": c2, "decay_ok": ok,
        })
    passed = worst < scene.run.tolerance and decay_ok
    payload = {
        "n": n,
        "tolerance": scene.run.tolerance,
        "max_dual_error": worst,
        "decay_ok": decay_ok,
        "passed": passed,
        "rows": rows,
    }
    return ({f"{scene.prefix}_psf_check.json": _json_text(_meta(scene), payload)},
            not passed)


def _half_offsets(dim):
    if dim == 1:
        return np.array([[0.5], [1.5], [0.25], [0.75], [2.5]])
    base = [
        [0.5] + [0.0] * (dim - 1),
        [0.0] * (dim - 1) + [0.5],
        [0.5] * dim,
        [1.5] + [0.0] * (dim - 1),
        [0.5] + [1.0] * (dim - 1),
    ]
    return np.array(base)


def _cmd_dichotomy(scene: SceneConfig):
    run = scene.run
    if run.frequency_window is None:
        raise ConfigError("missing required key", "run.frequency_window")
    subject = scene.any_comb()
    rep = cl.dichotomy_report(subject, run.frequency_window, run.thresholds)
    return {f"{scene.prefix}_dichotomy.json": _json_text(_meta(scene), rep.to_dict())}, False


_HANDLERS = {
    "points": _cmd_points,
    "density": _cmd_density,
    "fb": _cmd_fb,
    "exact-ft": _cmd_exact_ft,
    "autocorr": _cmd_autocorr,
    "diffract": _cmd_diffract,
    "classify": _cmd_classify,
    "psf-check": _cmd_psf_check,
    "dichotomy": _cmd_dichotomy,
}


if __name__ == "__main__":
    sys.exit(main())
