"""Command-line pipeline: generate, run, sweep, bands, analyze.

Configuration is a single JSON document; unknown keys are errors so a
typo in a physics parameter cannot silently fall back to a default.
Every run writes a manifest capturing the fully resolved configuration;
feeding the manifest (or the resolved_config.json next to it) back in
reproduces the outputs byte for byte.

Exit codes: 0 success, 2 configuration, 3 geometry/sizing, 4 every sweep
point failed, 5 numerics.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import platform
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, io
from .analysis import harmonic_inversion, lorentzian_fit, spectrum_from_series
from .bands import Lattice2D, effective_index, gap_map, te_bands
from .errors import (
    ConfigError,
    DivergenceError,
    FitError,
    GeometryError,
    NumericsError,
)
from .fdtd import CpmlParams, SymmetrySpec
from .geometry import (
    DeviceSpec,
    HeterostructureParams,
    L3Params,
    SlabLattice,
    hole_centers,
    rasterize,
)
from .pipeline import run_cavity

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GEOMETRY = 3
EXIT_SWEEP_FAILED = 4
EXIT_NUMERICS = 5


# -- configuration schema ------------------------------------------------------

_LATTICE_KEYS = {"a": True, "r": True, "H": True, "n_slab": True,
                 "nx": False, "ny": False, "padding": False}
_L3_KEYS = {"type": True, "D1": False, "D2": False, "D3": False}
_HS_KEYS = {"type": True, "W": False, "a1_ratio": False, "a2_ratio": False,
            "n_a1": False, "n_a2": False}
_CPML_KEYS = {"thickness": False, "m": False, "sigma_max": False,
              "kappa_max": False, "alpha_max": False}
_SYMMETRY_KEYS = {"x": False, "y": False, "z": False}
_SIM_KEYS = {"resolution": True, "steps": True, "courant": False,
             "cpml": False, "symmetry": False}
_BANDS_KEYS = {"n_waves": False, "samples_per_segment": False, "convention": False,
               "gap_map_r_over_a": False}
_ANALYSIS_KEYS = {"band": False, "bandwidth": False, "fit_lorentzian": False,
                  "bands": False}
_OUTPUT_KEYS = {"directory": False, "formats": False, "decimation": False}
_TOP_KEYS = {"device": True, "simulation": True, "analysis": False,
             "output": False, "seed": False}
_DEVICE_KEYS = {"lattice": True, "defect": False, "target_wavelength": False}


def _check_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        raise ConfigError(f"expected an object, got {type(obj).__name__}", path=path)
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r}", path=f"{path}.{key}" if path else key)
    for key, required in allowed.items():
        if required and key not in obj:
            raise ConfigError("missing required key", path=f"{path}.{key}" if path else key)


def _number(obj, path, integer=False, optional=False):
    if obj is None and optional:
        return None
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ConfigError(f"expected a number, got {obj!r}", path=path)
    return int(obj) if integer else float(obj)


def validate_config(raw: dict) -> dict:
    """Validate and normalize a run configuration, filling every default.

    The returned dict is fully resolved: serializing it and feeding it back
    yields an identical run.
    """
    _check_keys(raw, _TOP_KEYS, "")
    dev = raw["device"]
    _check_keys(dev, _DEVICE_KEYS, "device")
    lat = dev["lattice"]
    _check_keys(lat, _LATTICE_KEYS, "device.lattice")
    lattice = {
        "a": _number(lat["a"], "device.lattice.a"),
        "r": _number(lat["r"], "device.lattice.r"),
        "H": _number(lat["H"], "device.lattice.H"),
        "n_slab": _number(lat["n_slab"], "device.lattice.n_slab"),
        "nx": _number(lat.get("nx", 15), "device.lattice.nx", integer=True),
        "ny": _number(lat.get("ny", 11), "device.lattice.ny", integer=True),
        "padding": _number(lat.get("padding"), "device.lattice.padding", optional=True),
    }
    defect_raw = dev.get("defect")
    if defect_raw is None:
        defect = None
    else:
        if not isinstance(defect_raw, dict) or "type" not in defect_raw:
            raise ConfigError("defect needs a 'type' key", path="device.defect")
        kind = defect_raw["type"]
        if kind == "l3":
            _check_keys(defect_raw, _L3_KEYS, "device.defect")
            defect = {
                "type": "l3",
                "D1": _number(defect_raw.get("D1", 0.0), "device.defect.D1"),
                "D2": _number(defect_raw.get("D2", 0.0), "device.defect.D2"),
                "D3": _number(defect_raw.get("D3", 0.0), "device.defect.D3"),
            }
        elif kind == "heterostructure":
            _check_keys(defect_raw, _HS_KEYS, "device.defect")
            defect = {
                "type": "heterostructure",
                "W": _number(defect_raw.get("W", 1.69), "device.defect.W"),
                "a1_ratio": _number(defect_raw.get("a1_ratio", 1.025), "device.defect.a1_ratio"),
                "a2_ratio": _number(defect_raw.get("a2_ratio", 1.05), "device.defect.a2_ratio"),
                "n_a1": _number(defect_raw.get("n_a1", 2), "device.defect.n_a1", integer=True),
                "n_a2": _number(defect_raw.get("n_a2", 1), "device.defect.n_a2", integer=True),
            }
        else:
            raise ConfigError(
                f"unknown defect type {kind!r} (expected 'l3' or 'heterostructure')",
                path="device.defect.type",
            )
    sim = raw["simulation"]
    _check_keys(sim, _SIM_KEYS, "simulation")
    cpml = sim.get("cpml", {})
    _check_keys(cpml, _CPML_KEYS, "simulation.cpml")
    symmetry = sim.get("symmetry", {"x": "even", "y": "odd", "z": "even"})
    _check_keys(symmetry, _SYMMETRY_KEYS, "simulation.symmetry")
    analysis = raw.get("analysis", {})
    _check_keys(analysis, _ANALYSIS_KEYS, "analysis")
    bands = analysis.get("bands", {})
    _check_keys(bands, _BANDS_KEYS, "analysis.bands")
    output = raw.get("output", {})
    _check_keys(output, _OUTPUT_KEYS, "output")
    formats = output.get("formats", ["csv"])
    if not isinstance(formats, list) or any(f not in ("csv", "phcf") for f in formats):
        raise ConfigError("formats must be a list drawn from ['csv', 'phcf']",
                          path="output.formats")

    target = _number(dev.get("target_wavelength", 637.0), "device.target_wavelength")
    band = analysis.get("band")
    if band is not None:
        if not (isinstance(band, list) and len(band) == 2):
            raise ConfigError("band must be [lambda_min, lambda_max]", path="analysis.band")
        band = [_number(band[0], "analysis.band[0]"), _number(band[1], "analysis.band[1]")]
    else:
        band = [target * 0.92, target * 1.08]

    resolved = {
        "device": {
            "lattice": lattice,
            "defect": defect,
            "target_wavelength": target,
        },
        "simulation": {
            "resolution": _number(sim["resolution"], "simulation.resolution", integer=True),
            "steps": _number(sim["steps"], "simulation.steps", integer=True),
            "courant": _number(sim.get("courant", 0.5), "simulation.courant"),
            "cpml": {
                "thickness": _number(cpml.get("thickness", 10), "simulation.cpml.thickness", integer=True),
                "m": _number(cpml.get("m", 4.0), "simulation.cpml.m"),
                "sigma_max": _number(cpml.get("sigma_max"), "simulation.cpml.sigma_max", optional=True),
                "kappa_max": _number(cpml.get("kappa_max", 3.0), "simulation.cpml.kappa_max"),
                "alpha_max": _number(cpml.get("alpha_max", 0.05), "simulation.cpml.alpha_max"),
            },
            "symmetry": {
                "x": symmetry.get("x", "even"),
                "y": symmetry.get("y", "odd"),
                "z": symmetry.get("z", "even"),
            },
        },
        "analysis": {
            "band": band,
            "bandwidth": _number(analysis.get("bandwidth", 50.0), "analysis.bandwidth"),
            "fit_lorentzian": bool(analysis.get("fit_lorentzian", False)),
            "bands": {
                "n_waves": _number(bands.get("n_waves", 271), "analysis.bands.n_waves", integer=True),
                "samples_per_segment": _number(
                    bands.get("samples_per_segment", 16), "analysis.bands.samples_per_segment", integer=True
                ),
                "convention": bands.get("convention", "inverse"),
                "gap_map_r_over_a": bands.get("gap_map_r_over_a"),
            },
        },
        "output": {
            "directory": output.get("directory", "."),
            "formats": formats,
            "decimation": _number(output.get("decimation", 5), "output.decimation", integer=True),
        },
        "seed": _number(raw.get("seed", 0), "seed", integer=True),
    }
    if resolved["simulation"]["resolution"] <= 0 or resolved["simulation"]["steps"] < 0:
        raise ConfigError("resolution and steps must be positive", path="simulation")
    return resolved


def build_device(resolved: dict) -> DeviceSpec:
    lat = resolved["device"]["lattice"]
    lattice = SlabLattice(
        a=lat["a"], r=lat["r"], H=lat["H"], n_slab=lat["n_slab"],
        nx=lat["nx"], ny=lat["ny"], padding=lat["padding"],
    )
    d = resolved["device"]["defect"]
    if d is None:
        defect = None
    elif d["type"] == "l3":
        defect = L3Params(D1=d["D1"], D2=d["D2"], D3=d["D3"])
    else:
        defect = HeterostructureParams(
            W=d["W"], a1_ratio=d["a1_ratio"], a2_ratio=d["a2_ratio"],
            n_a1=d["n_a1"], n_a2=d["n_a2"],
        )
    return DeviceSpec(
        lattice=lattice, defect=defect,
        target_wavelength=resolved["device"]["target_wavelength"],
    )


def build_cpml(resolved: dict) -> CpmlParams:
    c = resolved["simulation"]["cpml"]
    return CpmlParams(
        thickness=c["thickness"], m=c["m"], sigma_max=c["sigma_max"],
        kappa_max=c["kappa_max"], alpha_max=c["alpha_max"],
    )


def build_symmetry(resolved: dict) -> SymmetrySpec:
    s = resolved["simulation"]["symmetry"]
    return SymmetrySpec(x=s["x"], y=s["y"], z=s["z"])


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}")
    if isinstance(raw, dict) and "config" in raw and "tool" in raw:
        raw = raw["config"]  # accept a run manifest directly
    return validate_config(raw)


def write_manifest(outdir, command, resolved, outputs, details, seed):
    from .fdtd import BACKEND

    manifest = {
        "tool": "phcslab",
        "version": __version__,
        "command": command,
        "config": resolved,
        "outputs": outputs,
        "details": details,
        "seed": seed,
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "kernel_backend": BACKEND,
        },
    }
    path = os.path.join(outdir, "run_manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    resolved_path = os.path.join(outdir, "resolved_config.json")
    with open(resolved_path, "w") as fh:
        json.dump(resolved, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return path


# -- subcommands ---------------------------------------------------------------

def cmd_generate(resolved, outdir, workers):
    device = build_device(resolved)
    resolution = resolved["simulation"]["resolution"]
    holes = hole_centers(device)
    grid = rasterize(device, resolution)
    outputs = {}
    holes_path = os.path.join(outdir, "holes.csv")
    io.write_holes_csv(holes_path, holes)
    outputs["holes_csv"] = holes_path
    if "phcf" in resolved["output"]["formats"]:
        eps_path = os.path.join(outdir, "eps.phcf")
        io.write_phcf(eps_path, list(grid.components()), grid.dx)
        outputs["eps_phcf"] = eps_path
    details = {
        "grid_dims": list(grid.dims),
        "dx_nm": grid.dx,
        "holes": len(holes),
        "eps_bytes": grid.nbytes,
    }
    print(f"grid {grid.dims[0]} x {grid.dims[1]} x {grid.dims[2]} cells, "
          f"dx = {grid.dx:.4f} nm, permittivity storage {grid.nbytes / 1e6:.1f} MB, "
          f"{len(holes)} holes")
    write_manifest(outdir, "generate", resolved, outputs, details, resolved["seed"])
    return EXIT_OK


def cmd_run(resolved, outdir, workers):
    device = build_device(resolved)
    sim = resolved["simulation"]
    result = run_cavity(
        device,
        resolution=sim["resolution"],
        steps=sim["steps"],
        courant=sim["courant"],
        cpml=build_cpml(resolved),
        symmetry=build_symmetry(resolved),
        band=tuple(resolved["analysis"]["band"]),
        bandwidth=resolved["analysis"]["bandwidth"],
        decimation=resolved["output"]["decimation"],
        workers=workers,
    )
    outputs = {}
    modes_path = os.path.join(outdir, "modes.csv")
    io.write_modes_csv(modes_path, result.modes, result.volume, result.purcell)
    outputs["modes_csv"] = modes_path
    if result.spectrum is not None:
        spec_path = os.path.join(outdir, "spectrum.csv")
        io.write_spectrum_csv(spec_path, result.spectrum)
        outputs["spectrum_csv"] = spec_path
    if "phcf" in resolved["output"]["formats"]:
        grid = rasterize(device, sim["resolution"])
        eps_path = os.path.join(outdir, "eps.phcf")
        io.write_phcf(eps_path, list(grid.components()), grid.dx)
        outputs["eps_phcf"] = eps_path
        if result.mode_fields is not None:
            mode_path = os.path.join(outdir, "mode_e.phcf")
            comps = []
            for f in result.mode_fields:
                comps.extend([np.ascontiguousarray(f.real), np.ascontiguousarray(f.imag)])
            io.write_phcf(mode_path, comps, grid.dx)
            outputs["mode_e_phcf"] = mode_path
    for name, rec in result.records.items():
        if rec["kind"] != "point":
            continue
        for comp, series in rec["values"].items():
            ts_path = os.path.join(outdir, f"timeseries_{name}_{comp}.csv")
            io.write_timeseries_csv(ts_path, rec["steps"], rec["t_fs"], series)
            outputs[f"timeseries_{name}_{comp}"] = ts_path
    details = dict(result.details)
    if resolved["analysis"]["fit_lorentzian"] and result.spectrum is not None:
        try:
            fit = lorentzian_fit(result.spectrum)
            details["lorentzian_q"] = fit.Q
            details["lorentzian_lambda0_nm"] = fit.lambda0
        except FitError as err:
            details["lorentzian_error"] = str(err)
    if result.fundamental is not None:
        f = result.fundamental
        print(f"fundamental mode: lambda = {f.wavelength:.3f} nm, Q = {f.Q:.0f}, "
              f"Vm = {result.volume.Vm_normalized:.4f} (lambda/n)^3, "
              f"Purcell = {result.purcell:.1f}")
    else:
        print("no resonant mode found in the analysis band")
        details["partial"] = "no modes extracted"
    write_manifest(outdir, "run", resolved, outputs, details, resolved["seed"])
    return EXIT_OK


def _set_path(tree, dotted, value):
    keys = dotted.split(".")
    node = tree
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"sweep axis path not found: {dotted}", path="axis")
        node = node[key]
    last = keys[-1]
    if not isinstance(node, dict) or last not in node:
        raise ConfigError(f"sweep axis path not found: {dotted}", path="axis")
    if not isinstance(node[last], (int, float)) or isinstance(node[last], bool):
        raise ConfigError(f"sweep axis must point at a number: {dotted}", path="axis")
    if isinstance(node[last], float) or isinstance(value, float):
        node[last] = float(value)
    else:
        node[last] = int(value)


def _sweep_point(args):
    resolved, outdir, workers = args
    device = build_device(resolved)
    sim = resolved["simulation"]
    result = run_cavity(
        device,
        resolution=sim["resolution"],
        steps=sim["steps"],
        courant=sim["courant"],
        cpml=build_cpml(resolved),
        symmetry=build_symmetry(resolved),
        band=tuple(resolved["analysis"]["band"]),
        bandwidth=resolved["analysis"]["bandwidth"],
        decimation=resolved["output"]["decimation"],
        workers=workers,
    )
    if result.fundamental is None:
        return (None, None, None, None, "no mode found")
    return (
        result.fundamental.wavelength,
        result.fundamental.Q,
        result.volume.Vm_normalized,
        result.purcell,
        "",
    )


def cmd_sweep(sweep_raw, outdir, jobs, workers):
    if not isinstance(sweep_raw, dict):
        raise ConfigError("sweep config must be an object")
    allowed = {"base": True, "axis": True, "values": True, "parallel_jobs": False}
    _check_keys(sweep_raw, allowed, "")
    base = validate_config(sweep_raw["base"])
    axis = sweep_raw["axis"]
    values = sweep_raw["values"]
    if not isinstance(values, list) or not values:
        raise ConfigError("values must be a non-empty list", path="values")
    jobs = jobs or _number(sweep_raw.get("parallel_jobs", 1), "parallel_jobs", integer=True)
    cap = os.environ.get("PHC_THREADS")
    if cap:
        jobs = min(jobs, max(1, int(cap)))

    points = []
    for v in values:
        resolved = copy.deepcopy(base)
        _set_path(resolved, axis, v)
        points.append(resolved)

    rows = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_sweep_point, (p, outdir, workers)) for p in points]
            for v, fut in zip(values, futures):
                try:
                    lam, q, vm, fp, err = fut.result()
                except Exception as exc:  # keep the sweep alive per point
                    lam = q = vm = fp = None
                    err = f"{type(exc).__name__}: {exc}"
                rows.append((v, lam, q, vm, fp, err))
    else:
        for v, p in zip(values, points):
            try:
                lam, q, vm, fp, err = _sweep_point((p, outdir, workers))
            except Exception as exc:
                lam = q = vm = fp = None
                err = f"{type(exc).__name__}: {exc}"
            rows.append((v, lam, q, vm, fp, err))

    path = os.path.join(outdir, "sweep.csv")
    io.write_sweep_csv(path, rows)
    ok = [r for r in rows if r[5] == ""]
    print(f"sweep over {axis}: {len(ok)}/{len(rows)} points succeeded -> {path}")
    details = {"axis": axis, "values": list(values), "succeeded": len(ok)}
    write_manifest(outdir, "sweep", base, {"sweep_csv": path}, details, base["seed"])
    if not ok:
        return EXIT_SWEEP_FAILED
    return EXIT_OK


def cmd_bands(resolved, outdir, workers):
    lat = resolved["device"]["lattice"]
    target = resolved["device"]["target_wavelength"]
    opts = resolved["analysis"]["bands"]
    n_eff = effective_index(lat["n_slab"], lat["H"], target)
    lattice = Lattice2D(a=lat["a"], r=lat["r"], eps_bg=n_eff**2)
    diagram = te_bands(
        lattice,
        n_waves=opts["n_waves"],
        samples_per_segment=opts["samples_per_segment"],
        convention=opts["convention"],
    )
    outputs = {}
    bands_path = os.path.join(outdir, "bands.csv")
    io.write_bands_csv(bands_path, diagram)
    outputs["bands_csv"] = bands_path
    roa_values = opts["gap_map_r_over_a"]
    if roa_values:
        gm_rows = gap_map(lattice, roa_values, n_waves=opts["n_waves"])
        gaps_path = os.path.join(outdir, "gaps.csv")
        io.write_gaps_csv(gaps_path, gm_rows)
        outputs["gaps_csv"] = gaps_path
    a_over_lambda = lat["a"] / target
    inside = diagram.contains(a_over_lambda)
    if diagram.gaps:
        for lo, hi in diagram.gaps:
            print(f"TE gap: [{lo:.4f}, {hi:.4f}] (a/lambda)")
    else:
        print("no gap")
    print(f"target {a_over_lambda:.4f} inside gap: {str(inside).lower()}")
    details = {
        "n_eff": n_eff,
        "gaps": [list(g) for g in diagram.gaps],
        "target_a_over_lambda": a_over_lambda,
        "target_inside_gap": inside,
    }
    write_manifest(outdir, "bands", resolved, outputs, details, resolved["seed"])
    return EXIT_OK


def cmd_analyze(resolved, outdir, series_path, gate_fs, workers):
    steps, t_fs, values = io.read_timeseries_csv(series_path)
    if len(values) == 0:
        raise ConfigError(f"series {series_path} is empty")
    keep = t_fs >= gate_fs
    dt = t_fs[1] - t_fs[0] if len(t_fs) > 1 else 1.0
    band = tuple(resolved["analysis"]["band"])
    modes = []
    if keep.sum() >= 1000:
        modes = harmonic_inversion(values[keep], dt=dt, band=band)
    spectrum = spectrum_from_series(values, dt, window="hann", pad_factor=4,
                                    wavelength_range=(band[0] * 0.8, band[1] * 1.2))
    outputs = {}
    modes_path = os.path.join(outdir, "modes.csv")
    io.write_modes_csv(modes_path, modes)
    outputs["modes_csv"] = modes_path
    spec_path = os.path.join(outdir, "spectrum.csv")
    io.write_spectrum_csv(spec_path, spectrum)
    outputs["spectrum_csv"] = spec_path
    details = {"series": series_path, "gate_fs": gate_fs, "q_method": "harmonic_inversion"}
    if resolved["analysis"]["fit_lorentzian"]:
        try:
            fit = lorentzian_fit(spectrum)
            details["lorentzian_q"] = fit.Q
            details["lorentzian_lambda0_nm"] = fit.lambda0
            print(f"lorentzian fit: lambda0 = {fit.lambda0:.3f} nm, Q = {fit.Q:.0f}")
        except FitError as err:
            details["lorentzian_error"] = str(err)
    for m in modes[:5]:
        print(f"mode: lambda = {m.wavelength:.3f} nm, Q = {m.Q:.0f}, amplitude = {m.amplitude:.3e}")
    if not modes:
        print("no modes extracted")
    write_manifest(outdir, "analyze", resolved, outputs, details, resolved["seed"])
    return EXIT_OK


# -- entry point ---------------------------------------------------------------

def make_parser():
    parser = argparse.ArgumentParser(
        prog="phcslab",
        description="Photonic-crystal slab nanocavity toolkit: FDTD cavity runs, "
        "parameter sweeps and 2D band structures.",
    )
    parser.add_argument("--version", action="version", version=f"phcslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON configuration file")
    common.add_argument("--out", default=None, help="output directory (default: config output.directory)")
    common.add_argument("--jobs", type=int, default=None, help="parallel sweep jobs")
    common.add_argument("--resolution", type=int, default=None, help="override simulation.resolution")
    common.add_argument("--seed", type=int, default=None, help="override the recorded seed")
    common.add_argument("--workers", type=int, default=1, help="solver worker chunks per update")
    sub.add_parser("generate", parents=[common], help="write hole list and permittivity grid")
    sub.add_parser("run", parents=[common], help="full cavity pipeline: FDTD, modes, Vm, Purcell")
    sub.add_parser("sweep", parents=[common], help="run a parameter sweep (config holds base/axis/values)")
    sub.add_parser("bands", parents=[common], help="2D TE band structure and gap check")
    ana = sub.add_parser("analyze", parents=[common], help="re-run analysis on a stored time series")
    ana.add_argument("series", help="timeseries CSV (step,t_fs,value)")
    ana.add_argument("--gate-fs", type=float, default=0.0, help="discard samples before this time")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sweep":
            with open(args.config) as fh:
                sweep_raw = json.load(fh)
            base = sweep_raw.get("base", {}) if isinstance(sweep_raw, dict) else {}
            outdir = args.out or base.get("output", {}).get("directory", ".")
            os.makedirs(outdir, exist_ok=True)
            if args.resolution is not None and isinstance(base, dict):
                base.setdefault("simulation", {})["resolution"] = args.resolution
            return cmd_sweep(sweep_raw, outdir, args.jobs, args.workers)
        resolved = load_config(args.config)
        if args.resolution is not None:
            resolved["simulation"]["resolution"] = args.resolution
        if args.seed is not None:
            resolved["seed"] = args.seed
        outdir = args.out or resolved["output"]["directory"]
        os.makedirs(outdir, exist_ok=True)
        if args.command == "generate":
            return cmd_generate(resolved, outdir, args.workers)
        if args.command == "run":
            return cmd_run(resolved, outdir, args.workers)
        if args.command == "bands":
            return cmd_bands(resolved, outdir, args.workers)
        if args.command == "analyze":
            return cmd_analyze(resolved, outdir, args.series, args.gate_fs, args.workers)
        parser.error(f"unknown command {args.command}")
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except GeometryError as err:
        print(f"geometry error: {err}", file=sys.stderr)
        return EXIT_GEOMETRY
    except (NumericsError, DivergenceError, FitError) as err:
        print(f"numerical error: {err}", file=sys.stderr)
        return EXIT_NUMERICS
    except Exception as err:  # pragma: no cover - unexpected
        traceback.print_exc()
        print(f"internal error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
