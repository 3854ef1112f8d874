"""End-to-end cavity characterization: rasterize, excite, ring down, analyse.

One run per device: a broadband dipole kicks the cavity, a point probe
records the ringdown, and after the first third of the run the probe
series is inverted to locate the resonance so a running single-frequency
Fourier sum can accumulate the mode profile over the remaining two
thirds. Wavelength and Q come from harmonic inversion of the gated
series (samples before twice the source cutoff are discarded); mode
volume from the accumulated profile; the Purcell factor from both.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    ModeVolumeResult,
    ResonantMode,
    Spectrum,
    harmonic_inversion,
    mode_volume,
    purcell_factor,
    spectrum_from_series,
)
from .fdtd import (
    CpmlParams,
    MonitorSpec,
    Simulation,
    SimulationConfig,
    SourceSpec,
    SymmetrySpec,
    component_parity,
)
from .fdtd.config import E_COMPONENTS, OFFSETS
from .geometry import DeviceSpec, PermittivityGrid, dielectric_energy_fraction, rasterize

# dipole offset from the cavity centre, units of a: off the exact centre to
# avoid nodal planes of higher-order modes, small enough to keep strong
# fundamental overlap; polarization transverse to the defect axis
SOURCE_OFFSET = (0.1, 0.05, 0.0)
FUNDAMENTAL_SYMMETRY = SymmetrySpec(x="even", y="odd", z="even")


@dataclass
class CavityResult:
    """Figures of merit plus everything needed to reproduce them."""

    modes: list
    fundamental: ResonantMode = None
    volume: ModeVolumeResult = None
    purcell: float = None
    dielectric_fraction: float = None
    spectrum: Spectrum = None
    mode_fields: list = field(default=None, repr=False)
    records: dict = field(default_factory=dict, repr=False)
    details: dict = field(default_factory=dict)


def default_sources(device: DeviceSpec, bandwidth: float = 50.0, amplitude: float = 1.0):
    a = device.lattice.a
    pos = tuple(o * a for o in SOURCE_OFFSET)
    return (
        SourceSpec(
            position=pos,
            component="ey",
            center_wavelength=device.target_wavelength,
            bandwidth=bandwidth,
            amplitude=amplitude,
        ),
    )


def default_monitors(device: DeviceSpec, decimation: int = 5):
    a = device.lattice.a
    pos = tuple(o * a for o in SOURCE_OFFSET)
    return (
        MonitorSpec(
            kind="point",
            position=pos,
            components=("ey",),
            decimation=decimation,
            name="probe",
        ),
    )


def expand_mirrored(arrays, grid_full: PermittivityGrid, reduction, components=E_COMPONENTS):
    """Unfold reduced-domain component arrays onto the full grid.

    reduction: ((axis, tangential_parity), ...) as recorded by
    apply_symmetry. Mirror copies carry the component's parity sign; the
    result matches a full-domain run bit for bit.
    """
    out = []
    for comp, red in zip(components, arrays):
        ful = red
        for axis, parity in reduction:
            n_red = ful.shape[axis]
            n_full = grid_full.dims[axis]
            c = (n_full - 1) // 2
            if n_red != n_full - c:
                raise ValueError(
                    f"axis {'xyz'[axis]}: reduced extent {n_red} does not match "
                    f"full extent {n_full}"
                )
            sign = component_parity(comp, axis, parity)
            shape = list(ful.shape)
            shape[axis] = n_full
            big = np.empty(shape, dtype=ful.dtype)
            dst = [slice(None)] * ful.ndim
            dst[axis] = slice(c, None)
            big[tuple(dst)] = ful
            src = [slice(None)] * ful.ndim
            dst[axis] = slice(0, c)
            if OFFSETS[comp][axis] == 0.5:
                src[axis] = slice(c - 1, None, -1)
            else:
                src[axis] = slice(c, 0, -1)
            big[tuple(dst)] = sign * ful[tuple(src)]
            ful = big
        out.append(ful)
    return out


def run_cavity(
    device: DeviceSpec,
    resolution: int,
    steps: int,
    courant: float = 0.5,
    cpml: CpmlParams = None,
    symmetry: SymmetrySpec = None,
    band=None,
    bandwidth: float = 50.0,
    decimation: int = 5,
    workers: int = 1,
    max_grid_bytes: int = 2 << 30,
    dft_every: int = 4,
    monitors=None,
    sources=None,
) -> CavityResult:
    """Characterize a cavity device: modes, Q, mode volume, Purcell factor.

    band defaults to +-8% around the device target wavelength. symmetry
    defaults to the fundamental TE-like sector (x even, y odd, z even).
    """
    t_start = time.perf_counter()
    cpml = cpml or CpmlParams()
    symmetry = FUNDAMENTAL_SYMMETRY if symmetry is None else symmetry
    lam0 = device.target_wavelength
    if band is None:
        band = (lam0 * 0.92, lam0 * 1.08)

    grid_full = rasterize(device, resolution, max_bytes=max_grid_bytes)
    sources = default_sources(device, bandwidth=bandwidth) if sources is None else sources
    monitors = default_monitors(device, decimation=decimation) if monitors is None else monitors
    config = SimulationConfig(
        grid=grid_full,
        steps=steps,
        courant=courant,
        cpml=cpml,
        symmetry=symmetry,
        sources=sources,
        monitors=monitors,
    )
    sim = Simulation(config, workers=workers)
    dt_fs = config.dt_fs
    cutoff_fs = max(s.resolved_cutoff for s in sources)
    gate_fs = 2.0 * cutoff_fs

    details = {
        "resolution": resolution,
        "steps": steps,
        "courant": courant,
        "dt_fs": dt_fs,
        "grid_dims": list(grid_full.dims),
        "reduced_dims": list(sim.phys),
        "dx_nm": grid_full.dx,
        "band_nm": list(band),
        "source_cutoff_fs": cutoff_fs,
        "gate_fs": gate_fs,
        "q_method": "harmonic_inversion",
        "backend": sim.backend,
        "dft_every": dft_every,
    }

    # phase one: ring up and locate the resonance for the profile DFT
    phase_a = steps // 3
    while sim.state.step < phase_a:
        sim.step()
    probe_name = monitors[0].name or "monitor0"
    hint = _resonance_hint(sim, probe_name, cutoff_fs, band)
    dft_lambda = hint if hint is not None else lam0
    details["dft_wavelength_nm"] = dft_lambda
    details["dft_start_step"] = phase_a
    acc = sim.add_dft_volume(dft_lambda, start_step=phase_a, every=dft_every)

    records = sim.run()
    series = records[probe_name]["values"][monitors[0].components[0]]
    t_fs = records[probe_name]["t_fs"]
    keep = t_fs >= gate_fs
    dt_series = t_fs[1] - t_fs[0] if len(t_fs) > 1 else dt_fs

    modes = []
    if keep.sum() >= 1000 and np.abs(series[keep]).max() > 0:
        modes = harmonic_inversion(series[keep], dt=dt_series, band=band)
    spectrum = None
    if len(series) >= 4:
        spectrum = spectrum_from_series(
            series, dt_series, window="hann", pad_factor=4, wavelength_range=(band[0] * 0.8, band[1] * 1.2)
        )

    result = CavityResult(
        modes=modes, spectrum=spectrum, records=records, details=details
    )
    if modes:
        fundamental = modes[0]
        result.fundamental = fundamental
        fields_red = acc.fields()
        fields = expand_mirrored(fields_red, grid_full, sim.config.reduction)
        result.mode_fields = fields
        result.volume = mode_volume(
            grid_full, fields, fundamental.wavelength, device.lattice.n_slab
        )
        result.purcell = purcell_factor(fundamental.Q, result.volume.Vm_normalized)
        result.dielectric_fraction = dielectric_energy_fraction(grid_full, fields)
        details["fundamental_wavelength_nm"] = fundamental.wavelength
        details["fundamental_q"] = fundamental.Q
        details["vm_normalized"] = result.volume.Vm_normalized
        details["vm_physical_nm3"] = result.volume.Vm_physical
        details["purcell"] = result.purcell
        details["dielectric_fraction"] = result.dielectric_fraction
    details["wall_time_s"] = time.perf_counter() - t_start
    return result


def _resonance_hint(sim: Simulation, probe_name: str, cutoff_fs: float, band):
    """Mid-run wavelength estimate from the probe series recorded so far.

    Uses a softer gate (1.1x the source cutoff) than the final analysis so
    enough samples exist; returns None when the window is still too short,
    in which case the profile DFT falls back to the source wavelength.
    """
    for mon in sim._monitors:
        if mon["name"] == probe_name:
            comp = mon["spec"].components[0]
            steps = np.asarray(mon["steps"], dtype=float)
            series = np.asarray(mon["values"][comp], dtype=float)
            break
    else:
        return None
    t = steps * sim.dt_fs
    keep = t >= 1.1 * cutoff_fs
    if keep.sum() < 1000:
        return None
    dt_series = t[1] - t[0] if len(t) > 1 else sim.dt_fs
    if np.abs(series[keep]).max() == 0:
        return None
    try:
        modes = harmonic_inversion(series[keep], dt=dt_series, band=band, refine_max=0)
    except ValueError:
        return None
    return modes[0].wavelength if modes else None
