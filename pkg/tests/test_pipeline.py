"""Pipeline-level tests: mirror expansion, cavity smoke runs, mode physics."""

import numpy as np
import pytest

import phcslab.fdtd as F
from phcslab.geometry import (
    DeviceSpec,
    L3Params,
    SlabLattice,
    rasterize,
)
from phcslab.pipeline import (
    FUNDAMENTAL_SYMMETRY,
    default_sources,
    expand_mirrored,
    run_cavity,
)


def small_l3(nx=11, ny=7):
    lat = SlabLattice(a=214.0, r=0.285 * 214.0, H=214.0, n_slab=2.4, nx=nx, ny=ny)
    return DeviceSpec(lattice=lat, defect=L3Params(0.219, 0.025, 0.2), target_wavelength=637.0)


def mirror_image_sources(src, axes_parities):
    out = [src]
    for axis, parity in axes_parities:
        sign = F.component_parity(src.component, axis, parity)
        new = []
        for s in out:
            new.append(s)
            pos = list(s.position)
            if abs(pos[axis]) > 1e-12:
                pos[axis] = -pos[axis]
                new.append(
                    F.SourceSpec(
                        position=tuple(pos),
                        component=s.component,
                        center_wavelength=s.center_wavelength,
                        bandwidth=s.bandwidth,
                        amplitude=s.amplitude * sign,
                    )
                )
        out = new
    return tuple(out)


class TestExpandMirrored:
    def test_bitwise_against_full_domain(self):
        device = small_l3()
        grid = rasterize(device, resolution=8)
        steps = 2400
        lam = 639.0
        src = default_sources(device)[0]

        def dft(symmetry, sources):
            cfg = F.SimulationConfig(
                grid=grid, steps=steps, symmetry=symmetry, sources=sources
            )
            sim = F.Simulation(cfg)
            acc = sim.add_dft_volume(lam, start_step=steps // 3, every=4)
            sim.run()
            fields = acc.fields()
            if sim.config.reduction:
                fields = expand_mirrored(fields, grid, sim.config.reduction)
            return fields

        reduced = dft(FUNDAMENTAL_SYMMETRY, (src,))
        images = mirror_image_sources(src, [(0, 1), (1, -1), (2, 1)])
        full = dft(F.SymmetrySpec(), images)
        for a, b in zip(full, reduced):
            assert np.array_equal(a, b)

    def test_parity_signs(self):
        device = small_l3()
        grid = rasterize(device, resolution=8)
        red_dims = tuple((n + 1) // 2 for n in grid.dims)
        rng = np.random.default_rng(0)
        fields = [rng.normal(size=red_dims) for _ in range(3)]
        out = expand_mirrored(fields, grid, ((2, 1),))  # z mirror, even tangential E
        ex = out[0]
        c = grid.center_index[2]
        # Ex is integer-sited on z with even parity: symmetric about the plane
        assert np.array_equal(ex[:, :, c + 1], ex[:, :, c - 1])
        ez = out[2]
        # Ez is half-sited on z with odd parity under even tangential E
        assert np.array_equal(ez[:, :, c], -ez[:, :, c - 1])


@pytest.fixture(scope="module")
def smoke_result():
    return run_cavity(small_l3(), resolution=8, steps=8000, bandwidth=90.0,
                      band=(560.0, 720.0))


class TestRunCavity:
    def test_finds_fundamental_near_design(self, smoke_result):
        f = smoke_result.fundamental
        assert f is not None
        # coarse grid and tiny domain still land within a few percent
        assert abs(f.wavelength - 637.0) / 637.0 < 0.05
        assert f.Q > 100

    def test_mode_energy_in_dielectric(self, smoke_result):
        # the fundamental concentrates its electric energy in the dielectric
        assert smoke_result.dielectric_fraction > 0.5

    def test_volume_and_purcell_consistent(self, smoke_result):
        r = smoke_result
        assert r.volume is not None
        expected = 3.0 / (4.0 * np.pi**2) * r.fundamental.Q / r.volume.Vm_normalized
        assert r.purcell == pytest.approx(expected, rel=1e-12)
        assert 0.1 < r.volume.Vm_normalized < 10.0

    def test_details_capture_resolved_parameters(self, smoke_result):
        d = smoke_result.details
        for key in ("resolution", "steps", "courant", "dt_fs", "grid_dims",
                    "reduced_dims", "q_method", "dft_wavelength_nm", "backend"):
            assert key in d

    def test_spectrum_peak_near_mode(self, smoke_result):
        spec = smoke_result.spectrum
        lam_pk = spec.wavelength[np.argmax(spec.amplitude)]
        assert abs(lam_pk - smoke_result.fundamental.wavelength) < 15.0

    def test_zero_steps(self):
        result = run_cavity(small_l3(), resolution=8, steps=0)
        assert result.modes == []
        assert result.fundamental is None
        assert result.volume is None
