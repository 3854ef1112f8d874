"""Mirror reduction, CPML quality, reciprocity: solver-level physics checks."""

import numpy as np
import pytest

import phcslab.fdtd as F
from phcslab.errors import SymmetryError
from phcslab.geometry import uniform_slab_grid, vacuum_grid


def mirror_image_sources(src, axes_parities):
    """The image-source set that makes a full-domain run equal a reduced one."""
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


def equivalence_case(sym_axes, thickness=8, steps=900):
    """Relative RMS between a full run with image sources and a reduced run."""
    grid = uniform_slab_grid((33, 33, 41), 10.0, n=2.4, thickness=100.0)
    probe = F.MonitorSpec(
        kind="point", position=(30.0, 20.0, 40.0), components=("ey",), name="p"
    )
    src = F.SourceSpec(
        position=(20.0, 30.0, 50.0),
        component="ey",
        center_wavelength=600.0,
        bandwidth=200.0,
    )
    parities = {"x": "even", "y": "odd", "z": "even"}
    axes_parities = [("xyz".index(ax), {"even": 1, "odd": -1}[parities[ax]]) for ax in sym_axes]
    full_cfg = F.SimulationConfig(
        grid=grid,
        steps=steps,
        cpml=F.CpmlParams(thickness=thickness),
        sources=mirror_image_sources(src, axes_parities),
        monitors=(probe,),
    )
    sym = F.SymmetrySpec(**{ax: parities[ax] for ax in sym_axes})
    red_cfg = F.SimulationConfig(
        grid=grid,
        steps=steps,
        cpml=F.CpmlParams(thickness=thickness),
        symmetry=sym,
        sources=(src,),
        monitors=(probe,),
    )
    a = F.run(full_cfg)["p"]["values"]["ey"]
    b = F.run(red_cfg)["p"]["values"]["ey"]
    return float(np.linalg.norm(a - b) / np.linalg.norm(a))


class TestMirrorEquivalence:
    @pytest.mark.parametrize("axes", ["x", "y", "z"])
    def test_half_domain_matches_full(self, axes):
        assert equivalence_case(axes) < 1e-6

    def test_quarter_domain_matches_full(self):
        assert equivalence_case("xy") < 1e-6

    def test_octant_domain_matches_full(self):
        assert equivalence_case("xyz") < 1e-6

    def test_identity_when_no_symmetry(self):
        cfg = F.SimulationConfig(
            grid=vacuum_grid((9, 9, 9), 10.0), steps=3, cpml=F.CpmlParams(thickness=0)
        )
        assert F.apply_symmetry(cfg) is cfg

    def test_asymmetric_grid_rejected(self):
        grid = vacuum_grid((9, 9, 9), 10.0)
        grid.eps_y[2, 3, 4] = 2.0
        cfg = F.SimulationConfig(
            grid=grid,
            steps=1,
            cpml=F.CpmlParams(thickness=0),
            symmetry=F.SymmetrySpec(x="even"),
        )
        with pytest.raises(SymmetryError, match="not mirror-symmetric"):
            F.apply_symmetry(cfg)

    def test_on_plane_odd_source_rejected(self):
        # Ey on the y=0 plane is odd when tangential parity is even there
        grid = vacuum_grid((9, 9, 9), 10.0)
        src = F.SourceSpec(position=(0.0, 0.0, 10.0), component="ey", center_wavelength=600.0, bandwidth=150.0)
        cfg = F.SimulationConfig(
            grid=grid,
            steps=1,
            cpml=F.CpmlParams(thickness=0),
            symmetry=F.SymmetrySpec(y="even"),
            sources=(src,),
        )
        with pytest.raises(SymmetryError, match="odd under"):
            F.apply_symmetry(cfg)

    def test_discarded_half_source_rejected(self):
        grid = vacuum_grid((9, 9, 9), 10.0)
        src = F.SourceSpec(position=(0.0, -20.0, 10.0), component="ey", center_wavelength=600.0, bandwidth=150.0)
        cfg = F.SimulationConfig(
            grid=grid,
            steps=1,
            cpml=F.CpmlParams(thickness=0),
            symmetry=F.SymmetrySpec(y="odd"),
            sources=(src,),
        )
        with pytest.raises(SymmetryError, match="discarded half"):
            F.apply_symmetry(cfg)


class TestCpml:
    def test_reflection_below_minus_60db(self):
        r = F.cpml_reflection_test(resolution=20, cpml=F.CpmlParams(thickness=10))
        assert r < 1e-3

    def test_reflection_with_m3_profile(self):
        r = F.cpml_reflection_test(
            resolution=20, cpml=F.CpmlParams(thickness=10, m=3.0)
        )
        assert r < 1e-3

    def test_no_absorber_is_hard_wall(self):
        r = F.cpml_reflection_test(resolution=20, cpml=F.CpmlParams(thickness=0))
        assert r == pytest.approx(1.0, abs=0.1)

    def test_doubling_thickness_tenfold(self):
        r10 = F.cpml_reflection_test(resolution=20, cpml=F.CpmlParams(thickness=10))
        r20 = F.cpml_reflection_test(resolution=20, cpml=F.CpmlParams(thickness=20))
        assert r10 >= 10.0 * r20


class TestReciprocity:
    def test_source_probe_swap(self):
        # both endpoints in vacuum, dielectric slab between them
        grid = uniform_slab_grid((25, 25, 25), 10.0, n=2.4, thickness=60.0)
        a = (-40.0, -30.0, 70.0)
        b = (40.0, 30.0, -70.0)

        def series(src_pos, probe_pos):
            src = F.SourceSpec(
                position=src_pos, component="ey", center_wavelength=600.0, bandwidth=150.0
            )
            mon = F.MonitorSpec(kind="point", position=probe_pos, components=("ey",), name="p")
            cfg = F.SimulationConfig(
                grid=grid, steps=1500, cpml=F.CpmlParams(thickness=0), sources=(src,), monitors=(mon,)
            )
            return F.run(cfg)["p"]["values"]["ey"]

        fwd = series(a, b)
        rev = series(b, a)
        assert np.linalg.norm(fwd - rev) / np.linalg.norm(fwd) < 1e-6
