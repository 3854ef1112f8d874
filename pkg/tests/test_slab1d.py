"""Plane-wave transmission through a dielectric slab vs the transfer matrix.

The solver runs in its transversely periodic 1D configuration; the
analytic Airy/transfer-matrix transmission of a single slab is the
independent oracle.
"""

import math

import numpy as np
import pytest

import phcslab.fdtd as F
from phcslab.geometry import uniform_slab_grid

C = 299.792458
N_SLAB = 2.4
THICKNESS = 214.0


def transfer_matrix_transmission(wavelengths, n=N_SLAB, d=THICKNESS):
    """Power transmission of a lossless slab in air, exact closed form."""
    lam = np.asarray(wavelengths, dtype=float)
    delta = 2.0 * math.pi * n * d / lam
    t12 = 2.0 / (1.0 + n)
    t23 = 2.0 * n / (1.0 + n)
    r12 = (1.0 - n) / (1.0 + n)
    r23 = (n - 1.0) / (n + 1.0)
    t = t12 * t23 * np.exp(1j * delta) / (1.0 + r12 * r23 * np.exp(2j * delta))
    return np.abs(t) ** 2


def run_transmission(dx_nm, steps=5200):
    """FDTD |T|^2 on a wavelength grid via slab and reference runs."""
    slab_cells = THICKNESS / dx_nm
    nz = int(10 + 25 + 45 + slab_cells + 45 + 25 + 10) + 3
    centre = (nz - 1) // 2

    def z_nm(p):
        return (p - centre) * dx_nm

    z_src = 10 + 18
    z_probe = nz - 10 - 18
    lam0 = 2.0 / (1.0 / 550.0 + 1.0 / 750.0)
    df_needed = 1.2 * C * (1.0 / 550.0 - 1.0 / 750.0)
    bw = df_needed * lam0**2 / C
    src = F.SourceSpec(
        position=(0.0, 0.0, z_nm(z_src)),
        component="ex",
        center_wavelength=lam0,
        bandwidth=bw,
        plane_normal="z",
    )
    mon = F.MonitorSpec(
        kind="point", position=(0.0, 0.0, z_nm(z_probe)), components=("ex",), name="probe"
    )

    series = {}
    for label, thickness in (("slab", THICKNESS), ("ref", 0.0)):
        grid = uniform_slab_grid((2, 2, nz), dx_nm, n=N_SLAB, thickness=thickness)
        cfg = F.SimulationConfig(
            grid=grid,
            steps=steps,
            cpml=F.CpmlParams(thickness=10),
            sources=(src,),
            monitors=(mon,),
            periodic=(True, True, False),
        )
        rec = F.run(cfg)
        series[label] = (rec["probe"]["t_fs"], rec["probe"]["values"]["ex"])

    lams = np.linspace(550.0, 750.0, 201)
    freqs = C / lams
    t_fs, _ = series["slab"]
    kern = np.exp(-2j * math.pi * np.outer(freqs, t_fs))
    spec_slab = kern @ series["slab"][1]
    spec_ref = kern @ series["ref"][1]
    return lams, np.abs(spec_slab / spec_ref) ** 2


class TestSlabTransmission:
    def test_matches_transfer_matrix(self):
        # 40 cells per material wavelength at the short-wavelength edge
        dx = (550.0 / N_SLAB) / 40.0
        lams, t_fdtd = run_transmission(dx)
        t_oracle = transfer_matrix_transmission(lams)
        err = np.max(np.abs(t_fdtd - t_oracle))
        assert err < 0.01

    def test_oracle_sanity(self):
        # Fabry-Perot maxima reach unity; minima sit at the Airy floor
        lams = np.linspace(500.0, 800.0, 5001)
        t = transfer_matrix_transmission(lams)
        assert t.max() > 0.9999
        r = ((N_SLAB - 1) / (N_SLAB + 1)) ** 2
        t_min = ((1 - r) / (1 + r)) ** 2
        assert t.min() == pytest.approx(t_min, rel=1e-3)
        assert np.all((t > 0) & (t <= 1 + 1e-12))
