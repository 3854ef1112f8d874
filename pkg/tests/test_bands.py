"""Plane-wave band solver tests."""

import math

import numpy as np
import pytest

from phcslab.bands import (
    Lattice2D,
    effective_index,
    fourier_eps,
    g_vectors,
    gap_map,
    hex_shell_count,
    reciprocal_basis,
    te_bands,
)

A = 214.0
TARGET = A / 637.0  # 0.3359


def l3_lattice(n_waves_check=False):
    neff = effective_index(2.4, A, 637.0)
    return Lattice2D(a=A, r=0.285 * A, eps_bg=neff**2)


class TestFourierEps:
    def test_zero_radius(self):
        lat = Lattice2D(a=A, r=0.0, eps_bg=4.0)
        b1, b2 = reciprocal_basis(A)
        assert fourier_eps(lat, np.zeros(2)) == pytest.approx(4.0)
        assert fourier_eps(lat, b1) == pytest.approx(0.0, abs=1e-15)

    def test_fill_fraction(self):
        lat = Lattice2D(a=A, r=0.285 * A, eps_bg=4.0)
        assert lat.fill_fraction == pytest.approx(0.2947, abs=5e-5)

    def test_mean_permittivity(self):
        lat = Lattice2D(a=A, r=0.285 * A, eps_bg=4.0, eps_hole=1.0)
        f = lat.fill_fraction
        assert fourier_eps(lat, np.zeros(2)) == pytest.approx(f + (1 - f) * 4.0)

    def test_hexagonal_symmetry_of_first_shell(self):
        lat = Lattice2D(a=A, r=0.285 * A, eps_bg=4.5)
        g, _ = g_vectors(A, 7)
        norms = np.linalg.norm(g, axis=1)
        shell = g[np.abs(norms - norms[norms > 0].min()) < 1e-9]
        assert len(shell) == 6
        coeffs = fourier_eps(lat, shell)
        assert np.ptp(coeffs) <= 1e-12 * abs(coeffs[0])


class TestGVectors:
    @pytest.mark.parametrize("n,expected", [(1, 1), (7, 7), (8, 19), (271, 271), (469, 469)])
    def test_truncation_sizes(self, n, expected):
        g, _ = g_vectors(A, n)
        assert len(g) == expected

    def test_hex_counts(self):
        assert hex_shell_count(9) == 271
        assert hex_shell_count(12) == 469


class TestEffectiveIndex:
    def test_bounds_and_monotonicity(self):
        n1 = effective_index(2.4, 214.0, 637.0)
        n2 = effective_index(2.4, 2 * 214.0, 637.0)
        assert 1.0 < n1 < 2.4
        assert n1 < n2 < 2.4  # thicker slab confines more

    def test_satisfies_dispersion_relation(self):
        n = effective_index(2.4, 214.0, 637.0)
        k0 = 2 * math.pi / 637.0
        kap = k0 * math.sqrt(2.4**2 - n**2)
        gam = k0 * math.sqrt(n**2 - 1.0)
        assert gam == pytest.approx(kap * math.tan(kap * 107.0), rel=1e-9)


class TestTeBands:
    def test_empty_lattice_folded_light_lines(self):
        neff = 2.0
        lat = Lattice2D(a=A, r=0.0, eps_bg=neff**2, eps_hole=neff**2)
        diagram = te_bands(lat, n_waves=37, n_bands=8)
        g, _ = g_vectors(A, 37)
        b1, b2 = reciprocal_basis(A)
        gamma = np.zeros(2)
        m_pt = 0.5 * b2
        k_pt = (b1 + 2 * b2) / 3.0
        for point in (gamma, m_pt, k_pt):
            ik = int(np.argmin(np.linalg.norm(diagram.k_points - point, axis=1)))
            kg = np.linalg.norm(diagram.k_points[ik] + g, axis=1)
            analytic = np.sort(kg)[:8] * A / (2 * math.pi) / neff
            assert np.max(np.abs(np.sort(diagram.frequencies[ik]) - analytic)) < 1e-8

    def test_gap_contains_design_frequency(self):
        diagram = te_bands(l3_lattice(), n_waves=271)
        assert diagram.contains(TARGET)

    def test_gap_converged_in_basis(self):
        d1 = te_bands(l3_lattice(), n_waves=271)
        d2 = te_bands(l3_lattice(), n_waves=469)
        (lo1, hi1), (lo2, hi2) = d1.gaps[0], d2.gaps[0]
        assert abs(lo1 - lo2) / lo2 < 0.005
        assert abs(hi1 - hi2) / hi2 < 0.005

    def test_direct_convention_cross_check(self):
        inv = te_bands(l3_lattice(), n_waves=271)
        dir_ = te_bands(l3_lattice(), n_waves=271, convention="direct")
        (lo1, hi1), (lo2, hi2) = inv.gaps[0], dir_.gaps[0]
        assert lo1 == pytest.approx(lo2, rel=0.02)
        assert hi1 == pytest.approx(hi2, rel=0.02)
        assert inv.metadata["convention"] == "inverse"

    def test_eigenvalues_real_nonnegative(self):
        diagram = te_bands(l3_lattice(), n_waves=61)
        assert np.all(diagram.frequencies >= 0.0)
        assert np.all(np.diff(diagram.frequencies, axis=1) >= -1e-12)

    def test_time_reversal(self):
        lat = l3_lattice()
        g, _ = g_vectors(A, 61)
        b1, b2 = reciprocal_basis(A)
        k = 0.31 * b1 + 0.17 * b2
        d_plus = te_bands(lat, n_waves=61, k_path=[k])
        d_minus = te_bands(lat, n_waves=61, k_path=[-k])
        assert np.max(np.abs(d_plus.frequencies - d_minus.frequencies)) < 1e-10

    def test_c6_rotation(self):
        lat = l3_lattice()
        b1, b2 = reciprocal_basis(A)
        k = 0.23 * b1 + 0.11 * b2
        c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
        k_rot = np.array([c * k[0] - s * k[1], s * k[0] + c * k[1]])
        d1 = te_bands(lat, n_waves=61, k_path=[k])
        d2 = te_bands(lat, n_waves=61, k_path=[k_rot])
        assert np.max(np.abs(d1.frequencies - d2.frequencies)) < 1e-9

    def test_fft_oracle_agrees(self):
        # independent route: eta matrix from an FFT of the real-space 1/eps
        # map instead of the analytic circular-hole coefficients
        lat = l3_lattice()
        n_waves = 61
        g, mn = g_vectors(A, n_waves)
        ngrid = 512
        u = np.arange(ngrid) / ngrid
        fu, fv = np.meshgrid(u, u, indexing="ij")
        a1 = np.array([A, 0.0])
        a2 = np.array([A / 2, A * math.sqrt(3) / 2])
        xy = fu[..., None] * a1 + fv[..., None] * a2
        inv_eps = np.full((ngrid, ngrid), 1.0 / lat.eps_bg)
        for cx, cy in [(0.0, 0.0)]:
            for sx in (-1, 0, 1):
                for sy in (-1, 0, 1):
                    cc = cx * a1 + cy * a2 + sx * a1 + sy * a2
                    d2 = (xy[..., 0] - cc[0]) ** 2 + (xy[..., 1] - cc[1]) ** 2
                    inv_eps[d2 <= lat.r**2] = 1.0
        eta_fft = np.fft.fft2(inv_eps) / ngrid**2
        dmn = mn[:, None, :] - mn[None, :, :]
        eta = eta_fft[dmn[..., 0] % ngrid, dmn[..., 1] % ngrid]

        b1v, b2v = reciprocal_basis(A)
        k = 0.5 * b2v  # M point
        kg = k[None, :] + g
        h = (kg @ kg.T) * eta
        h = 0.5 * (h + h.conj().T)
        w = np.linalg.eigvalsh(h)
        f_fft = np.sqrt(np.clip(w[:4], 0, None)) * A / (2 * math.pi)
        d = te_bands(lat, n_waves=n_waves, k_path=[k], n_bands=4)
        assert np.allclose(d.frequencies[0], f_fft, rtol=0.02, atol=1e-3)


class TestGapMap:
    def test_no_gap_at_zero_radius(self):
        rows = gap_map(l3_lattice(), [0.0], n_waves=61)
        assert rows[0] == (0.0, None, None)

    def test_consistent_with_te_bands(self):
        lat = l3_lattice()
        rows = gap_map(lat, [0.285], n_waves=271)
        diagram = te_bands(lat, n_waves=271)
        assert rows[0][1] == pytest.approx(diagram.gaps[0][0], abs=0.0)
        assert rows[0][2] == pytest.approx(diagram.gaps[0][1], abs=0.0)

    def test_gap_width_continuity(self):
        rows = gap_map(l3_lattice(), [0.280, 0.285, 0.290], n_waves=61)
        widths = [(hi - lo) for _, lo, hi in rows]
        mids = [(hi + lo) / 2 for _, lo, hi in rows]
        for w1, w2, mid in zip(widths, widths[1:], mids):
            assert abs(w2 - w1) < 0.05 * mid

    def test_monotone_input_required(self):
        with pytest.raises(ValueError, match="monotone"):
            gap_map(l3_lattice(), [0.3, 0.2])
