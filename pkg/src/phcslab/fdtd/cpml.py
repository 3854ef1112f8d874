"""CPML absorber profiles and per-face update coefficients.

Polynomial-graded profiles across the absorber depth xi in [0, 1]:
sigma = sigma_max * xi^m, kappa = 1 + (kappa_max - 1) * xi^m,
alpha = alpha_max * (1 - xi). Update recursion per auxiliary field:

    psi <- b * psi + c * (raw field difference)
    b = exp(-(sigma/kappa + alpha) * dt)
    c = sigma * (b - 1) / (kappa * (sigma + kappa * alpha))

with the 1/kappa coordinate stretch folded into the main update through
per-axis inverse-kappa arrays. All quantities are in grid units
(dx = 1, c = 1, eps0 = 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import CpmlParams


def _profile_coeffs(xi: np.ndarray, params: CpmlParams, dt: float):
    sigma = params.resolved_sigma_max() * xi**params.m
    kappa = 1.0 + (params.kappa_max - 1.0) * xi**params.m
    alpha = params.alpha_max * (1.0 - xi)
    b = np.exp(-(sigma / kappa + alpha) * dt)
    denom = kappa * (sigma + kappa * alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(denom > 0, sigma * (b - 1.0) / np.where(denom > 0, denom, 1.0), 0.0)
    return kappa, b, c


@dataclass
class CpmlFace:
    """One absorbing face: axis (0..2), side (0 lo, 1 hi), slab geometry and
    the b/c recursion coefficients for integer-sited (E) and half-sited (H)
    auxiliary fields. psi arrays are allocated by the field state.
    """

    axis: int
    side: int
    thickness: int
    start_e: int  # padded index of the first integer-sited absorber plane
    start_h: int  # padded index of the first half-sited absorber plane
    b_e: np.ndarray = field(repr=False, default=None)
    c_e: np.ndarray = field(repr=False, default=None)
    b_h: np.ndarray = field(repr=False, default=None)
    c_h: np.ndarray = field(repr=False, default=None)


def build_faces(phys_dims, lo_bcs, hi_bcs, params: CpmlParams, dt: float):
    """Absorbing faces plus the padded inverse-kappa arrays.

    Faces are placed on every PEC boundary (mirrors and periodic wraps get
    none). Returns (faces, ik_int, ik_half) where ik_int[axis] is the
    1/kappa array sampled at integer planes (used by E updates) and
    ik_half[axis] at half planes (H updates), both padded to dims + 2.
    """
    faces = []
    ik_int = [np.ones(n + 2) for n in phys_dims]
    ik_half = [np.ones(n + 2) for n in phys_dims]
    t = params.thickness
    if t == 0:
        return faces, ik_int, ik_half
    for axis in range(3):
        n = phys_dims[axis]
        n_absorbers = (lo_bcs[axis] == "pec") + (hi_bcs[axis] == "pec")
        if n_absorbers and n < n_absorbers * t + 6:
            raise ValueError(
                f"axis {'xyz'[axis]}: {n} cells cannot host "
                f"{n_absorbers} x {t}-cell absorbers"
            )
        if lo_bcs[axis] == "pec":
            ts = np.arange(t)
            xi_e = (t - 1.0 - ts) / t  # planes 2 .. t+1
            xi_h = (t - ts - 0.5) / t  # planes 1 .. t
            kap_e, b_e, c_e = _profile_coeffs(xi_e, params, dt)
            kap_h, b_h, c_h = _profile_coeffs(xi_h, params, dt)
            faces.append(
                CpmlFace(axis, 0, t, 2, 1, b_e, c_e, b_h, c_h)
            )
            ik_int[axis][2 : t + 2] = 1.0 / kap_e
            ik_half[axis][1 : t + 1] = 1.0 / kap_h
        if hi_bcs[axis] == "pec":
            ts = np.arange(t)
            xi_e = ts / t  # planes n-t .. n-1
            xi_h = (ts + 0.5) / t
            kap_e, b_e, c_e = _profile_coeffs(xi_e, params, dt)
            kap_h, b_h, c_h = _profile_coeffs(xi_h, params, dt)
            faces.append(
                CpmlFace(axis, 1, t, n - t, n - t, b_e, c_e, b_h, c_h)
            )
            ik_int[axis][n - t : n] = 1.0 / kap_e
            ik_half[axis][n - t : n] = 1.0 / kap_h
    return faces, ik_int, ik_half
