"""Resonance extraction and cavity figures of merit.

Time series from the solver are decomposed into exponentially damped
sinusoids with a matrix-pencil (Prony-class) fit, giving wavelength and
quality factor well beyond Fourier resolution. Spectra and Lorentzian
linewidth fits cover the measurement-style Q estimate; mode volume and
the Purcell factor F = 3/(4 pi^2) * Q / (Vm / (lambda/n)^3) complete the
figure-of-merit chain.

Time is femtoseconds, wavelengths nanometres. Quality factor convention:
Q = pi * f / kappa with kappa the field amplitude decay rate, i.e.
s(t) = A * exp(-kappa t) * cos(2 pi f t + phi) has Q = pi f / kappa.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import FitError, ZeroFieldError

C_NM_FS = 299.792458  # vacuum light speed, nm per fs
PURCELL_PREFACTOR = 3.0 / (4.0 * math.pi**2)

_MIN_SAMPLES = 1000
_MIN_Q = 10.0
_AMPLITUDE_FLOOR = 1e-6


class ConditioningWarning(UserWarning):
    """The damped-sinusoid least-squares system was poorly conditioned."""


@dataclass(frozen=True)
class ResonantMode:
    """One extracted resonance.

    wavelength in nm, Q dimensionless, amplitude in the units of the input
    series, phase in radians at the start of the analysed window,
    decay_rate in 1/fs (field amplitude rate).
    """

    wavelength: float
    Q: float
    amplitude: float
    phase: float
    decay_rate: float

    def __post_init__(self):
        if not (self.wavelength > 0 and self.Q > 0):
            raise ValueError(f"wavelength and Q must be positive, got {self}")
        f = C_NM_FS / self.wavelength
        expected = math.pi * f / self.decay_rate
        if abs(expected - self.Q) > 1e-9 * self.Q:
            raise ValueError(
                f"inconsistent mode: Q={self.Q} but pi*f/decay_rate={expected}"
            )

    @property
    def frequency(self) -> float:
        """1/fs."""
        return C_NM_FS / self.wavelength


@dataclass(frozen=True)
class Spectrum:
    """Magnitude spectrum on a strictly increasing wavelength grid."""

    wavelength: np.ndarray = field(repr=False)
    amplitude: np.ndarray = field(repr=False)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.wavelength) != len(self.amplitude):
            raise ValueError("wavelength and amplitude lengths differ")
        if np.any(np.diff(self.wavelength) <= 0):
            raise ValueError("wavelengths must be strictly increasing")


@dataclass(frozen=True)
class LorentzianFit:
    lambda0: float
    fwhm: float
    Q: float
    amplitude: float
    background: float
    residual_norm: float


@dataclass(frozen=True)
class ModeVolumeResult:
    """Mode volume in physical units and in (lambda/n)^3."""

    Vm_physical: float
    Vm_normalized: float
    peak_location: tuple

    def __post_init__(self):
        if self.Vm_physical <= 0:
            raise ValueError("mode volume must be positive")


def _hankel_windows(s: np.ndarray, L: int) -> np.ndarray:
    n = len(s) - L
    return np.lib.stride_tricks.sliding_window_view(s, L + 1)[:n]


def _refine_poles(s, dt, freqs, kappas):
    """Variable-projection Gauss-Newton polish of (f, kappa) on the full series.

    Amplitudes are eliminated by linear least squares inside the residual,
    so only the 2M nonlinear parameters are optimized. Drives the pencil
    estimate to the least-squares optimum of the data, which makes the
    extraction scale-equivariant to the rounding floor.
    """
    m = len(freqs)
    t = np.arange(len(s)) * dt

    def residual(x):
        f, k = x[:m], x[m:]
        base = np.exp(np.outer(t, -k + 2j * math.pi * f))
        design = np.hstack([base.real, -base.imag])
        coef, *_ = np.linalg.lstsq(design, s, rcond=None)
        return design @ coef - s

    x0 = np.concatenate([freqs, kappas])
    lo = np.concatenate([np.full(m, 1e-300), np.full(m, 1e-300)])
    hi = np.full(2 * m, np.inf)
    try:
        result = least_squares(
            residual,
            x0,
            bounds=(lo, hi),
            jac="3-point",
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
            max_nfev=600,
        )
    except Exception:
        return freqs, kappas
    if not np.all(np.isfinite(result.x)):
        return freqs, kappas
    return result.x[:m], result.x[m:]


def harmonic_inversion(
    series,
    dt: float,
    band=None,
    max_poles: int = 50,
    pencil_size=None,
    rank_tol: float = 1e-8,
    refine_max: int = 16,
) -> list:
    """Decompose a real time series into damped sinusoids.

    series: uniformly sampled signal, at least 1000 samples (gate off any
    driven transient before calling). dt: sample spacing in fs. band:
    optional (lambda_min, lambda_max) window in nm; modes outside are
    dropped and the band must lie inside the sampled Nyquist range.

    Uses the matrix-pencil method: an SVD of the Hankel matrix of the
    signal isolates the signal subspace, the shifted subspace eigenvalue
    problem yields the complex poles, and a linear least-squares solve on
    the full series yields amplitudes and phases. Modes with Q < 10 or
    amplitude below 1e-6 of the strongest mode are discarded; the result
    is sorted by amplitude, descending.
    """
    s = np.asarray(series, dtype=float).ravel()
    if len(s) < _MIN_SAMPLES:
        raise ValueError(f"need at least {_MIN_SAMPLES} samples, got {len(s)}")
    if not np.all(np.isfinite(s)):
        raise ValueError("series contains non-finite samples")
    peak = np.abs(s).max()
    if peak == 0.0:
        return []

    f_nyquist = 0.5 / dt
    if band is not None:
        lam_lo, lam_hi = sorted(band)
        f_lo, f_hi = C_NM_FS / lam_hi, C_NM_FS / lam_lo
        if f_hi > f_nyquist:
            raise ValueError(
                f"band reaches {f_hi:.3g}/fs but Nyquist is {f_nyquist:.3g}/fs"
            )
    else:
        f_lo, f_hi = 0.0, f_nyquist

    # decimate long oversampled records before the SVD; poles are refined
    # on the full series afterwards so no resolution is lost
    dec = max(1, len(s) // 3000)
    if dec > 1:
        if band is not None and f_hi > 0:
            f_support = f_hi
        else:
            # keep everything above 1e-6 of the spectral peak below the
            # decimated Nyquist rate
            mag = np.abs(np.fft.rfft(s))
            above = np.nonzero(mag > 1e-6 * mag.max())[0]
            f_support = max(above[-1], 1) / (len(s) * dt)
        dec = min(dec, max(1, int(0.35 / (f_support * dt))))
    sd = s[::dec]
    dtd = dt * dec

    L = pencil_size or min(len(sd) // 3, 256)
    L = max(8, min(L, len(sd) // 2 - 1))
    # normalize by a power of two: exact in floating point, so the pole
    # extraction is bitwise scale-equivariant
    norm = 2.0 ** math.ceil(math.log2(peak))
    Y = _hankel_windows(sd / norm, L)
    _, sv, vh = np.linalg.svd(Y, full_matrices=False)
    rank = int(np.sum(sv >= rank_tol * sv[0]))
    rank = max(1, min(rank, max_poles * 2, L - 1))
    v = vh[:rank].conj().T  # (L+1, rank)
    z, *_ = np.linalg.lstsq(v[:-1], v[1:], rcond=None)
    poles = np.linalg.eigvals(z)

    # physical, decaying, positive-frequency poles only
    mag = np.abs(poles)
    ang = np.angle(poles)
    keep = (mag < 1.0 - 1e-14) & (mag > 1e-12) & (ang > 0)
    freqs = ang[keep] / (2.0 * math.pi * dtd)
    kappas = -np.log(mag[keep]) / dtd
    sel = (freqs >= f_lo * 0.99) & (freqs <= f_hi * 1.01) & (kappas > 0)
    freqs, kappas = freqs[sel], kappas[sel]
    if len(freqs) == 0:
        return []
    if len(freqs) <= refine_max:
        freqs, kappas = _refine_poles(s / norm, dt, freqs, kappas)

    # amplitudes/phases from the full-rate series
    t = np.arange(len(s)) * dt
    base = np.exp(np.outer(t, -kappas + 2j * math.pi * freqs))
    design = np.hstack([base.real, -base.imag])
    coef, *_ = np.linalg.lstsq(design, s, rcond=None)
    cond = np.linalg.cond(design)
    if cond > 1e10:
        warnings.warn(
            ConditioningWarning(
                f"damped-sinusoid design matrix condition number {cond:.3g}"
            )
        )
    m = len(freqs)
    amp = np.hypot(coef[:m], coef[m:])
    phase = np.arctan2(coef[m:], coef[:m])

    modes = []
    amp_floor = _AMPLITUDE_FLOOR * amp.max() if amp.size else 0.0
    for fi, ki, ai, pi in zip(freqs, kappas, amp, phase):
        q = math.pi * fi / ki
        if q < _MIN_Q or ai < amp_floor:
            continue
        if not (f_lo <= fi <= f_hi):
            continue
        modes.append(
            ResonantMode(
                wavelength=C_NM_FS / fi,
                Q=q,
                amplitude=float(ai),
                phase=float(pi),
                decay_rate=float(ki),
            )
        )
    modes.sort(key=lambda mo: mo.amplitude, reverse=True)
    return modes


_WINDOWS = {
    "rect": lambda n: np.ones(n),
    "hann": np.hanning,
    "hamming": np.hamming,
    "blackman": np.blackman,
}


def spectrum_from_series(
    series,
    dt: float,
    window: str = "hann",
    pad_factor: int = 1,
    wavelength_range=None,
) -> Spectrum:
    """Windowed Fourier magnitude of a time series on a wavelength grid.

    Uses the continuous-transform normalization |S(f)| = dt * |DFT|; the
    applied window, bin spacing and DC amplitude are recorded in the
    metadata so power bookkeeping stays possible after the f=0 bin is
    dropped from the wavelength axis.
    """
    s = np.asarray(series, dtype=float).ravel()
    if len(s) == 0:
        raise ValueError("empty series")
    if window not in _WINDOWS:
        raise ValueError(f"unknown window {window!r}, have {sorted(_WINDOWS)}")
    w = _WINDOWS[window](len(s))
    n = int(pad_factor) * len(s)
    spec = np.fft.rfft(s * w, n=n) * dt
    freqs = np.fft.rfftfreq(n, dt)
    amp = np.abs(spec[1:])[::-1]
    lam = (C_NM_FS / freqs[1:])[::-1]
    meta = {
        "window": window,
        "dt_fs": dt,
        "pad_factor": int(pad_factor),
        "n_samples": len(s),
        "df_per_fs": 1.0 / (n * dt),
        "dc_amplitude": float(np.abs(spec[0])),
    }
    if wavelength_range is not None:
        lo, hi = sorted(wavelength_range)
        m = (lam >= lo) & (lam <= hi)
        lam, amp = lam[m], amp[m]
    return Spectrum(wavelength=lam, amplitude=amp, metadata=meta)


def lorentzian_fit(spec: Spectrum, guess=None, max_nfev: int = 2000) -> LorentzianFit:
    """Fit L(l) = A*(G/2)^2 / ((l-l0)^2 + (G/2)^2) + B to a spectral peak.

    guess: optional wavelength of the peak; defaults to the strongest
    sample. Returns the fitted centre, FWHM and Q = l0/FWHM. Raises
    FitError (with the residual-norm history) when no peak stands above
    the noise or the solver fails to converge.
    """
    lam = np.asarray(spec.wavelength, dtype=float)
    amp = np.asarray(spec.amplitude, dtype=float)
    if len(lam) < 5:
        raise FitError("too few spectral samples to fit")
    b0 = float(np.median(amp))
    mad = float(np.median(np.abs(amp - b0))) + 1e-300
    if guess is None:
        i_pk = int(np.argmax(amp))
    else:
        # keep the peak search local to the supplied guess
        i_pk = int(np.argmin(np.abs(lam - guess)))
        lo = max(0, i_pk - len(lam) // 8)
        hi = min(len(lam), i_pk + len(lam) // 8 + 1)
        i_pk = lo + int(np.argmax(amp[lo:hi]))
    a0 = float(amp[i_pk] - b0)
    if a0 <= 5.0 * mad:
        raise FitError("no peak stands above the background")
    l0 = float(lam[i_pk])

    half = b0 + a0 / 2.0
    above = amp >= half
    j = i_pk
    while j + 1 < len(lam) and above[j + 1]:
        j += 1
    k = i_pk
    while k - 1 >= 0 and above[k - 1]:
        k -= 1
    fwhm0 = max(lam[min(j + 1, len(lam) - 1)] - lam[max(k - 1, 0)], 2.0 * (lam[1] - lam[0]))

    history = []

    def model(p, x):
        a, c, g, b = p
        hw2 = (g / 2.0) ** 2
        return a * hw2 / ((x - c) ** 2 + hw2) + b

    def residual(p):
        r = model(p, lam) - amp
        history.append(float(np.linalg.norm(r)))
        return r

    result = least_squares(
        residual,
        x0=[a0, l0, fwhm0, b0],
        bounds=([0, lam[0], 1e-12, -np.inf], [np.inf, lam[-1], lam[-1] - lam[0], np.inf]),
        max_nfev=max_nfev,
    )
    if not result.success:
        raise FitError(f"Lorentzian fit did not converge: {result.message}", history)
    a, c, g, b = result.x
    if g <= 0 or a <= 0:
        raise FitError("degenerate Lorentzian fit", history)
    rnorm = float(np.linalg.norm(result.fun))
    return LorentzianFit(
        lambda0=float(c),
        fwhm=float(g),
        Q=float(c / g),
        amplitude=float(a),
        background=float(b),
        residual_norm=rnorm,
    )


def mode_volume(grid, e_field, wavelength: float, n: float) -> ModeVolumeResult:
    """Mode volume Vm = integral(eps |E|^2 dV) / max(eps |E|^2).

    e_field: the three E-component arrays (real or complex) on the grid's
    sample points. The energy density is accumulated per Yee sample with
    no co-location interpolation; the peak is taken over grid samples.
    Vm_normalized divides by (wavelength/n)^3.
    """
    u = None
    for eps, comp in zip(grid.components(), e_field):
        if comp.shape != eps.shape:
            raise ValueError(f"field shape {comp.shape} != grid dims {eps.shape}")
        term = eps * np.abs(comp) ** 2
        u = term if u is None else u + term
    peak = float(u.max())
    if peak <= 0.0:
        raise ZeroFieldError("mode volume undefined for a zero field")
    dv = grid.dx**3
    vm_phys = float(u.sum()) * dv / peak
    idx = np.unravel_index(int(np.argmax(u)), u.shape)
    centre = grid.center_index
    loc = tuple((idx[i] - centre[i]) * grid.dx for i in range(3))
    return ModeVolumeResult(
        Vm_physical=vm_phys,
        Vm_normalized=vm_phys / (wavelength / n) ** 3,
        peak_location=loc,
    )


def purcell_factor(Q: float, Vm_normalized: float) -> float:
    """Spontaneous-emission enhancement for an ideally placed emitter.

    F = (3 / 4 pi^2) * Q / Vm with Vm in units of (lambda/n)^3.
    """
    if Q <= 0 or Vm_normalized <= 0:
        raise ValueError(f"Q and Vm must be positive, got Q={Q}, Vm={Vm_normalized}")
    return PURCELL_PREFACTOR * (Q / Vm_normalized)
