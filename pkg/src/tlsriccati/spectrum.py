"""Photon-emission spectra from analytic per-slice Fourier transforms.

The dipole (or emitted field) inside a slice is a constant plus a sinusoid at
the effective Rabi frequency, so its transform over the slice is a sum of
three kernels ``f^q`` with q = -1, 0, +1.  Summing the slices with their
time-origin phase factors gives the transform over the whole pulse, using the
convention ``d(z) = integral d(tau) exp(-i z tau) dtau``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .propagator import BoundaryStates, _coefficients, propagate
from .pulse import PulseSpec, SliceGrid, slice_drives

# below this |w D| the ratio form of a kernel loses digits to cancellation
_RATIO_CUTOFF = 1e-3
# recompute the boundary phase exactly every so many slices
_RESYNC = 256


class NormalizationError(ValueError):
    """Raised when the reference peak for a normalization is missing."""


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform spectrometer grid z_min, z_min + dz, ..., z_max (units of omega)."""

    z_min: float = 0.0
    z_max: float = 10.0
    dz: float = 1e-3

    def __post_init__(self):
        if not 0 <= self.z_min < self.z_max:
            raise ValueError(f"need 0 <= z_min < z_max, got {self.z_min}, {self.z_max}")
        if not self.dz > 0:
            raise ValueError(f"dz must be positive, got {self.dz}")
        count = (self.z_max - self.z_min) / self.dz
        if abs(count - round(count)) > 1e-6:
            raise ValueError("(z_max - z_min) / dz must be an integer")

    @property
    def count(self) -> int:
        return int(round((self.z_max - self.z_min) / self.dz)) + 1

    @property
    def z(self) -> np.ndarray:
        return self.z_min + self.dz * np.arange(self.count)


@dataclass(frozen=True)
class SpectrumSeries:
    z: np.ndarray
    amplitude: np.ndarray

    def __post_init__(self):
        if len(self.z) != len(self.amplitude):
            raise ValueError("z and amplitude must have equal length")

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2


def slice_kernel(z, x_eff, q: int, k: int, width: float | None = None):
    """Transform of exp(i q x_eff s) over one slice, f^q = (e^{-i w D} - 1) / w.

    Evaluated as -i D e^{-i w D/2} sinc(w D/2), w = z + q x_eff, D = pi/K,
    which is finite at w = 0.
    """
    if q not in (-1, 0, 1):
        raise ValueError(f"q must be -1, 0 or +1, got {q}")
    D = math.pi / k if width is None else width
    w = np.asarray(z, dtype=float) + q * np.asarray(x_eff, dtype=float)
    half = 0.5 * w * D
    out = -1j * D * np.exp(-1j * half) * np.sinc(half / np.pi)
    return out if out.ndim else complex(out)


def _slice_weights(kind, states, drives, y):
    """Coefficients of f^0, f^-1 and f^+1 in each slice transform."""
    n, p, re, im, xe = _coefficients(states, drives, y)
    x = drives
    osc = x * p - y * re
    if kind == "dipole":
        scale = 1.0 / (n * xe**2)
        w0 = 2j * x * (y * p + 4 * x * re) * scale
        wm = (-1j * y * osc + y * xe * im) * scale
        wp = (-1j * y * osc - y * xe * im) * scale
    elif kind == "emitted_field":
        scale = y / n
        w0 = np.zeros_like(scale, dtype=complex)
        wm = (1j * osc - xe * im) * scale
        wp = (1j * osc + xe * im) * scale
    else:
        raise ValueError(f"unknown spectrum kind {kind!r}")
    return w0, wm, wp, xe


def transform_slices(kind: str, states: BoundaryStates, drives, y: float,
                     starts, widths, z) -> np.ndarray:
    """Sum of per-slice analytic transforms at frequencies ``z``.

    Each kernel is evaluated in its ratio form
    (e^{-i z tau_f} e^{-i q x_eff D} - e^{-i z tau_i}) / (z + q x_eff), with the
    boundary phases e^{-i z tau} advanced by recurrence.  Points where the
    denominator nearly vanishes fall back to the sinc form.
    """
    drives = np.asarray(drives, dtype=float)
    z = np.asarray(z, dtype=float)
    w0, wm, wp, xe = _slice_weights(kind, states, drives, y)
    starts = np.asarray(starts, dtype=float)
    widths = np.asarray(widths, dtype=float)
    ends = starts + widths
    gm = np.exp(1j * xe * widths)   # e^{-i q x_eff D}, q = -1
    gp = np.exp(-1j * xe * widths)  # q = +1
    use0 = kind == "dipole"

    out = np.zeros(len(z), dtype=complex)
    if len(drives) == 0:
        return out
    e_in = np.exp(-1j * z * starts[0])
    step = widths[0]
    rho = np.exp(-1j * z * step)
    for j in range(len(drives)):
        D = widths[j]
        if D == step and j % _RESYNC:
            e_out = e_in * rho
        else:
            e_out = np.exp(-1j * z * ends[j])
        acc = wm[j] * _ratio_kernel(z - xe[j], e_in, e_out * gm[j], D)
        acc += wp[j] * _ratio_kernel(z + xe[j], e_in, e_out * gp[j], D)
        if use0:
            acc += w0[j] * _ratio_kernel(z, e_in, e_out, D)
        out += acc
        e_in = e_out
    return out


def _ratio_kernel(w, e_in, e_hi, D):
    """e^{-i z tau_i} f^q from w = z + q x_eff and e_hi = e^{-i z tau_f} e^{-i q x_eff D}."""
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (e_hi - e_in) / w
    near = np.abs(w) * D < _RATIO_CUTOFF
    if near.any():
        val[near] = e_in[near] * slice_kernel(w[near], 0.0, 0, 1, width=D)
    return val


def _spectrum(kind, states, spec, grid, fgrid, z=None, drives=None):
    if drives is None:
        drives = slice_drives(spec, grid)
    if z is None:
        z = fgrid.z
    amp = transform_slices(kind, states, drives, spec.y, grid.starts, grid.widths, z)
    return SpectrumSeries(np.asarray(z, dtype=float), amp)


def dipole_spectrum(states, spec: PulseSpec, grid: SliceGrid, fgrid: FrequencyGrid,
                    drives=None) -> SpectrumSeries:
    """Transform of the induced dipole summed over all slices; intensity is |d(z)|^2."""
    return _spectrum("dipole", states, spec, grid, fgrid, drives=drives)


def field_spectrum(states, spec: PulseSpec, grid: SliceGrid, fgrid: FrequencyGrid,
                   drives=None) -> SpectrumSeries:
    """Transform of the forward-scattered field summed over all slices."""
    return _spectrum("emitted_field", states, spec, grid, fgrid, drives=drives)


def _parabolic_vertex(ym, y0, yp):
    """Offset (in samples) and value of the parabola through three points."""
    den = ym - 2 * y0 + yp
    if den >= 0:
        return 0.0, y0
    off = 0.5 * (ym - yp) / den
    return off, y0 - 0.25 * (ym - yp) * off


def find_peaks(sp: SpectrumSeries, rel_threshold: float = 1e-3) -> list[tuple[float, float]]:
    """Local maxima above ``rel_threshold`` times the global maximum.

    Positions and heights are refined with a three-point parabola through the
    log intensity.  Returned as (z, height) pairs sorted by z.
    """
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must lie in (0, 1)")
    inten = np.asarray(sp.intensity, dtype=float)
    z = np.asarray(sp.z, dtype=float)
    if inten.size < 3 or not np.any(inten > 0):
        return []
    floor = rel_threshold * inten.max()
    interior = (inten[1:-1] > inten[:-2]) & (inten[1:-1] >= inten[2:]) & (inten[1:-1] > floor)
    idx = np.flatnonzero(interior) + 1
    tiny = np.finfo(float).tiny
    dz = z[1] - z[0]
    peaks = []
    for i in idx:
        lm, l0, lp = np.log(np.maximum(inten[i - 1:i + 2], tiny))
        off, lv = _parabolic_vertex(lm, l0, lp)
        peaks.append((float(z[i] + off * dz), float(np.exp(lv))))
    peaks.sort()
    merged: list[tuple[float, float]] = []
    for zp, hp in peaks:
        if merged and zp - merged[-1][0] < dz:
            if hp > merged[-1][1]:
                merged[-1] = (zp, hp)
            continue
        merged.append((zp, hp))
    return merged


def harmonic_heights(sp: SpectrumSeries, max_odd: int, rel_threshold: float = 1e-12) -> np.ndarray:
    """Heights H(n) of the tallest peak within +-0.5 of each odd n, with H(3) = 1.

    Returns an array of shape (m, 2) holding (n, H(n)) for n = 1, 3, ..., max_odd;
    harmonics without a detected peak get H = 0.
    """
    if sp.z[-1] < max_odd:
        raise ValueError(f"spectrum ends at z={sp.z[-1]:g}, below max_odd={max_odd}")
    peaks = np.array(find_peaks(sp, rel_threshold)).reshape(-1, 2)
    orders = np.arange(1, max_odd + 1, 2)
    heights = np.zeros(len(orders))
    for i, n in enumerate(orders):
        near = peaks[np.abs(peaks[:, 0] - n) <= 0.5]
        if len(near):
            heights[i] = near[:, 1].max()
    if max_odd < 3 or heights[1] <= 0:
        raise NormalizationError("no third-harmonic peak to normalize to")
    return np.column_stack([orders, heights / heights[1]])


def window_peak(sp: SpectrumSeries, z_target: float, window: float) -> float:
    """Largest intensity within |z - z_target| <= window."""
    sel = np.abs(sp.z - z_target) <= window + 1e-12
    if not np.any(sel):
        raise ValueError(f"no grid points within {window} of z={z_target}")
    return float(sp.intensity[sel].max())


def phase_scan(template: PulseSpec, phis, fgrid: FrequencyGrid, z_target: float,
               window: float, k: int = 100, kind: str = "emitted_field") -> np.ndarray:
    """Peak height near ``z_target`` for each carrier-envelope phase in ``phis``.

    Only the grid points of ``fgrid`` inside the window are evaluated.
    """
    if not window > 0:
        raise ValueError("window must be positive")
    z = fgrid.z
    z = z[np.abs(z - z_target) <= window + 1e-12]
    if z.size == 0:
        raise ValueError(f"frequency grid has no points within {window} of z={z_target}")
    grid = SliceGrid.for_pulse(template, k)
    heights = np.empty(len(phis))
    for i, phi in enumerate(phis):
        spec = template.replace(phi=float(phi))
        states = propagate(spec, grid)
        sp = _spectrum(kind, states, spec, grid, fgrid, z=z)
        heights[i] = sp.intensity.max()
    return heights
