"""Pulse shapes, dimensionless drive parameters and the half-cycle slice grid.

All quantities are dimensionless: time is the carrier phase ``tau = omega t``,
the drive strength is ``x = Omega_R / omega`` and the level splitting is
``y = omega_21 / omega``.  The incident field is ``x f(tau) sin(tau + phi)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
from scipy.optimize import brentq

# sech^2(u) = 1/2 at u = 0.8814..., so the intensity FWHM is 1.763 tau_0
SECH_FWHM = 1.763
# sinc^2(u) = 1/2 at u = 1.3916..., intensity FWHM in units of tau_0
SINC_FWHM = 2.0 * brentq(lambda u: (math.sin(u) / u) ** 2 - 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class Box:
    """Constant envelope, f = 1 over the whole window."""

    kind = "box"


@dataclass(frozen=True)
class Sech:
    """Hyperbolic-secant envelope centered in the window.

    ``n_fwhm`` is the intensity FWHM in optical cycles.
    """

    n_fwhm: float
    kind = "sech"

    def __post_init__(self):
        if not self.n_fwhm > 0:
            raise ValueError(f"n_fwhm must be positive, got {self.n_fwhm}")

    @property
    def tau0(self) -> float:
        return 2.0 * math.pi * self.n_fwhm / SECH_FWHM


@dataclass(frozen=True)
class Sinc:
    """sin(u)/u envelope centered in the window; has negative lobes."""

    n_fwhm: float
    kind = "sinc"

    def __post_init__(self):
        if not self.n_fwhm > 0:
            raise ValueError(f"n_fwhm must be positive, got {self.n_fwhm}")

    @property
    def tau0(self) -> float:
        return 2.0 * math.pi * self.n_fwhm / SINC_FWHM


@dataclass(frozen=True)
class GaussianRampFlat:
    """Gaussian switch-on over ``ramp_cycles`` cycles, then flat at 1.

    With the default ``ramp_cycles=10``:
    f = exp(-((tau - 20 pi) / 10 pi)^2) for tau <= 20 pi, f = 1 afterwards.
    """

    ramp_cycles: float = 10.0
    kind = "gaussian_ramp_flat"

    def __post_init__(self):
        if not self.ramp_cycles > 0:
            raise ValueError(f"ramp_cycles must be positive, got {self.ramp_cycles}")


Shape = Union[Box, Sech, Sinc, GaussianRampFlat]
CENTERED = (Sech, Sinc)


def default_window(shape: Shape) -> int:
    """Even number of cycles for a centered pulse.

    At least ``max(16, 10 n_fwhm)`` cycles; sech windows are widened further
    until the edge envelope drops below 1e-4.
    """
    n = max(16.0, 10.0 * shape.n_fwhm)
    if isinstance(shape, Sech):
        # sech(pi N / tau0) < 1e-4
        n = max(n, math.acosh(1e4) * shape.tau0 / math.pi)
    n = math.ceil(n - 1e-9)
    return n + (n % 2)


@dataclass(frozen=True)
class PulseSpec:
    """The drive: envelope family, window length, strength, splitting and CEP.

    ``n_cycles`` may be omitted for centered shapes (``Sech``/``Sinc``), in
    which case :func:`default_window` picks it.
    """

    shape: Shape
    x: float
    y: float
    phi: float = 0.0
    n_cycles: float | None = None

    def __post_init__(self):
        if not isinstance(self.shape, (Box, Sech, Sinc, GaussianRampFlat)):
            raise TypeError(f"unknown pulse shape {self.shape!r}")
        if self.n_cycles is None:
            if not isinstance(self.shape, CENTERED):
                raise ValueError("n_cycles is required for box and ramp shapes")
            object.__setattr__(self, "n_cycles", float(default_window(self.shape)))
        if not self.n_cycles > 0:
            raise ValueError(f"n_cycles must be positive, got {self.n_cycles}")
        if not self.x >= 0:
            raise ValueError(f"x must be nonnegative, got {self.x}")
        if not self.y > 0:
            raise ValueError(f"y must be positive, got {self.y}")
        if not math.isfinite(self.phi):
            raise ValueError(f"phi must be finite, got {self.phi}")

    @property
    def duration(self) -> float:
        """Window length in tau, 2 pi N."""
        return 2.0 * math.pi * self.n_cycles

    @property
    def tau_center(self) -> float:
        return math.pi * self.n_cycles

    @property
    def tau_ref(self) -> float:
        """Carrier phase reference: envelope peak for centered shapes, else 0."""
        return self.tau_center if isinstance(self.shape, CENTERED) else 0.0

    def replace(self, **changes) -> "PulseSpec":
        return replace(self, **changes)


@dataclass(frozen=True)
class SliceGrid:
    """Partition of [0, 2 pi N] into slices of width pi/K.

    Slice ``j`` (1-based) spans [(j-1) pi/K, j pi/K].  When 2NK is not an
    integer the last slice is cut at 2 pi N; its midpoint stays nominal.
    """

    k: int
    n_cycles: float
    j_total: int = field(init=False)
    delta_tau: float = field(init=False)

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if not self.n_cycles > 0:
            raise ValueError(f"n_cycles must be positive, got {self.n_cycles}")
        object.__setattr__(self, "k", int(self.k))
        count = 2.0 * self.n_cycles * self.k
        # tolerate representation error in products such as 2 * 1.7 * 10
        j_total = round(count) if abs(count - round(count)) < 1e-9 else math.ceil(count)
        object.__setattr__(self, "j_total", int(j_total))
        object.__setattr__(self, "delta_tau", math.pi / self.k)

    @classmethod
    def for_pulse(cls, spec: PulseSpec, k: int) -> "SliceGrid":
        return cls(k=k, n_cycles=spec.n_cycles)

    @property
    def end(self) -> float:
        return 2.0 * math.pi * self.n_cycles

    @property
    def starts(self) -> np.ndarray:
        return np.arange(self.j_total) * self.delta_tau

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(1, self.j_total + 1) - 0.5) * self.delta_tau

    @property
    def widths(self) -> np.ndarray:
        """Actual slice widths; only the last one can be shorter than pi/K."""
        w = np.full(self.j_total, self.delta_tau)
        w[-1] = self.end - (self.j_total - 1) * self.delta_tau
        return w

    @property
    def boundaries(self) -> np.ndarray:
        b = np.arange(self.j_total + 1) * self.delta_tau
        b[-1] = self.end
        return b


def envelope(spec: PulseSpec, tau):
    """Envelope f(tau); accepts scalars or arrays."""
    shape = spec.shape
    tau = np.asarray(tau, dtype=float)
    if isinstance(shape, Box):
        out = np.ones_like(tau)
    elif isinstance(shape, Sech):
        out = 1.0 / np.cosh((tau - spec.tau_center) / shape.tau0)
    elif isinstance(shape, Sinc):
        # np.sinc is the normalized sinc, sin(pi u)/(pi u)
        out = np.sinc((tau - spec.tau_center) / (shape.tau0 * np.pi))
    else:
        t_flat = 2.0 * np.pi * shape.ramp_cycles
        ramp = np.exp(-(((tau - t_flat) / (np.pi * shape.ramp_cycles)) ** 2))
        out = np.where(tau <= t_flat, ramp, 1.0)
    return out if out.ndim else float(out)


def normalized_field(spec: PulseSpec, tau):
    """Normalized instantaneous drive h(tau) = f(tau) sin(tau - tau_ref + phi)."""
    tau = np.asarray(tau, dtype=float)
    h = envelope(spec, tau) * np.sin(tau - spec.tau_ref + spec.phi)
    return h if np.ndim(h) else float(h)


def slice_drives(spec: PulseSpec, grid: SliceGrid) -> np.ndarray:
    """Midpoint drive x_j = x h(tau_j^m) for all slices at once."""
    return spec.x * np.asarray(normalized_field(spec, grid.midpoints))


def slice_drive(spec: PulseSpec, grid: SliceGrid, j: int) -> float:
    """Midpoint drive of slice ``j`` (1-based)."""
    if not 1 <= j <= grid.j_total:
        raise IndexError(f"slice index {j} outside 1..{grid.j_total}")
    tau_m = (j - 0.5) * grid.delta_tau
    return spec.x * normalized_field(spec, tau_m)


def effective_rabi(x_j, y):
    """Normalized effective Rabi frequency sqrt(4 x_j^2 + y^2)."""
    return np.sqrt(4.0 * np.square(x_j) + y * y)


def area_to_strength(area: float, n_fwhm: float) -> float:
    """Strength x of a sech pulse with envelope area ``area``."""
    if area < 0 or not n_fwhm > 0:
        raise ValueError("need area >= 0 and n_fwhm > 0")
    return SECH_FWHM * area / (2.0 * math.pi**2 * n_fwhm)


def strength_to_area(x: float, n_fwhm: float) -> float:
    """Envelope area A = pi tau_0 x of a sech pulse."""
    return 2.0 * math.pi**2 * n_fwhm * x / SECH_FWHM
