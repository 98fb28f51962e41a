"""Slice-by-slice propagation of the amplitude ratio and in-slice observables.

Within one slice the drive is frozen at its midpoint value ``x_j``, so the
Riccati equation for r = b2/b1 is solved exactly by a Mobius map.  The map is
applied to the projective pair (alpha, beta) ~ (b1, b2) as a 2x2 matrix,
which stays finite when the ground level empties and the ratio diverges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pulse import PulseSpec, SliceGrid, effective_rabi, slice_drives

KINDS = ("inversion", "dipole", "emitted_field")


@dataclass(frozen=True)
class SliceState:
    """Projective amplitude pair at a slice boundary, ratio I = beta/alpha."""

    alpha: complex
    beta: complex

    @property
    def ratio(self) -> complex:
        if self.alpha == 0:
            return complex(math.inf, 0.0)
        return self.beta / self.alpha

    @property
    def norm(self) -> float:
        return abs(self.alpha) ** 2 + abs(self.beta) ** 2

    @classmethod
    def ground(cls) -> "SliceState":
        return cls(1.0 + 0j, 0j)


@dataclass(frozen=True)
class BoundaryStates:
    """States at all j_total + 1 slice boundaries, stored as two arrays."""

    alpha: np.ndarray
    beta: np.ndarray

    def __len__(self):
        return len(self.alpha)

    def __getitem__(self, i) -> SliceState:
        return SliceState(complex(self.alpha[i]), complex(self.beta[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.beta / self.alpha

    @property
    def inversion(self) -> np.ndarray:
        """w = |b2|^2 - |b1|^2 at each boundary."""
        return np.abs(self.beta) ** 2 - np.abs(self.alpha) ** 2

    @property
    def bloch(self) -> np.ndarray:
        """Bloch vector (u, v, w) at each boundary, shape (3, j_total + 1)."""
        c = np.conj(self.alpha) * self.beta
        n = np.abs(self.alpha) ** 2 + np.abs(self.beta) ** 2
        return np.array([2 * c.real / n, 2 * c.imag / n, self.inversion / n])


@dataclass(frozen=True)
class TimeSeries:
    tau: np.ndarray
    value: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown series kind {self.kind!r}")
        if len(self.tau) != len(self.value):
            raise ValueError("tau and value must have equal length")

    @property
    def cycles(self) -> np.ndarray:
        return self.tau / (2 * np.pi)


def slice_matrix(x_j: float, y: float, k: int, width: float | None = None) -> np.ndarray:
    """Unitary map across one slice of constant drive ``x_j``.

    Equals ``M_j / (-i x_eff)`` where M_j is the sin(theta)-multiplied form of
    the ratio recurrence, theta = x_eff * width / 2.
    """
    if width is None:
        width = math.pi / k
    xe = math.sqrt(4.0 * x_j * x_j + y * y)
    th = 0.5 * xe * width
    s, c = math.sin(th), math.cos(th)
    a = c + 1j * (y / xe) * s
    b = 1j * (2.0 * x_j / xe) * s
    return np.array([[a, b], [b, a.conjugate()]])


def advance_slice(state: SliceState, x_j: float, y: float, k: int) -> SliceState:
    """State at the next slice boundary, renormalized."""
    (a, b), (_, d) = slice_matrix(x_j, y, k)
    alpha = a * state.alpha + b * state.beta
    beta = b * state.alpha + d * state.beta
    n = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    return SliceState(alpha / n, beta / n)


def propagate_drives(drives, y: float, k: int, widths=None, initial: SliceState | None = None) -> BoundaryStates:
    """Run the recurrence over an explicit sequence of slice drives."""
    drives = np.asarray(drives, dtype=float)
    j_total = len(drives)
    if widths is None:
        widths = np.full(j_total, math.pi / k)
    xe = effective_rabi(drives, y)
    th = 0.5 * xe * widths
    sn, cs = np.sin(th), np.cos(th)
    diag = (cs + 1j * (y / xe) * sn).tolist()
    off = (1j * (2.0 * drives / xe) * sn).tolist()

    alpha = np.empty(j_total + 1, dtype=complex)
    beta = np.empty(j_total + 1, dtype=complex)
    init = initial or SliceState.ground()
    a0, b0 = complex(init.alpha), complex(init.beta)
    n = math.sqrt(abs(a0) ** 2 + abs(b0) ** 2)
    a0, b0 = a0 / n, b0 / n
    alpha[0], beta[0] = a0, b0
    # sequential by construction; plain complex scalars are faster than numpy here
    for j in range(j_total):
        m, o = diag[j], off[j]
        a1 = m * a0 + o * b0
        b1 = o * a0 + m.conjugate() * b0
        n = math.sqrt(a1.real**2 + a1.imag**2 + b1.real**2 + b1.imag**2)
        a0, b0 = a1 / n, b1 / n
        alpha[j + 1], beta[j + 1] = a0, b0
    return BoundaryStates(alpha, beta)


def propagate(spec: PulseSpec, grid: SliceGrid) -> BoundaryStates:
    """Boundary states for every slice of the pulse, starting from the ground state."""
    return propagate_drives(slice_drives(spec, grid), spec.y, grid.k, grid.widths)


def _coefficients(states: BoundaryStates, drives, y):
    """Per-slice scalars shared by the observables and their transforms."""
    a, b = states.alpha[:-1], states.beta[:-1]
    c = np.conj(a) * b
    n = np.abs(a) ** 2 + np.abs(b) ** 2
    p = np.abs(a) ** 2 - np.abs(b) ** 2  # (1 - |I|^2) |alpha|^2
    xe = effective_rabi(drives, y)
    return n, p, c.real, c.imag, xe


def evaluate_slices(kind: str, states: BoundaryStates, drives, y: float, offsets) -> np.ndarray:
    """Closed-form observable inside every slice at the given offsets.

    ``offsets`` is either 1-D (same offsets in every slice) or 2-D with one
    row per slice.  Returns an array of shape (j_total, n_offsets).
    """
    drives = np.asarray(drives, dtype=float)
    n, p, re, im, xe = _coefficients(states, drives, y)
    x = drives[:, None]
    n, p, re, im, xe = (v[:, None] for v in (n, p, re, im, xe))
    offsets = np.asarray(offsets, dtype=float)
    if offsets.ndim == 1:
        offsets = offsets[None, :]
    cs, sn = np.cos(xe * offsets), np.sin(xe * offsets)
    osc = x * p - y * re
    if kind == "inversion":
        val = y * (y * p + 4 * x * re) + 4 * x * osc * cs - 4 * x * xe * im * sn
        return -val / (n * xe**2)
    if kind == "dipole":
        val = x * (y * p + 4 * x * re) - y * osc * cs + y * xe * im * sn
        return 2 * val / (n * xe**2)
    if kind == "emitted_field":
        return 2 * y * (osc * cs - xe * im * sn) / n
    raise ValueError(f"unknown series kind {kind!r}")


def series(kind: str, states: BoundaryStates, spec: PulseSpec, grid: SliceGrid,
           samples_per_slice: int = 8, drives=None) -> TimeSeries:
    """Sample an observable uniformly inside each slice.

    Each slice contributes ``samples_per_slice`` points starting at its left
    edge; the right edge of the final slice closes the series.
    """
    if samples_per_slice < 1:
        raise ValueError("samples_per_slice must be >= 1")
    if drives is None:
        drives = slice_drives(spec, grid)
    widths = grid.widths
    frac = np.arange(samples_per_slice) / samples_per_slice
    offsets = widths[:, None] * frac[None, :]
    vals = evaluate_slices(kind, states, drives, spec.y, offsets)
    tau = grid.starts[:, None] + offsets
    last = evaluate_slices(kind, BoundaryStates(states.alpha[-2:], states.beta[-2:]),
                           drives[-1:], spec.y, [widths[-1]])
    tau = np.append(tau.ravel(), grid.end)
    value = np.append(vals.ravel(), last[0, 0])
    return TimeSeries(tau, value, kind)


def inversion_series(states, spec, grid, samples_per_slice=8, drives=None) -> TimeSeries:
    """Population inversion w = |b2|^2 - |b1|^2 over the pulse."""
    return series("inversion", states, spec, grid, samples_per_slice, drives)


def dipole_series(states, spec, grid, samples_per_slice=8, drives=None) -> TimeSeries:
    """Induced dipole d = 2 Re(b1* b2), with the transition moment set to 1."""
    return series("dipole", states, spec, grid, samples_per_slice, drives)


def emitted_field_series(states, spec, grid, samples_per_slice=8, drives=None) -> TimeSeries:
    """Forward-scattered field, the second time derivative of the dipole (arbitrary units)."""
    return series("emitted_field", states, spec, grid, samples_per_slice, drives)
