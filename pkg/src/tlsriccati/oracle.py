"""Reference dynamics by direct fixed-step RK4 integration.

Two formulations are integrated against the true continuous drive:
the linear amplitude equations for (b1, b2) and the Riccati equation for
r = b2/b1.  Neither uses the slice recurrence, so both serve as independent
checks of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .propagator import TimeSeries
from .pulse import Box, PulseSpec, SliceGrid, normalized_field


class IntegrationAccuracyError(RuntimeError):
    """The RK4 norm drift exceeded the allowed bound."""


@dataclass(frozen=True)
class OracleConfig:
    steps_per_cycle: int = 2000
    gauge: str = "symmetric"
    max_norm_drift: float = 1e-6

    def __post_init__(self):
        if int(self.steps_per_cycle) != self.steps_per_cycle or self.steps_per_cycle < 1:
            raise ValueError(f"steps_per_cycle must be a positive integer, got {self.steps_per_cycle}")
        if self.gauge not in ("symmetric", "ground_zero"):
            raise ValueError(f"unknown gauge {self.gauge!r}")

    @property
    def method(self) -> str:
        return "rk4"


@dataclass(frozen=True)
class AmplitudeResult:
    inversion: TimeSeries
    dipole: TimeSeries
    b1: np.ndarray
    b2: np.ndarray
    boundary_ratio: np.ndarray | None
    norm_drift: float


@dataclass(frozen=True)
class RiccatiTrajectory:
    tau: np.ndarray
    r: np.ndarray
    completed: bool
    message: str = ""

    @property
    def inversion(self) -> np.ndarray:
        m = np.abs(self.r) ** 2
        return (m - 1) / (m + 1)

    @property
    def dipole(self) -> np.ndarray:
        return 2 * self.r.real / (np.abs(self.r) ** 2 + 1)


def _step_plan(tau_samples, steps_per_cycle):
    """Fixed RK4 steps landing exactly on every sample time.

    Returns step start times, step sizes and the cumulative step count at
    which each sample is reached.
    """
    h_max = 2 * math.pi / steps_per_cycle
    gaps = np.diff(tau_samples)
    nsub = np.maximum(1, np.ceil(gaps / h_max - 1e-9)).astype(int)
    marks = np.concatenate([[0], np.cumsum(nsub)])
    h = np.repeat(gaps / nsub, nsub)
    substep = np.arange(h.size) - np.repeat(marks[:-1], nsub)
    t0 = np.repeat(tau_samples[:-1], nsub) + substep * h
    return t0, h, marks


def _sample_times(spec, config, tau, grid):
    """All integration stop times, and the subset the caller asked for."""
    if tau is None:
        n = max(1, math.ceil(config.steps_per_cycle * spec.n_cycles - 1e-9))
        tau = np.linspace(0.0, spec.duration, n + 1)
    requested = np.asarray(tau, dtype=float)
    if np.any(np.diff(requested) <= 0):
        raise ValueError("sample times must be strictly increasing")
    times = requested
    if grid is not None:
        times = np.union1d(times, grid.boundaries)
    if times[0] > 0:
        times = np.concatenate([[0.0], times])
    return times, requested


def integrate_amplitudes(spec: PulseSpec, config: OracleConfig = OracleConfig(),
                         tau=None, grid: SliceGrid | None = None) -> AmplitudeResult:
    """RK4 integration of the two amplitude equations from the ground state.

    Samples are returned at ``tau`` (default: every RK4 step of the window);
    with ``grid`` the ratio b2/b1 is also reported at its slice boundaries.
    """
    times, requested = _sample_times(spec, config, tau, grid)
    t0, h, marks = _step_plan(times, config.steps_per_cycle)
    xh0 = (spec.x * np.asarray(normalized_field(spec, t0))).tolist()
    xh1 = (spec.x * np.asarray(normalized_field(spec, t0 + 0.5 * h))).tolist()
    xh2 = (spec.x * np.asarray(normalized_field(spec, t0 + h))).tolist()
    hs = h.tolist()
    y = spec.y
    if config.gauge == "symmetric":
        e1, e2 = -0.5 * y, 0.5 * y
    else:
        e1, e2 = 0.0, y

    def rhs(a, b, xh):
        # i db1 = e1 b1 - xh b2,  i db2 = e2 b2 - xh b1
        return -1j * (e1 * a - xh * b), -1j * (e2 * b - xh * a)

    b1 = np.empty(len(times), dtype=complex)
    b2 = np.empty(len(times), dtype=complex)
    a, b = 1.0 + 0j, 0j
    b1[0], b2[0] = a, b
    drift = 0.0
    out = 1
    next_mark = marks[1]
    for s in range(len(hs)):
        dt, f0, f1, f2 = hs[s], xh0[s], xh1[s], xh2[s]
        k1a, k1b = rhs(a, b, f0)
        k2a, k2b = rhs(a + 0.5 * dt * k1a, b + 0.5 * dt * k1b, f1)
        k3a, k3b = rhs(a + 0.5 * dt * k2a, b + 0.5 * dt * k2b, f1)
        k4a, k4b = rhs(a + dt * k3a, b + dt * k3b, f2)
        a = a + dt / 6 * (k1a + 2 * k2a + 2 * k3a + k4a)
        b = b + dt / 6 * (k1b + 2 * k2b + 2 * k3b + k4b)
        if s + 1 == next_mark:
            b1[out], b2[out] = a, b
            out += 1
            next_mark = marks[out] if out < len(marks) else -1
            drift = max(drift, abs(abs(a) ** 2 + abs(b) ** 2 - 1))
    drift = max(drift, abs(abs(a) ** 2 + abs(b) ** 2 - 1))
    if drift > config.max_norm_drift:
        raise IntegrationAccuracyError(
            f"norm drift {drift:.3g} exceeds {config.max_norm_drift:g}; raise steps_per_cycle")

    ratio = None
    if grid is not None:
        pos = np.searchsorted(times, grid.boundaries)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = b2[pos] / b1[pos]
    keep = np.isin(times, requested)
    w = np.abs(b2) ** 2 - np.abs(b1) ** 2
    d = 2 * np.real(np.conj(b1) * b2)
    return AmplitudeResult(
        inversion=TimeSeries(times[keep], w[keep], "inversion"),
        dipole=TimeSeries(times[keep], d[keep], "dipole"),
        b1=b1[keep], b2=b2[keep], boundary_ratio=ratio, norm_drift=drift)


def integrate_riccati(spec: PulseSpec, config: OracleConfig = OracleConfig(), tau=None,
                      r0: complex = 0j, blowup: float = 1e6) -> RiccatiTrajectory:
    """RK4 integration of i dr/dtau = (r^2 - 1) x h(tau) + y r.

    Stops early, with ``completed=False``, once |r| exceeds ``blowup``; the
    ratio diverges when the ground level empties.
    """
    times, _ = _sample_times(spec, config, tau, None)
    t0, h, marks = _step_plan(times, config.steps_per_cycle)
    xh0 = (spec.x * np.asarray(normalized_field(spec, t0))).tolist()
    xh1 = (spec.x * np.asarray(normalized_field(spec, t0 + 0.5 * h))).tolist()
    xh2 = (spec.x * np.asarray(normalized_field(spec, t0 + h))).tolist()
    hs = h.tolist()
    y = spec.y

    def rhs(r, xh):
        return -1j * ((r * r - 1) * xh + y * r)

    r = complex(r0)
    rs = np.empty(len(times), dtype=complex)
    rs[0] = r
    out, next_mark = 1, marks[1]
    for s in range(len(hs)):
        dt = hs[s]
        k1 = rhs(r, xh0[s])
        k2 = rhs(r + 0.5 * dt * k1, xh1[s])
        k3 = rhs(r + 0.5 * dt * k2, xh1[s])
        k4 = rhs(r + dt * k3, xh2[s])
        r = r + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not abs(r) <= blowup:
            msg = f"|r| exceeded {blowup:g} near tau={t0[s] + dt:.6g}; use integrate_amplitudes"
            return RiccatiTrajectory(times[:out], rs[:out], False, msg)
        if s + 1 == next_mark:
            rs[out] = r
            out += 1
            next_mark = marks[out] if out < len(marks) else -1
    return RiccatiTrajectory(times, rs, True)


def swa_grid(spec: PulseSpec) -> tuple[PulseSpec, SliceGrid]:
    """Square-wave limit: one slice per half-cycle with x rescaled by 2/pi.

    The returned box pulse has phi = 0, so its midpoint drives alternate as
    (-1)^(j+1) (2/pi) x.
    """
    if not isinstance(spec.shape, Box):
        raise ValueError("the square-wave approximation is defined for box pulses only")
    if spec.phi != 0:
        raise ValueError("the square-wave approximation assumes a sine-like pulse, phi = 0")
    swa = spec.replace(x=2.0 / math.pi * spec.x)
    return swa, SliceGrid.for_pulse(swa, 1)


def compare_series(a: TimeSeries, b: TimeSeries) -> tuple[float, float]:
    """Max and RMS difference of ``a - b`` on ``a``'s time grid.

    ``b`` is linearly interpolated when the grids differ; only the overlap
    of the two ranges is compared.
    """
    ta, tb = np.asarray(a.tau), np.asarray(b.tau)
    if len(ta) == len(tb) and np.array_equal(ta, tb):
        diff = np.asarray(a.value) - np.asarray(b.value)
    else:
        lo, hi = max(ta[0], tb[0]), min(ta[-1], tb[-1])
        sel = (ta >= lo) & (ta <= hi)
        if lo > hi or not np.any(sel):
            raise ValueError("series have disjoint time ranges")
        diff = np.asarray(a.value)[sel] - np.interp(ta[sel], tb, np.asarray(b.value))
    return float(np.max(np.abs(diff))), float(np.sqrt(np.mean(diff**2)))
