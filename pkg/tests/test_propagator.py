import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from tlsriccati.oracle import OracleConfig, compare_series, integrate_amplitudes, integrate_riccati
from tlsriccati.propagator import (BoundaryStates, SliceState, TimeSeries, advance_slice,
                                   dipole_series, emitted_field_series, evaluate_slices,
                                   inversion_series, propagate, propagate_drives, series,
                                   slice_matrix)
from tlsriccati.pulse import Box, PulseSpec, Sech, SliceGrid, slice_drives


def fig1(k=10):
    spec = PulseSpec(Box(), x=1.0, y=1.0, phi=0.0, n_cycles=2)
    return spec, SliceGrid.for_pulse(spec, k)


def hamiltonian(x_j, y):
    # i d/dtau (b1, b2) = H (b1, b2), symmetric gauge
    return np.array([[-y / 2, -x_j], [-x_j, y / 2]])


def spec_matrix(x_j, y, k):
    """The sin-multiplied recurrence matrix, written out literally."""
    xe = math.sqrt(4 * x_j**2 + y**2)
    th = math.pi * xe / (2 * k)
    s, c = math.sin(th), math.cos(th)
    return np.array([[y * s - 1j * xe * c, 2 * x_j * s],
                     [2 * x_j * s, -(y * s + 1j * xe * c)]])


def test_slice_matrix_is_exact_propagator():
    for x_j, y, k in [(0.3, 1.0, 10), (-2.0, 0.05, 3), (7.0, 4.0, 1)]:
        u = slice_matrix(x_j, y, k)
        ref = expm(-1j * hamiltonian(x_j, y) * math.pi / k)
        np.testing.assert_allclose(u, ref, atol=1e-13)


def test_slice_matrix_is_scaled_recurrence_matrix():
    x_j, y, k = 0.8, 1.3, 7
    xe = math.sqrt(4 * x_j**2 + y**2)
    np.testing.assert_allclose(slice_matrix(x_j, y, k), spec_matrix(x_j, y, k) / (-1j * xe), atol=1e-14)


def test_recurrence_matches_cot_form_where_finite():
    x_j, y, k, r = 0.7, 1.1, 10, 0.3 - 0.2j
    xe = math.sqrt(4 * x_j**2 + y**2)
    cot = 1 / math.tan(math.pi * xe / (2 * k))
    expected = (2 * x_j - (y + 1j * xe * cot) * r) / (y - 1j * xe * cot + 2 * x_j * r)
    s = advance_slice(SliceState(1.0, r), x_j, y, k)
    assert s.ratio == pytest.approx(expected, abs=1e-13)


def test_zero_field_phase_rotation():
    s = advance_slice(SliceState(1.0, 0.5), 0.0, 1.0, 10)
    assert s.ratio == pytest.approx(0.5 * np.exp(-1j * math.pi / 10), abs=1e-15)


def test_full_effective_rotation_is_identity_on_ratio():
    # x_eff = 2 m K gives theta = m pi
    k, y, m = 5, 0.6, 1
    x_j = math.sqrt((2 * m * k) ** 2 - y**2) / 2
    s = advance_slice(SliceState(0.8, 0.6j), x_j, y, k)
    assert s.ratio == pytest.approx(0.6j / 0.8, abs=1e-13)


def test_ground_state_and_infinite_ratio():
    assert SliceState.ground().ratio == 0
    assert math.isinf(SliceState(0j, 1 + 0j).ratio.real)
    # a pi pulse in one slice empties the ground level exactly
    k, y = 1, 1e-300
    x_j = 0.5  # x_eff = 1, theta = pi/2 with a 1-slice width of pi
    s = advance_slice(SliceState.ground(), x_j, y, k)
    assert abs(s.alpha) < 1e-15 and abs(s.beta) == pytest.approx(1.0)


def test_propagate_counts_and_initial_state():
    spec, grid = fig1()
    states = propagate(spec, grid)
    assert len(states) == 41
    assert states[0] == SliceState.ground()
    assert isinstance(states[3], SliceState)
    assert len(list(states)) == 41


def test_free_evolution_states():
    spec = PulseSpec(Box(), x=0.0, y=0.7, n_cycles=2)
    grid = SliceGrid.for_pulse(spec, 10)
    states = propagate(spec, grid)
    j = np.arange(len(states))
    np.testing.assert_allclose(states.alpha, np.exp(0.5j * spec.y * j * math.pi / 10), atol=1e-13)
    assert np.all(states.beta == 0)


def test_first_slice_is_close_to_riccati():
    # loose bound; the frozen-midpoint step has an O(D^3) local error
    spec, grid = fig1()
    ref = integrate_riccati(spec, OracleConfig(steps_per_cycle=200000), tau=grid.boundaries[:2])
    got = propagate(spec, grid).ratio[1]
    assert abs(got - ref.r[-1]) < 3e-3


@pytest.mark.xfail(strict=True, reason="midpoint local error is 2.6e-3 at K=10, below 1e-4 only from K~40")
def test_first_slice_matches_riccati_to_1e4():
    spec, grid = fig1()
    ref = integrate_riccati(spec, OracleConfig(steps_per_cycle=200000), tau=grid.boundaries[:2])
    assert abs(propagate(spec, grid).ratio[1] - ref.r[-1]) < 1e-4


def test_first_slice_error_is_third_order():
    spec, _ = fig1()
    errs = []
    for k in (10, 20, 40):
        grid = SliceGrid.for_pulse(spec, k)
        ref = integrate_riccati(spec, OracleConfig(steps_per_cycle=200000), tau=grid.boundaries[:2])
        errs.append(abs(propagate(spec, grid).ratio[1] - ref.r[-1]))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 7) & (ratios < 9))


def test_final_inversion_matches_oracle():
    spec, grid = fig1()
    w = propagate(spec, grid).inversion[-1]
    ref = integrate_amplitudes(spec, tau=[0.0, spec.duration]).inversion.value[-1]
    assert abs(w - ref) < 1e-2


def test_inversion_series_ground_state():
    spec = PulseSpec(Box(), x=0.0, y=1.0, n_cycles=1)
    grid = SliceGrid.for_pulse(spec, 4)
    ts = inversion_series(propagate(spec, grid), spec, grid, 5)
    np.testing.assert_allclose(ts.value, -1.0, atol=1e-15)
    assert np.all(dipole_series(propagate(spec, grid), spec, grid).value == 0)
    assert np.all(emitted_field_series(propagate(spec, grid), spec, grid).value == 0)


def test_slice_start_values():
    states = BoundaryStates(np.array([1 + 0j, 1 + 0j]), np.array([0j, 0j]))
    for x_j in (0.3, -2.0):
        w = evaluate_slices("inversion", states, [x_j], 0.9, [0.0])
        eps = evaluate_slices("emitted_field", states, [x_j], 0.9, [0.0])
        assert w[0, 0] == pytest.approx(-1.0, abs=1e-15)
        assert eps[0, 0] == pytest.approx(2 * 0.9 * x_j, abs=1e-15)


def test_series_layout():
    spec, grid = fig1()
    ts = series("inversion", propagate(spec, grid), spec, grid, samples_per_slice=4)
    assert len(ts.tau) == 4 * grid.j_total + 1
    assert np.all(np.diff(ts.tau) > 0)
    assert ts.tau[-1] == pytest.approx(spec.duration)
    assert np.all(np.abs(ts.value) <= 1 + 1e-12)
    with pytest.raises(ValueError):
        series("inversion", propagate(spec, grid), spec, grid, samples_per_slice=0)
    with pytest.raises(ValueError):
        series("bogus", propagate(spec, grid), spec, grid)


def test_series_continuous_across_boundaries():
    spec = PulseSpec(Sech(1.72), x=1.3, y=1.0)
    grid = SliceGrid.for_pulse(spec, 20)
    states = propagate(spec, grid)
    drives = slice_drives(spec, grid)
    for kind in ("inversion", "dipole"):
        end = evaluate_slices(kind, states, drives, spec.y, grid.widths[:, None])[:-1, 0]
        start = evaluate_slices(kind, states, drives, spec.y, [0.0])[1:, 0]
        assert np.max(np.abs(end - start)) < 1e-9


def test_closed_forms_against_matrix_exponential():
    rng = np.random.default_rng(3)
    y = 0.8
    for _ in range(5):
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        a, b = a / n, b / n
        x_j = rng.uniform(-3, 3)
        states = BoundaryStates(np.array([a, 0j]), np.array([b, 0j]))
        s = np.linspace(0, 0.4, 6)
        w = evaluate_slices("inversion", states, [x_j], y, s)[0]
        d = evaluate_slices("dipole", states, [x_j], y, s)[0]
        H = hamiltonian(x_j, y)
        for i, t in enumerate(s):
            b1, b2 = expm(-1j * H * t) @ np.array([a, b])
            assert w[i] == pytest.approx(abs(b2) ** 2 - abs(b1) ** 2, abs=1e-12)
            assert d[i] == pytest.approx(2 * (np.conj(b1) * b2).real, abs=1e-12)


def test_emitted_field_is_second_derivative_of_dipole():
    spec, grid = fig1()
    states = propagate(spec, grid)
    drives = slice_drives(spec, grid)
    h = 1e-4
    s = np.array([0.1, 0.15, 0.2]) * grid.delta_tau / 0.314
    d = [evaluate_slices("dipole", states, drives, spec.y, s + o) for o in (-h, 0.0, h)]
    fd = (d[0] - 2 * d[1] + d[2]) / h**2
    eps = evaluate_slices("emitted_field", states, drives, spec.y, s)
    scale = np.max(np.abs(eps))
    assert np.max(np.abs(fd - eps)) / scale < 1e-2


def test_fig1_dipole_close_to_oracle():
    spec, grid = fig1()
    ts = dipole_series(propagate(spec, grid), spec, grid)
    ref = integrate_amplitudes(spec, tau=ts.tau).dipole
    assert compare_series(ts, ref)[0] < 0.03


@pytest.mark.xfail(strict=True, reason="K=10 midpoint error on d is 0.021; < 0.01 needs K~16")
def test_fig1_dipole_matches_oracle_to_1e2():
    spec, grid = fig1()
    ts = dipole_series(propagate(spec, grid), spec, grid)
    ref = integrate_amplitudes(spec, tau=ts.tau).dipole
    assert compare_series(ts, ref)[0] < 0.01


@pytest.mark.xfail(strict=True, reason="K=10 midpoint error on w is 0.033; <= 0.01 needs K~18")
def test_fig1_inversion_matches_oracle_to_1e2():
    spec, grid = fig1()
    ts = inversion_series(propagate(spec, grid), spec, grid)
    ref = integrate_amplitudes(spec, tau=ts.tau).inversion
    assert compare_series(ts, ref)[0] < 0.01


def test_convergence_is_second_order():
    spec, _ = fig1()
    errs = []
    for k in (10, 20, 40):
        grid = SliceGrid.for_pulse(spec, k)
        ts = inversion_series(propagate(spec, grid), spec, grid)
        errs.append(compare_series(ts, integrate_amplitudes(spec, tau=ts.tau).inversion)[0])
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios >= 2.5) & (ratios <= 6))
    # frozen from the oracle comparison
    assert errs[0] == pytest.approx(0.03256, abs=2e-4)


def test_composition_equals_product_matrix():
    y, k = 0.9, 6
    m1, m2 = slice_matrix(0.4, y, k), slice_matrix(-1.1, y, k)
    start = SliceState(0.6, 0.8j)
    two = advance_slice(advance_slice(start, 0.4, y, k), -1.1, y, k)
    v = m2 @ m1 @ np.array([start.alpha, start.beta])
    assert two.ratio == pytest.approx(v[1] / v[0], abs=1e-12)


def test_timeseries_validation():
    with pytest.raises(ValueError):
        TimeSeries(np.zeros(2), np.zeros(3), "inversion")
    with pytest.raises(ValueError):
        TimeSeries(np.zeros(2), np.zeros(2), "energy")


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 20), st.floats(0.05, 4), st.integers(1, 200), st.floats(0, 2 * math.pi))
def test_norm_and_purity(x, y, k, phi):
    spec = PulseSpec(Box(), x=x, y=y, phi=phi, n_cycles=1.5)
    states = propagate(spec, SliceGrid.for_pulse(spec, k))
    norm = np.abs(states.alpha) ** 2 + np.abs(states.beta) ** 2
    assert np.max(np.abs(norm - 1)) < 1e-12
    u, v, w = states.bloch
    assert np.max(np.abs(u**2 + v**2 + w**2 - 1)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=1, max_size=50), st.floats(0.05, 4), st.integers(1, 200))
def test_sign_symmetry(drives, y, k):
    a = propagate_drives(drives, y, k)
    b = propagate_drives(-np.asarray(drives), y, k)
    np.testing.assert_allclose(a.inversion, b.inversion, atol=1e-12)
    # x -> -x conjugates the slice map by diag(1, -1), so r -> -r
    np.testing.assert_allclose(b.alpha, a.alpha, atol=1e-12)
    np.testing.assert_allclose(b.beta, -a.beta, atol=1e-12)
