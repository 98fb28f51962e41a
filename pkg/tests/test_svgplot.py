import xml.etree.ElementTree as ET

import numpy as np
import pytest

from tlsriccati.propagator import TimeSeries
from tlsriccati.spectrum import SpectrumSeries
from tlsriccati.svgplot import emit_plot

NS = "{http://www.w3.org/2000/svg}"


def data_path(svg):
    root = ET.fromstring(svg)
    (path,) = [p for p in root.iter(NS + "path") if p.get("class") == "data"]
    return path.get("d")


def texts(svg):
    return [t.text for t in ET.fromstring(svg).iter(NS + "text")]


def test_two_points_give_one_segment():
    ts = TimeSeries(np.array([0.0, 1.0]), np.array([-1.0, 1.0]), "inversion")
    d = data_path(emit_plot(ts))
    assert d.startswith("M ")
    assert d.count("L") == 1


def test_deterministic():
    z = np.linspace(0, 5, 300)
    sp = SpectrumSeries(z, np.exp(-z) * (1 + 0.1j))
    assert emit_plot(sp, log_y=True) == emit_plot(sp, log_y=True)


def test_axis_labels():
    ts = TimeSeries(np.linspace(0, 4 * np.pi, 50), np.zeros(50), "inversion")
    assert "tau / 2pi (cycles)" in texts(emit_plot(ts))
    sp = SpectrumSeries(np.linspace(0, 3, 10), np.ones(10))
    labels = texts(emit_plot(sp, log_y=True, title="demo"))
    assert "z (harmonic order)" in labels
    assert "log10 intensity (arb. units)" in labels
    assert "demo" in labels


def test_plain_pairs_and_escaping():
    svg = emit_plot(([0, 1, 2], [3, 1, 2]), xlabel="a < b", ylabel="y & z")
    assert "a &lt; b" in svg and "y &amp; z" in svg
    assert data_path(svg).count("L") == 2


def test_log_scale_handles_zeros():
    svg = emit_plot(([0, 1, 2], [0.0, 1e-3, 1.0]), log_y=True)
    assert "nan" not in svg and "inf" not in svg


def test_constant_series():
    svg = emit_plot(([0, 1, 2], [5.0, 5.0, 5.0]))
    assert data_path(svg).count("L") == 2


def test_errors():
    with pytest.raises(ValueError):
        emit_plot(([], []))
    with pytest.raises(ValueError):
        emit_plot(([0, 1], [1.0]))
