import pytest

from figure_checks import SCENARIOS
from tlsriccati.propagator import propagate
from tlsriccati.pulse import SliceGrid
from tlsriccati.spectrum import FrequencyGrid, dipole_spectrum, field_spectrum


class SpectrumCache:
    """Figure spectra at K=100, dz=1e-3, computed once per session."""

    def __init__(self):
        self._store = {}

    def __call__(self, name):
        if name not in self._store:
            spec, kind, z_max = SCENARIOS[name]
            grid = SliceGrid.for_pulse(spec, 100)
            states = propagate(spec, grid)
            fn = dipole_spectrum if kind == "dipole" else field_spectrum
            self._store[name] = fn(states, spec, grid, FrequencyGrid(0.0, z_max, 1e-3))
        return self._store[name]


@pytest.fixture(scope="session")
def figure_spectrum():
    return SpectrumCache()
