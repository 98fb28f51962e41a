"""Two-level system driven by a few-cycle pulse, solved slice by slice.

The carrier-modulated drive is frozen inside short slices; within each the
Riccati equation for the amplitude ratio has a closed-form solution, which
also gives the dipole, the emitted field and their spectra analytically.
"""

__version__ = "0.1.0"

from .pulse import (Box, GaussianRampFlat, PulseSpec, Sech, Sinc, SliceGrid,
                    area_to_strength, default_window, effective_rabi, envelope,
                    normalized_field, slice_drive, slice_drives, strength_to_area)
from .propagator import (BoundaryStates, SliceState, TimeSeries, advance_slice,
                         dipole_series, emitted_field_series, evaluate_slices,
                         inversion_series, propagate, propagate_drives, series,
                         slice_matrix)
from .spectrum import (FrequencyGrid, NormalizationError, SpectrumSeries,
                       dipole_spectrum, field_spectrum, find_peaks, harmonic_heights,
                       phase_scan, slice_kernel, transform_slices, window_peak)
from .oracle import (IntegrationAccuracyError, OracleConfig, compare_series,
                     integrate_amplitudes, integrate_riccati, swa_grid)
from .svgplot import emit_plot
from .scenario import (ConfigError, RunMetadata, ScenarioConfig, load_config,
                       parse_config, preset, run)
