"""Dipole spectrum of a 30-cycle box pulse and its odd harmonics.

Run: python3 demos/harmonics.py  (writes demos/out/harmonics.png)
"""
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tlsriccati import (Box, FrequencyGrid, PulseSpec, SliceGrid, dipole_spectrum,
                        find_peaks, harmonic_heights, propagate)

OUT = Path(__file__).parent / "out"

spec = PulseSpec(Box(), x=1.9, y=0.445, phi=np.pi / 2, n_cycles=30)
grid = SliceGrid.for_pulse(spec, 100)
sp = dipole_spectrum(propagate(spec, grid), spec, grid, FrequencyGrid(0.0, 10.0, 1e-3))

peaks = np.array(find_peaks(sp, 5e-3))
print("peaks above 5e-3 of the maximum:")
for z, h in peaks:
    print(f"  z = {z:7.4f}   I = {h:.3e}")
print("relative odd-harmonic heights:")
print(harmonic_heights(sp, 9))

fig, ax = plt.subplots(figsize=(8, 4))
ax.semilogy(sp.z, sp.intensity)
ax.plot(peaks[:, 0], peaks[:, 1], "rx")
ax.set_xlabel("z = frequency / carrier")
ax.set_ylabel("|d(z)|^2")
OUT.mkdir(exist_ok=True)
fig.savefig(OUT / "harmonics.png", dpi=120, bbox_inches="tight")
