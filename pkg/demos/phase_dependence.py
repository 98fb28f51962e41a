"""Emitted-field peak height against the carrier-envelope phase.

Flipping the field sign leaves every intensity unchanged, so each curve
repeats after pi.

Run: python3 demos/phase_dependence.py  (writes demos/out/phase_dependence.png)
"""
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tlsriccati import FrequencyGrid, PulseSpec, Sech, phase_scan

OUT = Path(__file__).parent / "out"

spec = PulseSpec(Sech(1.72), x=1.31, y=1.0)
phis = 2 * np.pi * np.arange(32) / 32
fg = FrequencyGrid(0.0, 5.0, 1e-3)

fig, ax = plt.subplots(figsize=(6, 4))
for z0, win in ((2.0, 0.05), (1.5, 0.1)):
    h = phase_scan(spec, phis, fg, z0, win)
    h = h / h.max()
    print(f"z = {z0}: max |H(phi) - H(phi + pi)| = {np.max(np.abs(h - np.roll(h, 16))):.1e}")
    ax.plot(phis / np.pi, h, "o-", label=f"z = {z0}")
ax.set_xlabel("phi / pi")
ax.set_ylabel("normalized peak height")
ax.legend()
OUT.mkdir(exist_ok=True)
fig.savefig(OUT / "phase_dependence.png", dpi=120, bbox_inches="tight")
