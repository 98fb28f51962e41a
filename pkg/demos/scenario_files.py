"""Build a scenario in code, run it, and read back the CSV outputs.

The same YAML can be run from the shell with
``tlsriccati simulate --config scenario.yaml``.

Run: python3 demos/scenario_files.py
"""
from pathlib import Path
import tempfile

from tlsriccati import parse_config, run
from tlsriccati.scenario import read_csv

TEXT = """
name: sech_demo
pulse:
  shape: sech
  n_fwhm: 1.72
  area: 6.283185307179586
  y: 1.0
  phi: 0.0
grid:
  k: 50
frequency_grid: {z_min: 0.0, z_max: 5.0, dz: 0.001}
outputs: [inversion, field_spectrum, peaks]
"""

cfg = parse_config(TEXT, "demo.yaml")
with tempfile.TemporaryDirectory() as tmp:
    meta = run(cfg, Path(tmp))
    for f in meta.files:
        print(f"{f['path']:32s} {f['rows']:7d} rows  sha256 {f['sha256'][:12]}")
    header, body = read_csv(Path(tmp) / "peaks.csv")
    print(header)
    print(body[:5])
