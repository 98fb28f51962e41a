"""Scenario configuration, figure presets and the file-producing run pipeline.

A scenario is a YAML document; :func:`load_config` validates the whole of it
(every variant included) before anything is computed.  :func:`run` writes
one CSV per requested output plus ``metadata.json`` into the output
directory.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__
from .oracle import OracleConfig, compare_series, integrate_amplitudes, swa_grid
from .propagator import TimeSeries, propagate, series
from .pulse import (Box, GaussianRampFlat, PulseSpec, Sech, Sinc, SliceGrid,
                    area_to_strength)
from .spectrum import (FrequencyGrid, dipole_spectrum, field_spectrum, find_peaks,
                       harmonic_heights, phase_scan)

OUTPUTS = ("inversion", "dipole", "field", "dipole_spectrum", "field_spectrum",
           "peaks", "harmonics", "phase_scan", "convergence")
SHAPES = {"box": Box, "sech": Sech, "sinc": Sinc, "gaussian_ramp_flat": GaussianRampFlat}
SERIES_COLUMN = {"inversion": "w", "dipole": "d", "emitted_field": "eps"}


class ConfigError(ValueError):
    """Invalid scenario configuration; carries the offending field and line."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None,
                 source: str | None = None):
        self.field, self.line, self.source = field, line, source
        where = ":".join(str(p) for p in (source, line) if p is not None)
        prefix = " ".join(p for p in (where + ":" if where else "", f"{field}:" if field else "") if p)
        super().__init__(f"{prefix} {message}" if prefix else message)


@dataclass(frozen=True)
class PulseConfig:
    shape: str = "box"
    y: float = 1.0
    x: float | None = None
    area: float | None = None
    phi: float = 0.0
    n_cycles: float | None = None
    n_fwhm: float | None = None
    ramp_cycles: float | None = None

    def to_spec(self) -> PulseSpec:
        if self.shape not in SHAPES:
            raise ConfigError(f"unknown shape {self.shape!r}; expected one of {sorted(SHAPES)}",
                              "pulse.shape")
        if self.shape in ("sech", "sinc"):
            if self.n_fwhm is None:
                raise ConfigError(f"required for {self.shape} pulses", "pulse.n_fwhm")
            shape = SHAPES[self.shape](float(self.n_fwhm))
        elif self.shape == "gaussian_ramp_flat":
            shape = GaussianRampFlat(10.0 if self.ramp_cycles is None else float(self.ramp_cycles))
        else:
            shape = Box()
        if (self.x is None) == (self.area is None):
            raise ConfigError("give exactly one of x and area", "pulse.x")
        if self.area is not None:
            if self.shape != "sech":
                raise ConfigError("area is defined for sech pulses only", "pulse.area")
            x = area_to_strength(float(self.area), float(self.n_fwhm))
        else:
            x = float(self.x)
        n = None if self.n_cycles is None else float(self.n_cycles)
        return PulseSpec(shape=shape, x=x, y=float(self.y), phi=float(self.phi), n_cycles=n)


@dataclass(frozen=True)
class GridConfig:
    k: int = 100
    samples_per_slice: int = 8


@dataclass(frozen=True)
class AnalysisConfig:
    k_list: tuple = (1, 2, 10)
    peak_threshold: float = 5e-3
    max_odd: int = 21
    phase_points: int = 32
    z_target: float = 2.0
    window: float = 0.05
    phase_spectrum: str = "field"


@dataclass(frozen=True)
class Variant:
    label: str
    overrides: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    pulse: PulseConfig
    grid: GridConfig = GridConfig()
    oracle: OracleConfig = OracleConfig()
    frequency_grid: FrequencyGrid = FrequencyGrid()
    outputs: tuple = ("inversion",)
    analysis: AnalysisConfig = AnalysisConfig()
    variants: tuple = ()
    output_dir: str | None = None

    def runs(self) -> list[tuple[str, PulseSpec]]:
        """(label, spec) for every variant, or the base pulse alone."""
        if not self.variants:
            return [("", self.pulse.to_spec())]
        out = []
        for v in self.variants:
            merged = {**asdict(self.pulse), **v.overrides}
            if "area" in v.overrides:
                merged["x"] = None
            elif "x" in v.overrides:
                merged["area"] = None
            out.append((v.label, PulseConfig(**merged).to_spec()))
        return out

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "pulse": {k: v for k, v in asdict(self.pulse).items() if v is not None},
            "grid": asdict(self.grid),
            "oracle": {"steps_per_cycle": self.oracle.steps_per_cycle, "gauge": self.oracle.gauge},
            "frequency_grid": asdict(self.frequency_grid),
            "outputs": list(self.outputs),
            "analysis": {**asdict(self.analysis), "k_list": list(self.analysis.k_list)},
        }
        if self.variants:
            d["variants"] = [{"label": v.label, **v.overrides} for v in self.variants]
        if self.output_dir is not None:
            d["output_dir"] = self.output_dir
        return d

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


# ---------------------------------------------------------------- parsing

def _line_map(text: str) -> dict[tuple, int]:
    """1-based line of every mapping key, keyed by its path."""
    lines: dict[tuple, int] = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for key, val in node.value:
                p = path + (key.value,)
                lines[p] = key.start_mark.line + 1
                walk(val, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                lines[path + (i,)] = item.start_mark.line + 1
                walk(item, path + (i,))

    try:
        walk(yaml.compose(text), ())
    except yaml.YAMLError:
        pass
    return lines


def _section(raw, name, cls, path, known):
    value = raw.get(name, {})
    if value is None:
        value = {}
    if not isinstance(value, dict):
        raise ConfigError("must be a mapping", name)
    for key in value:
        if key not in known:
            raise ConfigError(f"unknown key; expected one of {sorted(known)}", f"{name}.{key}")
    try:
        return cls(**value)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), name) from None


def _fields(cls):
    from dataclasses import fields

    return {f.name for f in fields(cls) if f.init}


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Build and fully validate a scenario from parsed YAML."""
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    top = {"name", "pulse", "grid", "oracle", "frequency_grid", "outputs", "analysis",
           "variants", "output_dir"}
    for key in raw:
        if key not in top:
            raise ConfigError(f"unknown key; expected one of {sorted(top)}", str(key))
    if "pulse" not in raw:
        raise ConfigError("missing required section", "pulse")
    name = raw.get("name", "scenario")
    if not isinstance(name, str) or not name:
        raise ConfigError("must be a non-empty string", "name")

    pulse = _section(raw, "pulse", PulseConfig, "pulse", _fields(PulseConfig))
    grid = _section(raw, "grid", GridConfig, "grid", _fields(GridConfig))
    if not isinstance(grid.k, int) or grid.k < 1:
        raise ConfigError("must be a positive integer", "grid.k")
    if not isinstance(grid.samples_per_slice, int) or grid.samples_per_slice < 1:
        raise ConfigError("must be a positive integer", "grid.samples_per_slice")
    oracle_raw = dict(raw.get("oracle") or {})
    for key in oracle_raw:
        if key not in ("steps_per_cycle", "gauge"):
            raise ConfigError("unknown key; expected steps_per_cycle or gauge", f"oracle.{key}")
    try:
        oracle = OracleConfig(**oracle_raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), "oracle") from None
    fgrid = _section(raw, "frequency_grid", FrequencyGrid, "frequency_grid", _fields(FrequencyGrid))
    analysis = _section(raw, "analysis", AnalysisConfig, "analysis", _fields(AnalysisConfig))
    if analysis.phase_spectrum not in ("field", "dipole"):
        raise ConfigError("must be 'field' or 'dipole'", "analysis.phase_spectrum")
    if not 0 < analysis.peak_threshold < 1:
        raise ConfigError("must lie in (0, 1)", "analysis.peak_threshold")
    if not analysis.window > 0:
        raise ConfigError("must be positive", "analysis.window")
    k_list = analysis.k_list
    if isinstance(k_list, str):
        k_list = [s for s in k_list.split(",") if s.strip()]
    try:
        k_list = tuple(int(k) for k in k_list)
    except (TypeError, ValueError):
        raise ConfigError("must be a list of positive integers", "analysis.k_list") from None
    if not k_list or min(k_list) < 1:
        raise ConfigError("must be a list of positive integers", "analysis.k_list")
    analysis = AnalysisConfig(**{**asdict(analysis), "k_list": k_list})

    outputs = raw.get("outputs", ["inversion"])
    if isinstance(outputs, str):
        outputs = [outputs]
    if not isinstance(outputs, list) or not outputs:
        raise ConfigError("must be a non-empty list", "outputs")
    for i, o in enumerate(outputs):
        if o not in OUTPUTS:
            raise ConfigError(f"unknown output {o!r}; expected one of {list(OUTPUTS)}", f"outputs[{i}]")
    if "harmonics" in outputs and fgrid.z_max < analysis.max_odd:
        raise ConfigError(f"exceeds frequency_grid.z_max={fgrid.z_max:g}", "analysis.max_odd")
    if "phase_scan" in outputs and not (fgrid.z_min <= analysis.z_target - analysis.window
                                        and analysis.z_target + analysis.window <= fgrid.z_max):
        raise ConfigError("window around z_target must lie inside the frequency grid",
                          "analysis.z_target")

    variants = []
    for i, v in enumerate(raw.get("variants") or []):
        if not isinstance(v, dict) or "label" not in v:
            raise ConfigError("each variant needs a label", f"variants[{i}]")
        overrides = {k: val for k, val in v.items() if k != "label"}
        for key in overrides:
            if key not in _fields(PulseConfig):
                raise ConfigError("unknown pulse field", f"variants[{i}].{key}")
        variants.append(Variant(str(v["label"]), overrides))
    labels = [v.label for v in variants]
    if len(set(labels)) != len(labels):
        raise ConfigError("variant labels must be unique", "variants")

    output_dir = raw.get("output_dir")
    cfg = ScenarioConfig(name=name, pulse=pulse, grid=grid, oracle=oracle, frequency_grid=fgrid,
                         outputs=tuple(outputs), analysis=analysis, variants=tuple(variants),
                         output_dir=None if output_dir is None else str(output_dir))
    # every pulse must build before any computation starts
    for i, v in enumerate(cfg.variants or [None]):
        try:
            (cfg if v is None else ScenarioConfig(name, pulse, variants=(v,))).runs()
        except ConfigError as exc:
            if v is None:
                raise
            raise ConfigError(str(exc).split(": ", 1)[-1], f"variants[{i}]") from None
        except (TypeError, ValueError) as exc:
            where = "pulse" if v is None else f"variants[{i}]"
            word = str(exc).split(" ", 1)[0]
            if word in _fields(PulseConfig) and (v is None or word in v.overrides):
                where = f"{where}.{word}"
            raise ConfigError(str(exc), where) from None
    return cfg


def parse_config(text: str, source: str | None = None) -> ScenarioConfig:
    """Parse YAML text, attaching line numbers to validation errors."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          line=None if mark is None else mark.line + 1, source=source) from None
    try:
        return config_from_dict(raw)
    except ConfigError as exc:
        lines = _line_map(text)
        line = None
        if exc.field:
            path = tuple(int(p) if p.isdigit() else p
                         for p in exc.field.replace("[", ".").replace("]", "").split("."))
            while path and line is None:
                line = lines.get(path)
                path = path[:-1]
        msg = str(exc)
        if exc.field and msg.startswith(exc.field + ":"):
            msg = msg[len(exc.field) + 1:].strip()
        raise ConfigError(msg, exc.field, line, source) from None


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    return parse_config(text, source=str(path))


# ---------------------------------------------------------------- presets

_COS = math.pi / 2


def _spectral(name, pulse, z_max=10.0, outputs=("dipole_spectrum", "peaks"), **kw):
    return ScenarioConfig(name=name, pulse=pulse, grid=GridConfig(k=100),
                          frequency_grid=FrequencyGrid(0.0, z_max, 1e-3), outputs=outputs, **kw)


def _fig7(name, outputs, z_target=2.0, window=0.05):
    pulse = PulseConfig(shape="sech", n_fwhm=1.72, x=1.31, y=1.0, phi=0.0)
    return ScenarioConfig(name=name, pulse=pulse, grid=GridConfig(k=100),
                          frequency_grid=FrequencyGrid(0.0, 5.0, 1e-3), outputs=outputs,
                          analysis=AnalysisConfig(z_target=z_target, window=window, phase_points=32))


def _build_presets():
    areas = (6, 8, 10, 12, 14)
    fig6_variants = tuple(
        Variant(f"A{a}pi_{tag}", {"area": a * math.pi, "phi": phi})
        for a in areas for tag, phi in (("sin", 0.0), ("cos", _COS)))
    return {
        "fig1": ScenarioConfig(
            name="fig1", pulse=PulseConfig(shape="box", x=1.0, y=1.0, phi=0.0, n_cycles=2),
            grid=GridConfig(k=10), outputs=("inversion", "convergence"),
            analysis=AnalysisConfig(k_list=(1, 2, 10))),
        "fig2a": _spectral("fig2a", PulseConfig(shape="gaussian_ramp_flat", ramp_cycles=10,
                                                x=1.86, y=1.1, phi=_COS, n_cycles=30)),
        "fig2b": _spectral("fig2b", PulseConfig(shape="box", x=1.9, y=0.445, phi=_COS, n_cycles=30)),
        "fig3": _spectral("fig3", PulseConfig(shape="box", x=14.5, y=0.1, phi=_COS, n_cycles=30),
                          z_max=30.0, outputs=("dipole_spectrum", "harmonics"),
                          analysis=AnalysisConfig(max_odd=29),
                          variants=(Variant("x14.5", {"x": 14.5}), Variant("x15", {"x": 15.0}))),
        "fig4a": _spectral("fig4a", PulseConfig(shape="box", x=1.25, y=0.625, phi=_COS, n_cycles=30)),
        "fig4b": _spectral("fig4b", PulseConfig(shape="box", x=1.178, y=0.589, phi=_COS, n_cycles=30)),
        "fig5": _spectral("fig5", PulseConfig(shape="sech", n_fwhm=1.71, area=math.pi, y=1.0, phi=_COS),
                          z_max=5.0, outputs=("field_spectrum", "peaks"),
                          analysis=AnalysisConfig(peak_threshold=1e-4),
                          variants=tuple(Variant(f"A{a}pi", {"area": a * math.pi}) for a in (1, 2, 3, 4))),
        "fig6": ScenarioConfig(
            name="fig6", pulse=PulseConfig(shape="sech", n_fwhm=1.72, area=6 * math.pi, y=1.0),
            grid=GridConfig(k=100), outputs=("inversion",), variants=fig6_variants),
        "fig7a": _fig7("fig7a", ("field_spectrum", "peaks")),
        "fig7b": _fig7("fig7b", ("phase_scan",), z_target=2.0, window=0.05),
        "fig7c": _fig7("fig7c", ("phase_scan",), z_target=1.5, window=0.1),
    }


PRESETS = _build_presets()


def preset(name: str) -> ScenarioConfig:
    """Fully resolved configuration reproducing one of the figure scenarios."""
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None


# ---------------------------------------------------------------- running

@dataclass
class RunMetadata:
    config: dict
    slice_counts: dict
    wall_clock_s: float
    engine_version: str
    files: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _write_csv(path: Path, header: list[str], columns) -> None:
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns]) if len(columns[0]) else \
        np.empty((0, len(header)))
    np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt="%.17g")


def _series_csv(path, ts: TimeSeries):
    _write_csv(path, ["tau", SERIES_COLUMN[ts.kind]], [ts.tau, ts.value])


def _spectrum_csv(path, sp):
    _write_csv(path, ["z", "re", "im", "intensity"], [sp.z, sp.amplitude.real, sp.amplitude.imag, sp.intensity])


def convergence_study(spec: PulseSpec, k_list, oracle: OracleConfig = OracleConfig(),
                      samples_per_slice: int = 8):
    """Inversion series per K, the oracle series and their error summary.

    Returns (series_by_k, oracle_series, rows) with rows of
    (method, k, max_error, rms_error); a square-wave row is added for
    sine-like box pulses.
    """
    by_k, rows = {}, []
    for k in k_list:
        grid = SliceGrid.for_pulse(spec, k)
        ts = series("inversion", propagate(spec, grid), spec, grid, samples_per_slice)
        ref = integrate_amplitudes(spec, oracle, tau=ts.tau).inversion
        by_k[k] = ts
        rows.append(("slices", k, *compare_series(ts, ref)))
    ref = integrate_amplitudes(spec, oracle).inversion
    swa = None
    if isinstance(spec.shape, Box) and spec.phi == 0:
        sspec, sgrid = swa_grid(spec)
        swa = series("inversion", propagate(sspec, sgrid), sspec, sgrid, 8 * samples_per_slice)
        oref = integrate_amplitudes(spec, oracle, tau=swa.tau).inversion
        rows.append(("swa", 1, *compare_series(swa, oref)))
    return by_k, ref, swa, rows


def run(config: ScenarioConfig, output_dir=None) -> RunMetadata:
    """Execute the scenario and write its CSV files and metadata.json."""
    start = time.perf_counter()
    out = Path(output_dir or config.output_dir or Path("runs") / config.name)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    counts = {}
    outputs = set(config.outputs)
    fgrid = config.frequency_grid
    an = config.analysis
    spp = config.grid.samples_per_slice

    for label, spec in config.runs():
        suffix = f"_{label}" if label else ""
        grid = SliceGrid.for_pulse(spec, config.grid.k)
        counts[label or config.name] = grid.j_total

        def emit(stem, writer, obj):
            path = out / f"{stem}{suffix}.csv"
            writer(path, obj)
            written.append(path)

        needs_states = outputs & {"inversion", "dipole", "field", "dipole_spectrum",
                                  "field_spectrum", "peaks", "harmonics"}
        states = propagate(spec, grid) if needs_states else None
        for name, kind in (("inversion", "inversion"), ("dipole", "dipole"), ("field", "emitted_field")):
            if name in outputs:
                emit(name, _series_csv, series(kind, states, spec, grid, spp))

        dsp = fsp = None
        if outputs & {"dipole_spectrum", "harmonics"} or ("peaks" in outputs and "field_spectrum" not in outputs):
            dsp = dipole_spectrum(states, spec, grid, fgrid)
        if "field_spectrum" in outputs:
            fsp = field_spectrum(states, spec, grid, fgrid)
        if "dipole_spectrum" in outputs:
            emit("dipole_spectrum", _spectrum_csv, dsp)
        if fsp is not None:
            emit("field_spectrum", _spectrum_csv, fsp)
        if "peaks" in outputs:
            pk = np.array(find_peaks(dsp if dsp is not None else fsp, an.peak_threshold)).reshape(-1, 2)
            emit("peaks", lambda p, a: _write_csv(p, ["z", "height"], [a[:, 0], a[:, 1]]), pk)
        if "harmonics" in outputs:
            hh = harmonic_heights(dsp, an.max_odd)
            emit("harmonics", lambda p, a: _write_csv(p, ["n", "height"], [a[:, 0], a[:, 1]]), hh)
        if "phase_scan" in outputs:
            phis = 2 * np.pi * np.arange(an.phase_points) / an.phase_points
            kind = "emitted_field" if an.phase_spectrum == "field" else "dipole"
            heights = phase_scan(spec, phis, fgrid, an.z_target, an.window, config.grid.k, kind)
            emit("phase_scan", lambda p, a: _write_csv(p, ["phi", "height"], a), (phis, heights))
        if "convergence" in outputs:
            by_k, ref, swa, rows = convergence_study(spec, an.k_list, config.oracle, spp)
            for k, ts in by_k.items():
                emit(f"inversion_k{k}", _series_csv, ts)
            emit("inversion_oracle", _series_csv, ref)
            if swa is not None:
                emit("inversion_swa", _series_csv, swa)
            emit("convergence", _write_convergence, rows)

    files = []
    for p in written:
        blob = p.read_bytes()
        files.append({"path": p.name, "sha256": hashlib.sha256(blob).hexdigest(),
                      "bytes": len(blob), "rows": blob.count(b"\n") - 1})
    meta = RunMetadata(config=config.to_dict(), slice_counts=counts,
                       wall_clock_s=round(time.perf_counter() - start, 3),
                       engine_version=__version__, files=files)
    (out / "metadata.json").write_text(meta.to_json() + "\n")
    return meta


def _write_convergence(path, rows):
    with open(path, "w") as fh:
        fh.write("method,k,max_error,rms_error\n")
        for method, k, mx, rms in rows:
            fh.write(f"{method},{k},{mx:.17g},{rms:.17g}\n")


METHOD_CODES = {"slices": 0, "swa": 1}


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and numeric body of a CSV written by :func:`run`.

    The text ``method`` column of the convergence table is mapped through
    ``METHOD_CODES``.
    """
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines:
        return header, np.empty((0, len(header)))
    if header[0] == "method":
        lines = [f"{METHOD_CODES[ln.split(',', 1)[0]]},{ln.split(',', 1)[1]}" for ln in lines]
    body = np.loadtxt(lines, delimiter=",", ndmin=2)
    return header, body


def as_plain(value: Any):
    """Recursively convert tuples to lists (for YAML/JSON comparisons)."""
    if isinstance(value, dict):
        return {k: as_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [as_plain(v) for v in value]
    return value
