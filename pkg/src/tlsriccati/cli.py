"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical guard tripped.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .oracle import IntegrationAccuracyError
from .propagator import TimeSeries
from .scenario import PRESETS, SERIES_COLUMN, ConfigError, load_config, preset, read_csv, run
from .spectrum import NormalizationError, SpectrumSeries
from .svgplot import emit_plot

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
_KIND_OF_COLUMN = {v: k for k, v in SERIES_COLUMN.items()}


def _report(meta, out):
    print(f"wrote {len(meta.files)} CSV file(s) and metadata.json to {out}")
    for f in meta.files:
        print(f"  {f['path']}  sha256={f['sha256'][:16]}")


def _out_dir(cfg, arg):
    return Path(arg or cfg.output_dir or Path("runs") / cfg.name)


def _run(cfg, out, plot=False):
    meta = run(cfg, out)
    if plot:
        for f in meta.files:
            csv = out / f["path"]
            if f["rows"] == 0:
                continue
            csv.with_suffix(".svg").write_text(plot_csv(csv, log_y="spectrum" in csv.stem))
    _report(meta, out)


def plot_csv(path, log_y=False) -> str:
    """SVG for a CSV produced by a run, picking axes from its header."""
    header, body = read_csv(path)
    if header[0] == "method":
        # convergence table: error of the slice engine versus K
        rows = body[body[:, 0] == 0]
        return emit_plot((rows[:, 1], rows[:, 2]), log_y=True, title=Path(path).stem,
                         xlabel="K (slices per half-cycle)", ylabel="max |dw|")
    if body.size == 0:
        raise ConfigError("CSV has no data rows", source=str(path))
    title = Path(path).stem
    if header[0] == "tau" and len(header) == 2 and header[1] in _KIND_OF_COLUMN:
        data = TimeSeries(body[:, 0], body[:, 1], _KIND_OF_COLUMN[header[1]])
        return emit_plot(data, log_y=log_y, title=title)
    if header[:1] == ["z"] and "intensity" in header:
        data = SpectrumSeries(body[:, 0], body[:, 1] + 1j * body[:, 2])
        return emit_plot(data, log_y=log_y, title=title)
    return emit_plot((body[:, 0], body[:, -1]), log_y=log_y, title=title,
                     xlabel=header[0], ylabel=header[-1])


def _parse_k_list(text):
    try:
        ks = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}", "--k-list") from None
    if not ks or min(ks) < 1:
        raise ConfigError("values must be positive integers", "--k-list")
    return ks


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tlsriccati", description="Slice-recurrence two-level simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a scenario file")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output directory (default: config output_dir or runs/<name>)")
    s.add_argument("--plot", action="store_true", help="also write an SVG next to every CSV")

    s = sub.add_parser("preset", help="run a built-in figure scenario")
    s.add_argument("name", choices=sorted(PRESETS))
    s.add_argument("--out")
    s.add_argument("--plot", action="store_true")
    s.add_argument("--show-config", action="store_true", help="print the resolved YAML and exit")

    s = sub.add_parser("phase-scan", help="peak height versus carrier-envelope phase")
    s.add_argument("--config", required=True)
    s.add_argument("--points", type=int, required=True)
    s.add_argument("--out")

    s = sub.add_parser("convergence", help="inversion error against the oracle for several K")
    s.add_argument("--config", required=True)
    s.add_argument("--k-list", required=True, help="comma-separated, e.g. 10,20,40")
    s.add_argument("--out")

    s = sub.add_parser("plot", help="render a CSV as SVG")
    s.add_argument("csv")
    s.add_argument("--log-y", action="store_true")
    s.add_argument("--out", help="SVG path (default: next to the CSV)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cfg = load_config(args.config)
            _run(cfg, _out_dir(cfg, args.out), args.plot)
        elif args.command == "preset":
            cfg = preset(args.name)
            if args.show_config:
                sys.stdout.write(cfg.to_yaml())
                return EXIT_OK
            _run(cfg, _out_dir(cfg, args.out), args.plot)
        elif args.command == "phase-scan":
            if args.points < 1:
                raise ConfigError("must be a positive integer", "--points")
            cfg = load_config(args.config)
            cfg = replace(cfg, outputs=("phase_scan",),
                          analysis=replace(cfg.analysis, phase_points=args.points))
            _run(cfg, _out_dir(cfg, args.out))
        elif args.command == "convergence":
            ks = _parse_k_list(args.k_list)
            cfg = load_config(args.config)
            cfg = replace(cfg, outputs=("convergence",), analysis=replace(cfg.analysis, k_list=ks))
            _run(cfg, _out_dir(cfg, args.out))
        elif args.command == "plot":
            svg = plot_csv(args.csv, args.log_y)
            target = Path(args.out) if args.out else Path(args.csv).with_suffix(".svg")
            target.write_text(svg)
            print(f"wrote {target}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationAccuracyError, NormalizationError, FloatingPointError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        if isinstance(exc, OSError) or args.command == "plot":
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        raise
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
