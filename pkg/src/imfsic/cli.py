"""Command-line front end: run a BER sweep and write CSV/JSON (and optionally SVG)."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .detectors import KINDS, DetectorConfig
from .detectors.base import normalize_kind
from .montecarlo import BerCurve, BerPoint, SweepConfig, run_sweep
from .plotting import curves_to_svg
from .signal_model import SystemDims

__all__ = [
    "FIGURE_PRESETS",
    "CSV_COLUMNS",
    "RunManifest",
    "build_parser",
    "parse_args",
    "emit_results",
    "curves_to_csv",
    "read_csv",
    "main",
]

log = logging.getLogger("imfsic")

CSV_COLUMNS = ("detector", "snr_db", "trials", "total_bits", "bit_errors", "ber", "ci_low", "ci_high")

_GRID_4QAM = tuple(float(v) for v in range(0, 15, 2))
_GRID_16QAM = tuple(float(v) for v in range(10, 25, 2))


def _preset(nt, m, grid, d_th, s, l, overrides=None):
    overrides = overrides or {}
    dets = tuple(
        DetectorConfig(k, **{"d_th": d_th, "s": s, "l": l, **overrides.get(k, {})}) for k in KINDS
    )
    return {"nt": nt, "nr": nt, "m": m, "snr": grid, "trials": 10_000, "detectors": dets}


FIGURE_PRESETS = {
    "fig2": _preset(4, 4, _GRID_4QAM, 0.2, 4, 2),
    "fig3": _preset(8, 4, _GRID_4QAM, 0.2, 4, 2),
    "fig4": _preset(16, 4, _GRID_4QAM, 0.2, 4, 2, {"oimf-sic": {"l": 3, "d_th": 0.5}}),
    "fig5": _preset(4, 16, _GRID_16QAM, 0.2, 8, 2),
    "fig6": _preset(8, 16, _GRID_16QAM, 0.2, 8, 2, {"oimf-sic": {"l": 3}}),
}

_DEFAULTS = {"nt": 4, "mod": 4, "snr": "0:2:14", "trials": 10_000, "dth": 0.2, "S": 4, "L": 2, "seed": 0}
_STRUCTURAL = ("nt", "nr", "mod", "dth", "S", "L")


def parse_snr_range(text: str) -> tuple[float, ...]:
    """``start:step:stop`` (inclusive) or a single value, in dB."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed SNR range {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"malformed SNR range {text!r}")
    if len(vals) == 1:
        return (vals[0],)
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"SNR range must be start:step:stop, got {text!r}")
    start, step, stop = vals
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"SNR range {text!r} is empty or has a non-positive step")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 10) for i in range(n))


def _detector_list(text: str) -> tuple[str, ...]:
    try:
        kinds = tuple(normalize_kind(k) for k in text.split(",") if k.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not kinds:
        raise argparse.ArgumentTypeError("no detectors given")
    if len(set(kinds)) != len(kinds):
        raise argparse.ArgumentTypeError("detector listed twice")
    return kinds


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="imfsic",
        description="Monte-Carlo BER sweep for SIC-family MIMO detectors.",
    )
    p.add_argument("--figure", choices=sorted(FIGURE_PRESETS), help="load a figure preset")
    p.add_argument("--nt", type=int, help="transmit antennas (default 4)")
    p.add_argument("--nr", type=int, help="receive antennas (default: nt)")
    p.add_argument("--mod", type=int, choices=(4, 16), help="QAM order (default 4)")
    p.add_argument("--detectors", type=_detector_list,
                   help=f"comma list from {','.join(KINDS)} (default: all)")
    p.add_argument("--snr", type=parse_snr_range, help="start:step:stop in dB (default 0:2:14)")
    p.add_argument("--trials", type=int, help="trials per SNR point (default 10000)")
    p.add_argument("--dth", type=float, help="reliability radius d_th (default 0.2)")
    p.add_argument("--S", dest="S", type=int, help="candidates fed back (default 4)")
    p.add_argument("--L", dest="L", type=int, help="nesting budget of the recursive search (default 2)")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    p.add_argument("--fixed-r", action="store_true", help="LLR ordering with the full-channel covariance")
    p.add_argument("--from-manifest", type=Path, help="rerun the sweep recorded in a manifest file")
    p.add_argument("--out", type=Path, required=True, help="output file path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--plot", action="store_true", help="also write an SVG plot next to the output")
    p.add_argument("--workers", type=int, help="worker processes (overrides MIMO_SIC_THREADS)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_namespace(ns: argparse.Namespace, parser: argparse.ArgumentParser) -> SweepConfig:
    if ns.from_manifest is not None:
        given = [k for k in _STRUCTURAL + ("figure", "detectors", "snr", "trials", "seed")
                 if getattr(ns, k) is not None]
        if given:
            parser.error(f"--from-manifest cannot be combined with --{', --'.join(given)}")
        try:
            data = json.loads(ns.from_manifest.read_text())
            return SweepConfig.from_dict(data["config"])
        except (OSError, KeyError, ValueError, TypeError) as exc:
            parser.error(f"cannot load manifest {ns.from_manifest}: {exc}")

    if ns.figure is not None:
        clash = [k for k in _STRUCTURAL if getattr(ns, k) is not None]
        if clash or ns.fixed_r:
            clash += ["fixed-r"] if ns.fixed_r else []
            parser.error(f"--figure {ns.figure} conflicts with --{', --'.join(clash)}")
        pre = FIGURE_PRESETS[ns.figure]
        dets = pre["detectors"]
        if ns.detectors is not None:
            dets = tuple(d for d in dets if d.kind in ns.detectors)
        nt, nr, m = pre["nt"], pre["nr"], pre["m"]
        snr = ns.snr if ns.snr is not None else pre["snr"]
        trials = ns.trials if ns.trials is not None else pre["trials"]
    else:
        nt = ns.nt if ns.nt is not None else _DEFAULTS["nt"]
        nr = ns.nr if ns.nr is not None else nt
        m = ns.mod if ns.mod is not None else _DEFAULTS["mod"]
        snr = ns.snr if ns.snr is not None else parse_snr_range(_DEFAULTS["snr"])
        trials = ns.trials if ns.trials is not None else _DEFAULTS["trials"]
        kinds = ns.detectors if ns.detectors is not None else KINDS
        d_th = ns.dth if ns.dth is not None else _DEFAULTS["dth"]
        s = ns.S if ns.S is not None else _DEFAULTS["S"]
        l = ns.L if ns.L is not None else _DEFAULTS["L"]
        try:
            dets = tuple(DetectorConfig(k, d_th=d_th, s=s, l=l, fixed_r=ns.fixed_r) for k in kinds)
        except ValueError as exc:
            parser.error(str(exc))
    seed = ns.seed if ns.seed is not None else _DEFAULTS["seed"]
    try:
        return SweepConfig(SystemDims(nt, nr), m, dets, snr, trials, seed)
    except (ValueError, TypeError) as exc:
        parser.error(str(exc))


def parse_args(argv=None) -> SweepConfig:
    parser = build_parser()
    return config_from_namespace(parser.parse_args(argv), parser)


@dataclass
class RunManifest:
    config: dict
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    outputs: list = field(default_factory=list)
    excluded: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "version": self.version,
            "timestamp": self.timestamp,
            "outputs": list(self.outputs),
            "excluded": list(self.excluded),
        }


def _num(x: float) -> str:
    return "0" if x == 0 else repr(float(x))


def _rows(curves):
    for c in curves:
        for p in c.points:
            lo, hi = p.ci
            yield (c.detector, _num(p.snr_db), str(p.trials), str(p.total_bits),
                   str(p.bit_errors), _num(p.ber), _num(lo), _num(hi))


def curves_to_csv(curves: list[BerCurve]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(_rows(curves))
    return buf.getvalue()


def read_csv(text: str) -> list[BerCurve]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    by_det: dict[str, list[BerPoint]] = {}
    for row in reader:
        by_det.setdefault(row["detector"], []).append(
            BerPoint(float(row["snr_db"]), int(row["trials"]), int(row["total_bits"]), int(row["bit_errors"]))
        )
    return [BerCurve(k, tuple(v)) for k, v in by_det.items()]


def emit_results(curves: list[BerCurve], manifest: RunManifest, fmt: str, out: Path,
                 plot: bool = False) -> list[Path]:
    """Write the result file, its manifest and optionally an SVG; return the paths written."""
    if not curves:
        raise ValueError("no curves to write")
    out = Path(out)
    written = [out]
    manifest_path = out.with_name(out.name + ".manifest.json")
    svg_path = out.with_suffix(".svg")
    manifest.outputs = [str(out), str(manifest_path)] + ([str(svg_path)] if plot else [])
    if fmt == "csv":
        out.write_text(curves_to_csv(curves), newline="")
    elif fmt == "json":
        rows = [dict(zip(CSV_COLUMNS, r)) for r in _rows(curves)]
        for r in rows:
            for k in CSV_COLUMNS[1:]:
                r[k] = float(r[k]) if k in ("snr_db", "ber", "ci_low", "ci_high") else int(r[k])
        payload = {"manifest": manifest.to_dict(), "results": rows}
        out.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    manifest_path.write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")
    written.append(manifest_path)
    if plot:
        svg_path.write_text(curves_to_svg(curves, title=f"BER, {manifest.config['nt']}x{manifest.config['nr']} "
                                                        f"{manifest.config['m']}-QAM"))
        written.append(svg_path)
    return written


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.INFO, format="%(message)s")
    cfg = config_from_namespace(ns, parser)
    manifest = RunManifest(cfg.to_dict())
    active = {d.kind for d in cfg.active_detectors()}
    manifest.excluded = [d.kind for d in cfg.detectors if d.kind not in active]
    if not active:
        print("imfsic: every requested detector was excluded", file=sys.stderr)
        return 1
    log.info("sweep: %dx%d %d-QAM, %d trials x %d SNR points, detectors %s",
             cfg.dims.nt, cfg.dims.nr, cfg.m, cfg.trials, len(cfg.snr_grid_db), ",".join(sorted(active)))
    try:
        curves = run_sweep(cfg, workers=ns.workers)
        paths = emit_results(curves, manifest, ns.format, ns.out, plot=ns.plot)
    except OSError as exc:
        print(f"imfsic: cannot write results: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"imfsic: sweep failed: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        log.info("wrote %s", p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
