"""Command-line harness: simulate, calibrate, detect, evaluate.

Exit codes: 0 success, 1 validation/configuration error, 2 data error.
"""

from __future__ import annotations

import csv
import glob as globmod
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .calibration import (
    CalibrationConfig,
    draw_null_windows,
    estimate_threshold,
    load_threshold,
    save_threshold,
    threshold_document,
)
from .detectors import DetectorKind, NcdVariant, SplitGrid
from .errors import ConfigError, DataError, InsufficientDataError
from .evaluate import pd_curve, run_detection
from .manifest import build_manifest, write_manifest
from .presets import PRESETS
from .scenarios import ScenarioConfig, generate_record
from .traceio import WindowingPlan, decimate, load_trace, save_trace, sidecar_path

DETECTOR_CHOICE = click.Choice([k.value for k in DetectorKind])
VARIANT_CHOICE = click.Choice([v.value for v in NcdVariant])


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def _expand_traces(pattern: str) -> list[Path]:
    paths = sorted(Path(p) for p in globmod.glob(pattern))
    paths = [p for p in paths if p.suffix == ".csv"]
    if not paths:
        raise ConfigError(f"no trace files match {pattern!r}")
    return paths


def _load_records(paths):
    return [load_trace(p) for p in paths]


def _grid_for(window: int, n: int, grid_stride: int | None) -> SplitGrid:
    return SplitGrid.default(window, n, stride=grid_stride)


def _check_threshold_doc(doc: dict, detector: str, variant: str, window: int, n: int):
    if doc["detector"] != detector:
        raise ConfigError(
            f"threshold file was calibrated for detector {doc['detector']!r}, "
            f"invoked with {detector!r}"
        )
    if detector == DetectorKind.NCD.value and doc.get("variant") not in (None, variant):
        raise ConfigError(
            f"threshold file was calibrated for variant {doc.get('variant')!r}, "
            f"invoked with {variant!r}"
        )
    if doc["window_length"] != window:
        raise ConfigError(
            f"threshold file was calibrated for window {doc['window_length']}, "
            f"invoked with {window}"
        )
    if doc["n"] != n:
        raise ConfigError(
            f"threshold file was calibrated for N={doc['n']}, trace has N={n}"
        )


@click.group()
@click.version_option(version=__version__)
def cli():
    """Air-interface attack detection toolkit."""


@cli.command()
@click.argument("kind", type=click.Choice(sorted(PRESETS)))
@click.option("--out", type=click.Path(dir_okay=False), default="-",
              help="Output config JSON path ('-' for stdout).")
@click.option("--j-over-s", type=float, default=5.0, show_default=True,
              help="Jamming-to-signal ratio in dB (bnlj/snlj).")
@click.option("--total-samples", type=int, default=None, help="Trace length in samples.")
@click.option("--change-index", type=int, default=None, help="First post-change sample index.")
@click.option("--roles", default=None,
              help="Comma-separated component roles (e.g. snr_db,avg_noise_dbm).")
@click.option("--seed", type=int, default=0, show_default=True)
def preset(kind, out, j_over_s, total_samples, change_index, roles, seed):
    """Write a cookbook scenario config for KIND (clean, bnlj, snlj, rbs)."""
    kwargs = {"seed": seed}
    if roles:
        kwargs["roles"] = tuple(roles.split(","))
    if total_samples is not None:
        kwargs["total_samples"] = total_samples
    if change_index is not None and kind != "clean":
        kwargs["change_index"] = change_index
    if kind in ("bnlj", "snlj"):
        kwargs["j_over_s_db"] = j_over_s
    config = PRESETS[kind](**kwargs)
    text = json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"
    if out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


@cli.command()
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
@click.option("--count", type=int, default=1, show_default=True, help="Number of records.")
@click.option("--seed", type=int, default=None,
              help="Master seed (defaults to the config's rng_seed).")
@click.option("--plot", is_flag=True, help="Render a figure of the first record.")
def simulate(config_file, out, count, seed, plot):
    """Generate synthetic trace records from a scenario config file."""
    if count < 0:
        raise ConfigError(f"count must be >= 0, got {count}")
    config = ScenarioConfig.from_json_file(config_file)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    master_seed = config.rng_seed if seed is None else seed
    outputs = []
    first = None
    for i in range(count):
        record_id = f"{config.kind}-{i:04d}"
        record = generate_record(config, record_id, master_seed)
        path = save_trace(record, out_dir / f"{record_id}.csv")
        outputs += [path, sidecar_path(path)]
        if first is None:
            first = record
    if plot and first is not None:
        from .plots import plot_trace

        outputs.append(plot_trace(first, out_dir / f"{config.kind}-overview.png"))
    manifest = build_manifest(
        command="simulate",
        params={"config": config.to_dict(), "count": count},
        seeds={"master_seed": master_seed},
        input_paths=[config_file],
        tool_version=__version__,
    )
    write_manifest(manifest, outputs, out_dir / "manifest.json")
    click.echo(f"wrote {count} record(s) to {out_dir}")


@cli.command()
@click.option("--detector", type=DETECTOR_CHOICE, required=True)
@click.option("--variant", type=VARIANT_CHOICE, default=NcdVariant.AS_WRITTEN.value,
              show_default=True, help="NCD second-term handling.")
@click.option("--traces", required=True, help="Glob of attack-free or pre-attack trace CSVs.")
@click.option("--window", type=int, required=True, help="Window length K in decimated samples.")
@click.option("--decimate", "decimate_factor", type=int, default=1, show_default=True)
@click.option("--pfa", type=float, default=1e-2, show_default=True,
              help="Target false-alarm probability.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--num-windows", type=int, default=None,
              help="Monte Carlo windows (default ceil(records/pfa)).")
@click.option("--grid-stride", type=int, default=None, help="Split-grid stride.")
@click.option("--out", required=True, type=click.Path(dir_okay=False),
              help="Threshold JSON output path.")
def calibrate(detector, variant, traces, window, decimate_factor, pfa, seed,
              num_windows, grid_stride, out):
    """Estimate a detection threshold from attack-free data."""
    paths = _expand_traces(traces)
    records = [decimate(r, decimate_factor) for r in _load_records(paths)]
    n = records[0].n
    if any(r.n != n for r in records):
        raise ConfigError("records mix different component counts")
    config = CalibrationConfig(
        window_length=window, target_pfa=pfa, num_windows=num_windows, rng_seed=seed
    )
    grid = _grid_for(window, n, grid_stride)
    estimate = estimate_threshold(
        DetectorKind(detector),
        grid,
        draw_null_windows(config, records),
        target_pfa=pfa,
        ncd_variant=NcdVariant(variant),
    )
    doc = threshold_document(estimate, n=n, window_length=window, grid=grid,
                             target_pfa=pfa, seed=seed)
    doc["decimation_factor"] = decimate_factor
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_threshold(doc, out_path)
    manifest = build_manifest(
        command="calibrate",
        params={"detector": detector, "variant": variant, "window": window,
                "decimate": decimate_factor, "pfa": pfa, "num_windows": num_windows,
                "grid_stride": grid_stride, "traces": traces},
        seeds={"seed": seed},
        input_paths=paths,
        tool_version=__version__,
    )
    write_manifest(manifest, [out_path], out_path.with_suffix(".manifest.json"))
    click.echo(
        f"{detector}: threshold {estimate.threshold:.6g} "
        f"(empirical pfa {estimate.empirical_pfa:.4g} on {estimate.num_windows_used} windows)"
    )


@cli.command()
@click.option("--detector", type=DETECTOR_CHOICE, required=True)
@click.option("--variant", type=VARIANT_CHOICE, default=NcdVariant.AS_WRITTEN.value,
              show_default=True)
@click.option("--threshold", "threshold_file", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Calibrated threshold JSON.")
@click.option("--trace", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--window", type=int, required=True, help="Window length K in decimated samples.")
@click.option("--stride", type=int, default=None,
              help="Window stride (default max(1, K//50)).")
@click.option("--decimate", "decimate_factor", type=int, default=1, show_default=True)
@click.option("--grid-stride", type=int, default=None)
@click.option("--integrate", nargs=2, type=int, default=None,
              help="M N for m-of-n detection integration.")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
@click.option("--plot/--no-plot", default=True, show_default=True,
              help="Render the detection figure next to the CSVs.")
def detect(detector, variant, threshold_file, trace, window, stride, decimate_factor,
           grid_stride, integrate, out, plot):
    """Run one detector over one trace and write per-window reports."""
    doc = load_threshold(threshold_file)
    record = load_trace(trace)
    dec_n = record.n
    _check_threshold_doc(doc, detector, variant, window, dec_n)
    plan = (
        WindowingPlan(window, stride, decimate_factor)
        if stride is not None
        else WindowingPlan.with_default_stride(window, decimate_factor)
    )
    run = run_detection(
        record,
        plan,
        DetectorKind(detector),
        threshold=doc["threshold"],
        grid_stride=grid_stride,
        variant=NcdVariant(variant),
        integrate=tuple(integrate) if integrate else None,
    )
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(trace).stem
    report_path = out_dir / f"{stem}.report.csv"
    binary_path = out_dir / f"{stem}.binary.csv"
    with open(report_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["position", "statistic", "argmax_split", "detected", "valid_splits"]
        if run.integrated is not None:
            header.append("integrated")
        writer.writerow(header)
        for i, pos in enumerate(run.positions):
            row = [
                int(pos),
                _fmt(run.statistics[i]),
                int(run.argmax_splits[i]),
                int(run.detections[i]),
                int(run.valid_split_counts[i]),
            ]
            if run.integrated is not None:
                row.append(int(run.integrated[i]))
            writer.writerow(row)
    with open(binary_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["position", "detected"]
        if run.integrated is not None:
            header.append("integrated")
        writer.writerow(header)
        for i, pos in enumerate(run.positions):
            row = [int(pos), int(run.detections[i])]
            if run.integrated is not None:
                row.append(int(run.integrated[i]))
            writer.writerow(row)
    outputs = [report_path, binary_path]
    if plot:
        from .plots import plot_detection

        outputs.append(plot_detection(run, out_dir / f"{stem}.report.png"))
    manifest = build_manifest(
        command="detect",
        params={"detector": detector, "variant": variant, "window": window,
                "stride": plan.stride, "decimate": decimate_factor,
                "grid_stride": grid_stride, "integrate": list(integrate) if integrate else None},
        seeds={},
        input_paths=[trace, threshold_file],
        calibration_reference=str(threshold_file),
        tool_version=__version__,
    )
    write_manifest(manifest, outputs, out_dir / f"{stem}.manifest.json")
    fired = int(run.detections.sum())
    click.echo(f"{detector}: {fired}/{len(run.positions)} windows detected")


@cli.command()
@click.option("--detector", "detectors", type=DETECTOR_CHOICE, multiple=True, required=True,
              help="Repeatable; pair each with a --threshold.")
@click.option("--variant", type=VARIANT_CHOICE, default=NcdVariant.AS_WRITTEN.value,
              show_default=True)
@click.option("--threshold", "threshold_files", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--traces", required=True, help="Glob of trace CSVs (>= 2 records).")
@click.option("--window", type=int, required=True)
@click.option("--stride", type=int, default=None)
@click.option("--decimate", "decimate_factor", type=int, default=1, show_default=True)
@click.option("--grid-stride", type=int, default=None)
@click.option("--integrate", nargs=2, type=int, default=None,
              help="M N hysteresis; adds integrated Pd columns.")
@click.option("--align/--no-align", default=None,
              help="Shift positions by each record's ground truth (default: when available).")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--plot/--no-plot", default=True, show_default=True)
def evaluate(detectors, variant, threshold_files, traces, window, stride, decimate_factor,
             grid_stride, integrate, align, out, plot):
    """Pd-versus-window-position curves over a set of records."""
    if len(detectors) != len(threshold_files):
        raise ConfigError(
            f"{len(detectors)} detectors but {len(threshold_files)} thresholds"
        )
    paths = _expand_traces(traces)
    if len(paths) < 2:
        raise InsufficientDataError(
            f"need at least 2 trace records for a Pd curve, got {len(paths)}"
        )
    records = _load_records(paths)
    records.sort(key=lambda r: r.record_id)
    plan = (
        WindowingPlan(window, stride, decimate_factor)
        if stride is not None
        else WindowingPlan.with_default_stride(window, decimate_factor)
    )
    curves = []
    for detector, thr_file in zip(detectors, threshold_files):
        doc = load_threshold(thr_file)
        _check_threshold_doc(doc, detector, variant, window, records[0].n)
        runs = [
            run_detection(
                rec, plan, DetectorKind(detector), threshold=doc["threshold"],
                grid_stride=grid_stride, variant=NcdVariant(variant),
                integrate=tuple(integrate) if integrate else None,
            )
            for rec in records
        ]
        curves.append(pd_curve(runs, align=align))
        if integrate:
            curves.append(pd_curve(runs, use_integrated=True, align=align, label="integrated"))
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve_path = out_dir / "pd_curves.csv"
    with open(curve_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["detector", "label", "position", "pd", "num_records", "threshold", "aligned"]
        )
        for curve in curves:
            for pos, pd, num in curve.rows():
                writer.writerow(
                    [curve.detector.value, curve.label, pos, _fmt(pd), num,
                     _fmt(curve.threshold), int(curve.aligned)]
                )
    outputs = [curve_path]
    if plot:
        from .plots import plot_pd_curves

        outputs.append(plot_pd_curves(curves, out_dir / "pd_curves.png"))
    manifest = build_manifest(
        command="evaluate",
        params={"detectors": list(detectors), "variant": variant, "window": window,
                "stride": plan.stride, "decimate": decimate_factor,
                "grid_stride": grid_stride, "align": align,
                "integrate": list(integrate) if integrate else None, "traces": traces},
        seeds={},
        input_paths=list(paths) + list(threshold_files),
        calibration_reference=",".join(str(t) for t in threshold_files),
        tool_version=__version__,
    )
    write_manifest(manifest, outputs, out_dir / "manifest.json")
    click.echo(f"wrote Pd curves for {len(curves)} detector(s) to {curve_path}")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        sys.exit(1)
    except (ConfigError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    sys.exit(0)


if __name__ == "__main__":
    main()
