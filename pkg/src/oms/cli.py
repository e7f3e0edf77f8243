"""Command-line front end: run the pipeline, evaluate, synthesize data,
benchmark, and dump kernels.

Exit codes: 0 success, 1 internal error, 2 usage/input error. The OMS_LOG
environment variable sets log verbosity (DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import functools
import json
import logging
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import dataset_io
from .dataset_io import DatasetManifest, load_dataset, write_dataset, write_mask, read_mask
from .engine import OmsParams, apply_mask, oms_sequence
from .errors import OmsError
from .events import accumulate_frame, window_events
from .kernels import kernel_to_text, make_feathered_kernel
from .metrics import evaluate_sequence
from .synthetic import SceneConfig, generate_scene

log = logging.getLogger("oms")

RUN_MANIFEST_NAME = "run.json"
PRED_PATTERN = "oms_{:05d}.pgm"


def _setup_logging():
    level = os.environ.get("OMS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def handle_errors(f):
    """Map package errors to exit 2 and unexpected ones to exit 1."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (OmsError, FileNotFoundError, json.JSONDecodeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except click.ClickException:
            raise
        except Exception as exc:  # noqa: BLE001 - last-resort diagnostic
            click.echo(f"internal error: {exc}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
def main():
    """Retina-inspired object motion segmentation for event cameras."""
    _setup_logging()


_PARAM_OPTIONS = [
    click.option("--r1", type=int, default=None, help="Center kernel radius."),
    click.option("--r2", type=int, default=None, help="Surround kernel radius."),
    click.option("--stride", type=int, default=None, help="Surround stride (strided mode)."),
    click.option("--alpha", type=float, default=None, help="Spike threshold in [0, 1]."),
    click.option("--mode", type=click.Choice(["dense", "strided"]), default=None),
    click.option("--sigma-c", type=float, default=None, help="Center Gaussian sigma."),
    click.option("--sigma-s", type=float, default=None, help="Surround Gaussian sigma."),
]


def param_options(f):
    for opt in reversed(_PARAM_OPTIONS):
        f = opt(f)
    return f


def resolve_params(config_doc: dict, **flags) -> OmsParams:
    """Flags override config-file values override built-in defaults."""
    merged = {}
    keymap = {"stride": "s_s"}
    for key in ("r1", "r2", "stride", "alpha", "mode", "sigma_c", "sigma_s"):
        value = flags.get(key)
        if value is None:
            value = config_doc.get(key)
        if value is not None:
            merged[keymap.get(key, key)] = value
    return OmsParams(**merged)


def _resolve_threads(threads) -> int:
    if threads in (None, "auto"):
        return os.cpu_count() or 1
    n = int(threads)
    if n < 1:
        raise click.BadParameter("threads must be >= 1 or 'auto'")
    return n


def _load_manifest(manifest_path: str) -> DatasetManifest:
    path = Path(manifest_path)
    if not path.exists():
        click.echo("error: manifest not found", err=True)
        sys.exit(2)
    return DatasetManifest.load(path)


def build_frames(manifest_path):
    """(manifest, dvs frames, gt masks) for a dataset: window + accumulate."""
    manifest, events, masks = load_dataset(manifest_path)
    windows = window_events(events, manifest.mask_timestamps)
    frames = [accumulate_frame(w, manifest.geometry) for w in windows]
    return manifest, frames, masks


@main.command("run")
@click.option("--manifest", "manifest_path", required=True, help="Dataset manifest JSON.")
@click.option("--out", "out_dir", required=True, help="Output directory.")
@click.option("--config", "config_path", default=None, help="JSON run config file.")
@click.option("--emit-overlays", is_flag=True, default=None,
              help="Also write frame|GT|OMS composite images.")
@click.option("--threads", default=None, help="Worker count or 'auto'.")
@param_options
@handle_errors
def cmd_run(manifest_path, out_dir, config_path, emit_overlays, threads, **flags):
    """Run OMS over a dataset and write one mask per ground-truth timestamp."""
    _load_manifest(manifest_path)  # early existence check for a clean exit 2
    config_doc = json.loads(Path(config_path).read_text()) if config_path else {}
    params = resolve_params(config_doc, **flags)
    if emit_overlays is None:
        emit_overlays = bool(config_doc.get("emit_overlays", False))
    n_threads = _resolve_threads(threads if threads is not None else config_doc.get("threads"))

    manifest, frames, gts = build_frames(manifest_path)
    t0 = time.perf_counter()
    preds = oms_sequence(frames, params, threads=n_threads)
    elapsed = time.perf_counter() - t0

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, pred in enumerate(preds):
        write_mask(pred, out / PRED_PATTERN.format(i))
    if emit_overlays:
        for i, (frame, gt, pred) in enumerate(zip(frames, gts, preds)):
            _write_overlay(out / f"overlay_{i:05d}.pgm", frame, gt, pred)
    run_doc = {
        "format_version": dataset_io.FORMAT_VERSION,
        "manifest": str(Path(manifest_path).resolve()),
        "params": {
            "r1": params.r1, "r2": params.r2, "s_s": params.s_s,
            "alpha": params.alpha, "mode": params.mode,
            "sigma_c": params.center_sigma, "sigma_s": params.surround_sigma,
        },
        "threads": n_threads,
        "frames": len(preds),
        "emit_overlays": bool(emit_overlays),
    }
    (out / RUN_MANIFEST_NAME).write_text(json.dumps(run_doc, indent=2) + "\n")
    log.info("processed %d frames in %.3fs", len(preds), elapsed)
    click.echo(f"wrote {len(preds)} masks to {out}")


def _write_overlay(path, frame, gt, pred):
    """Side-by-side composite: DVS frame | GT-masked frame | OMS-masked frame."""
    panels = [frame, apply_mask(frame, gt), apply_mask(frame, pred)]
    sep = np.full((frame.shape[0], 1), 128, dtype=np.uint8)
    strips = []
    for k, panel in enumerate(panels):
        strips.append(panel.astype(np.uint8) * 255)
        if k < len(panels) - 1:
            strips.append(sep)
    composite = np.hstack(strips)
    Path(path).write_bytes(
        f"P5\n{composite.shape[1]} {composite.shape[0]}\n255\n".encode() + composite.tobytes()
    )


@main.command("eval")
@click.option("--pred-dir", "pred_dir", required=True, help="Directory of oms_*.pgm masks.")
@click.option("--manifest", "manifest_path", required=True, help="Dataset manifest JSON.")
@click.option("--out", "out_path", default=None, help="Write the JSON report here too.")
@click.option("--verbose", is_flag=True, help="Include per-frame scores in the report.")
@handle_errors
def cmd_eval(pred_dir, manifest_path, out_path, verbose):
    """Evaluate predicted masks against a dataset's ground truth."""
    manifest, frames, gts = build_frames(manifest_path)
    preds = [
        read_mask(Path(pred_dir) / PRED_PATTERN.format(i), manifest.geometry)
        for i in range(len(gts))
    ]
    report, frame_scores = evaluate_sequence(preds, gts, frames, with_frames=True)
    doc = report.to_dict()
    if verbose:
        doc["frames"] = [
            None if s is None else {
                "iou": s.iou, "detected": s.detected, "gt_area": s.gt_area,
                "inter_area": s.inter_area, "outside_inter_area": s.outside_inter_area,
            }
            for s in frame_scores
        ]
    text = json.dumps(doc, indent=2)
    click.echo(text)
    if out_path:
        Path(out_path).write_text(text + "\n")


@main.command("synth")
@click.argument("scene_config", type=click.Path())
@click.option("--out", "out_dir", required=True, help="Output dataset directory.")
@handle_errors
def cmd_synth(scene_config, out_dir):
    """Generate a synthetic dataset from a scene config JSON file."""
    config = SceneConfig.from_dict(json.loads(Path(scene_config).read_text()))
    events, masks, timestamps = generate_scene(config)
    manifest_path = write_dataset(out_dir, events, config.geometry, masks, timestamps)
    click.echo(f"wrote {len(masks)} frames, {len(events)} events; manifest at {manifest_path}")


@main.command("bench")
@click.option("--manifest", "manifest_path", required=True, help="Dataset manifest JSON.")
@click.option("--threads", default="auto", help="Worker count for the parallel pass.")
@param_options
@handle_errors
def cmd_bench(manifest_path, threads, **flags):
    """Measure per-frame latency percentiles and throughput."""
    _load_manifest(manifest_path)
    params = resolve_params({}, **flags)
    manifest, frames, _ = build_frames(manifest_path)
    if not frames:
        click.echo("no frames in dataset; nothing to benchmark")
        return
    n_threads = _resolve_threads(threads)
    kernels = params.make_kernels()
    from .engine import oms_frame

    oms_frame(frames[0], params, *kernels)  # warm-up
    latencies = []
    t0 = time.perf_counter()
    single = []
    for frame in frames:
        t = time.perf_counter()
        single.append(oms_frame(frame, params, *kernels))
        latencies.append(time.perf_counter() - t)
    wall_single = time.perf_counter() - t0
    t0 = time.perf_counter()
    multi = oms_sequence(frames, params, threads=n_threads)
    wall_multi = time.perf_counter() - t0
    identical = all(np.array_equal(a, b) for a, b in zip(single, multi))
    lat_ms = np.array(latencies) * 1e3
    click.echo(json.dumps({
        "frames": len(frames),
        "p50_ms": float(np.percentile(lat_ms, 50)),
        "p95_ms": float(np.percentile(lat_ms, 95)),
        "throughput_fps_single": len(frames) / wall_single,
        "throughput_fps_threads": len(frames) / wall_multi,
        "threads": n_threads,
        "masks_identical_across_thread_counts": identical,
    }, indent=2))


@main.command("kernel-dump")
@click.option("--radius", type=int, required=True)
@click.option("--sigma", type=float, default=None, help="Defaults to radius / 2.")
@handle_errors
def cmd_kernel_dump(radius, sigma):
    """Print a kernel as a plain-text weight grid (12 significant digits)."""
    if sigma is None:
        sigma = radius / 2.0
    click.echo(kernel_to_text(make_feathered_kernel(radius, sigma)))


if __name__ == "__main__":
    main()
