"""Batch command-line driver.

Subcommands mirror the three-stage workflow (extract frames, run external
segmentation, count-and-visualize) plus the synthetic-scene and sweep
harnesses:

    sicklesplit extract  <dir> | --video FILE   -> standardized frame PNGs
    sicklesplit count    <labelmap dir>         -> counts CSV + overlays
    sicklesplit compare  <pred csv> <ref csv>   -> MAE report
    sicklesplit synth    <scene spec>           -> label maps + ground truth
    sicklesplit sweep    <sweep spec>           -> error-curve CSV

Exit codes: 0 success; 2 usage or invalid parameter; 3 data error
(undecodable or invalid inputs, per-frame failures); 4 empty sequence or
missing reference; 5 series mismatch; 6 external decoder missing;
7 synthetic placement failure; 1 unexpected error.

Frame-level work is distributed over a worker pool (--workers flag,
SICKLESPLIT_WORKERS env var, or config key); outputs are byte-identical
for any worker count.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import os
import shutil
import subprocess
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, config_from_items, load_config, write_keyvalues
from .errors import (
    DecodeError,
    DecoderMissingError,
    EmptySequenceError,
    InvalidLabelError,
    InvalidSamplingError,
    MissingReferenceError,
    PlacementFailureError,
    SeriesMismatchError,
    SickleSplitError,
)
from .io import frame_name, list_frames, read_image, read_label_map, write_image, write_label_map
from .overlay import ColorMap, render_masks_only, render_overlay
from .preprocess import ResizeSpec, clahe, resize, to_grayscale
from .quantify import (
    FrameStats,
    count_instances,
    frame_stats,
    read_counts_csv,
    series_mae,
    write_counts_csv,
)
from .sweep import SweepSpec, emit_curve, emit_series, run_sweep
from .synth import (
    generate_scene,
    load_scene_spec,
    read_ground_truth_csv,
    scene_sequence,
    write_ground_truth_csv,
)
from .watershed import split_all, split_boundaries

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_EMPTY = 4
EXIT_SERIES = 5
EXIT_DECODER = 6
EXIT_PLACEMENT = 7

_ERROR_EXITS = (
    ((InvalidSamplingError,), EXIT_USAGE),
    ((DecodeError, InvalidLabelError), EXIT_DATA),
    ((EmptySequenceError, MissingReferenceError), EXIT_EMPTY),
    ((SeriesMismatchError,), EXIT_SERIES),
    ((DecoderMissingError,), EXIT_DECODER),
    ((PlacementFailureError,), EXIT_PLACEMENT),
)

ENV_WORKERS = "SICKLESPLIT_WORKERS"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sicklesplit",
        description="Cell counting and sickled-fraction time series from label maps.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="standardize frames from a video or image dir")
    p.add_argument("input", nargs="?", help="directory of image frames")
    p.add_argument("--video", help="video file (decoded via ffmpeg on PATH)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--all-frames", action="store_true", help="keep every frame")
    g.add_argument("--every-n-frames", type=int, metavar="N", help="keep indices divisible by N")
    g.add_argument("--every-sec", type=float, metavar="S", help="keep the first frame of each S-second window")
    p.add_argument("--fps", type=float, default=None, help="frames per second (default 4)")
    p.add_argument("--config", help="key-value config file")
    p.add_argument("--out", required=True, help="output frame directory")

    p = sub.add_parser("count", help="watershed-split, count, and visualize label maps")
    p.add_argument("labelmaps", help="directory of label-map PNGs")
    p.add_argument("--frames", help="optional directory of grayscale frames for overlays")
    p.add_argument("--fps", type=float, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--config", help="key-value config file")
    p.add_argument("--masks", action="store_true", help="also write flat mask PNGs")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("compare", help="MAE between predicted and reference counts CSVs")
    p.add_argument("pred", help="predicted counts CSV")
    p.add_argument("reference", help="reference counts CSV")

    p = sub.add_parser("synth", help="generate synthetic scenes with ground truth")
    p.add_argument("spec", help="scene spec key-value file")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("sweep", help="sensitivity sweep of one watershed parameter")
    p.add_argument("spec", help="sweep spec key-value file")
    p.add_argument("--out", required=True, help="output CSV path or directory")
    return parser


def _resolve_workers(flag_value, cfg: RunConfig) -> int:
    if flag_value is not None:
        workers = flag_value
    elif os.environ.get(ENV_WORKERS):
        workers = int(os.environ[ENV_WORKERS])
    else:
        workers = cfg.workers
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")
    return workers


def _load_cfg(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    if getattr(args, "fps", None) is not None:
        cfg = config_from_items({"fps": repr(args.fps)}, cfg)
    return cfg


def _hash_files(paths) -> str:
    digest = hashlib.sha256()
    for p in paths:
        digest.update(hashlib.sha256(Path(p).read_bytes()).digest())
    return digest.hexdigest()


def _write_manifest(path, cfg: RunConfig, run_items: dict[str, str]) -> None:
    items = {f"run.{k}": v for k, v in ({"version": __version__} | run_items).items()}
    write_keyvalues(items | cfg.items(), path)


# ---------------------------------------------------------------------------
# extract

def _select_indices(n: int, args, fps: float) -> list[int]:
    if args.every_n_frames is not None:
        if args.every_n_frames <= 0:
            raise InvalidSamplingError(f"--every-n-frames must be > 0, got {args.every_n_frames}")
        return [i for i in range(n) if i % args.every_n_frames == 0]
    if args.every_sec is not None:
        if args.every_sec <= 0:
            raise InvalidSamplingError(f"--every-sec must be > 0, got {args.every_sec}")
        kept, seen = [], set()
        for i in range(n):
            window = math.floor(i / fps / args.every_sec)
            if window not in seen:
                seen.add(window)
                kept.append(i)
        return kept
    return list(range(n))


def _decode_video(video: str, workdir: Path) -> Path:
    ffmpeg = shutil.which("ffmpeg")
    if ffmpeg is None:
        raise DecoderMissingError(
            "video input requires the external decoder 'ffmpeg' on PATH; "
            "install ffmpeg or pass a directory of image frames instead"
        )
    out = workdir / "decoded"
    out.mkdir(parents=True)
    cmd = [ffmpeg, "-nostdin", "-i", video, "-vsync", "0",
           str(out / "decoded_%06d.png")]
    res = subprocess.run(cmd, capture_output=True, text=True)
    if res.returncode != 0:
        raise DecodeError(f"ffmpeg failed on {video}: {res.stderr[-500:]}")
    return out


def _cmd_extract(args) -> int:
    if bool(args.input) == bool(args.video):
        raise ValueError("provide exactly one of an input directory or --video")
    cfg = _load_cfg(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        if args.video:
            src_dir = _decode_video(args.video, Path(tmp))
        else:
            src_dir = Path(args.input)
            if not src_dir.is_dir():
                raise EmptySequenceError(f"{src_dir} is not a directory")
        sources = sorted(
            p for p in src_dir.iterdir()
            if p.suffix.lower() in (".png", ".jpg", ".jpeg", ".tif", ".tiff", ".bmp")
        )
        if not sources:
            raise EmptySequenceError(f"no image files in {src_dir}")
        keep = _select_indices(len(sources), args, cfg.fps)
        for i in keep:
            img = read_image(sources[i])
            if img.ndim == 3:
                img = to_grayscale(img)
            img = clahe(img, cfg.clahe)
            img = resize(img, cfg.resize)
            write_image(img, out_dir / frame_name(i, cfg.frame_prefix, cfg.frame_pad))
        _write_manifest(
            out_dir / "manifest.txt",
            cfg,
            {
                "command": "extract",
                "input": args.video or args.input,
                "frames_kept": ",".join(str(i) for i in keep),
                "input.count": str(len(sources)),
            },
        )
    log.info("extract: wrote %d frame(s) to %s", len(keep), out_dir)
    return EXIT_OK


# ---------------------------------------------------------------------------
# count

@dataclass(frozen=True)
class _FrameTask:
    index: int
    time_s: float
    label_path: str
    frame_path: str | None
    overlay_path: str
    mask_path: str | None
    cfg: RunConfig


def _count_one(task: _FrameTask) -> tuple[int, int | None, int | None, str | None]:
    """Process one frame; returns (index, n_healthy, n_sickled, error)."""
    try:
        cfg = task.cfg
        labels = read_label_map(task.label_path, cfg.class_count)
        inst = split_all(labels, cfg.watershed, cfg.class_count)
        boundaries = split_boundaries(inst)
        if task.frame_path is not None:
            frame = read_image(task.frame_path)
            if frame.ndim == 3:
                frame = to_grayscale(frame)
            if frame.shape != labels.shape:
                frame = resize(
                    frame, ResizeSpec(width=labels.shape[1], height=labels.shape[0])
                )
        else:
            frame = np.zeros(labels.shape, dtype=np.uint8)
        colors = ColorMap(blend_alpha=cfg.blend_alpha)
        write_image(render_overlay(frame, inst, boundaries, colors), task.overlay_path)
        if task.mask_path is not None:
            write_image(render_masks_only(inst, colors), task.mask_path)
        counts = count_instances(inst, cfg.class_count)
        return task.index, counts[0], counts[1], None
    except Exception as exc:  # pragma: no cover - per-frame robustness path
        return task.index, None, None, f"{type(exc).__name__}: {exc}"


def _cmd_count(args) -> int:
    cfg = _load_cfg(args)
    workers = _resolve_workers(args.workers, cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    records = list_frames(args.labelmaps, cfg.frame_prefix, cfg.fps)
    frame_files = {}
    if args.frames:
        for rec in list_frames(args.frames, cfg.frame_prefix, cfg.fps):
            frame_files[rec.frame_index] = rec.source_path

    tasks = []
    for rec in records:
        pad = cfg.frame_pad
        tasks.append(
            _FrameTask(
                index=rec.frame_index,
                time_s=rec.time_s,
                label_path=str(rec.source_path),
                frame_path=(
                    str(frame_files[rec.frame_index])
                    if rec.frame_index in frame_files
                    else None
                ),
                overlay_path=str(out_dir / f"overlay_{rec.frame_index:0{pad}d}.png"),
                mask_path=(
                    str(out_dir / f"mask_{rec.frame_index:0{pad}d}.png")
                    if args.masks
                    else None
                ),
                cfg=cfg,
            )
        )

    if workers == 1:
        results = [_count_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_count_one, tasks))

    stats: list[FrameStats] = []
    failures: list[tuple[int, str]] = []
    by_index = {t.index: t for t in tasks}
    for index, nh, ns, err in results:
        if err is not None:
            failures.append((index, err))
            continue
        stats.append(frame_stats(index, by_index[index].time_s, nh, ns))

    write_counts_csv(stats, out_dir / "counts.csv")
    _write_manifest(
        out_dir / "manifest.txt",
        cfg,
        {
            "command": "count",
            "input.labelmaps": str(args.labelmaps),
            "input.frames": str(args.frames or ""),
            "input.count": str(len(records)),
            "input.sha256": _hash_files(r.source_path for r in records),
        },
    )
    for index, err in failures:
        log.error("frame %d failed: %s", index, err)
    if failures:
        log.error("count: %d of %d frame(s) failed", len(failures), len(records))
        return EXIT_DATA
    log.info("count: processed %d frame(s) -> %s", len(stats), out_dir / "counts.csv")
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare / synth / sweep

def _fraction_text(x: float) -> str:
    return "NaN" if math.isnan(x) else f"{x:.6f}"


def _cmd_compare(args) -> int:
    pred = read_counts_csv(args.pred)
    ref = read_counts_csv(args.reference)
    if not pred or not ref:
        raise SeriesMismatchError("empty counts CSV")
    mae = series_mae(pred, ref)
    pred_final = pred[-1].sickled_fraction
    ref_final = ref[-1].sickled_fraction
    shared = {f.frame_index for f in pred} & {f.frame_index for f in ref}
    print(f"frames_compared {len(shared)}")
    print(f"MAE {_fraction_text(mae)}")
    print(f"final_fraction_pred {_fraction_text(pred_final)}")
    print(f"final_fraction_ref {_fraction_text(ref_final)}")
    delta = abs(pred_final - ref_final)
    print(f"final_fraction_delta {_fraction_text(delta)}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    spec, n_frames, schedule = load_scene_spec(args.spec)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if schedule:
        scenes = scene_sequence(spec, n_frames, schedule)
    else:
        scenes = [generate_scene(spec)]
    truths = []
    for i, (labels, gt) in enumerate(scenes):
        write_label_map(labels, out_dir / frame_name(i))
        truths.append(gt)
    write_ground_truth_csv(truths, out_dir / "ground_truth.csv")
    cfg = RunConfig()
    _write_manifest(
        out_dir / "manifest.txt",
        cfg,
        {"command": "synth", "input.spec": str(args.spec), "seed": str(spec.seed)},
    )
    log.info("synth: wrote %d frame(s) to %s", len(scenes), out_dir)
    return EXIT_OK


def _load_sweep_reference(path) -> dict[int, tuple[int, ...]]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
    if header.startswith("frame,true_n_healthy"):
        rows = read_ground_truth_csv(path)
        return {f: (nh, ns) for f, nh, ns in rows}
    return {
        f.frame_index: (f.n_healthy, f.n_sickled) for f in read_counts_csv(path)
    }


def _cmd_sweep(args) -> int:
    from .config import parse_keyvalues

    items = parse_keyvalues(args.spec)
    for key in ("sweep.parameter", "sweep.values", "sweep.labelmaps", "sweep.reference"):
        if key not in items:
            raise ValueError(f"sweep spec missing required key {key!r}")
    cfg = config_from_items(items)  # watershed.* fixed params, if present
    base = Path(args.spec).parent
    label_dir = (base / items["sweep.labelmaps"]).resolve() if not Path(items["sweep.labelmaps"]).is_absolute() else Path(items["sweep.labelmaps"])
    ref_path = (base / items["sweep.reference"]).resolve() if not Path(items["sweep.reference"]).is_absolute() else Path(items["sweep.reference"])

    records = list_frames(label_dir, cfg.frame_prefix, cfg.fps)
    maps = [read_label_map(r.source_path, cfg.class_count) for r in records]
    frames = None
    if items.get("sweep.frames"):
        frames = tuple(int(v) for v in items["sweep.frames"].split(","))
    spec = SweepSpec(
        parameter=items["sweep.parameter"],
        values=tuple(float(v) for v in items["sweep.values"].split(",")),
        fixed=cfg.watershed,
        reference=_load_sweep_reference(ref_path),
        frames=frames,
    )
    curve = run_sweep(spec, maps, cfg.class_count)
    out = Path(args.out)
    if out.is_dir() or not out.suffix:
        out.mkdir(parents=True, exist_ok=True)
        out = out / "curve.csv"
    emit_curve(curve, out)
    emit_series(curve, out.with_name(out.stem + "_series.csv"))
    log.info("sweep: wrote %s", out)
    return EXIT_OK


# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "extract": _cmd_extract,
        "count": _cmd_count,
        "compare": _cmd_compare,
        "synth": _cmd_synth,
        "sweep": _cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except SickleSplitError as exc:
        for types, code in _ERROR_EXITS:
            if isinstance(exc, types):
                log.error("%s", exc)
                return code
        log.error("%s", exc)
        return EXIT_UNEXPECTED
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return EXIT_EMPTY
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
