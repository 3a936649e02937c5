"""Per-frame counts, sickled fractions, time series, and the counts CSV.

The sickled fraction of a frame is n_sickled / (n_healthy + n_sickled);
frames with no detected cells get a NaN sentinel rather than being
dropped, so frame indices stay synchronized across series. The counts CSV
schema is fixed:

    frame,time_s,n_healthy,n_sickled,sickled_fraction

with fractions printed to 6 decimal places, NaN emitted as the literal
text ``NaN``, UTF-8, LF line endings.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SeriesMismatchError
from .morphology import area_filter, class_mask, connected_components
from .watershed import InstanceMap

log = logging.getLogger(__name__)

CSV_HEADER = ("frame", "time_s", "n_healthy", "n_sickled", "sickled_fraction")

HEALTHY = 1
SICKLED = 2


@dataclass(frozen=True)
class FrameStats:
    frame_index: int
    time_s: float
    n_healthy: int
    n_sickled: int
    sickled_fraction: float  # NaN when both counts are 0


@dataclass(frozen=True)
class SeriesStats:
    frames: tuple[FrameStats, ...]
    mae_vs_reference: float | None
    final_fraction: float


def count_instances(inst: InstanceMap, class_count: int = 2) -> tuple[int, ...]:
    """Distinct instance counts per class, invariant under id renumbering."""
    present = np.unique(inst.ids)
    present = present[present > 0]
    counts = np.bincount(inst.classes[present], minlength=class_count + 1)
    return tuple(int(c) for c in counts[1:])


def baseline_count(
    labels: np.ndarray, min_area: int, class_count: int = 2
) -> tuple[int, ...]:
    """Per-class counts of area-filtered connected components, no watershed.

    This is what counting would report without instance splitting; merged
    overlapping cells are counted once, so it systematically underestimates
    on crowded frames.
    """
    counts = []
    for class_id in range(1, class_count + 1):
        mask = class_mask(labels, class_id, class_count)
        filtered = area_filter(connected_components(mask), min_area)
        counts.append(connected_components(filtered).count)
    return tuple(counts)


def sickled_fraction(n_healthy: int, n_sickled: int) -> float:
    """n_sickled / (n_healthy + n_sickled); NaN when both are zero."""
    if n_healthy < 0 or n_sickled < 0:
        raise ValueError("counts must be >= 0")
    total = n_healthy + n_sickled
    if total == 0:
        return math.nan
    return n_sickled / total


def frame_stats(
    frame_index: int, time_s: float, n_healthy: int, n_sickled: int
) -> FrameStats:
    return FrameStats(
        frame_index=frame_index,
        time_s=time_s,
        n_healthy=n_healthy,
        n_sickled=n_sickled,
        sickled_fraction=sickled_fraction(n_healthy, n_sickled),
    )


def series_mae(pred: list[FrameStats], ref: list[FrameStats]) -> float:
    """Mean absolute difference of sickled fractions, matched by frame index.

    Frames whose fraction is undefined on either side are excluded from the
    mean symmetrically; the exclusion count is logged. Raises
    SeriesMismatchError when the two series share no frame indices.
    """
    ref_by_index = {f.frame_index: f.sickled_fraction for f in ref}
    diffs = []
    excluded = 0
    matched = 0
    for f in pred:
        if f.frame_index not in ref_by_index:
            continue
        matched += 1
        r = ref_by_index[f.frame_index]
        if math.isnan(f.sickled_fraction) or math.isnan(r):
            excluded += 1
            continue
        diffs.append(abs(f.sickled_fraction - r))
    if matched == 0:
        raise SeriesMismatchError("series share no frame indices")
    if excluded:
        log.info("series_mae: excluded %d frame(s) with undefined fraction", excluded)
    if not diffs:
        return math.nan
    return float(np.mean(diffs))


def build_series(
    frames: list[FrameStats], reference: list[FrameStats] | None = None
) -> SeriesStats:
    frames = sorted(frames, key=lambda f: f.frame_index)
    mae = series_mae(frames, reference) if reference is not None else None
    final = frames[-1].sickled_fraction if frames else math.nan
    return SeriesStats(frames=tuple(frames), mae_vs_reference=mae, final_fraction=final)


def _format_fraction(x: float) -> str:
    return "NaN" if math.isnan(x) else f"{x:.6f}"


def write_counts_csv(frames: list[FrameStats], path) -> None:
    """Write the counts CSV with the exact fixed schema (UTF-8, LF)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for f in sorted(frames, key=lambda s: s.frame_index):
            fh.write(
                f"{f.frame_index},{f.time_s:.6f},{f.n_healthy},{f.n_sickled},"
                f"{_format_fraction(f.sickled_fraction)}\n"
            )


def read_counts_csv(path) -> list[FrameStats]:
    """Read a counts CSV; the sickled_fraction column is optional and is
    recomputed from the counts when absent."""
    path = Path(path)
    frames = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"frame", "n_healthy", "n_sickled"}
        have = set(reader.fieldnames or ())
        if not required <= have:
            raise ValueError(
                f"{path}: counts CSV must have columns {sorted(required)}, "
                f"got {reader.fieldnames}"
            )
        for row in reader:
            nh = int(row["n_healthy"])
            ns = int(row["n_sickled"])
            raw = row.get("sickled_fraction")
            if raw is None or raw == "":
                frac = sickled_fraction(nh, ns)
            else:
                frac = float("nan") if raw.strip().lower() == "nan" else float(raw)
            frames.append(
                FrameStats(
                    frame_index=int(row["frame"]),
                    time_s=float(row.get("time_s") or 0.0),
                    n_healthy=nh,
                    n_sickled=ns,
                    sickled_fraction=frac,
                )
            )
    return sorted(frames, key=lambda f: f.frame_index)
