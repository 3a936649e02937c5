"""One-at-a-time sensitivity sweeps of the watershed tunables.

A sweep varies exactly one of sigma / peak_height_fraction /
min_peak_distance while holding the others fixed, and reports the absolute
per-class counting error against a reference for every swept value, next
to the no-watershed baseline error (which by construction does not depend
on the swept value). Output CSV schema:

    param_value,class,abs_error,baseline_abs_error

one row per (value, class, frame); per-value mean rows follow with the
class name suffixed ``_mean``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MissingReferenceError
from .quantify import baseline_count, count_instances
from .watershed import WatershedParams, split_all

SWEEPABLE = ("sigma", "peak_height_fraction", "min_peak_distance")

_CSV_HEADER = ("param_value", "class", "abs_error", "baseline_abs_error")

CLASS_NAMES = {1: "healthy", 2: "sickled"}


def class_name(class_id: int) -> str:
    return CLASS_NAMES.get(class_id, f"class{class_id}")


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]
    fixed: WatershedParams = WatershedParams()
    # reference counts per frame index: {frame: (n_healthy, n_sickled, ...)}
    reference: dict[int, tuple[int, ...]] = field(default_factory=dict)
    frames: tuple[int, ...] | None = None  # None = every supplied map

    def __post_init__(self):
        if self.parameter not in SWEEPABLE:
            raise ValueError(
                f"parameter must be one of {SWEEPABLE}, got {self.parameter!r}"
            )
        if not self.values:
            raise ValueError("values must be non-empty")
        if list(self.values) != sorted(self.values):
            raise ValueError("values must be sorted ascending")


@dataclass(frozen=True)
class ErrorCurve:
    parameter: str
    values: tuple[float, ...]
    frames: tuple[int, ...]
    class_ids: tuple[int, ...]
    # errors[i_value][i_class][i_frame], baseline[i_class][i_frame]
    errors: np.ndarray
    baseline: np.ndarray

    def mean_errors(self) -> np.ndarray:
        """(n_values, n_classes) mean absolute error over frames."""
        return self.errors.mean(axis=2)

    def mean_baseline(self) -> np.ndarray:
        """(n_classes,) mean baseline error over frames."""
        return self.baseline.mean(axis=1)


def run_sweep(
    spec: SweepSpec, maps: list[np.ndarray], class_count: int = 2
) -> ErrorCurve:
    """Run the pipeline once per swept value and record counting errors.

    maps are ordered label maps whose positions are their frame indices.
    Raises MissingReferenceError if a selected frame has no reference
    counts.
    """
    frames = tuple(spec.frames) if spec.frames is not None else tuple(range(len(maps)))
    for f in frames:
        if not 0 <= f < len(maps):
            raise MissingReferenceError(f"frame {f} has no label map")
        if f not in spec.reference:
            raise MissingReferenceError(f"frame {f} has no reference counts")

    class_ids = tuple(range(1, class_count + 1))
    baseline = np.zeros((class_count, len(frames)), dtype=np.float64)
    for j, f in enumerate(frames):
        counts = baseline_count(maps[f], spec.fixed.min_area, class_count)
        for i, cid in enumerate(class_ids):
            baseline[i, j] = abs(counts[i] - spec.reference[f][i])

    errors = np.zeros((len(spec.values), class_count, len(frames)), dtype=np.float64)
    for vi, value in enumerate(spec.values):
        params = spec.fixed.replace(**{spec.parameter: value})
        for j, f in enumerate(frames):
            inst = split_all(maps[f], params, class_count)
            counts = count_instances(inst, class_count)
            for i, cid in enumerate(class_ids):
                errors[vi, i, j] = abs(counts[i] - spec.reference[f][i])

    return ErrorCurve(
        parameter=spec.parameter,
        values=tuple(spec.values),
        frames=frames,
        class_ids=class_ids,
        errors=errors,
        baseline=baseline,
    )


def emit_curve(curve: ErrorCurve, path) -> None:
    """Write the error-curve CSV (data rows, then mean rows, per value)."""
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(_CSV_HEADER) + "\n")
        for vi, value in enumerate(curve.values):
            for i, cid in enumerate(curve.class_ids):
                for j in range(len(curve.frames)):
                    fh.write(
                        f"{value:g},{class_name(cid)},"
                        f"{curve.errors[vi, i, j]:g},{curve.baseline[i, j]:g}\n"
                    )
            for i, cid in enumerate(curve.class_ids):
                fh.write(
                    f"{value:g},{class_name(cid)}_mean,"
                    f"{curve.errors[vi, i].mean():g},{curve.baseline[i].mean():g}\n"
                )


def emit_series(curve: ErrorCurve, path) -> None:
    """Companion plot-data file: one row per value, one mean-error series
    per class plus the constant baselines."""
    names = [class_name(c) for c in curve.class_ids]
    header = (
        ["param_value"]
        + [f"{n}_mean_error" for n in names]
        + [f"{n}_baseline_error" for n in names]
    )
    means = curve.mean_errors()
    base = curve.mean_baseline()
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for vi, value in enumerate(curve.values):
            cells = [f"{value:g}"]
            cells += [f"{means[vi, i]:g}" for i in range(len(names))]
            cells += [f"{base[i]:g}" for i in range(len(names))]
            fh.write(",".join(cells) + "\n")


def parse_curve(path) -> list[tuple[float, str, float, float]]:
    """Read back an emitted curve CSV as (value, class, err, baseline) rows."""
    rows = []
    with open(Path(path), encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != _CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            rows.append(
                (
                    float(row["param_value"]),
                    row["class"],
                    float(row["abs_error"]),
                    float(row["baseline_abs_error"]),
                )
            )
    return rows
