"""Raster I/O and frame-sequence enumeration.

Conventions
-----------
Label maps are single-channel 8-bit PNGs holding raw class ids
(0 = background, 1..class_count = foreground classes), not palette colors,
so a write/read round trip is bit-exact.

Frames follow the naming convention ``<prefix>_<zero-padded index>.png``
(default prefix ``frame``, 4-digit padding). Zero padding keeps
lexicographic order equal to numeric order.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, EmptySequenceError, InvalidLabelError

log = logging.getLogger(__name__)

DEFAULT_FPS = 4.0  # acquisition rate of the time-lapse recordings
DEFAULT_PREFIX = "frame"
DEFAULT_PAD = 4


@dataclass(frozen=True)
class FrameRecord:
    """One frame of an ordered sequence."""

    frame_index: int
    time_s: float
    source_path: Path


def frame_name(index: int, prefix: str = DEFAULT_PREFIX, pad: int = DEFAULT_PAD) -> str:
    return f"{prefix}_{index:0{pad}d}.png"


def read_image(path) -> np.ndarray:
    """Read an 8-bit grayscale or RGB image as a uint8 array.

    Returns (H, W) for single-channel input, (H, W, 3) for color input.
    Raises DecodeError for unreadable or unsupported files.
    """
    try:
        with Image.open(path) as im:
            if im.mode == "L":
                return np.asarray(im, dtype=np.uint8)
            if im.mode in ("RGB", "RGBA", "P", "LA", "I;16", "I"):
                return np.asarray(im.convert("RGB"), dtype=np.uint8)
            raise DecodeError(f"{path}: unsupported image mode {im.mode!r}")
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"{path}: cannot decode image ({exc})") from exc


def write_image(img: np.ndarray, path) -> None:
    """Write a uint8 grayscale (H, W) or RGB (H, W, 3) array as PNG."""
    arr = np.asarray(img, dtype=np.uint8)
    if arr.ndim == 2:
        mode = "L"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        mode = "RGB"
    else:
        raise ValueError(f"expected (H, W) or (H, W, 3) uint8 array, got {arr.shape}")
    Image.fromarray(arr, mode=mode).save(Path(path), format="PNG")


def read_label_map(path, class_count: int = 2) -> np.ndarray:
    """Read a label map PNG and validate every pixel against class_count.

    Parameters
    ----------
    path : path-like
        Single-channel 8-bit PNG with integer class encodings.
    class_count : int
        Number of foreground classes; valid values are 0..class_count.

    Returns
    -------
    (H, W) uint8 array.

    Raises
    ------
    DecodeError
        File missing, unreadable, or not single-channel 8-bit.
    InvalidLabelError
        Any pixel value exceeds class_count; reports value and location.
    """
    if class_count < 1:
        raise ValueError("class_count must be >= 1")
    try:
        with Image.open(path) as im:
            if im.mode != "L":
                raise DecodeError(
                    f"{path}: label maps must be single-channel 8-bit PNG, "
                    f"got mode {im.mode!r}"
                )
            labels = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as exc:
        raise DecodeError(f"{path}: cannot decode label map ({exc})") from exc
    validate_labels(labels, class_count)
    return labels


def validate_labels(labels: np.ndarray, class_count: int) -> None:
    """Reject any label value outside {0..class_count}, never clamp."""
    bad = labels > class_count
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise InvalidLabelError(int(labels[r, c]), int(r), int(c), class_count)


def write_label_map(labels: np.ndarray, path) -> None:
    """Write a label map as a single-channel 8-bit PNG with raw class ids."""
    arr = np.asarray(labels)
    if arr.ndim != 2:
        raise ValueError(f"label map must be 2-D, got shape {arr.shape}")
    Image.fromarray(arr.astype(np.uint8), mode="L").save(Path(path), format="PNG")


def list_frames(
    directory,
    prefix: str = DEFAULT_PREFIX,
    fps: float = DEFAULT_FPS,
) -> list[FrameRecord]:
    """Enumerate frames named ``<prefix>_<index>.png`` in a directory.

    Records are sorted by frame index regardless of filesystem enumeration
    order; time_s = frame_index / fps. Index gaps are permitted but logged
    as warnings.

    Raises
    ------
    EmptySequenceError
        Directory exists but contains no matching files.
    """
    if fps <= 0:
        raise ValueError("fps must be > 0")
    directory = Path(directory)
    if not directory.is_dir():
        raise EmptySequenceError(f"{directory} is not a directory")
    pattern = re.compile(re.escape(prefix) + r"_(\d+)\.png$")
    found: dict[int, Path] = {}
    for entry in directory.iterdir():
        m = pattern.fullmatch(entry.name)
        if m:
            idx = int(m.group(1))
            if idx in found:
                log.warning("duplicate frame index %d: %s and %s", idx, found[idx], entry)
            found[idx] = entry
    if not found:
        raise EmptySequenceError(
            f"no files matching {prefix}_<index>.png in {directory}"
        )
    indices = sorted(found)
    gaps = [
        (a, b) for a, b in zip(indices, indices[1:]) if b != a + 1
    ]
    for a, b in gaps:
        log.warning("frame index gap: %d -> %d in %s", a, b, directory)
    return [
        FrameRecord(frame_index=i, time_s=i / fps, source_path=found[i])
        for i in indices
    ]
