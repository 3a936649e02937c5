"""Quality-control rendering: class-colored instances over grayscale frames.

Default colors follow the figure convention used throughout the project:
background black, healthy cells green, sickled cells red, and yellow
outlines on shared edges where overlapping cells were split apart.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError
from .watershed import InstanceMap

RGB = tuple[int, int, int]


@dataclass(frozen=True)
class ColorMap:
    background: RGB = (0, 0, 0)
    class_colors: tuple[RGB, ...] = ((0, 255, 0), (255, 0, 0))  # healthy, sickled
    split_boundary: RGB = (255, 255, 0)
    blend_alpha: float = 0.5

    def __post_init__(self):
        if not 0 <= self.blend_alpha <= 1:
            raise ValueError("blend_alpha must be in [0, 1]")
        allc = (self.background, *self.class_colors, self.split_boundary)
        for color in allc:
            if any(not 0 <= ch <= 255 for ch in color):
                raise ValueError(f"channel out of range in {color}")
        if len(set(self.class_colors)) != len(self.class_colors):
            raise ValueError("class colors must be distinct")

    def color_of(self, class_id: int) -> RGB:
        if not 1 <= class_id <= len(self.class_colors):
            raise ValueError(
                f"no color configured for class {class_id}; "
                f"pass a ColorMap with {class_id} class colors"
            )
        return self.class_colors[class_id - 1]


def render_overlay(
    frame: np.ndarray,
    inst: InstanceMap,
    boundaries: np.ndarray,
    colors: ColorMap = ColorMap(),
) -> np.ndarray:
    """Blend class colors over a grayscale frame and paint split boundaries.

    Foreground pixels become (1 - alpha) * gray + alpha * class color;
    split-boundary pixels are painted solid on top; background stays
    grayscale. All inputs must share dimensions.
    """
    frame = np.asarray(frame, dtype=np.uint8)
    boundaries = np.asarray(boundaries, dtype=bool)
    if frame.ndim != 2:
        raise DimensionMismatchError(f"frame must be grayscale, got {frame.shape}")
    if frame.shape != inst.ids.shape or frame.shape != boundaries.shape:
        raise DimensionMismatchError(
            f"dims differ: frame {frame.shape}, instances {inst.ids.shape}, "
            f"boundaries {boundaries.shape}"
        )
    out = np.repeat(frame[:, :, None], 3, axis=2).astype(np.float64)
    cls = inst.class_of_pixel()
    alpha = colors.blend_alpha
    for class_id in range(1, int(inst.classes.max(initial=0)) + 1):
        sel = cls == class_id
        if not sel.any():
            continue
        color = np.array(colors.color_of(class_id), dtype=np.float64)
        out[sel] = (1 - alpha) * out[sel] + alpha * color
    out = np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)
    out[boundaries] = colors.split_boundary
    return out


def render_masks_only(inst: InstanceMap, colors: ColorMap = ColorMap()) -> np.ndarray:
    """Flat class-color rendering on a black background."""
    cls = inst.class_of_pixel()
    palette = np.zeros((int(cls.max(initial=0)) + 1, 3), dtype=np.uint8)
    palette[0] = colors.background
    for class_id in range(1, palette.shape[0]):
        palette[class_id] = colors.color_of(class_id)
    return palette[cls]
