"""Frame standardization: grayscale conversion, CLAHE, resize.

Raw microscopy frames are converted to grayscale, contrast-normalized with
contrast-limited adaptive histogram equalization, and resized to the
segmentation model's input resolution before inference. Label maps must be
resized with nearest-neighbor interpolation so class ids never blend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChannelCountError, TileTooLargeError

#: ITU-R BT.601 luma weights.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class ClaheParams:
    clip_limit: float = 2.0
    tile_rows: int = 8
    tile_cols: int = 8

    def __post_init__(self):
        if self.clip_limit <= 0:
            raise ValueError("clip_limit must be > 0")
        if self.tile_rows < 1 or self.tile_cols < 1:
            raise ValueError("tile grid dims must be >= 1")


@dataclass(frozen=True)
class ResizeSpec:
    width: int = 1000
    height: int = 1000
    interpolation: str = "bilinear"  # "nearest" or "bilinear"
    #: scale to fit and pad with background instead of distorting aspect
    letterbox: bool = False

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("target dims must be > 0")
        if self.interpolation not in ("nearest", "bilinear"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Convert an (H, W, 3) uint8 image to (H, W) luma.

    Per pixel: round(0.299 R + 0.587 G + 0.114 B), half away from zero,
    clamped to [0, 255].
    """
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ChannelCountError(f"expected 3-channel image, got shape {arr.shape}")
    wr, wg, wb = LUMA_WEIGHTS
    luma = wr * arr[..., 0] + wg * arr[..., 1] + wb * arr[..., 2]
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def _tile_edges(extent: int, n_tiles: int) -> np.ndarray:
    # evenly spread tile boundaries; tile i spans [edges[i], edges[i+1])
    return np.array([(i * extent) // n_tiles for i in range(n_tiles + 1)])


def _axis_weights(extent: int, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower tile index and interpolation weight per pixel along one axis,
    clamped before the first and after the last tile center."""
    pos = np.arange(extent, dtype=np.float64)
    if centers.size == 1:
        return np.zeros(extent, dtype=int), np.zeros(extent)
    idx = np.clip(np.searchsorted(centers, pos, side="right") - 1, 0, centers.size - 2)
    t = (pos - centers[idx]) / (centers[idx + 1] - centers[idx])
    return idx, np.clip(t, 0.0, 1.0)


def _tile_lut(tile: np.ndarray, clip_limit: float) -> np.ndarray:
    """Equalization lookup table for one tile.

    Histogram bins above clip_limit * n / 256 are clipped and the excess is
    redistributed uniformly over all 256 bins; the mapping is the inclusive
    CDF scaled to [0, 255] and floored. A tile whose histogram occupies a
    single bin maps that bin to itself (degenerate, equalization undefined).
    """
    hist = np.bincount(tile.ravel(), minlength=256).astype(np.float64)
    n = tile.size
    if np.count_nonzero(hist) <= 1:
        return np.arange(256, dtype=np.float64)
    clip = clip_limit * n / 256.0
    excess = np.maximum(hist - clip, 0.0).sum()
    if excess > 0:
        hist = np.minimum(hist, clip) + excess / 256.0
    cdf = np.cumsum(hist)
    return np.floor(255.0 * cdf / n)


def clahe(img: np.ndarray, params: ClaheParams = ClaheParams()) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization of a grayscale image.

    The image is divided into a tile_rows x tile_cols grid, a clipped
    equalization mapping is built per tile, and each output pixel bilinearly
    interpolates the mappings of the four nearest tile centers (clamped at
    the borders). Output dimensions equal input dimensions; constant images
    are fixed points.

    Raises
    ------
    ChannelCountError
        Input is not single-channel.
    TileTooLargeError
        Tile grid exceeds the image dimensions.
    """
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ChannelCountError(f"expected grayscale image, got shape {arr.shape}")
    arr = arr.astype(np.uint8, copy=False)
    h, w = arr.shape
    rows, cols = params.tile_rows, params.tile_cols
    if rows > h or cols > w:
        raise TileTooLargeError(
            f"tile grid {rows}x{cols} exceeds image dims {h}x{w}"
        )

    r_edges = _tile_edges(h, rows)
    c_edges = _tile_edges(w, cols)
    luts = np.empty((rows, cols, 256), dtype=np.float64)
    for i in range(rows):
        for j in range(cols):
            tile = arr[r_edges[i] : r_edges[i + 1], c_edges[j] : c_edges[j + 1]]
            luts[i, j] = _tile_lut(tile, params.clip_limit)

    # fractional tile coordinate of every pixel, clamped at tile centers
    r_centers = (r_edges[:-1] + r_edges[1:] - 1) / 2.0
    c_centers = (c_edges[:-1] + c_edges[1:] - 1) / 2.0
    i0, tr = _axis_weights(h, r_centers)
    j0, tc = _axis_weights(w, c_centers)
    i1 = np.minimum(i0 + 1, rows - 1)
    j1 = np.minimum(j0 + 1, cols - 1)
    tr = tr[:, None]
    tc = tc[None, :]

    i0 = i0[:, None]
    i1 = i1[:, None]
    j0 = j0[None, :]
    j1 = j1[None, :]
    v00 = luts[i0, j0, arr]
    v01 = luts[i0, j1, arr]
    v10 = luts[i1, j0, arr]
    v11 = luts[i1, j1, arr]
    out = (
        (1 - tr) * ((1 - tc) * v00 + tc * v01)
        + tr * ((1 - tc) * v10 + tc * v11)
    )
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def resize(img: np.ndarray, spec: ResizeSpec) -> np.ndarray:
    """Resize a grayscale/RGB image or label map.

    Nearest-neighbor picks the source pixel whose center is closest under
    the pixel-center convention src = floor((dst + 0.5) * in/out); it never
    introduces values absent from the input, so it is the required mode for
    label maps. Bilinear uses the same pixel-center convention with edge
    clamping. Non-uniform scaling is permitted (aspect distortion accepted).
    """
    arr = np.asarray(img)
    if arr.ndim not in (2, 3):
        raise ValueError(f"expected 2-D or 3-D image, got shape {arr.shape}")
    h_in, w_in = arr.shape[:2]
    h_out, w_out = spec.height, spec.width
    if spec.letterbox and (h_out * w_in != w_out * h_in):
        scale = min(h_out / h_in, w_out / w_in)
        h_fit = max(1, round(h_in * scale))
        w_fit = max(1, round(w_in * scale))
        fitted = resize(
            arr,
            ResizeSpec(width=w_fit, height=h_fit, interpolation=spec.interpolation),
        )
        out = np.zeros((h_out, w_out) + arr.shape[2:], dtype=np.uint8)
        top = (h_out - h_fit) // 2
        left = (w_out - w_fit) // 2
        out[top : top + h_fit, left : left + w_fit] = fitted
        return out
    if (h_in, w_in) == (h_out, w_out) and spec.interpolation == "nearest":
        return arr.copy()

    if spec.interpolation == "nearest":
        r_src = np.minimum(
            ((np.arange(h_out) + 0.5) * h_in / h_out).astype(int), h_in - 1
        )
        c_src = np.minimum(
            ((np.arange(w_out) + 0.5) * w_in / w_out).astype(int), w_in - 1
        )
        return arr[np.ix_(r_src, c_src)].copy()

    # bilinear
    r = np.clip((np.arange(h_out) + 0.5) * h_in / h_out - 0.5, 0, h_in - 1)
    c = np.clip((np.arange(w_out) + 0.5) * w_in / w_out - 0.5, 0, w_in - 1)
    r0 = np.floor(r).astype(int)
    c0 = np.floor(c).astype(int)
    r1 = np.minimum(r0 + 1, h_in - 1)
    c1 = np.minimum(c0 + 1, w_in - 1)
    tr = (r - r0)[:, None]
    tc = (c - c0)[None, :]
    if arr.ndim == 3:
        tr = tr[..., None]
        tc = tc[..., None]
    a = arr.astype(np.float64)
    top = (1 - tc) * a[r0][:, c0] + tc * a[r0][:, c1]
    bot = (1 - tc) * a[r1][:, c0] + tc * a[r1][:, c1]
    out = (1 - tr) * top + tr * bot
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)
