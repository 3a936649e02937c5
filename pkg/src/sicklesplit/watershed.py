"""Marker generation and marker-controlled watershed splitting.

Overlapping same-class cells appear as one merged region in a class mask.
Each cell center shows up as a local maximum of the smoothed distance
transform; those maxima seed a priority flood that grows instances
outward until they meet, and the meeting line becomes the shared edge
between the split cells.

Determinism contract: every stage breaks ties by (value, row, col) raster
order, so repeated runs and any degree of frame-level parallelism produce
byte-identical instance maps.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage as ndi

from .errors import DimensionMismatchError, MarkerOutsideMaskError
from .morphology import (
    ComponentLabeling,
    area_filter,
    class_mask,
    connected_components,
    distance_transform,
    gaussian_smooth,
)

_NEIGHBORS_8 = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


@dataclass(frozen=True)
class WatershedParams:
    """The four splitting tunables.

    sigma                : distance-map smoothing, pixels (0 disables).
    peak_height_fraction : relative threshold in (0, 1]; a candidate peak
                           survives iff its smoothed value >= fraction *
                           (region max). Inclusive, so 1.0 keeps exactly
                           the global maxima.
    min_peak_distance    : suppression radius, pixels >= 1.
    min_area             : components below this area are discarded first.

    Defaults sit inside the stable operating range at the standard
    1000x1000 working resolution; all are config-exposed.
    """

    sigma: float = 2.0
    peak_height_fraction: float = 0.3
    min_peak_distance: float = 10.0
    min_area: int = 50

    def __post_init__(self):
        if not 0 < self.peak_height_fraction <= 1:
            raise ValueError("peak_height_fraction must be in (0, 1]")
        if self.min_peak_distance < 1:
            raise ValueError("min_peak_distance must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.min_area < 0:
            raise ValueError("min_area must be >= 0")

    def replace(self, **kwargs) -> "WatershedParams":
        from dataclasses import replace

        return replace(self, **kwargs)


@dataclass(frozen=True)
class MarkerSet:
    """Accepted seed points, ordered by (region id, acceptance order)."""

    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    region_ids: np.ndarray

    def __len__(self) -> int:
        return self.rows.size


@dataclass(frozen=True)
class InstanceMap:
    """Per-pixel instance ids with one class per instance.

    ids     : (H, W) int32, 0 = background, instances numbered 1..n.
    classes : (n + 1,) uint8; classes[i] is the class of instance i,
              classes[0] = 0.
    """

    ids: np.ndarray
    classes: np.ndarray = field(default_factory=lambda: np.zeros(1, np.uint8))

    @property
    def n_instances(self) -> int:
        return self.classes.size - 1

    def class_of_pixel(self) -> np.ndarray:
        """(H, W) uint8 map of per-pixel class ids."""
        return self.classes[self.ids]


def detect_markers(
    smoothed: np.ndarray,
    components: ComponentLabeling,
    params: WatershedParams,
) -> MarkerSet:
    """Find seed points on a smoothed distance map, one set per region.

    Candidates are pixels attaining the maximum of the smoothed map over
    the square (Chebyshev) neighborhood of radius min_peak_distance,
    restricted to their own region; on a flat plateau only the raster-first
    pixel is kept. Candidates below peak_height_fraction * (region max)
    are discarded. Survivors are sorted by (value desc, row, col) and
    accepted greedily, suppressing anything within Euclidean
    min_peak_distance of an already accepted marker of the same region.
    A region left with no survivors gets one fallback marker at its global
    maximum so no foreground is ever dropped.
    """
    smoothed = np.asarray(smoothed, dtype=np.float64)
    if smoothed.shape != components.labels.shape:
        raise DimensionMismatchError(
            f"smoothed {smoothed.shape} vs labels {components.labels.shape}"
        )
    win = int(math.floor(params.min_peak_distance))
    size = 2 * win + 1
    h_thresh = params.peak_height_fraction
    mpd2 = params.min_peak_distance ** 2

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    regions: list[int] = []

    boxes = ndi.find_objects(components.labels)
    for region_id, box in enumerate(boxes, start=1):
        if box is None:
            continue
        sub = components.labels[box] == region_id
        v = np.where(sub, smoothed[box], -np.inf)
        local_max = ndi.maximum_filter(v, size=size, mode="constant", cval=-np.inf)
        cand = sub & (v == local_max)
        # adjacent candidates necessarily share a value; reduce each flat
        # plateau to its raster-first pixel
        plats, n_plats = ndi.label(cand, structure=np.ones((3, 3), bool))
        if n_plats == 0:
            cand_pts = np.empty((0, 2), dtype=np.intp)
        else:
            flat = plats.ravel()
            labs, first = np.unique(flat, return_index=True)
            first = first[labs != 0]
            cand_pts = np.column_stack(np.unravel_index(first, plats.shape))

        region_max = v.max()
        accepted: list[tuple[int, int, float]] = []
        if cand_pts.size:
            cvals = v[cand_pts[:, 0], cand_pts[:, 1]]
            keep = cvals >= h_thresh * region_max
            cand_pts = cand_pts[keep]
            cvals = cvals[keep]
            order = np.lexsort((cand_pts[:, 1], cand_pts[:, 0], -cvals))
            for k in order:
                r, c = int(cand_pts[k, 0]), int(cand_pts[k, 1])
                val = float(cvals[k])
                if all((r - ar) ** 2 + (c - ac) ** 2 >= mpd2 for ar, ac, _ in accepted):
                    accepted.append((r, c, val))
        if not accepted:
            # fallback: global maximum of the region, raster-first on ties
            at = np.argwhere(v == region_max)
            r, c = int(at[0, 0]), int(at[0, 1])
            accepted.append((r, c, float(region_max)))

        r_off, c_off = box[0].start, box[1].start
        for r, c, val in accepted:
            rows.append(r + r_off)
            cols.append(c + c_off)
            vals.append(val)
            regions.append(region_id)

    return MarkerSet(
        rows=np.array(rows, dtype=np.intp),
        cols=np.array(cols, dtype=np.intp),
        values=np.array(vals, dtype=np.float64),
        region_ids=np.array(regions, dtype=np.int32),
    )


def _flood(
    smoothed: np.ndarray,
    components: ComponentLabeling,
    markers: MarkerSet,
    first_id: int = 1,
) -> np.ndarray:
    """Priority flood from markers, restricted to the labeled foreground.

    Pixels are dequeued in order of (smoothed value descending, enqueue
    sequence ascending) and take the label of the neighbor that enqueued
    them. Regions never interact (they are maximal connected sets), so the
    flood runs per region; a region with a single marker is that marker's
    whole region, and a region with no marker at all becomes one unsplit
    fallback instance. Returns the (H, W) int32 id map; instance ids are
    first_id.. in marker order, then fallback regions in region order.
    """
    labels = components.labels
    out = np.zeros(labels.shape, dtype=np.int32)
    # markers grouped by region, in MarkerSet (acceptance) order
    by_region: dict[int, list[tuple[int, int, int]]] = {}
    for i in range(len(markers)):
        inst = first_id + i
        by_region.setdefault(int(markers.region_ids[i]), []).append(
            (int(markers.rows[i]), int(markers.cols[i]), inst)
        )
    next_id = first_id + len(markers)
    boxes = ndi.find_objects(labels)
    for region_id, box in enumerate(boxes, start=1):
        if box is None:
            continue
        seeds = by_region.get(region_id)
        if not seeds:
            out[box][labels[box] == region_id] = next_id
            next_id += 1
            continue
        if len(seeds) == 1:
            out[box][labels[box] == region_id] = seeds[0][2]
            continue
        _flood_region(smoothed, labels, out, box, region_id, seeds)
    return out


def _flood_region(smoothed, labels, out, box, region_id, seeds):
    r_off, c_off = box[0].start, box[1].start
    sub_mask = labels[box] == region_id
    sub_vals = smoothed[box]
    sub_out = out[box]
    h, w = sub_mask.shape
    heap: list[tuple[float, int, int, int, int]] = []
    seq = 0
    for r, c, inst in seeds:
        sub_out[r - r_off, c - c_off] = inst
    for r, c, inst in seeds:
        rr, cc = r - r_off, c - c_off
        for dr, dc in _NEIGHBORS_8:
            nr, nc = rr + dr, cc + dc
            if 0 <= nr < h and 0 <= nc < w and sub_mask[nr, nc] and not sub_out[nr, nc]:
                heapq.heappush(heap, (-sub_vals[nr, nc], seq, nr, nc, inst))
                seq += 1
    while heap:
        _, _, r, c, inst = heapq.heappop(heap)
        if sub_out[r, c]:
            continue
        sub_out[r, c] = inst
        for dr, dc in _NEIGHBORS_8:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and sub_mask[nr, nc] and not sub_out[nr, nc]:
                heapq.heappush(heap, (-sub_vals[nr, nc], seq, nr, nc, inst))
                seq += 1


def watershed_split(
    smoothed: np.ndarray,
    mask: np.ndarray,
    markers: MarkerSet,
    class_id: int = 1,
) -> InstanceMap:
    """Split one class mask into instances by priority flooding from markers.

    Raises MarkerOutsideMaskError if any marker lies on background. Marker
    region membership is re-derived from the mask, so marker sets produced
    for a different labeling of the same mask remain valid.
    """
    mask = np.asarray(mask, dtype=bool)
    smoothed = np.asarray(smoothed, dtype=np.float64)
    if mask.shape != smoothed.shape:
        raise DimensionMismatchError(f"mask {mask.shape} vs smoothed {smoothed.shape}")
    comp = connected_components(mask)
    for i in range(len(markers)):
        r, c = int(markers.rows[i]), int(markers.cols[i])
        if not (0 <= r < mask.shape[0] and 0 <= c < mask.shape[1]) or not mask[r, c]:
            raise MarkerOutsideMaskError(f"marker at ({r}, {c}) is not on foreground")
    regions = comp.labels[markers.rows, markers.cols].astype(np.int32)
    markers = MarkerSet(
        rows=markers.rows, cols=markers.cols, values=markers.values, region_ids=regions
    )
    ids = _flood(smoothed, comp, markers)
    n = int(ids.max())
    classes = np.zeros(n + 1, dtype=np.uint8)
    classes[1:] = class_id
    return InstanceMap(ids=ids, classes=classes)


def split_all(
    labels: np.ndarray,
    params: WatershedParams = WatershedParams(),
    class_count: int = 2,
) -> InstanceMap:
    """Split every class of a label map into cell instances.

    Per class: binary mask -> components -> area filter -> distance
    transform -> Gaussian smoothing -> marker detection -> priority flood.
    Heterogeneous overlaps need no splitting: the class masks already
    separate them. Instance ids are unique across classes (class 1 first).
    """
    labels = np.asarray(labels)
    ids = np.zeros(labels.shape, dtype=np.int32)
    classes: list[int] = [0]
    offset = 0
    for class_id in range(1, class_count + 1):
        mask = class_mask(labels, class_id, class_count)
        filtered = area_filter(connected_components(mask), params.min_area)
        comp = connected_components(filtered)
        if comp.count == 0:
            continue
        dt = distance_transform(filtered)
        smoothed = gaussian_smooth(dt, params.sigma)
        markers = detect_markers(smoothed, comp, params)
        class_ids = _flood(smoothed, comp, markers, first_id=1)
        n = int(class_ids.max())
        fg = class_ids > 0
        ids[fg] = class_ids[fg] + offset
        classes.extend([class_id] * n)
        offset += n
    return InstanceMap(ids=ids, classes=np.array(classes, dtype=np.uint8))


def split_boundaries(inst: InstanceMap) -> np.ndarray:
    """Mask of foreground pixels 8-adjacent to a different instance of the
    same class; empty when nothing was split."""
    ids = inst.ids
    cls = inst.class_of_pixel()
    out = np.zeros(ids.shape, dtype=bool)
    h, w = ids.shape
    for dr, dc in _NEIGHBORS_8:
        a_r = slice(max(dr, 0), h + min(dr, 0))
        a_c = slice(max(dc, 0), w + min(dc, 0))
        b_r = slice(max(-dr, 0), h + min(-dr, 0))
        b_c = slice(max(-dc, 0), w + min(-dc, 0))
        a_ids, b_ids = ids[a_r, a_c], ids[b_r, b_c]
        touch = (
            (a_ids > 0)
            & (b_ids > 0)
            & (a_ids != b_ids)
            & (cls[a_r, a_c] == cls[b_r, b_c])
        )
        out[a_r, a_c] |= touch
    return out
