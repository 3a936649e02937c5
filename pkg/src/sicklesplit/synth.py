"""Synthetic label-map scenes with exact ground truth.

Healthy cells are rasterized as filled discs and sickled cells as
crescents (an outer disc minus an offset inner disc). Scenes place cells
by rejection sampling with a guaranteed clearance between non-partner
cells, so ground-truth counts are exact by construction; designated
same-class overlap pairs are placed close enough to merge into one
connected region while keeping two distinct distance-map peaks.

All randomness flows through SplitMix64, a counter-based generator with a
fully specified algorithm, so a (spec, seed) pair reproduces byte-identical
scenes on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import PlacementFailureError

_MASK64 = (1 << 64) - 1
#: clearance between rasterized non-partner cells, pixels; > sqrt(2) so
#: separate cells can never become 8-connected
CLEARANCE = 3.0
#: sampled center distance for overlap pairs, as fractions of r1 + r2; the
#: lower bound keeps the two smoothed distance-map peaks distinct even for
#: diagonal pair axes, where the square candidate window reaches farthest
PAIR_DISTANCE_RANGE = (0.82, 0.95)
#: partner radius relative to the first cell of a pair; overlapping cells
#: of similar size keep comparable peak heights, the regime where marker
#: detection is well-posed
PAIR_RADIUS_RATIO = (0.95, 1.05)


class SplitMix64:
    """Counter-based pseudorandom generator (SplitMix64).

    The i-th raw output is mix(seed + (i + 1) * GAMMA) mod 2**64 where
    GAMMA = 0x9E3779B97F4A7C15 and mix is the xor-shift-multiply finalizer

        z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
        z ^= z >> 27; z *= 0x94D049BB133111EB
        z ^= z >> 31

    Floats take the top 53 bits / 2**53. Integers use modulo reduction
    (bias is irrelevant at the scales used here and determinism matters
    more than uniformity in the last ulp).
    """

    GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + self.GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (self.next_u64() >> 11) / float(1 << 53) * (hi - lo)

    def randint(self, n: int) -> int:
        """Uniform-ish integer in [0, n)."""
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]


@dataclass(frozen=True)
class CrescentParams:
    inner_ratio: float = 0.8  # inner cut radius as a fraction of the outer
    offset_ratio: float = 0.5  # cut-center offset as a fraction of the outer

    def __post_init__(self):
        if not 0 < self.inner_ratio < 1.5 or not 0 <= self.offset_ratio < 1:
            raise ValueError("implausible crescent geometry")


@dataclass(frozen=True)
class SceneSpec:
    width: int = 1000
    height: int = 1000
    n_healthy: int = 0
    n_sickled: int = 0
    radius_range: tuple[float, float] = (10.0, 13.5)
    crescent: CrescentParams = CrescentParams()
    overlap_pairs: int = 0
    seed: int = 1

    def __post_init__(self):
        rmin, rmax = self.radius_range
        if not 0 < rmin <= rmax:
            raise ValueError("radius_range must satisfy 0 < min <= max")
        if self.n_healthy < 0 or self.n_sickled < 0 or self.overlap_pairs < 0:
            raise ValueError("counts must be >= 0")
        if 2 * self.overlap_pairs > self.n_healthy + self.n_sickled:
            raise ValueError("not enough cells for the requested overlap pairs")
        if 2 * (rmax + CLEARANCE) >= min(self.width, self.height):
            raise ValueError("cells cannot fit inside the canvas")


@dataclass(frozen=True)
class Cell:
    row: float
    col: float
    radius: float
    class_id: int
    cut_angle: float  # crescent cut direction; fixed even for discs


@dataclass(frozen=True)
class GroundTruth:
    """Exact per-class counts, independent of rasterized merging."""

    n_healthy: int
    n_sickled: int
    cells: tuple[Cell, ...]

    @property
    def fraction(self) -> float:
        total = self.n_healthy + self.n_sickled
        return math.nan if total == 0 else self.n_sickled / total


def _split_pairs(spec: SceneSpec) -> tuple[int, int]:
    """Distribute overlap pairs across classes, proportional to class size."""
    total = spec.n_healthy + spec.n_sickled
    if spec.overlap_pairs == 0 or total == 0:
        return 0, 0
    pairs_h = round(spec.overlap_pairs * spec.n_healthy / total)
    pairs_h = min(pairs_h, spec.n_healthy // 2)
    pairs_s = spec.overlap_pairs - pairs_h
    if pairs_s > spec.n_sickled // 2:
        pairs_s = spec.n_sickled // 2
        pairs_h = spec.overlap_pairs - pairs_s
    if pairs_h > spec.n_healthy // 2:
        raise ValueError("overlap pairs exceed what the class sizes allow")
    return pairs_h, pairs_s


def _draw_cell(labels: np.ndarray, cell: Cell, crescent: CrescentParams) -> None:
    h, w = labels.shape
    r = cell.radius
    r0 = max(int(math.floor(cell.row - r)) - 1, 0)
    r1 = min(int(math.ceil(cell.row + r)) + 2, h)
    c0 = max(int(math.floor(cell.col - r)) - 1, 0)
    c1 = min(int(math.ceil(cell.col + r)) + 2, w)
    rr, cc = np.mgrid[r0:r1, c0:c1]
    inside = (rr - cell.row) ** 2 + (cc - cell.col) ** 2 <= r * r
    if cell.class_id == 2:
        cut_r = cell.row + crescent.offset_ratio * r * math.cos(cell.cut_angle)
        cut_c = cell.col + crescent.offset_ratio * r * math.sin(cell.cut_angle)
        cut = (rr - cut_r) ** 2 + (cc - cut_c) ** 2 <= (crescent.inner_ratio * r) ** 2
        inside &= ~cut
    patch = labels[r0:r1, c0:c1]
    patch[inside] = cell.class_id


def _cell_pixels(cell: Cell, crescent: CrescentParams) -> np.ndarray:
    """Absolute (row, col) pixel coordinates of one cell's main body.

    Sharp crescent horns can shed 1-pixel fragments at the tips; those are
    removed by the area filter downstream, so overlap-pair checks consider
    only the largest connected piece.
    """
    canvas = np.zeros(
        (int(math.ceil(2 * cell.radius)) + 6, int(math.ceil(2 * cell.radius)) + 6),
        dtype=np.uint8,
    )
    off_r = cell.row - cell.radius - 3
    off_c = cell.col - cell.radius - 3
    local = Cell(
        row=cell.row - math.floor(off_r),
        col=cell.col - math.floor(off_c),
        radius=cell.radius,
        class_id=cell.class_id,
        cut_angle=cell.cut_angle,
    )
    _draw_cell(canvas, local, crescent)
    pts = _largest_component(canvas > 0)
    return pts + np.array([math.floor(off_r), math.floor(off_c)])


def _largest_component(mask: np.ndarray) -> np.ndarray:
    """(N, 2) pixel coordinates of the largest 8-connected piece of a mask."""
    h, w = mask.shape
    seen = np.zeros((h, w), dtype=bool)
    best: list[tuple[int, int]] = []
    for r0, c0 in zip(*np.nonzero(mask)):
        if seen[r0, c0]:
            continue
        stack = [(int(r0), int(c0))]
        seen[r0, c0] = True
        comp = []
        while stack:
            r, c = stack.pop()
            comp.append((r, c))
            for nr in (r - 1, r, r + 1):
                if nr < 0 or nr >= h:
                    continue
                for nc in (c - 1, c, c + 1):
                    if 0 <= nc < w and mask[nr, nc] and not seen[nr, nc]:
                        seen[nr, nc] = True
                        stack.append((nr, nc))
        if len(comp) > len(best):
            best = comp
    return np.array(best, dtype=np.int64).reshape(-1, 2)


def _pixels_merge(a: np.ndarray, b: np.ndarray) -> bool:
    """True if two pixel sets form one 8-connected blob (Chebyshev gap <= 1)."""
    if a.size == 0 or b.size == 0:
        return False
    origin = np.minimum(a.min(axis=0), b.min(axis=0)) - 1
    extent = np.maximum(a.max(axis=0), b.max(axis=0)) - origin + 2
    grid = np.zeros(tuple(extent), dtype=bool)
    bb = b - origin
    grid[bb[:, 0], bb[:, 1]] = True
    # dilate b by one pixel (chebyshev) and test a against it
    h, w = grid.shape
    dil = np.zeros_like(grid)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            dil[
                max(dr, 0) : h + min(dr, 0), max(dc, 0) : w + min(dc, 0)
            ] |= grid[max(-dr, 0) : h + min(-dr, 0), max(-dc, 0) : w + min(-dc, 0)]
    aa = a - origin
    return bool(dil[aa[:, 0], aa[:, 1]].any())


class _Placer:
    def __init__(self, spec: SceneSpec, rng: SplitMix64):
        self.spec = spec
        self.rng = rng
        self.cells: list[Cell] = []
        self.max_attempts = 10_000

    def _fits(self, row, col, radius, ignore: int | None = None) -> bool:
        s = self.spec
        if not (radius + 1 <= row <= s.height - 2 - radius):
            return False
        if not (radius + 1 <= col <= s.width - 2 - radius):
            return False
        for i, other in enumerate(self.cells):
            if i == ignore:
                continue
            limit = radius + other.radius + CLEARANCE
            if (row - other.row) ** 2 + (col - other.col) ** 2 < limit * limit:
                return False
        return True

    def _radius(self) -> float:
        return self.rng.uniform(*self.spec.radius_range)

    def place_single(self, class_id: int) -> None:
        s = self.spec
        for _ in range(self.max_attempts):
            radius = self._radius()
            row = self.rng.uniform(radius + 1, s.height - 2 - radius)
            col = self.rng.uniform(radius + 1, s.width - 2 - radius)
            if self._fits(row, col, radius):
                self.cells.append(
                    Cell(row, col, radius, class_id, self.rng.uniform(0, 2 * math.pi))
                )
                return
        raise PlacementFailureError(
            f"could not place a cell after {self.max_attempts} attempts "
            f"(canvas too crowded)"
        )

    def place_pair(self, class_id: int) -> None:
        """Place two same-class cells whose rasterizations merge."""
        self.place_single(class_id)
        a_index = len(self.cells) - 1
        a = self.cells[a_index]
        lo, hi = PAIR_DISTANCE_RANGE
        rmin, rmax = self.spec.radius_range
        for _ in range(self.max_attempts):
            radius = min(max(a.radius * self.rng.uniform(*PAIR_RADIUS_RATIO), rmin), rmax)
            theta = self.rng.uniform(0, 2 * math.pi)
            dist = self.rng.uniform(lo, hi) * (a.radius + radius)
            row = a.row + dist * math.cos(theta)
            col = a.col + dist * math.sin(theta)
            if not self._fits(row, col, radius, ignore=a_index):
                continue
            if class_id == 2:
                # cuts perpendicular to the pair axis, opposite sides: the
                # bodies overlap near the axis and the thick parts (the
                # distance peaks) stay apart
                a = replace(a, cut_angle=theta + math.pi / 2)
                b = Cell(row, col, radius, class_id, theta - math.pi / 2)
            else:
                b = Cell(row, col, radius, class_id, self.rng.uniform(0, 2 * math.pi))
            if self._merges(a, b):
                self.cells[a_index] = a
                self.cells.append(b)
                return
        raise PlacementFailureError(
            f"could not place an overlap partner after {self.max_attempts} attempts"
        )

    def _merges(self, a: Cell, b: Cell) -> bool:
        cres = self.spec.crescent
        return _pixels_merge(_cell_pixels(a, cres), _cell_pixels(b, cres))


def _place_cells(spec: SceneSpec, rng: SplitMix64) -> list[Cell]:
    pairs_h, pairs_s = _split_pairs(spec)
    placer = _Placer(spec, rng)
    for _ in range(pairs_h):
        placer.place_pair(1)
    for _ in range(pairs_s):
        placer.place_pair(2)
    for _ in range(spec.n_healthy - 2 * pairs_h):
        placer.place_single(1)
    for _ in range(spec.n_sickled - 2 * pairs_s):
        placer.place_single(2)
    return placer.cells


def _rasterize(spec: SceneSpec, cells: list[Cell]) -> np.ndarray:
    labels = np.zeros((spec.height, spec.width), dtype=np.uint8)
    for cell in cells:
        _draw_cell(labels, cell, spec.crescent)
    return labels


def generate_scene(spec: SceneSpec) -> tuple[np.ndarray, GroundTruth]:
    """Generate one scene; deterministic for a fixed (spec, seed).

    Later-placed cells overwrite earlier pixels where they overlap, which
    within one class is simply the union of the shapes. Raises
    PlacementFailureError when rejection sampling cannot satisfy the spec.
    """
    rng = SplitMix64(spec.seed)
    cells = _place_cells(spec, rng)
    labels = _rasterize(spec, cells)
    n_h = sum(1 for c in cells if c.class_id == 1)
    n_s = sum(1 for c in cells if c.class_id == 2)
    return labels, GroundTruth(n_healthy=n_h, n_sickled=n_s, cells=tuple(cells))


def scene_sequence(
    spec: SceneSpec,
    n_frames: int,
    sickling_schedule: list[float],
) -> list[tuple[np.ndarray, GroundTruth]]:
    """Static cell layout whose classes evolve along a sickling schedule.

    At frame t, floor(schedule[t] * total) cells are sickled; which cells
    sickle first is a fixed random order drawn once per seed. A sickled
    cell is drawn as a crescent inscribed in its disc, so the overlap
    topology never changes as the population sickles.
    """
    if len(sickling_schedule) != n_frames:
        raise ValueError("schedule length must equal n_frames")
    prev = 0.0
    for v in sickling_schedule:
        if not 0 <= v <= 1:
            raise ValueError("schedule values must be in [0, 1]")
        if v < prev:
            raise ValueError("schedule must be non-decreasing")
        prev = v

    rng = SplitMix64(spec.seed)
    cells = _place_cells(spec, rng)
    total = len(cells)
    sickle_order = list(range(total))
    rng.shuffle(sickle_order)

    frames = []
    for t in range(n_frames):
        k = math.floor(sickling_schedule[t] * total)
        sickled = set(sickle_order[:k])
        frame_cells = [
            replace(cell, class_id=2 if i in sickled else 1)
            for i, cell in enumerate(cells)
        ]
        labels = _rasterize(spec, frame_cells)
        gt = GroundTruth(
            n_healthy=total - k, n_sickled=k, cells=tuple(frame_cells)
        )
        frames.append((labels, gt))
    return frames


def brute_force_count(
    labels: np.ndarray, min_area: int = 0, class_count: int = 2
) -> tuple[int, ...]:
    """Naive flood-fill per-class component counts (independent oracle).

    Pure stack-based 8-connected flood fill; deliberately shares no code
    with morphology.connected_components.
    """
    labels = np.asarray(labels)
    counts = []
    for class_id in range(1, class_count + 1):
        mask = labels == class_id
        counts.append(_flood_count(mask, min_area))
    return tuple(counts)


def _flood_count(mask: np.ndarray, min_area: int) -> int:
    h, w = mask.shape
    seen = np.zeros((h, w), dtype=bool)
    count = 0
    for r0, c0 in zip(*np.nonzero(mask)):
        if seen[r0, c0]:
            continue
        stack = [(int(r0), int(c0))]
        seen[r0, c0] = True
        area = 0
        while stack:
            r, c = stack.pop()
            area += 1
            for nr in (r - 1, r, r + 1):
                if nr < 0 or nr >= h:
                    continue
                for nc in (c - 1, c, c + 1):
                    if 0 <= nc < w and mask[nr, nc] and not seen[nr, nc]:
                        seen[nr, nc] = True
                        stack.append((nr, nc))
        if area >= min_area:
            count += 1
    return count


# ---------------------------------------------------------------------------
# scene spec files and ground-truth CSV

GROUND_TRUTH_HEADER = ("frame", "true_n_healthy", "true_n_sickled", "true_fraction")


def load_scene_spec(path) -> tuple[SceneSpec, int, list[float]]:
    """Read a scene spec from a key-value file.

    Returns (spec, n_frames, schedule); single-frame specs get n_frames=1
    and schedule [initial fraction implied by the spec counts].
    """
    from .config import parse_keyvalues

    items = parse_keyvalues(path)

    def get(key, default, conv):
        return conv(items[key]) if key in items else default

    spec = SceneSpec(
        width=get("scene.width", 1000, int),
        height=get("scene.height", 1000, int),
        n_healthy=get("scene.n_healthy", 0, int),
        n_sickled=get("scene.n_sickled", 0, int),
        radius_range=(
            get("scene.radius_min", 9.0, float),
            get("scene.radius_max", 14.0, float),
        ),
        crescent=CrescentParams(
            inner_ratio=get("crescent.inner_ratio", 0.8, float),
            offset_ratio=get("crescent.offset_ratio", 0.5, float),
        ),
        overlap_pairs=get("scene.overlap_pairs", 0, int),
        seed=get("scene.seed", 1, int),
    )
    schedule_raw = items.get("scene.schedule", "")
    if schedule_raw:
        schedule = [float(v) for v in schedule_raw.split(",")]
        n_frames = len(schedule)
    else:
        schedule = []
        n_frames = 1
    return spec, n_frames, schedule


def write_ground_truth_csv(truths: list[GroundTruth], path) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(GROUND_TRUTH_HEADER) + "\n")
        for i, gt in enumerate(truths):
            frac = "NaN" if math.isnan(gt.fraction) else f"{gt.fraction:.6f}"
            fh.write(f"{i},{gt.n_healthy},{gt.n_sickled},{frac}\n")


def read_ground_truth_csv(path) -> list[tuple[int, int, int]]:
    """Read (frame, n_healthy, n_sickled) rows from a ground-truth CSV."""
    import csv

    rows = []
    with open(Path(path), encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                (
                    int(row["frame"]),
                    int(row["true_n_healthy"]),
                    int(row["true_n_sickled"]),
                )
            )
    return sorted(rows)
