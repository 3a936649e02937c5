"""Acceptance suite.

Each test enforces one exit criterion at its stated tolerance; the
conftest prints a one-line PASS/FAIL summary per criterion after the run.
Oracle-based checks (criteria 1 and 2) compare the library against the
naive reference implementations in oracles.py / synth.brute_force_count.
"""

import hashlib
import math
import os
import time
from dataclasses import dataclass

import numpy as np
import pytest

from oracles import brute_force_edt
from sicklesplit import cli
from sicklesplit.io import frame_name, read_label_map, write_label_map
from sicklesplit.morphology import (
    area_filter,
    class_mask,
    connected_components,
    distance_transform,
    gaussian_smooth,
)
from sicklesplit.overlay import render_overlay
from sicklesplit.quantify import baseline_count, count_instances, sickled_fraction
from sicklesplit.sweep import SweepSpec, run_sweep
from sicklesplit.synth import (
    SceneSpec,
    brute_force_count,
    generate_scene,
    scene_sequence,
)
from sicklesplit.watershed import (
    WatershedParams,
    detect_markers,
    split_all,
    split_boundaries,
    watershed_split,
)

DENSITIES = (62, 170, 417)
PARAMS = WatershedParams()


def density_spec(density: int, seed: int, overlap_pairs: int = 0) -> SceneSpec:
    n_sickled = density // 3
    return SceneSpec(
        n_healthy=density - n_sickled,
        n_sickled=n_sickled,
        overlap_pairs=overlap_pairs,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# criterion 1


def test_c01_distance_transform_exactness():
    rng = np.random.default_rng(20260101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        h = int(rng.integers(1, 65))
        w = int(rng.integers(1, 65))
        mask = rng.random((h, w)) < rng.uniform(0.15, 0.9)
        got = distance_transform(mask)
        want = brute_force_edt(mask)
        worst = max(worst, float(np.abs(got - want).max()))
        assert worst <= 1e-9
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"criterion 1 runtime {elapsed:.1f}s exceeds 10s"


# ---------------------------------------------------------------------------
# criterion 2


def test_c02_component_counts_match_oracle():
    rng = np.random.default_rng(20260202)
    t0 = time.perf_counter()
    for _ in range(500):
        h = int(rng.integers(1, 129))
        w = int(rng.integers(1, 129))
        p_fg = rng.uniform(0.3, 0.7)
        labels = rng.choice(
            [0, 1, 2], size=(h, w), p=[1 - p_fg, p_fg / 2, p_fg / 2]
        ).astype(np.uint8)
        oracle = brute_force_count(labels, 0)
        mine = tuple(
            connected_components(class_mask(labels, c)).count for c in (1, 2)
        )
        assert mine == oracle
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"criterion 2 runtime {elapsed:.1f}s exceeds 10s"


# ---------------------------------------------------------------------------
# criteria 3 and 4 share one battery of 100 zero-overlap scenes


@dataclass
class SceneResult:
    seed: int
    density: int
    truth: tuple[int, int]
    counts: tuple[int, int]
    partition_violations: int
    marker_violations: int


def _check_scene(labels, gt) -> tuple[tuple[int, int], int, int]:
    partition_bad = 0
    marker_bad = 0
    counts = []
    for class_id in (1, 2):
        mask = class_mask(labels, class_id)
        filtered = area_filter(connected_components(mask), PARAMS.min_area)
        smoothed = gaussian_smooth(distance_transform(filtered), PARAMS.sigma)
        comp = connected_components(filtered)
        markers = detect_markers(smoothed, comp, PARAMS)
        inst = watershed_split(smoothed, filtered, markers, class_id)
        counts.append(inst.n_instances)
        # every filtered foreground pixel carries exactly one instance id
        if not ((inst.ids > 0) == filtered).all():
            partition_bad += 1
        # each instance contains exactly one marker
        ids_at_markers = inst.ids[markers.rows, markers.cols]
        instance_ids = np.unique(inst.ids[inst.ids > 0])
        if sorted(ids_at_markers.tolist()) != instance_ids.tolist():
            marker_bad += 1
    return (counts[0], counts[1]), partition_bad, marker_bad


@pytest.fixture(scope="session")
def zero_overlap_battery():
    results = []
    for seed in range(1, 101):
        density = DENSITIES[(seed - 1) % 3]
        labels, gt = generate_scene(density_spec(density, seed))
        counts, partition_bad, marker_bad = _check_scene(labels, gt)
        results.append(
            SceneResult(
                seed=seed,
                density=density,
                truth=(gt.n_healthy, gt.n_sickled),
                counts=counts,
                partition_violations=partition_bad,
                marker_violations=marker_bad,
            )
        )
    return results


def test_c03_partition_and_marker_invariants(zero_overlap_battery):
    bad = [
        r
        for r in zero_overlap_battery
        if r.partition_violations or r.marker_violations
    ]
    assert not bad, f"invariant violations in {len(bad)} scene(s): {bad[:5]}"


def test_c04_sparse_regime_exactness(zero_overlap_battery):
    wrong = [r for r in zero_overlap_battery if r.counts != r.truth]
    assert not wrong, f"inexact counts in {len(wrong)} scene(s): {wrong[:5]}"


# ---------------------------------------------------------------------------
# criterion 5


@pytest.mark.parametrize("density", DENSITIES)
@pytest.mark.parametrize("seed", (1, 2))
def test_c05_overlap_recovery(density, seed):
    pairs = round(0.2 * density / 2)  # 20% of the cells sit in overlap pairs
    labels, gt = generate_scene(density_spec(density, seed, overlap_pairs=pairs))
    inst = split_all(labels, PARAMS)
    counts = count_instances(inst)
    base = baseline_count(labels, PARAMS.min_area)
    assert abs(counts[0] - gt.n_healthy) <= 0.02 * gt.n_healthy
    assert abs(counts[1] - gt.n_sickled) <= 0.02 * gt.n_sickled
    undercount = (gt.n_healthy - base[0]) + (gt.n_sickled - base[1])
    assert undercount >= pairs


# ---------------------------------------------------------------------------
# criterion 6


@pytest.mark.parametrize(
    "spec",
    [
        SceneSpec(width=400, height=400, n_healthy=14, n_sickled=7, overlap_pairs=3, seed=1),
        SceneSpec(width=400, height=400, n_healthy=20, n_sickled=10, overlap_pairs=0, seed=2),
        density_spec(170, seed=3, overlap_pairs=17),
    ],
    ids=["small-overlaps", "small-sparse", "dense-overlaps"],
)
def test_c06_degeneracy_equivalence(spec):
    labels, _ = generate_scene(spec)
    diagonal = math.hypot(spec.height, spec.width)
    degenerate = PARAMS.replace(peak_height_fraction=1.0, min_peak_distance=diagonal)
    assert count_instances(split_all(labels, degenerate)) == baseline_count(
        labels, degenerate.min_area
    )


# ---------------------------------------------------------------------------
# criterion 7


@pytest.fixture(scope="session")
def dense_sweep_scene():
    labels, gt = generate_scene(density_spec(417, seed=7, overlap_pairs=42))
    return [labels], {0: (gt.n_healthy, gt.n_sickled)}


@pytest.fixture(scope="session")
def sweep_clock():
    clock = {"total": 0.0}
    yield clock
    assert clock["total"] < 120.0, f"criterion 7 runtime {clock['total']:.0f}s exceeds 2 min"


def _sweep_means(maps, ref, parameter, values, clock):
    t0 = time.perf_counter()
    curve = run_sweep(
        SweepSpec(parameter=parameter, values=values, fixed=PARAMS, reference=ref),
        maps,
    )
    clock["total"] += time.perf_counter() - t0
    return curve.mean_errors().mean(axis=1)  # mean over classes and frames


def test_c07a_sigma_sweep_under_segments(dense_sweep_scene, sweep_clock):
    maps, ref = dense_sweep_scene
    values = (0.5, 1.0, 2.0, 4.0, 8.0)
    means = _sweep_means(maps, ref, "sigma", values, sweep_clock)
    assert values[-1] >= 8.0
    assert means[-1] > means.min(), f"sigma errors {means}"


def test_c07b_peak_height_sweep_rises_at_one(dense_sweep_scene, sweep_clock):
    maps, ref = dense_sweep_scene
    values = (0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 0.95, 1.0)
    means = _sweep_means(maps, ref, "peak_height_fraction", values, sweep_clock)
    intermediate = means[1:5]  # H in [0.2, 0.7]
    assert intermediate.min() == means.min()
    assert means[-1] > means[-2] >= means[-3], f"H errors {means}"
    assert means[-1] > intermediate.min()


def test_c07c_min_distance_sweep_non_monotone(dense_sweep_scene, sweep_clock):
    maps, ref = dense_sweep_scene
    values = (1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 40.0)
    means = _sweep_means(maps, ref, "min_peak_distance", values, sweep_clock)
    mid = means[2:5].min()  # intermediate: 3..10 px
    assert means[0] > mid, f"min-distance errors {means}"
    assert means[-1] > mid, f"min-distance errors {means}"


# ---------------------------------------------------------------------------
# criterion 8


def test_c08_fraction_arithmetic_exhaustive():
    for a in range(101):
        for b in range(101):
            if a + b == 0:
                assert math.isnan(sickled_fraction(a, b))
                continue
            f = sickled_fraction(a, b)
            g = sickled_fraction(b, a)
            assert 0.0 <= f <= 1.0
            assert abs(f + g - 1.0) <= 1e-12
    for n in range(1, 101):
        assert sickled_fraction(n, 0) == 0.0
        assert sickled_fraction(0, n) == 1.0


# ---------------------------------------------------------------------------
# criterion 9


def test_c09_temporal_series_fidelity():
    total = 170
    n_frames = 24
    target = 0.91
    raw = [1.0 / (1.0 + math.exp(-0.5 * (t - n_frames / 2))) for t in range(n_frames)]
    schedule = [target * r / raw[-1] for r in raw]
    spec = density_spec(total, seed=9)
    frames = scene_sequence(spec, n_frames, schedule)

    pred_fracs = []
    true_fracs = []
    for labels, gt in frames:
        counts = count_instances(split_all(labels, PARAMS))
        pred_fracs.append(sickled_fraction(*counts))
        true_fracs.append(gt.fraction)

    assert abs(pred_fracs[-1] - target) <= 1.0 / total  # one-cell quantization
    mae = float(np.mean(np.abs(np.array(pred_fracs) - np.array(true_fracs))))
    assert mae <= 0.02


# ---------------------------------------------------------------------------
# criterion 10


def test_c10_worker_count_determinism(tmp_path):
    label_dir = tmp_path / "maps"
    label_dir.mkdir()
    spec = SceneSpec(width=500, height=500, n_healthy=20, n_sickled=10, overlap_pairs=3, seed=19)
    frames = scene_sequence(spec, 6, [0.0, 0.1, 0.3, 0.5, 0.7, 0.9])
    for i, (labels, _) in enumerate(frames):
        write_label_map(labels, label_dir / frame_name(i))

    digests = []
    for workers in (1, 4, 8):
        out = tmp_path / f"w{workers}"
        assert cli.main(["count", str(label_dir), "--workers", str(workers), "--out", str(out)]) == 0
        h = hashlib.sha256()
        h.update((out / "counts.csv").read_bytes())
        for p in sorted(out.glob("overlay_*.png")):
            h.update(p.read_bytes())
        digests.append(h.hexdigest())
    assert digests[0] == digests[1] == digests[2]


# ---------------------------------------------------------------------------
# criterion 11


def test_c11_io_contracts(tmp_path):
    # label-map PNG round trip is bit exact
    rng = np.random.default_rng(23)
    labels = rng.integers(0, 3, (333, 217)).astype(np.uint8)
    p = tmp_path / "m.png"
    write_label_map(labels, p)
    assert (read_label_map(p, 2) == labels).all()

    # counts CSV header is exactly the contract
    label_dir = tmp_path / "maps"
    label_dir.mkdir()
    scene, _ = generate_scene(SceneSpec(width=300, height=300, n_healthy=5, n_sickled=2, seed=2))
    write_label_map(scene, label_dir / frame_name(0))
    out = tmp_path / "res"
    assert cli.main(["count", str(label_dir), "--out", str(out)]) == 0
    header = (out / "counts.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "frame,time_s,n_healthy,n_sickled,sickled_fraction"

    # sampling flags produce the exact index sets
    raw = tmp_path / "raw"
    raw.mkdir()
    for i in range(8):
        write_label_map(np.zeros((16, 16), np.uint8), raw / f"src_{i}.png")
    out_n = tmp_path / "every_n"
    assert cli.main(["extract", str(raw), "--every-n-frames", "2", "--out", str(out_n)]) == 0
    assert sorted(int(p.stem.split("_")[1]) for p in out_n.glob("frame_*.png")) == [0, 2, 4, 6]
    out_s = tmp_path / "every_sec"
    assert cli.main(["extract", str(raw), "--every-sec", "1", "--fps", "4", "--out", str(out_s)]) == 0
    assert sorted(int(p.stem.split("_")[1]) for p in out_s.glob("frame_*.png")) == [0, 4]


# ---------------------------------------------------------------------------
# criterion 12


def test_c12a_single_frame_under_one_second():
    labels, _ = generate_scene(density_spec(417, seed=12, overlap_pairs=42))
    frame = np.zeros(labels.shape, np.uint8)
    t0 = time.perf_counter()
    inst = split_all(labels, PARAMS)
    counts = count_instances(inst)
    render_overlay(frame, inst, split_boundaries(inst))
    elapsed = time.perf_counter() - t0
    assert counts[0] + counts[1] > 0
    assert elapsed < 1.0, f"single dense frame took {elapsed:.2f}s"


@pytest.mark.skipif(
    (os.cpu_count() or 1) < 4,
    reason=f"parallel-speedup criterion needs >= 4 CPU cores, host has {os.cpu_count()}",
)
def test_c12b_near_linear_scaling(tmp_path):
    label_dir = tmp_path / "maps"
    label_dir.mkdir()
    spec = density_spec(170, seed=14)
    frames = scene_sequence(spec, 100, [min(1.0, t / 99) for t in range(100)])
    for i, (labels, _) in enumerate(frames):
        write_label_map(labels, label_dir / frame_name(i))

    def timed(workers):
        out = tmp_path / f"run{workers}"
        t0 = time.perf_counter()
        assert cli.main(["count", str(label_dir), "--workers", str(workers), "--out", str(out)]) == 0
        return time.perf_counter() - t0

    serial = timed(1)
    parallel = timed(4)
    assert serial / parallel >= 3.0, f"speedup {serial / parallel:.2f}x at 4 workers"
