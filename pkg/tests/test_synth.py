import math

import numpy as np
import pytest

from sicklesplit.errors import PlacementFailureError
from sicklesplit.morphology import class_mask, connected_components
from sicklesplit.synth import (
    SceneSpec,
    SplitMix64,
    brute_force_count,
    generate_scene,
    scene_sequence,
)


class TestSplitMix64:
    def test_canonical_reference_stream(self):
        # first outputs of the standard splitmix64 for seed 0
        rng = SplitMix64(0)
        assert rng.next_u64() == 0xE220A8397B1DCDAF
        assert rng.next_u64() == 0x6E789E6AA1B965F4

    def test_known_stream_stable(self):
        # frozen from the documented algorithm; guards against drift
        rng = SplitMix64(1234567)
        stream = [rng.next_u64() for _ in range(3)]
        assert stream == [
            6457827717110365317,
            3203168211198807973,
            9817491932198370423,
        ]

    def test_uniform_range(self):
        rng = SplitMix64(9)
        xs = [rng.uniform(2.0, 3.0) for _ in range(1000)]
        assert all(2.0 <= x < 3.0 for x in xs)
        assert 2.4 < sum(xs) / len(xs) < 2.6

    def test_shuffle_deterministic(self):
        a = list(range(20))
        b = list(range(20))
        SplitMix64(5).shuffle(a)
        SplitMix64(5).shuffle(b)
        assert a == b and a != list(range(20))


class TestGenerateScene:
    def test_zero_cells(self):
        labels, gt = generate_scene(SceneSpec(width=100, height=100))
        assert (labels == 0).all()
        assert math.isnan(gt.fraction)

    def test_determinism_byte_identical(self):
        spec = SceneSpec(width=400, height=400, n_healthy=12, n_sickled=8, overlap_pairs=2, seed=77)
        a_labels, a_gt = generate_scene(spec)
        b_labels, b_gt = generate_scene(spec)
        assert (a_labels == b_labels).all()
        assert a_gt == b_gt

    def test_62_cells_zero_overlap_components(self):
        spec = SceneSpec(n_healthy=62, n_sickled=0, overlap_pairs=0, seed=1)
        labels, gt = generate_scene(spec)
        assert gt.n_healthy == 62
        assert brute_force_count(labels, 50) == (62, 0)
        assert connected_components(class_mask(labels, 1)).count == 62

    def test_overlap_pair_merges_but_truth_keeps_count(self):
        spec = SceneSpec(width=300, height=300, n_healthy=5, n_sickled=0, overlap_pairs=1, seed=2)
        labels, gt = generate_scene(spec)
        assert gt.n_healthy == 5
        assert brute_force_count(labels, 50) == (4, 0)

    def test_ground_truth_counts_match_spec(self):
        spec = SceneSpec(n_healthy=30, n_sickled=15, overlap_pairs=4, seed=3)
        _, gt = generate_scene(spec)
        assert (gt.n_healthy, gt.n_sickled) == (30, 15)

    def test_placement_failure_when_too_crowded(self):
        with pytest.raises(PlacementFailureError):
            generate_scene(SceneSpec(width=120, height=120, n_healthy=60, n_sickled=0, seed=1))

    def test_unsatisfiable_pairs_rejected(self):
        with pytest.raises(ValueError):
            SceneSpec(n_healthy=2, n_sickled=2, overlap_pairs=3)


class TestSceneSequence:
    def test_all_zero_schedule(self):
        spec = SceneSpec(width=300, height=300, n_healthy=6, n_sickled=4, seed=4)
        frames = scene_sequence(spec, 3, [0.0, 0.0, 0.0])
        for _, gt in frames:
            assert gt.n_sickled == 0 and gt.fraction == 0.0

    def test_schedule_arithmetic(self):
        spec = SceneSpec(width=400, height=400, n_healthy=6, n_sickled=4, seed=5)
        frames = scene_sequence(spec, 3, [0.0, 0.5, 1.0])
        assert [gt.n_sickled for _, gt in frames] == [0, 5, 10]
        assert [gt.n_healthy for _, gt in frames] == [10, 5, 0]

    def test_positions_static_and_monotone_relabeling(self):
        spec = SceneSpec(width=400, height=400, n_healthy=8, n_sickled=2, seed=6)
        frames = scene_sequence(spec, 4, [0.0, 0.3, 0.6, 1.0])
        first = frames[0][1].cells
        prev_sickled: set[int] = set()
        for _, gt in frames:
            assert [(c.row, c.col, c.radius) for c in gt.cells] == [
                (c.row, c.col, c.radius) for c in first
            ]
            sickled = {i for i, c in enumerate(gt.cells) if c.class_id == 2}
            assert prev_sickled <= sickled  # cells never unsickle
            prev_sickled = sickled

    def test_monotonicity_validated(self):
        spec = SceneSpec(width=300, height=300, n_healthy=4, n_sickled=0, seed=7)
        with pytest.raises(ValueError):
            scene_sequence(spec, 2, [0.5, 0.25])
        with pytest.raises(ValueError):
            scene_sequence(spec, 2, [0.0, 1.5])
        with pytest.raises(ValueError):
            scene_sequence(spec, 3, [0.0, 1.0])

    def test_deterministic(self):
        spec = SceneSpec(width=300, height=300, n_healthy=6, n_sickled=2, seed=8)
        a = scene_sequence(spec, 2, [0.0, 0.5])
        b = scene_sequence(spec, 2, [0.0, 0.5])
        for (la, _), (lb, _) in zip(a, b):
            assert (la == lb).all()


class TestBruteForceCount:
    def test_empty_map(self):
        assert brute_force_count(np.zeros((5, 5), np.uint8)) == (0, 0)

    def test_single_sickled_pixel(self):
        labels = np.zeros((3, 3), np.uint8)
        labels[1, 1] = 2
        assert brute_force_count(labels, 1) == (0, 1)

    def test_min_area(self):
        labels = np.zeros((6, 6), np.uint8)
        labels[0, 0] = 1
        labels[3:5, 3:5] = 1
        assert brute_force_count(labels, 2) == (1, 0)
        assert brute_force_count(labels, 0) == (2, 0)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_connected_components(self, seed):
        rng = np.random.default_rng(seed)
        labels = rng.choice([0, 1, 2], size=(48, 48), p=[0.5, 0.25, 0.25]).astype(np.uint8)
        expected = tuple(
            connected_components(class_mask(labels, c)).count for c in (1, 2)
        )
        assert brute_force_count(labels, 0) == expected
