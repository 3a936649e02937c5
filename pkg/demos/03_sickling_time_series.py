"""
Tracking a sickling fraction through time
=========================================

Builds a synthetic time-lapse in which a static population of cells
progressively sickles along a logistic schedule, runs per-frame instance
counting, and compares the recovered fraction curve against the exact
ground truth, frame by frame.
"""

import math
from pathlib import Path

import sicklesplit as ss
from sicklesplit.quantify import frame_stats, series_mae, write_counts_csv

out_dir = Path(__file__).parent / "output" / "03_series"
out_dir.mkdir(parents=True, exist_ok=True)

FPS = 4.0
N_FRAMES = 20
TOTAL = 120
TARGET = 0.85  # plateau of the sickled fraction

raw = [1 / (1 + math.exp(-0.6 * (t - N_FRAMES / 2))) for t in range(N_FRAMES)]
schedule = [TARGET * r / raw[-1] for r in raw]

spec = ss.SceneSpec(n_healthy=TOTAL, n_sickled=0, seed=404)
frames = ss.scene_sequence(spec, N_FRAMES, schedule)

params = ss.WatershedParams()
predicted = []
reference = []
print(f"{'frame':>5} {'t (s)':>6} {'pred':>6} {'truth':>6}")
for i, (labels, truth) in enumerate(frames):
    counts = ss.count_instances(ss.split_all(labels, params))
    stats = frame_stats(i, i / FPS, *counts)
    predicted.append(stats)
    reference.append(frame_stats(i, i / FPS, truth.n_healthy, truth.n_sickled))
    print(f"{i:5d} {stats.time_s:6.2f} {stats.sickled_fraction:6.3f} {truth.fraction:6.3f}")

write_counts_csv(predicted, out_dir / "predicted.csv")
write_counts_csv(reference, out_dir / "ground_truth_counts.csv")

mae = series_mae(predicted, reference)
print(f"\nseries MAE vs ground truth: {mae:.6f}")
print(f"final fraction: predicted {predicted[-1].sickled_fraction:.3f}, "
      f"truth {reference[-1].sickled_fraction:.3f}")
print(f"CSVs written to {out_dir}")
