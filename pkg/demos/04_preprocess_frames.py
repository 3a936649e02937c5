"""
Frame standardization: grayscale, CLAHE, resize
===============================================

Simulates a raw color micrograph with uneven illumination, then applies
the same standardization used before segmentation: BT.601 grayscale
conversion, contrast-limited adaptive histogram equalization, and a
resize to the working resolution.
"""

from pathlib import Path

import numpy as np

import sicklesplit as ss
from sicklesplit.io import write_image

out_dir = Path(__file__).parent / "output" / "04_preprocess"
out_dir.mkdir(parents=True, exist_ok=True)

# Fake micrograph: dim cells on a vignetted, low-contrast background.
rng = np.random.default_rng(11)
h, w = 720, 960
yy, xx = np.mgrid[0:h, 0:w]
vignette = 1.0 - 0.5 * (((yy - h / 2) / h) ** 2 + ((xx - w / 2) / w) ** 2)
frame = 90.0 * vignette + rng.normal(0, 4, (h, w))
for _ in range(60):
    cy, cx, r = rng.uniform(20, h - 20), rng.uniform(20, w - 20), rng.uniform(8, 16)
    disc = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
    frame[disc] -= 25
gray_narrow = np.clip(frame, 0, 255).astype(np.uint8)
color = np.stack([gray_narrow] * 3, axis=2)
color[..., 2] = np.clip(color[..., 2] * 1.1, 0, 255).astype(np.uint8)  # blue cast
write_image(color, out_dir / "raw_color.png")

gray = ss.to_grayscale(color)
write_image(gray, out_dir / "step1_gray.png")
print(f"grayscale: range {gray.min()}..{gray.max()}")

equalized = ss.clahe(gray, ss.ClaheParams(clip_limit=2.0, tile_rows=8, tile_cols=8))
write_image(equalized, out_dir / "step2_clahe.png")
print(f"CLAHE:     range {equalized.min()}..{equalized.max()}")

standard = ss.resize(equalized, ss.ResizeSpec(width=1000, height=1000))
write_image(standard, out_dir / "step3_resized.png")
print(f"resize:    {gray.shape} -> {standard.shape} (aspect distortion accepted)")

boxed = ss.resize(equalized, ss.ResizeSpec(width=1000, height=1000, letterbox=True))
write_image(boxed, out_dir / "step3_letterboxed.png")
print("letterbox: aspect preserved, black padding")
print(f"images written to {out_dir}")
