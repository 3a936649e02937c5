"""Run configuration: one key-value file, CLI-flag overrides, run manifests.

The config format is plain ``key = value`` lines with ``#`` comments and
dotted key namespaces. A run manifest is written in the same format plus
``run.*`` / ``input.*`` records, so a manifest can be passed back to
``--config`` to reproduce a run byte-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .preprocess import ClaheParams, ResizeSpec
from .watershed import WatershedParams

# namespaces carried in manifests / scene / sweep specs that the run-config
# loader silently skips
_FOREIGN_NAMESPACES = ("run", "input", "scene", "sweep", "crescent")


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("true", "1", "yes", "on"):
        return True
    if v in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def parse_keyvalues(path) -> dict[str, str]:
    """Parse a ``key = value`` file into an ordered dict of strings."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def write_keyvalues(items: dict[str, str], path) -> None:
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        for key, value in items.items():
            fh.write(f"{key} = {value}\n")


@dataclass(frozen=True)
class RunConfig:
    watershed: WatershedParams = WatershedParams()
    clahe: ClaheParams = ClaheParams()
    resize: ResizeSpec = ResizeSpec()
    fps: float = 4.0
    workers: int = 1
    class_count: int = 2
    frame_prefix: str = "frame"
    frame_pad: int = 4
    blend_alpha: float = 0.5

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError("fps must be > 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.class_count < 1:
            raise ValueError("class_count must be >= 1")

    def items(self) -> dict[str, str]:
        """Flatten to the key-value representation (manifest/config keys)."""
        w, ch, rs = self.watershed, self.clahe, self.resize
        return {
            "fps": repr(self.fps),
            "workers": str(self.workers),
            "class_count": str(self.class_count),
            "frames.prefix": self.frame_prefix,
            "frames.pad": str(self.frame_pad),
            "overlay.blend_alpha": repr(self.blend_alpha),
            "clahe.clip_limit": repr(ch.clip_limit),
            "clahe.tile_rows": str(ch.tile_rows),
            "clahe.tile_cols": str(ch.tile_cols),
            "resize.width": str(rs.width),
            "resize.height": str(rs.height),
            "resize.letterbox": str(rs.letterbox).lower(),
            "watershed.sigma": repr(w.sigma),
            "watershed.peak_height_fraction": repr(w.peak_height_fraction),
            "watershed.min_peak_distance": repr(w.min_peak_distance),
            "watershed.min_area": str(w.min_area),
        }


_SETTERS = {
    "fps": lambda c, v: replace(c, fps=float(v)),
    "workers": lambda c, v: replace(c, workers=int(v)),
    "class_count": lambda c, v: replace(c, class_count=int(v)),
    "frames.prefix": lambda c, v: replace(c, frame_prefix=v),
    "frames.pad": lambda c, v: replace(c, frame_pad=int(v)),
    "overlay.blend_alpha": lambda c, v: replace(c, blend_alpha=float(v)),
    "clahe.clip_limit": lambda c, v: replace(c, clahe=replace(c.clahe, clip_limit=float(v))),
    "clahe.tile_rows": lambda c, v: replace(c, clahe=replace(c.clahe, tile_rows=int(v))),
    "clahe.tile_cols": lambda c, v: replace(c, clahe=replace(c.clahe, tile_cols=int(v))),
    "resize.width": lambda c, v: replace(c, resize=replace(c.resize, width=int(v))),
    "resize.height": lambda c, v: replace(c, resize=replace(c.resize, height=int(v))),
    "resize.letterbox": lambda c, v: replace(
        c, resize=replace(c.resize, letterbox=_parse_bool(v))
    ),
    "watershed.sigma": lambda c, v: replace(c, watershed=c.watershed.replace(sigma=float(v))),
    "watershed.peak_height_fraction": lambda c, v: replace(
        c, watershed=c.watershed.replace(peak_height_fraction=float(v))
    ),
    "watershed.min_peak_distance": lambda c, v: replace(
        c, watershed=c.watershed.replace(min_peak_distance=float(v))
    ),
    "watershed.min_area": lambda c, v: replace(
        c, watershed=c.watershed.replace(min_area=int(v))
    ),
}


def config_from_items(items: dict[str, str], base: RunConfig | None = None) -> RunConfig:
    """Apply key-value items on top of a base config.

    Keys in foreign namespaces (manifest records, scene/sweep specs) are
    skipped; any other unknown key is an error so typos never pass silently.
    """
    cfg = base if base is not None else RunConfig()
    for key, value in items.items():
        setter = _SETTERS.get(key)
        if setter is None:
            namespace = key.split(".", 1)[0]
            if namespace in _FOREIGN_NAMESPACES:
                continue
            raise ValueError(f"unknown config key {key!r}")
        cfg = setter(cfg, value)
    return cfg


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    return config_from_items(parse_keyvalues(path), base)
