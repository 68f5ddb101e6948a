"""Pipeline configuration: a flat key/value text file with strict parsing.

Every tunable constant of the pipeline lives here under a documented key
with its default; unknown keys and out-of-range values are rejected so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

VARIANTS = ("objectness", "non-objectness", "gbp")
# short aliases used on the command line
VARIANT_ALIASES = {"do": "objectness", "sno": "non-objectness", "gbp": "gbp"}


@dataclass
class PipelineConfig:
    variant: str = "gbp"
    alpha: float = 0.7
    eta: float = 0.25
    c_h: float = 0.5
    c_v: float = 0.5
    wavelet_levels: int = 4
    patch_size: int = 8
    patch_coeffs: int = 9
    patch_sigma_w: float = 0.0          # 0 -> quarter of the image diagonal
    normal_radius: float = 0.05
    normal_peak_threshold: float = 0.8
    normal_peak_radius: int = 9
    eps_exp: float = 0.05
    centerbias_literal: bool = False
    gbp_scale: float = 3.0
    gbp_topk: int = 3
    camera_fx: float = 525.0
    camera_fy: float = 525.0
    camera_cx: float = 319.5
    camera_cy: float = 239.5
    depth_scale: float = 0.001
    space_height_ceiling: float = 2.0
    space_occupied_min_points: int = 5
    space_smoothing_sigma: float = 3.0
    eval_thresholds: int = 256
    dataset_root: str = ""
    out_dir: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        checks = [
            (0.0 <= self.alpha <= 1.0, "alpha in [0, 1]"),
            (self.eta > 0, "eta > 0"),
            (self.c_h >= 0, "c_h >= 0"),
            (self.c_v >= 0, "c_v >= 0"),
            (self.wavelet_levels >= 1, "wavelet.levels >= 1"),
            (self.patch_size >= 2, "patch.size >= 2"),
            (1 <= self.patch_coeffs <= self.patch_size**2 - 1, "patch.coeffs in 1..p^2-1"),
            (self.patch_sigma_w >= 0, "patch.sigma_w >= 0"),
            (self.normal_radius > 0, "normal.radius > 0"),
            (0 < self.normal_peak_threshold <= 1, "normal.peak_threshold in (0, 1]"),
            (self.normal_peak_radius >= 0, "normal.peak_radius >= 0"),
            (0 <= self.eps_exp <= 1, "eps_exp in [0, 1]"),
            (self.gbp_scale > 0, "gbp.scale > 0"),
            (self.gbp_topk >= 1, "gbp.topk >= 1"),
            (self.camera_fx > 0 and self.camera_fy > 0, "camera focal lengths > 0"),
            (self.depth_scale > 0, "depth.scale > 0"),
            (self.space_occupied_min_points >= 1, "space.occupied_min_points >= 1"),
            (self.space_smoothing_sigma >= 0, "space.smoothing_sigma >= 0"),
            (self.eval_thresholds >= 2, "eval.thresholds >= 2"),
        ]
        for ok, rule in checks:
            if not ok:
                raise ValueError(f"config: {rule} violated")


# config file key -> dataclass field
_KEY_TO_FIELD = {
    "variant": "variant",
    "alpha": "alpha",
    "eta": "eta",
    "c_h": "c_h",
    "c_v": "c_v",
    "wavelet.levels": "wavelet_levels",
    "patch.size": "patch_size",
    "patch.coeffs": "patch_coeffs",
    "patch.sigma_w": "patch_sigma_w",
    "normal.radius": "normal_radius",
    "normal.peak_threshold": "normal_peak_threshold",
    "normal.peak_radius": "normal_peak_radius",
    "eps_exp": "eps_exp",
    "centerbias.literal": "centerbias_literal",
    "gbp.scale": "gbp_scale",
    "gbp.topk": "gbp_topk",
    "camera.fx": "camera_fx",
    "camera.fy": "camera_fy",
    "camera.cx": "camera_cx",
    "camera.cy": "camera_cy",
    "depth.scale": "depth_scale",
    "space.height_ceiling": "space_height_ceiling",
    "space.occupied_min_points": "space_occupied_min_points",
    "space.smoothing_sigma": "space_smoothing_sigma",
    "eval.thresholds": "eval_thresholds",
    "dataset.root": "dataset_root",
    "out.dir": "out_dir",
}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}


def _parse_value(field_type: type, raw: str, key: str):
    if field_type is bool:
        lowered = raw.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ValueError(f"config: key {key!r} expects a boolean, got {raw!r}")
    return field_type(raw)


def parse_config(text: str) -> PipelineConfig:
    """Parse ``key = value`` lines; '#' starts a comment; unknown keys are errors."""
    field_types = {f.name: f.type for f in fields(PipelineConfig)}
    resolved = {"str": str, "float": float, "int": int, "bool": bool}
    kwargs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _KEY_TO_FIELD:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        fname = _KEY_TO_FIELD[key]
        ftype = resolved[field_types[fname]] if isinstance(field_types[fname], str) else field_types[fname]
        kwargs[fname] = _parse_value(ftype, raw, key)
    return PipelineConfig(**kwargs)


def load_config(path: str | Path) -> PipelineConfig:
    return parse_config(Path(path).read_text())


def dump_config(config: PipelineConfig) -> str:
    """Render a config back to its file form (all keys, current values)."""
    lines = []
    for f in fields(PipelineConfig):
        value = getattr(config, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{_FIELD_TO_KEY[f.name]} = {value}")
    return "\n".join(lines) + "\n"
