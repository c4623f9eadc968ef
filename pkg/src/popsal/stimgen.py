"""Procedural generation of singleton visual-search arrays.

Each stimulus is a regular grid of elements on a gray background with exactly
one target that differs from the distractors along a single feature axis
(hue, bar orientation, or disk size). Per-element jitter breaks perceptual
grouping. Ground-truth masks are rasterized from the exact element footprints,
so the image and the masks agree pixel for pixel.

Default geometry: 1024x1024 image, 7x7 grid, 75 px distractors (~2 deg at
35 px/deg), 15 px jitter, mid-gray background.
"""
from __future__ import annotations

import colorsys
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DegenerateStimulusError, IntegrityError, ValidationError

FEATURES = ("color", "orientation", "size")

# Target diameters for size singletons, px (0.5 deg .. 4 deg at 35 px/deg).
TARGET_SIZE_MIN = 18.0
TARGET_SIZE_MAX = 140.0

# Bar width as a fraction of bar length (75 px bars are 75x15).
BAR_ASPECT = 0.2


@dataclass(frozen=True)
class ArraySpec:
    """Geometry of a search array."""

    image_width: int = 1024
    image_height: int = 1024
    grid_rows: int = 7
    grid_cols: int = 7
    distractor_size: float = 75.0
    jitter: float = 15.0
    px_per_degree: float = 35.0
    background_gray: int = 128

    @property
    def n_cells(self) -> int:
        return self.grid_rows * self.grid_cols

    @property
    def pitch_x(self) -> float:
        return self.image_width / self.grid_cols

    @property
    def pitch_y(self) -> float:
        return self.image_height / self.grid_rows

    def cell_center(self, cell: int) -> tuple[float, float]:
        row, col = divmod(cell, self.grid_cols)
        return ((col + 0.5) * self.pitch_x, (row + 0.5) * self.pitch_y)

    def validate(self, max_target_size: float | None = None) -> None:
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise ConfigurationError("grid must have at least one row and one column")
        if self.distractor_size <= 0:
            raise ConfigurationError("distractor_size must be positive")
        if self.jitter < 0:
            raise ConfigurationError("jitter must be non-negative")
        if not 0 <= self.background_gray <= 255:
            raise ConfigurationError("background_gray must be in 0..255")
        pitch = min(self.pitch_x, self.pitch_y)
        # Adjacent elements at maximal opposing jitter must keep disjoint
        # bounding boxes. Bar footprints can exceed the nominal size by the
        # diagonal factor, so use the worst-case element extent.
        extent = self.distractor_size * math.hypot(1.0, BAR_ASPECT)
        if extent + 2 * self.jitter >= pitch:
            raise ConfigurationError(
                f"element extent + 2*jitter must stay below the grid pitch: "
                f"{extent:.2f} + {2 * self.jitter:.2f} >= {pitch:.2f}"
            )
        if max_target_size is not None:
            need = (max_target_size + self.distractor_size) / 2 + 2 * self.jitter
            if need >= pitch:
                raise ConfigurationError(
                    f"(max target + distractor)/2 + 2*jitter must stay below the "
                    f"grid pitch: {need:.2f} >= {pitch:.2f}"
                )
            # The clamped target center must still fit its cell.
            margin = pitch / 2 + self.jitter
            if max_target_size / 2 >= margin:
                raise ConfigurationError(
                    f"max target radius {max_target_size / 2:.2f} cannot fit a border "
                    f"cell (pitch/2 + jitter = {margin:.2f})"
                )


@dataclass(frozen=True)
class ElementLayout:
    """Jittered element centers (row-major cell order) plus the target cell."""

    centers: tuple[tuple[float, float], ...]
    target_index: int
    rng_seed: int


@dataclass(frozen=True)
class StimulusParams:
    """Feature values for one stimulus.

    ``td_value`` is the target-distractor difference: hue degrees for color,
    degrees for orientation, diameter ratio for size. ``distractor_value`` is
    the base value (distractor hue / orientation degrees, or distractor
    diameter in px for size arrays). ``element_hue_deg`` colors the uniform
    elements of orientation and size arrays.
    """

    feature: str
    td_value: float
    distractor_value: float
    target_size_px: float | None = None
    element_hue_deg: float = 120.0

    def validate(self, spec: ArraySpec) -> None:
        if self.feature not in FEATURES:
            raise ValidationError(f"unknown feature {self.feature!r}, expected one of {FEATURES}")
        if self.feature == "color":
            if not 0.0 < self.td_value <= 180.0:
                if self.td_value == 0:
                    raise DegenerateStimulusError("color difference of 0 deg: target indistinguishable")
                raise ValidationError(f"color td_value must be in (0, 180], got {self.td_value}")
        elif self.feature == "orientation":
            if not 0.0 < self.td_value <= 90.0:
                if self.td_value == 0:
                    raise DegenerateStimulusError("orientation difference of 0 deg: target indistinguishable")
                raise ValidationError(f"orientation td_value must be in (0, 90], got {self.td_value}")
        else:  # size
            if self.target_size_px is None:
                raise ValidationError("size arrays require target_size_px")
            if self.target_size_px == spec.distractor_size:
                raise DegenerateStimulusError(
                    f"target size equals distractor size ({spec.distractor_size} px): "
                    "target indistinguishable"
                )
            if not TARGET_SIZE_MIN <= self.target_size_px <= TARGET_SIZE_MAX:
                raise ValidationError(
                    f"target_size_px must be in [{TARGET_SIZE_MIN:g}, {TARGET_SIZE_MAX:g}], "
                    f"got {self.target_size_px}"
                )
            expected = self.target_size_px / spec.distractor_size
            if abs(self.td_value - expected) > 1e-9:
                raise ValidationError(
                    f"size td_value {self.td_value} does not equal the diameter ratio "
                    f"{expected} (target {self.target_size_px} / distractor {spec.distractor_size})"
                )

    @staticmethod
    def for_size(target_size_px: float, spec: ArraySpec, element_hue_deg: float = 120.0) -> "StimulusParams":
        return StimulusParams(
            feature="size",
            td_value=target_size_px / spec.distractor_size,
            distractor_value=spec.distractor_size,
            target_size_px=target_size_px,
            element_hue_deg=element_hue_deg,
        )


@dataclass
class RenderedSample:
    image: np.ndarray  # uint8 (H, W, 3)
    target_mask: np.ndarray  # bool (H, W)
    distractor_mask: np.ndarray  # bool (H, W)
    params: StimulusParams
    layout: ElementLayout
    id: str


def plan_layout(spec: ArraySpec, target_cell: int | None = None, seed: int = 0) -> ElementLayout:
    """Place one element per grid cell with uniform per-axis jitter.

    Deterministic for a fixed (spec, target_cell, seed). When ``target_cell``
    is None it is drawn uniformly from all cells before the jitter draws.
    """
    spec.validate()
    rng = np.random.default_rng(seed)
    if target_cell is None:
        target_cell = int(rng.integers(spec.n_cells))
    elif not 0 <= target_cell < spec.n_cells:
        raise ValidationError(f"target_cell must be in 0..{spec.n_cells - 1}, got {target_cell}")
    offsets = rng.uniform(-spec.jitter, spec.jitter, size=(spec.n_cells, 2))
    centers = []
    for cell in range(spec.n_cells):
        cx, cy = spec.cell_center(cell)
        centers.append((cx + offsets[cell, 0], cy + offsets[cell, 1]))
    return ElementLayout(centers=tuple(centers), target_index=target_cell, rng_seed=seed)


def _hue_to_rgb(hue_deg: float) -> tuple[int, int, int]:
    r, g, b = colorsys.hsv_to_rgb((hue_deg % 360.0) / 360.0, 1.0, 1.0)
    return (int(round(r * 255)), int(round(g * 255)), int(round(b * 255)))


def _disk_footprint(cx: float, cy: float, diameter: float, width: int, height: int, ss: int = 1):
    """Boolean footprint of a disk over its clipped bounding window.

    Pixels are sampled at their centers; the boundary is exclusive so a disk
    of integer diameter spans exactly that many pixels when axis-aligned.
    With ``ss`` > 1 the window is sampled on an ss x ss subgrid per pixel.
    """
    r = diameter / 2.0
    x0 = max(int(math.floor(cx - r)), 0)
    x1 = min(int(math.ceil(cx + r)) + 1, width)
    y0 = max(int(math.floor(cy - r)), 0)
    y1 = min(int(math.ceil(cy + r)) + 1, height)
    xs = (np.arange(x0 * ss, x1 * ss) + 0.5) / ss - cx
    ys = (np.arange(y0 * ss, y1 * ss) + 0.5) / ss - cy
    fp = (xs[None, :] ** 2 + ys[:, None] ** 2) < r * r
    return x0, y0, fp


def _bar_footprint(
    cx: float, cy: float, length: float, bar_width: float, angle_deg: float, width: int, height: int, ss: int = 1
):
    """Boolean footprint of a rotated bar. Angle 0 puts the long axis vertical."""
    rad = math.radians(angle_deg)
    s, c = math.sin(rad), math.cos(rad)
    # snap near-zero trig so axis-aligned bars rasterize exactly axis-aligned
    if abs(s) < 1e-12:
        s = 0.0
    if abs(c) < 1e-12:
        c = 0.0
    reach = math.hypot(length, bar_width) / 2.0
    x0 = max(int(math.floor(cx - reach)), 0)
    x1 = min(int(math.ceil(cx + reach)) + 1, width)
    y0 = max(int(math.floor(cy - reach)), 0)
    y1 = min(int(math.ceil(cy + reach)) + 1, height)
    xs = (np.arange(x0 * ss, x1 * ss) + 0.5) / ss - cx
    ys = (np.arange(y0 * ss, y1 * ss) + 0.5) / ss - cy
    dx = xs[None, :]
    dy = ys[:, None]
    u = dx * s + dy * c  # along the long axis
    v = dx * c - dy * s
    fp = (np.abs(u) < length / 2.0) & (np.abs(v) < bar_width / 2.0)
    return x0, y0, fp


def _element_geometry(spec: ArraySpec, params: StimulusParams, is_target: bool):
    """Return (kind, size_or_angle, rgb) for one element."""
    if params.feature == "color":
        hue = params.distractor_value + (params.td_value if is_target else 0.0)
        return ("disk", spec.distractor_size, _hue_to_rgb(hue))
    rgb = _hue_to_rgb(params.element_hue_deg)
    if params.feature == "orientation":
        angle = params.distractor_value + (params.td_value if is_target else 0.0)
        return ("bar", angle, rgb)
    diameter = params.target_size_px if is_target else spec.distractor_size
    return ("disk", diameter, rgb)


def _clamp_center(center, radius, spec):
    """Keep a footprint of the given radius fully inside the image."""
    x = min(max(center[0], radius), spec.image_width - radius)
    y = min(max(center[1], radius), spec.image_height - radius)
    return (x, y)


def render_array(
    spec: ArraySpec,
    params: StimulusParams,
    layout: ElementLayout,
    sample_id: str | None = None,
    supersample: int = 1,
) -> RenderedSample:
    """Rasterize one search array plus its exact target/distractor masks.

    Masks always come from hard-edged footprints. ``supersample`` > 1 renders
    the image (only) on a finer grid and box-averages it down, for smoother
    element edges.
    """
    params.validate(spec)
    spec.validate(max_target_size=params.target_size_px)
    if len(layout.centers) != spec.n_cells:
        raise ValidationError(
            f"layout has {len(layout.centers)} centers for a {spec.grid_rows}x{spec.grid_cols} grid"
        )

    w, h = spec.image_width, spec.image_height
    image = np.full((h, w, 3), spec.background_gray, dtype=np.uint8)
    fine = None
    if supersample > 1:
        fine = np.full((h * supersample, w * supersample, 3), float(spec.background_gray))
    target_mask = np.zeros((h, w), dtype=bool)
    distractor_mask = np.zeros((h, w), dtype=bool)
    occupied = np.zeros((h, w), dtype=bool)
    effective_centers = []

    for idx, center in enumerate(layout.centers):
        is_target = idx == layout.target_index
        kind, value, rgb = _element_geometry(spec, params, is_target)
        if kind == "disk":
            # Oversized targets in border cells are nudged inward; the shift
            # never exceeds the jitter budget (enforced by spec.validate).
            center = _clamp_center(center, value / 2.0, spec)
            reach = value / 2.0
        else:
            reach = math.hypot(spec.distractor_size, spec.distractor_size * BAR_ASPECT) / 2.0
        if center[0] - reach < 0 or center[0] + reach > w or center[1] - reach < 0 or center[1] + reach > h:
            raise IntegrityError(f"element {idx} footprint exceeds the image bounds")
        effective_centers.append(center)

        if kind == "disk":
            x0, y0, fp = _disk_footprint(center[0], center[1], value, w, h)
        else:
            x0, y0, fp = _bar_footprint(
                center[0], center[1], spec.distractor_size, spec.distractor_size * BAR_ASPECT, value, w, h
            )
        window = occupied[y0 : y0 + fp.shape[0], x0 : x0 + fp.shape[1]]
        if np.any(window & fp):
            raise IntegrityError(f"element {idx} footprint overlaps a previously placed element")
        window |= fp
        if is_target:
            target_mask[y0 : y0 + fp.shape[0], x0 : x0 + fp.shape[1]] |= fp
        else:
            distractor_mask[y0 : y0 + fp.shape[0], x0 : x0 + fp.shape[1]] |= fp

        if fine is None:
            image[y0 : y0 + fp.shape[0], x0 : x0 + fp.shape[1]][fp] = rgb
        else:
            ss = supersample
            if kind == "disk":
                fx0, fy0, ffp = _disk_footprint(center[0], center[1], value, w, h, ss=ss)
            else:
                fx0, fy0, ffp = _bar_footprint(
                    center[0], center[1], spec.distractor_size, spec.distractor_size * BAR_ASPECT, value, w, h, ss=ss
                )
            fine[fy0 * ss : fy0 * ss + ffp.shape[0], fx0 * ss : fx0 * ss + ffp.shape[1]][ffp] = rgb

    if not target_mask.any():
        raise IntegrityError("target footprint rasterized to an empty mask")
    if fine is not None:
        ss = supersample
        pooled = fine.reshape(h, ss, w, ss, 3).mean(axis=(1, 3))
        image = np.clip(np.round(pooled), 0, 255).astype(np.uint8)

    if sample_id is None:
        sample_id = f"{params.feature}_{params.td_value:g}_{layout.rng_seed}"
    return RenderedSample(
        image=image,
        target_mask=target_mask,
        distractor_mask=distractor_mask,
        params=params,
        layout=ElementLayout(
            centers=tuple(effective_centers),
            target_index=layout.target_index,
            rng_seed=layout.rng_seed,
        ),
        id=sample_id,
    )


@dataclass(frozen=True)
class FeatureSweep:
    """Values swept for one feature, each rendered ``instances`` times.

    For color/orientation the values are td differences; for size they are
    target diameters in px.
    """

    values: tuple[float, ...]
    instances: int

    def validate(self, feature: str) -> None:
        if self.instances < 1:
            raise ConfigurationError(f"{feature} sweep: instances must be >= 1")
        if not self.values:
            raise ConfigurationError(f"{feature} sweep: no values")


@dataclass(frozen=True)
class SweepConfig:
    color: FeatureSweep | None = None
    orientation: FeatureSweep | None = None
    size: FeatureSweep | None = None

    def features(self):
        for feature in FEATURES:
            sweep = getattr(self, feature)
            if sweep is not None:
                yield feature, sweep

    def to_dict(self) -> dict:
        return {
            feature: {"values": list(sweep.values), "instances": sweep.instances}
            for feature, sweep in self.features()
        }

    @staticmethod
    def from_dict(d: dict) -> "SweepConfig":
        kwargs = {}
        for feature in FEATURES:
            if feature in d and d[feature] is not None:
                entry = d[feature]
                kwargs[feature] = FeatureSweep(tuple(float(v) for v in entry["values"]), int(entry["instances"]))
        return SweepConfig(**kwargs)


def default_sweep() -> SweepConfig:
    """Sweep grids reproducing the 810/864/840 color/orientation/size counts."""
    color_vals = tuple(4.0 * k for k in range(1, 46))  # 4..180 deg
    orient_vals = tuple(90.0 * k / 48 for k in range(1, 49))  # 1.875..90 deg
    size_vals = tuple(np.linspace(TARGET_SIZE_MIN, TARGET_SIZE_MAX, 28))  # none hits 75
    return SweepConfig(
        color=FeatureSweep(color_vals, 18),
        orientation=FeatureSweep(orient_vals, 18),
        size=FeatureSweep(size_vals, 30),
    )


@dataclass
class DatasetManifest:
    sweep: dict
    seed: int
    counts: dict[str, int]
    ids: list[str] = field(default_factory=list)


def _sample_tasks(sweep: SweepConfig, spec: ArraySpec, seed: int):
    """Expand a sweep into fully-determined per-sample tasks.

    All randomness (layout seed, base values, element hue) is drawn here from
    one master stream in a fixed order, so generation is reproducible
    regardless of how the tasks are later executed.
    """
    master = np.random.default_rng(seed)
    tasks = []
    for feature, fs in sweep.features():
        fs.validate(feature)
        for vi, value in enumerate(fs.values):
            for ii in range(fs.instances):
                layout_seed = int(master.integers(0, 2**63 - 1))
                if feature == "color":
                    params = StimulusParams(
                        feature="color",
                        td_value=float(value),
                        distractor_value=float(master.uniform(0.0, 360.0)),
                    )
                elif feature == "orientation":
                    params = StimulusParams(
                        feature="orientation",
                        td_value=float(value),
                        distractor_value=float(master.uniform(0.0, 180.0)),
                        element_hue_deg=float(master.uniform(0.0, 360.0)),
                    )
                else:
                    params = StimulusParams.for_size(
                        float(value), spec, element_hue_deg=float(master.uniform(0.0, 360.0))
                    )
                sample_id = f"{feature}_{vi:03d}_{ii:03d}"
                tasks.append((sample_id, params, layout_seed))
    return tasks


def _render_and_write(args) -> str:
    spec, sample_id, params, layout_seed, out_dir, supersample = args
    from . import dataset_io

    layout = plan_layout(spec, target_cell=None, seed=layout_seed)
    sample = render_array(spec, params, layout, sample_id=sample_id, supersample=supersample)
    return dataset_io.write_sample(sample, Path(out_dir))


def gen_dataset(
    sweep: SweepConfig,
    out_dir,
    seed: int,
    spec: ArraySpec | None = None,
    workers: int = 1,
    supersample: int = 1,
) -> DatasetManifest:
    """Generate a full dataset under ``out_dir`` and write its manifest.

    Fully deterministic for a fixed (sweep, spec, seed), including across
    different worker counts.
    """
    from . import dataset_io

    spec = spec or ArraySpec()
    max_size = max(sweep.size.values) if sweep.size is not None else None
    spec.validate(max_target_size=max_size)
    out_dir = Path(out_dir)
    dataset_io.ensure_dataset_dirs(out_dir)

    tasks = _sample_tasks(sweep, spec, seed)
    job_args = [(spec, sid, params, lseed, str(out_dir), supersample) for sid, params, lseed in tasks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            ids = list(pool.map(_render_and_write, job_args, chunksize=8))
    else:
        ids = [_render_and_write(a) for a in job_args]

    counts: dict[str, int] = {}
    for sid in ids:
        feature = sid.split("_", 1)[0]
        counts[feature] = counts.get(feature, 0) + 1
    manifest = DatasetManifest(sweep=sweep.to_dict(), seed=seed, counts=counts, ids=sorted(ids))
    dataset_io.write_manifest(manifest, out_dir)
    return manifest
