"""On-disk layout and loaders for stimuli, masks, metadata, and saliency maps.

Dataset layout under a root directory:

    images/<id>.png            8-bit RGB stimulus
    masks_target/<id>.png      8-bit grayscale, 255 inside / 0 outside
    masks_distractor/<id>.png  8-bit grayscale, 255 inside / 0 outside
    meta/<id>.json             per-sample metadata
    manifest.json              sweep, seed, counts, id list

Annotated natural scenes use the same raster layout plus a sidecar document
per image in annotations/<id>.json. Saliency maps are single-channel 8-bit or
16-bit PNGs normalized by the format maximum on load.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import IntegrityError, MissingComponentError, OutputError, ValidationError
from .stimgen import DatasetManifest, RenderedSample

POPOUT_FEATURES = frozenset(
    {"color", "pattern/texture", "shape", "size", "orientation", "focus", "location"}
)

_SUBDIRS = ("images", "masks_target", "masks_distractor", "meta")


@dataclass
class SampleMeta:
    feature: str
    td_value: float | None
    distractor_value: float | None
    target_size_px: float | None
    target_center: tuple[float, float]
    target_cell: int | None
    seed: int | None


@dataclass
class SampleRecord:
    id: str
    image_path: Path
    target_mask: np.ndarray
    distractor_mask: np.ndarray
    meta: SampleMeta
    image_size: tuple[int, int]  # (width, height)


@dataclass
class AnnotatedScene:
    id: str
    image_path: Path
    target_mask: np.ndarray
    distractor_mask: np.ndarray
    object_type: str
    num_distractors: int
    popout_features: tuple[str, ...]

    @property
    def image_size(self) -> tuple[int, int]:
        h, w = self.target_mask.shape
        return (w, h)


def ensure_dataset_dirs(root) -> Path:
    root = Path(root)
    try:
        for sub in _SUBDIRS:
            (root / sub).mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"cannot create dataset directories under {root}: {e}") from e
    return root


def _sample_paths(root: Path, sample_id: str) -> dict[str, Path]:
    return {
        "image": root / "images" / f"{sample_id}.png",
        "target mask": root / "masks_target" / f"{sample_id}.png",
        "distractor mask": root / "masks_distractor" / f"{sample_id}.png",
        "metadata": root / "meta" / f"{sample_id}.json",
    }


def _save_png(arr: np.ndarray, path: Path) -> None:
    try:
        Image.fromarray(arr).save(path, format="PNG", compress_level=1)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e


def _dump_json(obj, path: Path) -> None:
    try:
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e


def write_sample(sample: RenderedSample, root) -> str:
    """Persist one rendered sample; refuses to overwrite an existing id."""
    root = ensure_dataset_dirs(root)
    paths = _sample_paths(root, sample.id)
    existing = [str(p) for p in paths.values() if p.exists()]
    if existing:
        raise ValidationError(f"sample id {sample.id!r} already exists at {existing[0]}")

    tx, ty = sample.layout.centers[sample.layout.target_index]
    meta = {
        "feature": sample.params.feature,
        "td_value": sample.params.td_value,
        "distractor_value": sample.params.distractor_value,
        "target_size_px": sample.params.target_size_px,
        "target_center": {"x": tx, "y": ty},
        "target_cell": sample.layout.target_index,
        "seed": sample.layout.rng_seed,
    }
    _save_png(sample.image, paths["image"])
    _save_png(sample.target_mask.astype(np.uint8) * 255, paths["target mask"])
    _save_png(sample.distractor_mask.astype(np.uint8) * 255, paths["distractor mask"])
    _dump_json(meta, paths["metadata"])
    return sample.id


def _load_binary_mask(path: Path, name: str) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode != "L":
            raise IntegrityError(f"{name} {path} is not an 8-bit grayscale raster (mode {im.mode})")
        arr = np.asarray(im)
    values = np.unique(arr)
    if not np.all(np.isin(values, (0, 255))):
        raise IntegrityError(f"{name} {path} contains values other than 0/255: {values[:6]}")
    return arr == 255


def read_sample(root, sample_id: str) -> SampleRecord:
    """Load one sample's masks and metadata, validating structural invariants."""
    root = Path(root)
    paths = _sample_paths(root, sample_id)
    missing = [name for name, p in paths.items() if not p.exists()]
    if missing:
        raise MissingComponentError(f"missing {', '.join(missing)} for {sample_id!r}")

    with Image.open(paths["image"]) as im:
        image_size = im.size
    target = _load_binary_mask(paths["target mask"], "target mask")
    distractor = _load_binary_mask(paths["distractor mask"], "distractor mask")

    expected = (image_size[1], image_size[0])
    for name, mask in (("target mask", target), ("distractor mask", distractor)):
        if mask.shape != expected:
            raise IntegrityError(
                f"{name} for {sample_id!r} is {mask.shape[1]}x{mask.shape[0]} "
                f"but the image is {image_size[0]}x{image_size[1]}"
            )
    if not target.any():
        raise IntegrityError(f"target mask for {sample_id!r} is empty")
    if np.any(target & distractor):
        raise IntegrityError(f"target and distractor masks overlap for {sample_id!r}")

    raw = json.loads(paths["metadata"].read_text(encoding="utf-8"))
    meta = SampleMeta(
        feature=raw["feature"],
        td_value=raw.get("td_value"),
        distractor_value=raw.get("distractor_value"),
        target_size_px=raw.get("target_size_px"),
        target_center=(raw["target_center"]["x"], raw["target_center"]["y"]),
        target_cell=raw.get("target_cell"),
        seed=raw.get("seed"),
    )
    return SampleRecord(
        id=sample_id,
        image_path=paths["image"],
        target_mask=target,
        distractor_mask=distractor,
        meta=meta,
        image_size=image_size,
    )


def write_manifest(manifest: DatasetManifest, root) -> Path:
    path = Path(root) / "manifest.json"
    _dump_json(
        {"sweep": manifest.sweep, "seed": manifest.seed, "counts": manifest.counts, "ids": manifest.ids},
        path,
    )
    return path


def read_manifest(root) -> DatasetManifest:
    path = Path(root) / "manifest.json"
    if not path.exists():
        raise MissingComponentError(f"no manifest.json under {root}")
    raw = json.loads(path.read_text(encoding="utf-8"))
    return DatasetManifest(sweep=raw["sweep"], seed=raw["seed"], counts=raw["counts"], ids=raw["ids"])


def load_saliency_map(path, expected_w: int, expected_h: int) -> np.ndarray:
    """Load a single-channel raster, normalized by its format maximum.

    8-bit maps divide by 255, 16-bit by 65535. No min-subtraction: ratio
    metrics depend on the origin staying put.
    """
    path = Path(path)
    if not path.exists():
        raise MissingComponentError(f"saliency map not found: {path}")
    with Image.open(path) as im:
        mode = im.mode
        if mode == "L":
            arr = np.asarray(im, dtype=np.float64) / 255.0
        elif mode in ("I", "I;16"):
            arr = np.asarray(im, dtype=np.float64) / 65535.0
        else:
            raise ValidationError(
                f"saliency map {path} must be single-channel 8-bit or 16-bit, got mode {mode!r}"
            )
    if arr.shape != (expected_h, expected_w):
        raise IntegrityError(
            f"saliency map {path} is {arr.shape[1]}x{arr.shape[0]} "
            f"but the stimulus is {expected_w}x{expected_h}"
        )
    return arr


def save_saliency_map(values: np.ndarray, path) -> Path:
    """Write a [0, 1] map as a 16-bit grayscale PNG."""
    path = Path(path)
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.min() < 0.0 or arr.max() > 1.0:
        raise ValidationError("saliency map must be a 2D array with values in [0, 1]")
    _save_png(np.round(arr * 65535.0).astype(np.uint16), path)
    return path


def scene_root_for(annotation_path: Path) -> Path:
    parent = annotation_path.parent
    return parent.parent if parent.name == "annotations" else parent


def load_scene_annotation(path) -> AnnotatedScene:
    """Load an annotated scene from its sidecar document.

    Raster paths in the sidecar are relative to the dataset root (the
    directory holding ``annotations/``).
    """
    path = Path(path)
    if not path.exists():
        raise MissingComponentError(f"annotation not found: {path}")
    raw = json.loads(path.read_text(encoding="utf-8"))
    root = scene_root_for(path)

    features = raw.get("popout_features", [])
    if not features:
        raise ValidationError(f"{path}: popout_features must be non-empty")
    unknown = [f for f in features if f not in POPOUT_FEATURES]
    if unknown:
        raise ValidationError(
            f"{path}: unknown pop-out feature label(s) {unknown}; "
            f"expected a subset of {sorted(POPOUT_FEATURES)}"
        )
    num_distractors = int(raw["num_distractors"])
    if num_distractors < 2:
        raise ValidationError(f"{path}: num_distractors must be >= 2, got {num_distractors}")

    image_path = root / raw["image"]
    target_path = root / raw["target_mask"]
    distractor_path = root / raw["distractor_mask"]
    missing = [str(p) for p in (image_path, target_path, distractor_path) if not p.exists()]
    if missing:
        raise MissingComponentError(f"{path}: missing raster(s) {missing}")

    target = _load_binary_mask(target_path, "target mask")
    distractor = _load_binary_mask(distractor_path, "distractor mask")
    with Image.open(image_path) as im:
        image_size = im.size
    expected = (image_size[1], image_size[0])
    if target.shape != expected or distractor.shape != expected:
        raise IntegrityError(f"{path}: mask dimensions do not match the image")
    if not target.any():
        raise IntegrityError(f"{path}: target mask is empty")
    if np.any(target & distractor):
        raise IntegrityError(f"{path}: target and distractor masks overlap")

    return AnnotatedScene(
        id=raw.get("id", path.stem),
        image_path=image_path,
        target_mask=target,
        distractor_mask=distractor,
        object_type=raw.get("object_type", ""),
        num_distractors=num_distractors,
        popout_features=tuple(features),
    )


def write_scene(
    root,
    scene_id: str,
    image: np.ndarray,
    target_mask: np.ndarray,
    distractor_mask: np.ndarray,
    object_type: str,
    num_distractors: int,
    popout_features,
) -> Path:
    """Write one annotated scene in the interchange layout; returns the sidecar path."""
    root = Path(root)
    for sub in ("images", "masks_target", "masks_distractor", "annotations"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    _save_png(image, root / "images" / f"{scene_id}.png")
    _save_png(np.asarray(target_mask, dtype=bool).astype(np.uint8) * 255, root / "masks_target" / f"{scene_id}.png")
    _save_png(
        np.asarray(distractor_mask, dtype=bool).astype(np.uint8) * 255,
        root / "masks_distractor" / f"{scene_id}.png",
    )
    sidecar = root / "annotations" / f"{scene_id}.json"
    _dump_json(
        {
            "id": scene_id,
            "image": f"images/{scene_id}.png",
            "target_mask": f"masks_target/{scene_id}.png",
            "distractor_mask": f"masks_distractor/{scene_id}.png",
            "object_type": object_type,
            "num_distractors": num_distractors,
            "popout_features": list(popout_features),
        },
        sidecar,
    )
    return sidecar


def list_scene_ids(root) -> list[str]:
    ann = Path(root) / "annotations"
    if not ann.is_dir():
        return []
    return sorted(p.stem for p in ann.glob("*.json"))
