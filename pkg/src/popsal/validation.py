"""Input validation helpers, in the spirit of sklearn's check_array.

All public functions either return a canonical ndarray or raise a
ValidationError describing what was wrong.
"""
from __future__ import annotations

import numpy as np

from .errors import ValidationError


def check_rgb_image(image, name: str = "image") -> np.ndarray:
    """Validate an 8-bit RGB raster, returned as a uint8 (H, W, 3) array."""
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValidationError(f"{name}: expected (H, W, 3) RGB array, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError(f"{name}: empty image")
    if arr.dtype != np.uint8:
        raise ValidationError(f"{name}: expected uint8 pixels, got {arr.dtype}")
    return arr


def check_saliency_map(values, expected_shape=None, name: str = "saliency map") -> np.ndarray:
    """Validate a saliency map: 2D, finite, values in [0, 1].

    Returns a float64 array. ``expected_shape`` is (height, width).
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name}: expected a 2D grid, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError(f"{name}: empty map")
    if expected_shape is not None and arr.shape != tuple(expected_shape):
        raise ValidationError(
            f"{name}: dimensions {arr.shape[1]}x{arr.shape[0]} do not match "
            f"expected {expected_shape[1]}x{expected_shape[0]}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name}: contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValidationError(f"{name}: values outside [0, 1] (min {arr.min()}, max {arr.max()})")
    return arr


def check_mask(mask, shape=None, require_nonempty: bool = True, name: str = "mask") -> np.ndarray:
    """Validate a binary mask; accepts bool or 0/255-style integer rasters.

    Returns a bool array.
    """
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValidationError(f"{name}: expected a 2D mask, got shape {arr.shape}")
    if arr.dtype != bool:
        vals = np.unique(arr)
        if not np.all(np.isin(vals, (0, 1, 255))):
            raise ValidationError(f"{name}: not binary (found values {vals[:6]})")
        arr = arr > 0
    if shape is not None and arr.shape != tuple(shape):
        raise ValidationError(f"{name}: shape {arr.shape} does not match expected {tuple(shape)}")
    if require_nonempty and not arr.any():
        raise ValidationError(f"{name}: empty mask")
    return arr


def check_disjoint(a: np.ndarray, b: np.ndarray, names=("target mask", "distractor mask")) -> None:
    if np.any(a & b):
        raise ValidationError(f"{names[0]} and {names[1]} overlap")
