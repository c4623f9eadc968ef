"""Fixation simulation: iterated maxima with circular inhibition of return.

The simulator walks a saliency map by repeatedly attending its global maximum
and zeroing a circular neighborhood around the attended point, until a
fixation lands within the hit radius of the target center or the fixation
budget runs out. All steps are deterministic: ties at the maximum break in
row-major order (smallest y, then smallest x).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .errors import ConfigurationError, ValidationError
from .validation import check_saliency_map


@dataclass
class FixationTrace:
    fixations: tuple[tuple[int, int], ...]  # (x, y) pixel coordinates, in order
    found: bool
    count: int


@dataclass
class DetectionCurve:
    budgets: tuple[int, ...]
    fraction_found: tuple[float, ...]


class FixationSimulator(BaseEstimator):
    """Winner-take-all fixation generator with inhibition of return.

    Parameters
    ----------
    suppression_radius : float
        Radius (px) of the circular region zeroed around each fixation.
        35 px corresponds to 1 degree at the default viewing geometry.
    hit_radius_base : float
        Detection radius (px) around the target center for all stimuli.
    hit_radius_max : float
        Upper bound (px) on the detection radius for large size singletons.
    max_fixations : int
        Fixation budget per image.
    """

    def __init__(
        self,
        suppression_radius: float = 35.0,
        hit_radius_base: float = 35.0,
        hit_radius_max: float = 70.0,
        max_fixations: int = 100,
    ):
        self.suppression_radius = suppression_radius
        self.hit_radius_base = hit_radius_base
        self.hit_radius_max = hit_radius_max
        self.max_fixations = max_fixations

    def _validate(self) -> None:
        if self.suppression_radius <= 0 or self.hit_radius_base <= 0 or self.hit_radius_max <= 0:
            raise ConfigurationError("all radii must be positive")
        if self.hit_radius_max < self.hit_radius_base:
            raise ConfigurationError("hit_radius_max must be >= hit_radius_base")
        if self.max_fixations < 1:
            raise ConfigurationError("max_fixations must be >= 1")

    def fit(self, X=None, y=None):
        """Stateless; validates parameters and returns self."""
        self._validate()
        return self

    def hit_radius_for(self, feature: str, target_size_px: float | None = None) -> float:
        """Detection radius for one stimulus.

        Size singletons widen the radius with the target, up to
        ``hit_radius_max``; other features use the base radius.
        """
        self._validate()
        if feature != "size" or target_size_px is None:
            return float(self.hit_radius_base)
        return float(min(max(target_size_px / 2.0, self.hit_radius_base), self.hit_radius_max))

    def simulate(self, saliency, target_center, hit_radius: float | None = None) -> FixationTrace:
        """Run the attend-and-suppress loop until the target is hit.

        Stops early (found=False) once the residual map is all zeros, since
        any further "maxima" would be meaningless ties among zeros. An
        all-zero input therefore produces an empty trace.
        """
        self._validate()
        work = np.array(check_saliency_map(saliency), dtype=np.float64)
        h, w = work.shape
        tx, ty = float(target_center[0]), float(target_center[1])
        if not (0 <= tx < w and 0 <= ty < h):
            raise ValidationError(f"target center ({tx}, {ty}) lies outside the {w}x{h} map")
        radius = float(self.hit_radius_base if hit_radius is None else hit_radius)
        sup = float(self.suppression_radius)

        fixations: list[tuple[int, int]] = []
        for step in range(1, self.max_fixations + 1):
            flat = int(np.argmax(work))  # first occurrence = row-major tie-break
            y, x = divmod(flat, w)
            if work[y, x] <= 0.0:
                break
            fixations.append((x, y))
            if math.hypot(x - tx, y - ty) <= radius:
                return FixationTrace(fixations=tuple(fixations), found=True, count=step)
            x0 = max(x - int(math.ceil(sup)), 0)
            x1 = min(x + int(math.ceil(sup)) + 1, w)
            y0 = max(y - int(math.ceil(sup)), 0)
            y1 = min(y + int(math.ceil(sup)) + 1, h)
            dx = np.arange(x0, x1, dtype=np.float64) - x
            dy = np.arange(y0, y1, dtype=np.float64) - y
            window = work[y0:y1, x0:x1]
            window[dx[None, :] ** 2 + dy[:, None] ** 2 <= sup * sup] = 0.0

        return FixationTrace(fixations=tuple(fixations), found=False, count=len(fixations))


def detection_curve(traces, budgets) -> DetectionCurve:
    """Fraction of targets found within each fixation budget."""
    traces = list(traces)
    if not traces:
        raise ValidationError("cannot build a detection curve from zero traces")
    budgets = [int(b) for b in budgets]
    if budgets != sorted(budgets):
        raise ValidationError("budgets must be sorted ascending")
    fractions = tuple(
        sum(1 for t in traces if t.found and t.count <= b) / len(traces) for b in budgets
    )
    return DetectionCurve(budgets=tuple(budgets), fraction_found=fractions)
