"""Per-image saliency discrimination metrics.

Three quantities describe how well a saliency map singles out the target:

* ``gsi`` - (mean target saliency - mean distractor saliency) / (sum of the
  means), in [-1, 1]. 1 means only the target is highlighted, -1 only the
  distractors.
* ``msr_targ`` - max saliency inside the target / max inside the distractors.
* ``msr_bg`` - max saliency in the background / max inside the target; values
  above 1 mean the map is more drawn to the background than to the target.

All three are invariant under multiplying the map by any positive constant.
Degenerate cases return ``None`` (undefined, both operands zero) or
``math.inf`` (zero denominator only); aggregation treats both specially
instead of averaging them in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError
from .validation import check_disjoint, check_mask, check_saliency_map


@dataclass
class MetricRecord:
    id: str
    gsi: float | None
    msr_targ: float | None
    msr_bg: float | None
    s_target_mean: float
    s_distr_mean: float
    max_target: float
    max_distr: float
    max_bg: float


def _checked(saliency, target_mask, distractor_mask):
    saliency = check_saliency_map(saliency)
    target = check_mask(target_mask, shape=saliency.shape, name="target mask")
    distractor = check_mask(distractor_mask, shape=saliency.shape, name="distractor mask")
    check_disjoint(target, distractor)
    return saliency, target, distractor


def _ratio(numerator: float, denominator: float) -> float | None:
    if denominator > 0.0:
        return numerator / denominator
    if numerator > 0.0:
        return math.inf
    return None


def gsi(saliency, target_mask, distractor_mask) -> float | None:
    """Contrast of mean target vs mean distractor saliency, in [-1, 1]."""
    saliency, target, distractor = _checked(saliency, target_mask, distractor_mask)
    s_target = float(saliency[target].mean())
    s_distr = float(saliency[distractor].mean())
    if s_target + s_distr == 0.0:
        return None
    return (s_target - s_distr) / (s_target + s_distr)


def msr_targ(saliency, target_mask, distractor_mask) -> float | None:
    """Max target saliency / max distractor saliency."""
    saliency, target, distractor = _checked(saliency, target_mask, distractor_mask)
    return _ratio(float(saliency[target].max()), float(saliency[distractor].max()))


def msr_bg(saliency, target_mask, distractor_mask) -> float | None:
    """Max background saliency / max target saliency.

    The background is the complement of the target and distractor masks.
    """
    saliency, target, distractor = _checked(saliency, target_mask, distractor_mask)
    background = ~(target | distractor)
    if not background.any():
        raise ValidationError("background is empty: masks cover the whole image")
    return _ratio(float(saliency[background].max()), float(saliency[target].max()))


def evaluate_sample(sample_id: str, saliency, target_mask, distractor_mask) -> MetricRecord:
    """Compute all metrics for one image in a single pass over the masks."""
    saliency, target, distractor = _checked(saliency, target_mask, distractor_mask)
    background = ~(target | distractor)
    if not background.any():
        raise ValidationError("background is empty: masks cover the whole image")

    s_target = float(saliency[target].mean())
    s_distr = float(saliency[distractor].mean())
    max_target = float(saliency[target].max())
    max_distr = float(saliency[distractor].max())
    max_bg = float(saliency[background].max())

    return MetricRecord(
        id=sample_id,
        gsi=None if s_target + s_distr == 0.0 else (s_target - s_distr) / (s_target + s_distr),
        msr_targ=_ratio(max_target, max_distr),
        msr_bg=_ratio(max_bg, max_target),
        s_target_mean=s_target,
        s_distr_mean=s_distr,
        max_target=max_target,
        max_distr=max_distr,
        max_bg=max_bg,
    )
