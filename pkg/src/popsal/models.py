"""Built-in reference saliency models.

Two simplified, self-contained model families let the benchmark run end to
end without any third-party saliency code:

* :class:`SignatureSaliency` - reconstructs each opponent channel from the
  sign of its 2D DCT spectrum; squared reconstruction energy concentrates on
  spatially sparse structure.
* :class:`CenterSurroundSaliency` - classic multi-scale center-surround
  contrast over intensity, color-opponent and oriented-derivative channels,
  with peak-promotion normalization.

Both are deterministic, stateless estimators in the sklearn mold: parameters
live in ``__init__``, ``fit`` only validates, ``transform`` maps a sequence
of images to saliency maps. Neither claims to reproduce any published model's
scores.
"""
from __future__ import annotations

import math

import cv2
import numpy as np
from scipy.fft import dctn, idctn
from scipy.ndimage import gaussian_filter
from sklearn.base import BaseEstimator

from .errors import ConfigurationError
from .validation import check_rgb_image

_ZERO_EPS = 1e-12


def _opponent_channels(image: np.ndarray) -> list[np.ndarray]:
    """Lightness, red-green and blue-yellow planes from uint8 RGB."""
    rgb = image.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    lightness = (r + g + b) / 3.0
    red_green = r - g
    blue_yellow = b - (r + g) / 2.0
    return [lightness, red_green, blue_yellow]


def _resize(arr: np.ndarray, size_wh: tuple[int, int]) -> np.ndarray:
    w, h = size_wh
    arr = np.asarray(arr, dtype=np.float64)
    if (arr.shape[1], arr.shape[0]) == (w, h):
        return arr
    shrink = w <= arr.shape[1] and h <= arr.shape[0]
    interp = cv2.INTER_AREA if shrink else cv2.INTER_LINEAR
    return cv2.resize(arr, (w, h), interpolation=interp)


def _center_gaussian(shape: tuple[int, int]) -> np.ndarray:
    h, w = shape
    sigma = min(w, h) / 4.0
    ys = np.arange(h) - (h - 1) / 2.0
    xs = np.arange(w) - (w - 1) / 2.0
    return np.exp(-(xs[None, :] ** 2 + ys[:, None] ** 2) / (2.0 * sigma * sigma))


class _SaliencyEstimator(BaseEstimator):
    """Shared plumbing: validation, batching, final normalization."""

    def fit(self, X=None, y=None):
        """Stateless; validates parameters and returns self."""
        self._validate()
        return self

    def transform(self, images) -> list[np.ndarray]:
        return [self.saliency_map(image) for image in images]

    def fit_transform(self, images, y=None) -> list[np.ndarray]:
        return self.fit().transform(images)

    def saliency_map(self, image) -> np.ndarray:
        """Saliency map for one image, same height/width, values in [0, 1]."""
        self._validate()
        image = check_rgb_image(image)
        raw = self._raw_map(image)
        raw = _resize(raw, (image.shape[1], image.shape[0]))
        raw = np.maximum(raw, 0.0)
        if getattr(self, "center_bias", False):
            peak = raw.max()
            if peak > _ZERO_EPS:
                raw = raw / peak
            w = float(self.center_bias_weight)
            raw = (1.0 - w) * raw + w * _center_gaussian(raw.shape)
        peak = raw.max()
        if peak <= _ZERO_EPS:
            return np.zeros_like(raw)
        return raw / peak

    def _working_size(self, image: np.ndarray) -> tuple[int, int]:
        h, w = image.shape[:2]
        ww = int(self.working_width)
        if ww < 16:
            raise ConfigurationError(f"working_width must be >= 16, got {ww}")
        wh = max(int(round(h * ww / w)), 1)
        return (ww, wh)

    def _sigma(self) -> float:
        if self.smoothing_sigma is not None:
            if self.smoothing_sigma <= 0:
                raise ConfigurationError("smoothing_sigma must be positive")
            return float(self.smoothing_sigma)
        return 0.045 * float(self.working_width)


class SignatureSaliency(_SaliencyEstimator):
    """DCT sign-spectrum saliency.

    Per opponent channel at the working resolution: take the 2D DCT, keep
    only the coefficient signs, invert, square pointwise. Channel energies
    are summed, blurred, upsampled to the input size and normalized by the
    maximum.

    Parameters
    ----------
    working_width : int
        Width of the internal grid the transform runs on.
    smoothing_sigma : float or None
        Gaussian blur in working-grid px; None means 0.045 * working_width.
    center_bias : bool
        Blend in a centered Gaussian prior (for center-biased viewing).
    center_bias_weight : float
        Blend weight of the prior when enabled.
    """

    def __init__(
        self,
        working_width: int = 64,
        smoothing_sigma: float | None = None,
        center_bias: bool = False,
        center_bias_weight: float = 0.25,
    ):
        self.working_width = working_width
        self.smoothing_sigma = smoothing_sigma
        self.center_bias = center_bias
        self.center_bias_weight = center_bias_weight

    def _validate(self) -> None:
        if int(self.working_width) < 16:
            raise ConfigurationError(f"working_width must be >= 16, got {self.working_width}")
        if not 0.0 <= float(self.center_bias_weight) <= 1.0:
            raise ConfigurationError("center_bias_weight must be in [0, 1]")
        self._sigma()

    def _raw_map(self, image: np.ndarray) -> np.ndarray:
        size = self._working_size(image)
        acc = None
        for channel in _opponent_channels(image):
            small = _resize(channel, size)
            recon = idctn(np.sign(dctn(small, norm="ortho")), norm="ortho")
            energy = recon * recon
            acc = energy if acc is None else acc + energy
        return gaussian_filter(acc, self._sigma())


class CenterSurroundSaliency(_SaliencyEstimator):
    """Multi-scale center-surround contrast saliency.

    Gaussian pyramids are built for intensity, two color-opponent channels
    and four oriented-derivative channels (0/45/90/135 deg). Center-surround
    difference maps |center - upsampled surround| are taken for center levels
    1-2 against surrounds 2 and 3 levels coarser, peak-promotion normalized,
    summed within each feature class, and the three class maps are averaged.
    """

    # (center level, surround level) pairs: c in {1, 2}, delta in {2, 3}
    _CS_PAIRS = tuple((c, c + d) for c in (1, 2) for d in (2, 3))

    def __init__(
        self,
        working_width: int = 256,
        pyramid_levels: int = 5,
        smoothing_sigma: float | None = None,
        center_bias: bool = False,
        center_bias_weight: float = 0.25,
    ):
        self.working_width = working_width
        self.pyramid_levels = pyramid_levels
        self.smoothing_sigma = smoothing_sigma
        self.center_bias = center_bias
        self.center_bias_weight = center_bias_weight

    def _validate(self) -> None:
        if int(self.working_width) < 16:
            raise ConfigurationError(f"working_width must be >= 16, got {self.working_width}")
        if int(self.pyramid_levels) < max(c_s[1] for c_s in self._CS_PAIRS):
            raise ConfigurationError(
                f"pyramid_levels must be >= {max(c_s[1] for c_s in self._CS_PAIRS)}"
            )
        if not 0.0 <= float(self.center_bias_weight) <= 1.0:
            raise ConfigurationError("center_bias_weight must be in [0, 1]")
        self._sigma()

    def _check_image_size(self, image: np.ndarray) -> None:
        need = 2 ** int(self.pyramid_levels)
        if min(image.shape[0], image.shape[1]) < need:
            raise ConfigurationError(
                f"image of {image.shape[1]}x{image.shape[0]} is smaller than "
                f"2^pyramid_levels = {need}"
            )

    @staticmethod
    def _orientation_channels(intensity: np.ndarray) -> list[np.ndarray]:
        gx = gaussian_filter(intensity, 1.5, order=(0, 1))
        gy = gaussian_filter(intensity, 1.5, order=(1, 0))
        channels = []
        for angle in (0.0, 45.0, 90.0, 135.0):
            rad = math.radians(angle)
            channels.append(np.abs(math.cos(rad) * gx + math.sin(rad) * gy))
        return channels

    @staticmethod
    def _pyramid(base: np.ndarray, levels: int) -> list[np.ndarray]:
        # float64 throughout: a constant input must yield exactly constant
        # levels, so zero-contrast maps stay below the zero guard
        pyr = [np.asarray(base, dtype=np.float64)]
        for _ in range(levels):
            pyr.append(cv2.pyrDown(pyr[-1]))
        return pyr

    @staticmethod
    def _peak_normalize(m: np.ndarray) -> np.ndarray:
        """Promote maps with few isolated peaks over maps with many."""
        peak = m.max()
        if peak <= _ZERO_EPS:
            return np.zeros_like(m)
        m = m / peak
        h, w = m.shape
        block = max(min(h, w) // 8, 2)
        local_maxima = [
            m[y : y + block, x : x + block].max()
            for y in range(0, h, block)
            for x in range(0, w, block)
        ]
        weight = (1.0 - float(np.mean(local_maxima))) ** 2
        return m * weight

    def _contrast_maps(self, base: np.ndarray) -> list[np.ndarray]:
        pyr = self._pyramid(base, max(s for _, s in self._CS_PAIRS))
        ref_shape = pyr[1].shape
        maps = []
        for c, s in self._CS_PAIRS:
            surround = _resize(pyr[s], (pyr[c].shape[1], pyr[c].shape[0]))
            diff = np.abs(pyr[c] - surround)
            diff = _resize(diff, (ref_shape[1], ref_shape[0]))
            maps.append(self._peak_normalize(diff))
        return maps

    def _raw_map(self, image: np.ndarray) -> np.ndarray:
        self._check_image_size(image)
        size = self._working_size(image)
        lightness, red_green, blue_yellow = [
            _resize(ch, size) for ch in _opponent_channels(image)
        ]

        intensity_class = sum(self._contrast_maps(lightness))
        color_class = sum(self._contrast_maps(red_green)) + sum(self._contrast_maps(blue_yellow))
        orientation_class = sum(
            m for ch in self._orientation_channels(lightness) for m in self._contrast_maps(ch)
        )

        combined = (intensity_class + color_class + orientation_class) / 3.0
        combined = _resize(combined, size)
        return gaussian_filter(combined, self._sigma())

    def orientation_class_map(self, image) -> np.ndarray:
        """Orientation-contrast class map alone, at input resolution."""
        self._validate()
        image = check_rgb_image(image)
        self._check_image_size(image)
        size = self._working_size(image)
        lightness = _resize(_opponent_channels(image)[0], size)
        class_map = sum(
            m for ch in self._orientation_channels(lightness) for m in self._contrast_maps(ch)
        )
        return _resize(class_map, (image.shape[1], image.shape[0]))


MODEL_REGISTRY = {
    "signature": SignatureSaliency,
    "cs_contrast": CenterSurroundSaliency,
}


def make_model(name: str, **overrides):
    if name not in MODEL_REGISTRY:
        raise ConfigurationError(f"unknown model {name!r}, expected one of {sorted(MODEL_REGISTRY)}")
    return MODEL_REGISTRY[name](**overrides)
