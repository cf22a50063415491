"""Colorspace conversions and channel plumbing.

All conversions are pixel-wise and operate on float arrays of shape
(H, W, C).  Conventions:

* RGB: sRGB in [0, 1]
* Lab: CIE L*a*b* under sRGB/D65, L in [0, 100], a/b in [-128, 127]
* HSV: hexcone model, H in [0, 1) circular, S/V in [0, 1]

Network-side arrays ("net" arrays) live in [-1, 1] with the affine map
L' = L/50 - 1, a' = a/110, b' = b/110.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class ColorSpace(enum.Enum):
    RGB = "rgb"
    LAB = "lab"
    HSV = "hsv"


class ColorSpaceError(ValueError):
    """Raised when an operation receives an image in the wrong space."""


_CHANNELS = {ColorSpace.RGB: (3,), ColorSpace.HSV: (3,), ColorSpace.LAB: (1, 2, 3)}

# sRGB (D65) primaries
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_WHITE_D65 = np.array([0.95047, 1.0, 1.08883])
_DELTA = 6.0 / 29.0


@dataclass
class Image:
    """A float raster with an explicit colorspace tag.

    For LAB the channel count distinguishes full Lab (3), an L-only
    view (1) and an ab-only view (2).
    """

    data: np.ndarray
    space: ColorSpace

    def __post_init__(self):
        if self.data.ndim == 2:
            self.data = self.data[:, :, None]
        if self.data.ndim != 3:
            raise ValueError(f"image data must be HxWxC, got shape {self.data.shape}")
        if self.data.shape[2] not in _CHANNELS[self.space]:
            raise ValueError(
                f"{self.space.value} image cannot have {self.data.shape[2]} channels"
            )

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def require(self, space: ColorSpace, channels: int | None = None) -> None:
        if self.space is not space:
            raise ColorSpaceError(f"expected {space.value} image, got {self.space.value}")
        if channels is not None and self.channels != channels:
            raise ColorSpaceError(
                f"expected {channels}-channel {space.value} image, got {self.channels}"
            )


def _srgb_to_linear(c: np.ndarray) -> np.ndarray:
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _linear_to_srgb(c: np.ndarray) -> np.ndarray:
    c = np.maximum(c, 0.0)
    return np.where(c <= 0.0031308, c * 12.92, 1.055 * c ** (1.0 / 2.4) - 0.055)


def _lab_f(t: np.ndarray) -> np.ndarray:
    t = np.maximum(t, 0.0)
    return np.where(t > _DELTA**3, np.cbrt(t), t / (3 * _DELTA**2) + 4.0 / 29.0)


def _lab_f_inv(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA, t**3, 3 * _DELTA**2 * (t - 4.0 / 29.0))


def rgb_to_lab(img: Image) -> Image:
    """sRGB [0,1] -> CIE Lab (D65). Clamps Lab to its declared ranges."""
    img.require(ColorSpace.RGB)
    rgb = np.clip(np.asarray(img.data, dtype=np.float64), 0.0, 1.0)
    xyz = _srgb_to_linear(rgb) @ _RGB_TO_XYZ.T
    fxyz = _lab_f(xyz / _WHITE_D65)
    lab = np.empty_like(fxyz)
    lab[..., 0] = 116.0 * fxyz[..., 1] - 16.0
    lab[..., 1] = 500.0 * (fxyz[..., 0] - fxyz[..., 1])
    lab[..., 2] = 200.0 * (fxyz[..., 1] - fxyz[..., 2])
    lab[..., 0] = np.clip(lab[..., 0], 0.0, 100.0)
    lab[..., 1:] = np.clip(lab[..., 1:], -128.0, 127.0)
    return Image(lab, ColorSpace.LAB)


def lab_array_to_rgb_unclamped(lab: np.ndarray) -> np.ndarray:
    """Lab array (..., 3) -> sRGB without the final clamp.

    Out-of-gamut Lab yields values outside [0, 1]; callers that need gamut
    mapping (rather than clamping) test against this.
    """
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_lab_f_inv(fx), _lab_f_inv(fy), _lab_f_inv(fz)], axis=-1) * _WHITE_D65
    lin = xyz @ _XYZ_TO_RGB.T
    # signed transfer keeps out-of-gamut values monotone instead of folding
    # them back into [0, 1]
    return np.sign(lin) * _linear_to_srgb(np.abs(lin))


def lab_to_rgb(img: Image) -> Image:
    """CIE Lab -> sRGB, clamped to [0,1]. Inverse of rgb_to_lab on the in-gamut set."""
    img.require(ColorSpace.LAB, channels=3)
    rgb = lab_array_to_rgb_unclamped(img.data)
    return Image(np.clip(rgb, 0.0, 1.0), ColorSpace.RGB)


def rgb_to_hsv(img: Image) -> Image:
    """sRGB -> hexcone HSV with H in [0,1). Achromatic pixels get H=0."""
    img.require(ColorSpace.RGB)
    rgb = np.clip(np.asarray(img.data, dtype=np.float64), 0.0, 1.0)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    chromatic = delta > 0

    h = np.zeros_like(maxc)
    safe = np.where(chromatic, delta, 1.0)
    rc = (maxc - r) / safe
    gc = (maxc - g) / safe
    bc = (maxc - b) / safe
    h = np.where(maxc == r, bc - gc, h)
    h = np.where((maxc == g) & (maxc != r), 2.0 + rc - bc, h)
    h = np.where((maxc == b) & (maxc != r) & (maxc != g), 4.0 + gc - rc, h)
    h = np.where(chromatic, (h / 6.0) % 1.0, 0.0)

    s = np.where(maxc > 0, delta / np.where(maxc > 0, maxc, 1.0), 0.0)
    hsv = np.stack([h, s, maxc], axis=-1)
    return Image(hsv, ColorSpace.HSV)


def hsv_to_rgb(img: Image) -> Image:
    """Hexcone HSV -> sRGB in [0,1]."""
    img.require(ColorSpace.HSV)
    hsv = np.asarray(img.data, dtype=np.float64)
    h = (hsv[..., 0] % 1.0) * 6.0
    s = np.clip(hsv[..., 1], 0.0, 1.0)
    v = np.clip(hsv[..., 2], 0.0, 1.0)

    i = np.floor(h).astype(int) % 6
    f = h - np.floor(h)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))

    choices = [
        (v, t, p),
        (q, v, p),
        (p, v, t),
        (p, q, v),
        (t, p, v),
        (v, p, q),
    ]
    r = np.select([i == k for k in range(6)], [c[0] for c in choices])
    g = np.select([i == k for k in range(6)], [c[1] for c in choices])
    b = np.select([i == k for k in range(6)], [c[2] for c in choices])
    return Image(np.clip(np.stack([r, g, b], axis=-1), 0.0, 1.0), ColorSpace.RGB)


def split_lab(img: Image) -> tuple[Image, Image]:
    """Full Lab -> (L-only view, ab-only view). merge_lab inverts bit-exactly."""
    img.require(ColorSpace.LAB, channels=3)
    return (
        Image(img.data[:, :, 0:1].copy(), ColorSpace.LAB),
        Image(img.data[:, :, 1:3].copy(), ColorSpace.LAB),
    )


def merge_lab(l_img: Image, ab_img: Image) -> Image:
    l_img.require(ColorSpace.LAB, channels=1)
    ab_img.require(ColorSpace.LAB, channels=2)
    if l_img.data.shape[:2] != ab_img.data.shape[:2]:
        raise ValueError("L and ab views disagree on spatial shape")
    return Image(np.concatenate([l_img.data, ab_img.data], axis=2), ColorSpace.LAB)


# --- network normalization ------------------------------------------------
#
# Affine, invertible map taking Lab roughly onto [-1, 1]:
#   L' = L/50 - 1,  a' = a/110,  b' = b/110

_L_SCALE = 50.0
_AB_SCALE = 110.0


def lab_to_net(lab: np.ndarray) -> np.ndarray:
    """Lab array (..., 3) -> normalized (..., 3) in roughly [-1, 1]."""
    out = np.empty_like(lab, dtype=np.float64)
    out[..., 0] = lab[..., 0] / _L_SCALE - 1.0
    out[..., 1:] = lab[..., 1:] / _AB_SCALE
    return out


def net_to_lab(net: np.ndarray) -> np.ndarray:
    out = np.empty_like(net, dtype=np.float64)
    out[..., 0] = (net[..., 0] + 1.0) * _L_SCALE
    out[..., 1:] = net[..., 1:] * _AB_SCALE
    return out


def l_to_net(l: np.ndarray) -> np.ndarray:
    """Lab L channel (any shape) -> normalized [-1, 1]."""
    return l / _L_SCALE - 1.0


def net_to_l(net_l: np.ndarray) -> np.ndarray:
    return (net_l + 1.0) * _L_SCALE


def ab_to_net(ab: np.ndarray) -> np.ndarray:
    return ab / _AB_SCALE


def net_to_ab(net_ab: np.ndarray) -> np.ndarray:
    return net_ab * _AB_SCALE


def rgb_image_to_net_lab(img: Image) -> np.ndarray:
    """Convenience: RGB Image -> normalized Lab array (H, W, 3)."""
    return lab_to_net(rgb_to_lab(img).data)


def net_lab_to_rgb_image(net: np.ndarray) -> Image:
    """Normalized Lab array (H, W, 3) -> clamped RGB Image."""
    lab = net_to_lab(net)
    lab[..., 0] = np.clip(lab[..., 0], 0.0, 100.0)
    lab[..., 1:] = np.clip(lab[..., 1:], -128.0, 127.0)
    return lab_to_rgb(Image(lab, ColorSpace.LAB))
