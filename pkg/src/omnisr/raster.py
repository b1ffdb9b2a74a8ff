"""ERP raster operations: luma, degradation and the interpolation baselines.

Images are float64 arrays of shape ``(H, W)`` or ``(H, W, 3)`` with samples
in [0, 1].  Horizontal borders wrap (longitude is periodic), vertical
borders replicate the edge row.
"""

import math

import numpy as np

from . import _filters
from .erp import viewport_sample_grid

__all__ = [
    "check_image",
    "to_luma",
    "shift_x",
    "gaussian_blur",
    "blur_radius",
    "decimate",
    "degrade",
    "upsample_nn",
    "upsample_bicubic",
    "keys_kernel",
    "sample_bicubic",
    "render_viewport",
    "LUMA_COEFFS",
]

LUMA_COEFFS = (0.299, 0.587, 0.114)
KEYS_A = -0.5


def check_image(img, name="image"):
    """Validate an ERP image array and return it as float64."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    if img.ndim not in (2, 3) or (img.ndim == 3 and img.shape[2] != 3):
        raise ValueError(f"{name}: expected (H, W) or (H, W, 3), got {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"{name}: empty raster")
    if not np.all(np.isfinite(img)):
        raise ValueError(f"{name}: non-finite samples")
    return img


def to_luma(img):
    """BT.601 luma; single-channel input is returned unchanged."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    kr, _, kb = LUMA_COEFFS
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    # same weights, arranged so grey pixels map exactly onto themselves
    return g + kr * (r - g) + kb * (b - g)


def shift_x(img, s):
    """Circular shift by ``s`` columns (a rotation in longitude)."""
    return np.roll(img, s, axis=1)


def blur_radius(sigma):
    return int(math.ceil(3.0 * sigma))


def gaussian_blur(img, sigma):
    """Separable Gaussian blur, taps truncated at ceil(3*sigma)."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    taps = _filters.gaussian_taps(float(sigma), blur_radius(sigma))
    return _filters.filter2d(np.asarray(img, dtype=np.float64), taps)


def _check_factor(r):
    if not isinstance(r, (int, np.integer)) or r < 1:
        raise ValueError(f"scale factor must be an integer >= 1, got {r!r}")


def decimate(img, r):
    _check_factor(r)
    h, w = img.shape[:2]
    if h % r or w % r:
        raise ValueError(f"{w}x{h} raster is not divisible by factor {r}")
    return np.ascontiguousarray(img[::r, ::r])


def degrade(img, r, sigma=None):
    """Gaussian anti-alias blur (sigma = r/2 by default) then stride-r decimation.

    ``r == 1`` returns the input untouched.
    """
    _check_factor(r)
    img = np.asarray(img, dtype=np.float64)
    if r == 1:
        return img
    h, w = img.shape[:2]
    if h % r or w % r:
        raise ValueError(f"{w}x{h} raster is not divisible by factor {r}")
    return decimate(gaussian_blur(img, r / 2.0 if sigma is None else sigma), r)


def upsample_nn(img, r):
    _check_factor(r)
    return np.repeat(np.repeat(img, r, axis=0), r, axis=1)


def keys_kernel(t, a=KEYS_A):
    """Keys cubic convolution kernel."""
    t = np.abs(np.asarray(t, dtype=np.float64))
    t2 = t * t
    t3 = t2 * t
    near = (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0
    far = a * t3 - 5.0 * a * t2 + 8.0 * a * t - 4.0 * a
    return np.where(t <= 1.0, near, np.where(t < 2.0, far, 0.0))


def _cubic_taps(pos):
    # four source indices and weights around each (fractional) source position
    base = np.floor(pos).astype(np.int64)
    frac = pos - base
    idx = [base + k for k in (-1, 0, 1, 2)]
    wts = [keys_kernel(frac - k) for k in (-1, 0, 1, 2)]
    return idx, wts


def _resample_axis(img, pos, axis, wrap):
    n = img.shape[axis]
    idx, wts = _cubic_taps(pos)
    out = None
    for i, w in zip(idx, wts):
        i = np.mod(i, n) if wrap else np.clip(i, 0, n - 1)
        shape = [1] * img.ndim
        shape[axis] = -1
        term = w.reshape(shape) * np.take(img, i, axis=axis)
        out = term if out is None else out + term
    return out


def upsample_bicubic(img, r):
    """Keys bicubic (a = -0.5) upscaling by ``r``; output centres at (x + 0.5)/r - 0.5."""
    _check_factor(r)
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    xs = (np.arange(w * r) + 0.5) / r - 0.5
    ys = (np.arange(h * r) + 0.5) / r - 0.5
    out = _resample_axis(img, xs, axis=1, wrap=True)
    out = _resample_axis(out, ys, axis=0, wrap=False)
    return np.clip(out, 0.0, 1.0)


def sample_bicubic(img, x, y):
    """Bicubic samples at index coordinates (x, y) of equal shape.

    Index coordinates put pixel centres on integers, i.e. raster
    coordinate ``u`` corresponds to ``x = u - 0.5``.  Not clamped.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    xi, xw = _cubic_taps(np.asarray(x, dtype=np.float64))
    yi, yw = _cubic_taps(np.asarray(y, dtype=np.float64))
    tail = (Ellipsis,) + (None,) * (img.ndim - 2)
    out = 0.0
    for iy, wy in zip(yi, yw):
        iy = np.clip(iy, 0, h - 1)
        row = 0.0
        for ix, wx in zip(xi, xw):
            row = row + wx[tail] * img[iy, np.mod(ix, w)]
        out = out + wy[tail] * row
    return out


def render_viewport(img, spec):
    """Rectilinear crop of an ERP image, bicubic-sampled and clamped to [0, 1]."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    u, v = viewport_sample_grid(spec, w, h)
    return np.clip(sample_bicubic(img, u - 0.5, v - 0.5), 0.0, 1.0)
