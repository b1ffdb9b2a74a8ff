"""Full-reference quality metrics: PSNR, SSIM and their spherically weighted forms.

All reductions use :func:`math.fsum`, which is exactly rounded and therefore
independent of summation order.  Together with the wrap-around windows this
makes every metric bit-identical under a circular shift in longitude.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _filters
from .erp import row_weights

__all__ = [
    "SsimParams",
    "DegenerateMetricError",
    "psnr",
    "ws_psnr",
    "ssim_map",
    "ssim",
    "ws_ssim",
]


class DegenerateMetricError(ArithmeticError):
    """The images are identical, so the (WS-)PSNR is unbounded."""


@dataclass(frozen=True)
class SsimParams:
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0
    window_size: int = 11
    window_sigma: float = 1.5

    def __post_init__(self):
        if min(self.k1, self.k2, self.dynamic_range, self.window_sigma) <= 0:
            raise ValueError("SSIM constants must be positive")
        if self.window_size < 1 or self.window_size % 2 == 0:
            raise ValueError("window size must be a positive odd integer")

    @property
    def c1(self):
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self):
        return (self.k2 * self.dynamic_range) ** 2

    @cached_property
    def window(self):
        """1-D Gaussian taps; the 2-D window is their outer product."""
        return _filters.gaussian_taps(self.window_sigma, self.window_size // 2)


def _pair(ref, dist, single_channel=False):
    ref = np.asarray(ref, dtype=np.float64)
    dist = np.asarray(dist, dtype=np.float64)
    if ref.shape != dist.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {dist.shape}")
    if single_channel and ref.ndim != 2:
        raise ValueError(f"expected a single-channel (H, W) image, got {ref.shape}")
    return ref, dist


def _weights_for(weights, height):
    if weights is None:
        return row_weights(height)
    if weights.height != height:
        raise ValueError(f"weight map has {weights.height} rows, image has {height}")
    return weights


def _db(data_range, mse):
    if mse == 0.0:
        raise DegenerateMetricError("zero error: PSNR is infinite")
    return 10.0 * math.log10(data_range * data_range / mse)


def psnr(ref, dist, data_range=1.0):
    ref, dist = _pair(ref, dist)
    err = ref - dist
    return _db(data_range, math.fsum((err * err).ravel()) / err.size)


def ws_psnr(ref, dist, weights=None, data_range=1.0):
    """PSNR with every squared error weighted by its row's sphere-area weight."""
    ref, dist = _pair(ref, dist)
    weights = _weights_for(weights, ref.shape[0])
    err = ref - dist
    q = weights.as_column()
    channels = 1
    if ref.ndim == 3:
        q = q[:, :, None]
        channels = ref.shape[2]
    wmse = math.fsum((err * err * q).ravel()) / (
        channels * weights.total_for_width(ref.shape[1]))
    return _db(data_range, wmse)


class _SsimTerms:
    """Local Gaussian-window moments and the SSIM fraction built from them."""

    def __init__(self, x, y, params):
        taps = params.window
        g = lambda a: _filters.filter2d(a, taps)  # noqa: E731
        self.params = params
        self.x, self.y = x, y
        self.mu_x, self.mu_y = g(x), g(y)
        mxx, myy, mxy = self.mu_x * self.mu_x, self.mu_y * self.mu_y, self.mu_x * self.mu_y
        var_x = g(x * x) - mxx
        var_y = g(y * y) - myy
        cov = g(x * y) - mxy
        c1, c2 = params.c1, params.c2
        self.a1 = 2.0 * mxy + c1
        self.a2 = 2.0 * cov + c2
        self.b1 = mxx + myy + c1
        self.b2 = var_x + var_y + c2
        self.den = self.b1 * self.b2
        self.map = (self.a1 * self.a2) / self.den


def ssim_map(ref, dist, params=None):
    """Per-pixel SSIM with an 11x11 Gaussian window; full W x H extent."""
    ref, dist = _pair(ref, dist, single_channel=True)
    return _SsimTerms(ref, dist, params or SsimParams()).map


def ssim(ref, dist, params=None):
    smap = ssim_map(ref, dist, params)
    return math.fsum(smap.ravel()) / smap.size


def weighted_mean(smap, weights):
    return math.fsum((smap * weights.as_column()).ravel()) / weights.total_for_width(smap.shape[1])


def ws_ssim(ref, dist, params=None, weights=None):
    """Sphere-weighted mean of the SSIM map (row weights from :func:`row_weights`)."""
    smap = ssim_map(ref, dist, params)
    return weighted_mean(smap, _weights_for(weights, smap.shape[0]))
