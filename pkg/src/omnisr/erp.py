"""Equirectangular (ERP) raster geometry.

Row weights for spherically uniform quality measurement, the pixel/direction
mapping and the ray grid of a rectilinear (gnomonic) viewport.  Pixel
centres sit at integer + 0.5 throughout.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "WeightMap",
    "ViewportSpec",
    "row_weights",
    "pixel_to_direction",
    "direction_to_pixel",
    "viewport_sample_grid",
]


@dataclass(frozen=True)
class WeightMap:
    """Per-row spherical area weights of an ERP raster (constant along a row)."""

    height: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.shape[0] != self.height:
            raise ValueError(f"expected {self.height} row weights, got shape {w.shape}")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, height):
        """All-ones weights; reduces the WS metrics to their planar versions."""
        return cls(height, np.ones(height))

    def total_for_width(self, width):
        return width * math.fsum(self.weights)

    def as_column(self):
        return self.weights[:, None]


def row_weights(height):
    """Spherical stretching weights ``cos((y + 0.5 - N/2) * pi / N)`` for N rows.

    ``N`` is the height of the raster actually being weighted (for a
    downscaled image that is the reduced height).

    >>> row_weights(4).weights.round(7).tolist()
    [0.3826834, 0.9238795, 0.9238795, 0.3826834]
    """
    if not isinstance(height, (int, np.integer)) or height < 1:
        raise ValueError(f"height must be a positive integer, got {height!r}")
    y = np.arange(height, dtype=np.float64)
    # |offset| keeps the north/south halves bit-identical
    offset = np.abs(y + 0.5 - height / 2.0)
    return WeightMap(int(height), np.cos(offset * math.pi / height))


def pixel_to_direction(u, v, width, height):
    """Map continuous raster coordinates to (longitude, latitude) in radians.

    ``u`` runs over [0, width], ``v`` over [0, height]; scalars or arrays.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if np.any((u < 0) | (u > width)) or np.any((v < 0) | (v > height)):
        raise ValueError("raster coordinates outside [0, W] x [0, H]")
    lon = (u / width) * 2.0 * math.pi - math.pi
    lat = math.pi / 2.0 - (v / height) * math.pi
    if lon.ndim == 0:
        return float(lon), float(lat)
    return lon, lat


def direction_to_pixel(lon, lat, width, height):
    """Inverse of :func:`pixel_to_direction`; ``u`` is wrapped into [0, W)."""
    lon = np.asarray(lon, dtype=np.float64)
    lat = np.asarray(lat, dtype=np.float64)
    u = np.mod((lon + math.pi) / (2.0 * math.pi) * width, width)
    v = (math.pi / 2.0 - lat) / math.pi * height
    if u.ndim == 0:
        return float(u), float(v)
    return u, v


@dataclass(frozen=True)
class ViewportSpec:
    """A rectilinear crop looking at (yaw, pitch); angles in radians."""

    yaw: float
    pitch: float
    horizontal_fov: float
    out_width: int
    out_height: int

    def __post_init__(self):
        if not -math.pi <= self.yaw < math.pi:
            raise ValueError(f"yaw {self.yaw} outside [-pi, pi)")
        if not -math.pi / 2 <= self.pitch <= math.pi / 2:
            raise ValueError(f"pitch {self.pitch} outside [-pi/2, pi/2]")
        if not 0.0 < self.horizontal_fov < math.pi:
            raise ValueError(f"horizontal fov {self.horizontal_fov} outside (0, pi)")
        if self.out_width < 1 or self.out_height < 1:
            raise ValueError("viewport size must be positive")

    @classmethod
    def from_degrees(cls, yaw_deg, pitch_deg, fov_deg, width, height):
        # normalise yaw into [-180, 180) so any heading is accepted
        yaw_deg = (yaw_deg + 180.0) % 360.0 - 180.0
        return cls(math.radians(yaw_deg), math.radians(pitch_deg),
                   math.radians(fov_deg), int(width), int(height))

    @property
    def focal(self):
        return (self.out_width / 2.0) / math.tan(self.horizontal_fov / 2.0)

    @property
    def vertical_fov(self):
        return 2.0 * math.atan((self.out_height / 2.0) / self.focal)


def viewport_sample_grid(spec, width, height):
    """Source raster coordinates (u, v) for every viewport pixel.

    Returns two ``(out_height, out_width)`` arrays.  ``u`` is wrapped into
    [0, width); ``v`` lies in [0, height].
    """
    f = spec.focal
    xs = (np.arange(spec.out_width) + 0.5 - spec.out_width / 2.0) / f
    ys = (spec.out_height / 2.0 - (np.arange(spec.out_height) + 0.5)) / f
    xc, yc = np.meshgrid(xs, ys)

    cy, sy = math.cos(spec.yaw), math.sin(spec.yaw)
    cp, sp = math.cos(spec.pitch), math.sin(spec.pitch)
    # world frame: +z forward (lon 0), +x towards lon +pi/2, +y up
    forward = (cp * sy, sp, cp * cy)
    right = (cy, 0.0, -sy)
    up = (-sp * sy, cp, -sp * cy)

    rx = xc * right[0] + yc * up[0] + forward[0]
    ry = xc * right[1] + yc * up[1] + forward[1]
    rz = xc * right[2] + yc * up[2] + forward[2]

    lon = np.arctan2(rx, rz)
    lat = np.arctan2(ry, np.hypot(rx, rz))
    return direction_to_pixel(lon, lat, width, height)
