"""PNG (8/16-bit) and binary PPM/PGM reading and writing."""

import os

import cv2
import numpy as np

SUPPORTED_SUFFIXES = (".png", ".ppm", ".pgm", ".pnm")


class ImageFormatError(ValueError):
    """File exists but is not a supported image type or bit depth."""


def is_supported(path):
    return os.path.splitext(str(path))[1].lower() in SUPPORTED_SUFFIXES


def load_image(path):
    """Read an image as float64 in [0, 1]: ``(H, W)`` grey or ``(H, W, 3)`` RGB."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    if not is_supported(path):
        raise ImageFormatError(f"unsupported file type: {path}")
    raw = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ImageFormatError(f"could not decode {path}")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise ImageFormatError(f"unsupported sample type {raw.dtype} in {path}")
    if raw.ndim == 3:
        if raw.shape[2] == 4:
            raw = raw[:, :, :3]  # alpha is ignored
        elif raw.shape[2] != 3:
            raise ImageFormatError(f"unsupported channel count {raw.shape[2]} in {path}")
        raw = raw[:, :, ::-1]  # BGR -> RGB
    return raw.astype(np.float64) / scale


def quantize(img, bit_depth=8):
    if bit_depth not in (8, 16):
        raise ValueError(f"bit depth must be 8 or 16, got {bit_depth}")
    top = 255 if bit_depth == 8 else 65535
    codes = np.floor(np.clip(img, 0.0, 1.0) * top + 0.5)
    return codes.astype(np.uint8 if bit_depth == 8 else np.uint16)


def save_image(img, path, bit_depth=8):
    """Write ``img`` with round-half-up quantisation; format from the suffix."""
    path = os.fspath(path)
    if not is_supported(path):
        raise ImageFormatError(f"unsupported output type: {path}")
    codes = quantize(np.asarray(img, dtype=np.float64), bit_depth)
    if codes.ndim == 3:
        if os.path.splitext(path)[1].lower() == ".pgm":
            raise ImageFormatError("PGM output needs a single-channel image")
        codes = np.ascontiguousarray(codes[:, :, ::-1])
    try:
        ok = cv2.imwrite(path, codes)
    except cv2.error as exc:
        raise OSError(f"could not write {path}: {exc}") from exc
    if not ok:
        raise OSError(f"could not write {path}")
