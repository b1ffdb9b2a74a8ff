"""Separable 1-D filtering under the ERP border policy.

Columns (longitude) wrap around, rows (latitude) replicate the edge row.
Every output sample is accumulated over the taps in a fixed order, so a
circular column shift of the input shifts the output bit-for-bit.
"""

import numpy as np


def gaussian_taps(sigma, radius):
    i = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(i * i) / (2.0 * sigma * sigma))
    return k / k.sum()


def _correlate(padded, taps, n, axis):
    # out[j] = sum_k taps[k] * padded[j + k], taken along `axis`
    def take(k):
        idx = [slice(None)] * padded.ndim
        idx[axis] = slice(k, k + n)
        return padded[tuple(idx)]

    out = taps[0] * take(0)
    for k in range(1, len(taps)):
        out += taps[k] * take(k)
    return out


def _pad_spec(ndim, axis, r):
    spec = [(0, 0)] * ndim
    spec[axis] = (r, r)
    return spec


def filter_rows(img, taps):
    """Correlate every row with ``taps`` (odd length), wrapping horizontally."""
    r = len(taps) // 2
    w = img.shape[1]
    padded = np.pad(img, _pad_spec(img.ndim, 1, r), mode="wrap")
    return _correlate(padded, taps, w, axis=1)


def filter_cols(img, taps):
    """Correlate every column with ``taps``, clamping at the top/bottom rows."""
    r = len(taps) // 2
    h = img.shape[0]
    padded = np.pad(img, _pad_spec(img.ndim, 0, r), mode="edge")
    return _correlate(padded, taps, h, axis=0)


def filter_rows_adjoint(g, taps):
    # circular correlation: the adjoint is correlation with the reversed taps
    return filter_rows(g, np.ascontiguousarray(taps[::-1]))


def filter_cols_adjoint(g, taps):
    """Transpose of :func:`filter_cols`.

    Edge replication is not self-adjoint: contributions that landed on the
    replicated rows are folded back onto the first/last row.
    """
    r = len(taps) // 2
    h = g.shape[0]
    z = np.zeros((h + 2 * r,) + g.shape[1:], dtype=np.float64)
    for k in range(len(taps)):
        z[k:k + h] += taps[k] * g
    out = z[r:r + h].copy()
    if r:
        out[0] += z[:r].sum(axis=0)
        out[-1] += z[r + h:].sum(axis=0)
    return out


def filter2d(img, taps):
    return filter_cols(filter_rows(img, taps), taps)


def filter2d_adjoint(g, taps):
    return filter_rows_adjoint(filter_cols_adjoint(g, taps), taps)
