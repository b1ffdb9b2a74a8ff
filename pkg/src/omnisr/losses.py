"""Training-objective operators for ODI super-resolution.

Networks are external: the feature and adversarial terms take already
computed feature maps and discriminator probabilities.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _filters
from .metrics import SsimParams, _pair, _SsimTerms, _weights_for, weighted_mean

__all__ = [
    "LossWeights",
    "d_360ss",
    "loss_360ss",
    "grad_360ss",
    "feature_loss",
    "adversarial_loss",
    "total_objective",
    "patch_score_average",
]


@dataclass(frozen=True)
class LossWeights:
    beta: float = 10.0
    gamma: float = 10.0

    def __post_init__(self):
        for name in ("beta", "gamma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


def d_360ss(ref, dist, params=None, weights=None):
    """Sphere-weighted SSIM of one luma pair (1 for a perfect reconstruction)."""
    ref, dist = _pair(ref, dist, single_channel=True)
    terms = _SsimTerms(ref, dist, params or SsimParams())
    return weighted_mean(terms.map, _weights_for(weights, ref.shape[0]))


def loss_360ss(pairs, params=None):
    """``1 - mean(d_360ss)`` over a batch of (ref, dist) luma pairs.

    The weights of each pair come from its own height.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empty batch")
    ds = [d_360ss(ref, dist, params) for ref, dist in pairs]
    return 1.0 - math.fsum(ds) / len(ds)


def grad_360ss(ref, dist, params=None, weights=None):
    """Gradient of ``1 - d_360ss(ref, dist)`` with respect to ``dist``.

    Backpropagates through the five windowed moments; the window adjoint
    honours the wrap/clamp borders exactly.
    """
    params = params or SsimParams()
    ref, dist = _pair(ref, dist, single_channel=True)
    h, w = ref.shape
    weights = _weights_for(weights, h)
    t = _SsimTerms(ref, dist, params)

    # d(d360)/d(map) per pixel
    m = np.broadcast_to(weights.as_column() / weights.total_for_width(w), (h, w))
    s = t.map
    # partials of SSIM w.r.t. mu_y, E[y^2] and E[xy] (the local moments of dist)
    d_mu = (2.0 * t.mu_x * (t.a2 - t.a1) - s * 2.0 * t.mu_y * (t.b2 - t.b1)) / t.den
    d_yy = -s * t.b1 / t.den
    d_xy = 2.0 * t.a1 / t.den

    taps = params.window
    adj = lambda a: _filters.filter2d_adjoint(a, taps)  # noqa: E731
    grad = adj(m * d_mu) + 2.0 * dist * adj(m * d_yy) + ref * adj(m * d_xy)
    return -grad


def feature_loss(f_ref, f_dist, norm="l2"):
    """Mean squared (or absolute, ``norm='l1'``) feature difference.

    Accepts a single pair of arrays or two equal-length sequences of
    arrays; in the batched case the per-pair losses are averaged.
    """
    if norm not in ("l1", "l2"):
        raise ValueError(f"norm must be 'l1' or 'l2', got {norm!r}")
    if isinstance(f_ref, np.ndarray) or np.isscalar(f_ref):
        f_ref, f_dist = [f_ref], [f_dist]
    f_ref, f_dist = list(f_ref), list(f_dist)
    if len(f_ref) != len(f_dist) or not f_ref:
        raise ValueError("feature batches must be non-empty and of equal length")
    per_pair = []
    for a, b in zip(f_ref, f_dist):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.shape != b.shape:
            raise ValueError(f"feature map shapes differ: {a.shape} vs {b.shape}")
        diff = a - b
        e = diff * diff if norm == "l2" else np.abs(diff)
        per_pair.append(math.fsum(e.ravel()) / max(e.size, 1))
    return math.fsum(per_pair) / len(per_pair)


def adversarial_loss(probs):
    """``sum(-ln p)`` over the discriminator's probabilities (a sum, not a mean)."""
    p = np.atleast_1d(np.asarray(probs, dtype=np.float64))
    if p.size == 0:
        raise ValueError("empty probability batch")
    if np.any(~np.isfinite(p)) or np.any(p <= 0.0) or np.any(p > 1.0):
        raise ValueError("probabilities must lie in (0, 1]")
    return math.fsum(-np.log(p))


def total_objective(l_adv, l_feat, l_360, weights=None):
    weights = weights or LossWeights()
    return l_adv + weights.beta * l_feat + weights.gamma * l_360


def patch_score_average(scores):
    """Mean of a PatchGAN score grid."""
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise ValueError("empty score grid")
    if np.any(~np.isfinite(s)) or np.any((s < 0.0) | (s > 1.0)):
        raise ValueError("patch scores must lie in [0, 1]")
    return math.fsum(s.ravel()) / s.size
