"""Projection onto the l-infinity ball intersected with the pixel range."""

import torch


def project(x_base, candidate, eps):
    """Clamp `candidate` so the noise stays in the eps-ball around `x_base`
    and the result stays a valid image.

    Per pixel: noise clamped to [-eps, eps], then the sum clamped to [0, 1].
    Differentiable; a candidate already satisfying both constraints passes
    through unchanged.
    """
    if candidate.shape != x_base.shape:
        raise ValueError(
            f"shape mismatch: base {tuple(x_base.shape)} vs "
            f"candidate {tuple(candidate.shape)}"
        )
    delta = torch.clamp(candidate - x_base, -eps, eps)
    return torch.clamp(x_base + delta, 0.0, 1.0)
