"""Manipulator dispatch and the trivial identity manipulator."""

import warnings

import torch


def clamp_attributes(specs, values, mode):
    """Range-check an attribute batch.

    In attack mode out-of-range values are clamped with a warning; in
    training mode they are a hard error.
    """
    if not specs:
        return values
    lo = torch.tensor([s.lo for s in specs], dtype=values.dtype, device=values.device)
    hi = torch.tensor([s.hi for s in specs], dtype=values.dtype, device=values.device)
    if bool((values < lo - 1e-6).any() or (values > hi + 1e-6).any()):
        if mode == "train":
            raise ValueError("attribute values outside declared ranges")
        warnings.warn("attribute values clamped to declared ranges", stacklevel=3)
        return torch.min(torch.max(values, lo), hi)
    return values


def apply_manipulator(manipulator, x, alpha, mode="attack"):
    """Kind-appropriate dispatch; output stays in [0, 1]."""
    return manipulator.apply(x, alpha, mode=mode)


class IdentityManipulator:
    """No-op manipulator with an empty attribute list (ablation tool)."""

    specs = ()

    @property
    def num_attributes(self):
        return 0

    def apply(self, x, alpha=None, mode="attack"):
        if alpha is not None and alpha.numel():
            raise ValueError("identity manipulator takes no attributes")
        return x
