"""Differentiable affine warping in attribute units.

Transforms are expressed as 3x3 matrices acting on image content in
normalized [-1, 1] coordinates (x right, y down, origin at the image
center). `F.affine_grid` expects the output->input map, i.e. the inverse of
the content transform, which is taken once after all composition so that a
normalization + retarget pass costs a single resampling.

Attribute units are natural: degrees for rotation, a multiplicative factor
for scale (> 1 enlarges the content), pixels for shift (along x). All matrix
construction is differentiable with respect to the attribute values.
"""

import math

import torch
import torch.nn.functional as F


def _eye3(b, dtype, device):
    return torch.eye(3, dtype=dtype, device=device).expand(b, 3, 3).clone()


def rotation_matrix(degrees):
    """Content rotation by `degrees` [B] around the image center."""
    rad = degrees * (math.pi / 180.0)
    c, s = torch.cos(rad), torch.sin(rad)
    m = _eye3(degrees.shape[0], degrees.dtype, degrees.device)
    m[:, 0, 0] = c
    m[:, 0, 1] = -s
    m[:, 1, 0] = s
    m[:, 1, 1] = c
    return m


def scale_matrix(factor):
    m = _eye3(factor.shape[0], factor.dtype, factor.device)
    m[:, 0, 0] = factor
    m[:, 1, 1] = factor
    return m


def shift_matrix(pixels_x, width):
    m = _eye3(pixels_x.shape[0], pixels_x.dtype, pixels_x.device)
    m[:, 0, 2] = pixels_x * (2.0 / width)
    return m


def attr_matrix(specs, values, image_size):
    """Compose the content transform for an attribute batch.

    values: [B, len(specs)] in natural units. image_size: (H, W), needed to
    normalize pixel shifts. Geometric spec kinds compose in list order;
    non-geometric entries are ignored (they do not move pixels).
    """
    if values.ndim != 2 or values.shape[1] != len(specs):
        raise ValueError(
            f"attribute batch of width {values.shape[-1]} for {len(specs)} specs"
        )
    if not torch.isfinite(values).all():
        raise ValueError("non-finite attribute values")
    b = values.shape[0]
    m = _eye3(b, values.dtype, values.device)
    _, w = image_size
    for j, spec in enumerate(specs):
        col = values[:, j]
        if spec.kind == "geometric-rotation":
            m = m @ rotation_matrix(col)
        elif spec.kind == "geometric-scale":
            m = m @ scale_matrix(col)
        elif spec.kind == "geometric-shift":
            m = m @ shift_matrix(col, w)
        elif spec.kind == "object-level":
            continue
        else:
            raise ValueError(f"unknown attribute kind {spec.kind!r}")
    return m


def warp_with_matrix(x, content_mat, padding_mode="zeros"):
    """Resample `x` under the 3x3 content transform (batched).

    The grid is built in float64 so an identity transform reproduces the
    input to well under 1e-6 even for float32 images.
    """
    theta = torch.linalg.inv(content_mat.double())[:, :2, :]
    grid = F.affine_grid(theta, x.shape, align_corners=False).to(x.dtype)
    out = F.grid_sample(
        x, grid, mode="bilinear", padding_mode=padding_mode, align_corners=False
    )
    return out.clamp(0.0, 1.0)


def warp_attributes(x, specs, values, padding_mode="zeros"):
    values = values.to(x.dtype)
    return warp_with_matrix(x, attr_matrix(specs, values, x.shape[-2:]), padding_mode)


def warp_affine(x, rotation=None, scale=None, shift=None, padding_mode="zeros"):
    """Warp by explicit per-image parameters (degrees, factor, pixels)."""
    b = x.shape[0]

    def as_col(v, default):
        if v is None:
            return torch.full((b,), default, dtype=x.dtype, device=x.device)
        v = torch.as_tensor(v, dtype=x.dtype, device=x.device)
        return v.expand(b) if v.ndim == 0 else v

    rotation = as_col(rotation, 0.0)
    scale = as_col(scale, 1.0)
    shift = as_col(shift, 0.0)
    for name, v in (("rotation", rotation), ("scale", scale), ("shift", shift)):
        if not torch.isfinite(v).all():
            raise ValueError(f"non-finite {name} parameters")
    m = (
        rotation_matrix(rotation)
        @ scale_matrix(scale)
        @ shift_matrix(shift, x.shape[-1])
    )
    return warp_with_matrix(x, m, padding_mode)
