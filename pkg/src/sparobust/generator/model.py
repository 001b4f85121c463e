"""Conditional adversarial-noise generator.

A small convolutional encoder-decoder consuming, channel-wise: the base
image, the accumulated noise, the classifier's input gradient, the diversity
variable broadcast to constant spatial planes, and a learned label-embedding
plane. The output head is tanh-squashed, so each step's raw noise lies in
[-1, 1] per pixel before scaling by the step size.
"""

import torch
import torch.nn as nn
import torch.nn.functional as F

from sparobust.checkpoint import CheckpointError, load_checkpoint, save_checkpoint


class NoiseGenerator(nn.Module):
    def __init__(self, image_channels, num_classes, z_dim=8, label_dim=1, width=32):
        super().__init__()
        self.image_channels = image_channels
        self.num_classes = num_classes
        self.z_dim = z_dim
        self.label_dim = label_dim
        self.width = width
        cin = image_channels * 3 + z_dim + label_dim
        self.label_embed = nn.Embedding(num_classes, label_dim)
        # encoder/decoder run at half resolution; the head sees upsampled
        # features plus a full-resolution skip of the raw conditioning, so
        # per-pixel gradient detail survives
        self.enc1 = nn.Conv2d(cin, width, 3, stride=2, padding=1)
        self.enc2 = nn.Conv2d(width, width * 2, 3, padding=1)
        self.dec1 = nn.Conv2d(width * 2, width, 3, padding=1)
        self.head = nn.Conv2d(width + image_channels * 3, image_channels, 3, padding=1)

    def forward(self, x, z, y, delta, grad):
        b, _, h, w = x.shape
        z_planes = z.view(b, self.z_dim, 1, 1).expand(b, self.z_dim, h, w)
        y_planes = self.label_embed(y).view(b, self.label_dim, 1, 1).expand(
            b, self.label_dim, h, w
        )
        skip = torch.cat([x, delta, grad], dim=1)
        inp = torch.cat([skip, z_planes, y_planes], dim=1)
        e = F.relu(self.enc1(inp))
        e = F.relu(self.enc2(e))
        d = F.relu(self.dec1(e))
        if d.shape[-2] * 2 == h and d.shape[-1] * 2 == w:
            d = F.interpolate(d, scale_factor=2, mode="nearest")
        else:  # odd input sizes; size-based nearest-exact avoids a slow kernel
            d = F.interpolate(d, size=(h, w), mode="nearest-exact")
        return torch.tanh(self.head(torch.cat([d, skip], dim=1)))

    def config(self):
        return {
            "image_channels": self.image_channels,
            "num_classes": self.num_classes,
            "z_dim": self.z_dim,
            "label_dim": self.label_dim,
            "width": self.width,
        }


def save_generator(path, gen, meta=None):
    info = dict(gen.config())
    info.update(meta or {})
    save_checkpoint(path, "generator", gen.state_dict(), info)


def load_generator(path, expect=None):
    """Rebuild a generator from its checkpoint.

    `expect` may pin config fields (e.g. z_dim); a mismatch is an error
    rather than a silent re-shape.
    """
    blob = load_checkpoint(path, expected_kind="generator")
    meta = blob["meta"]
    for key, want in (expect or {}).items():
        if meta.get(key) != want:
            raise CheckpointError(
                f"generator checkpoint has {key}={meta.get(key)!r}, expected {want!r}"
            )
    gen = NoiseGenerator(
        image_channels=meta["image_channels"],
        num_classes=meta["num_classes"],
        z_dim=meta["z_dim"],
        label_dim=meta["label_dim"],
        width=meta["width"],
    )
    gen.load_state_dict(blob["state"])
    gen.eval()
    return gen
