"""Seeding helpers shared by every component that draws random numbers."""

import random

import numpy as np
import torch


def seed_everything(seed: int):
    """Seed python, numpy and torch global RNGs."""
    random.seed(seed)
    np.random.seed(seed % 2**32)
    torch.manual_seed(seed)


def set_deterministic(enabled: bool = True):
    """Request bit-exact reproducibility from torch kernels."""
    torch.use_deterministic_algorithms(enabled)


def make_generator(seed: int) -> torch.Generator:
    g = torch.Generator()
    g.manual_seed(int(seed) % 2**63)
    return g


def derive_seed(base: int, *tags) -> int:
    """Stable sub-seed for a named component; independent of call order."""
    import hashlib

    h = hashlib.sha256(("/".join([str(base)] + [str(t) for t in tags])).encode())
    return int.from_bytes(h.digest()[:8], "little") % 2**31
