"""Defense-side configuration and the training log."""

import json
import os
import time
from dataclasses import dataclass, field

from sparobust.attack.config import AttackConfig

DEFENSE_KINDS = (
    "plain",
    "pgd",
    "attribute-augmented",
    "generator-only",
    "spa",
    "pgd-attr",
)


@dataclass
class DefenseConfig:
    kind: str = "spa"
    iters: int = 600
    batch_size: int = 100
    lr: float = 0.01
    betas: tuple = (0.9, 0.99)
    weight_decay: float = 1e-4
    lambda_div: float = 0.1
    attack: AttackConfig = field(default_factory=AttackConfig)
    profile: str = "cnn-small"
    z_dim: int = 8
    gen_width: int = 16
    # fraction of fresh attribute draws pinned to the canonical pose; used
    # when fitting attack generators so upright inputs stay in-distribution
    canonical_alpha_frac: float = 0.0
    seed: int = 0
    eval_every: int = 0
    probe_samples: int = 200

    def __post_init__(self):
        if self.kind not in DEFENSE_KINDS:
            raise ValueError(f"unknown defense kind {self.kind!r}")
        if self.lambda_div < 0:
            raise ValueError("diversity weight must be >= 0")
        if self.iters < 1:
            raise ValueError("iteration budget must be >= 1")


class TrainingLog:
    """Append-only per-iteration record with JSONL persistence."""

    def __init__(self):
        self.rows = []
        self._t0 = time.monotonic()

    def append(self, **kw):
        kw.setdefault("wall_clock", time.monotonic() - self._t0)
        for k, v in kw.items():
            if isinstance(v, float) and v != v:  # NaN slipped through a check
                raise RuntimeError(f"non-finite value logged for {k!r}")
        self.rows.append(kw)

    def save_jsonl(self, path):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            for row in self.rows:
                fh.write(json.dumps(row) + "\n")

    def __len__(self):
        return len(self.rows)
