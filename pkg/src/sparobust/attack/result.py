"""Attack output container."""

from dataclasses import dataclass, field

import torch


@dataclass
class PerturbationResult:
    """Final perturbed batch plus the attack's internal state.

    delta is measured from the attribute-perturbed base, so
    `x_spa - delta` recovers that base and `delta.abs().max() <= eps`
    is the ball invariant.
    """

    x_spa: torch.Tensor
    alpha: torch.Tensor
    z: torch.Tensor
    delta: torch.Tensor
    loss_trace: list = field(default_factory=list)
    success: torch.Tensor = None

    @property
    def accuracy(self):
        return 1.0 - float(self.success.float().mean())

    def delta_linf(self):
        return self.delta.abs().flatten(1).max(dim=1).values

    def check(self, eps, tol=1e-6):
        """Assert the ball and pixel-range invariants; returns self."""
        worst = float(self.delta.abs().max()) if self.delta.numel() else 0.0
        if worst > eps + tol:
            raise RuntimeError(f"ball invariant violated: |delta|_inf={worst} > {eps}")
        if self.x_spa.numel() and (
            float(self.x_spa.min()) < -tol or float(self.x_spa.max()) > 1 + tol
        ):
            raise RuntimeError("pixel-range invariant violated")
        return self
