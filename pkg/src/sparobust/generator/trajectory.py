"""Recursive noise accumulation and the diversity objective."""

from dataclasses import dataclass

import torch

from sparobust.classifier.ops import input_gradient
from sparobust.generator.projection import project


@dataclass
class NoiseTrajectory:
    """Per-step perturbed images and accumulated noises for one z draw.

    steps[t] is the perturbed image after t+1 recursion steps; deltas[t] is
    steps[t] - base. Every delta satisfies the eps-ball bound and every step
    stays a valid image (projection enforces both).
    """

    steps: list
    deltas: list
    z: torch.Tensor
    base: torch.Tensor

    @property
    def final(self):
        return self.steps[-1]

    @property
    def depth(self):
        return len(self.steps)

    def half(self, which):
        """View of the first or second half of a duplicated batch."""
        b = self.base.shape[0] // 2
        sl = slice(0, b) if which == 0 else slice(b, 2 * b)
        return NoiseTrajectory(
            steps=[s[sl] for s in self.steps],
            deltas=[d[sl] for d in self.deltas],
            z=self.z[sl],
            base=self.base[sl],
        )


def generate_trajectory(gen, x_attr, z, y, model, steps, eps, eps_step):
    """Run the recursive noise generation for `steps` iterations.

    Each step evaluates the classifier's per-example input gradient at the
    current iterate (a detached conditioning signal), feeds (base image, z,
    label, accumulated noise, gradient) to the generator, adds the
    eps_step-scaled output and projects back onto the eps-ball/pixel-range
    intersection. The result is differentiable with respect to z and the
    generator parameters.
    """
    if steps < 1:
        raise ValueError("recursion depth must be >= 1")
    if eps_step > eps + 1e-12:
        raise ValueError("eps_step must not exceed eps")
    x_t = x_attr
    delta = torch.zeros_like(x_attr)
    trail_steps, trail_deltas = [], []
    for t in range(steps):
        grad = input_gradient(model, x_t, y, reduction="sum").detach()
        # per-example normalization keeps the conditioning informative even
        # when the classifier is saturated and raw gradients are tiny
        scale = grad.abs().flatten(1).max(dim=1).values.view(-1, 1, 1, 1)
        grad = grad / (scale + 1e-12)
        out = gen(x_attr, z, y, delta, grad)
        x_t = project(x_attr, x_t + eps_step * out, eps)
        if not torch.isfinite(x_t).all():
            raise RuntimeError(f"non-finite perturbed image at recursion step {t}")
        delta = x_t - x_attr
        trail_steps.append(x_t)
        trail_deltas.append(delta)
    return NoiseTrajectory(steps=trail_steps, deltas=trail_deltas, z=z, base=x_attr)


def diversity_loss(traj1: NoiseTrajectory, traj2: NoiseTrajectory):
    """Mean per-step L1 separation of two trajectories over the L1
    separation of their diversity draws, averaged over the batch.

    The trajectories must share the base image and depth and differ in z
    everywhere; a zero z-distance is a precondition violation.
    """
    if traj1.depth != traj2.depth:
        raise ValueError("trajectories differ in recursion depth")
    if traj1.base.shape != traj2.base.shape:
        raise ValueError("trajectories differ in base shape")
    z_dist = (traj1.z - traj2.z).abs().flatten(1).sum(dim=1)
    if bool((z_dist == 0).any()):
        raise ValueError("diversity loss undefined for identical z draws")
    sep = torch.stack(
        [
            (s1 - s2).abs().flatten(1).sum(dim=1)
            for s1, s2 in zip(traj1.steps, traj2.steps)
        ]
    ).mean(dim=0)
    return (sep / z_dist).mean()
