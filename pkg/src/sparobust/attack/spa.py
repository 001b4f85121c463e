"""Joint attribute/noise attack and its single-branch ablations.

The attack ascends the classification loss over the attribute values and
the diversity variable through the manipulator -> generator -> classifier
cascade. Attribute values are optimized in an unconstrained tanh-squashed
parameterization, so they stay inside the declared ranges without clipping.
After the optimization loop the sample is regenerated once from a fresh
zero-noise recursion at the final (alpha, z).
"""

import torch

from sparobust.attack.result import PerturbationResult
from sparobust.classifier.losses import cross_entropy_logits
from sparobust.classifier.ops import eval_mode
from sparobust.generator.trajectory import generate_trajectory
from sparobust.seeding import make_generator

_ATANH_MARGIN = 1e-4


def _ranges(specs, dtype):
    lo = torch.tensor([s.lo for s in specs], dtype=dtype)
    hi = torch.tensor([s.hi for s in specs], dtype=dtype)
    return lo, hi


def _alpha_of(w, lo, hi):
    return lo + (hi - lo) * 0.5 * (torch.tanh(w) + 1.0)


def _init_alpha_raw(specs, batch, cfg, rng, dtype):
    lo, hi = _ranges(specs, dtype)
    width = hi - lo
    if cfg.alpha_init == "canonical":
        base = torch.tensor([s.canonical for s in specs], dtype=dtype)
        a0 = base + cfg.alpha_init_jitter * width * (
            torch.rand(batch, len(specs), generator=rng) - 0.5
        )
    else:
        a0 = lo + width * torch.rand(batch, len(specs), generator=rng)
    frac = ((a0 - lo) / width).clamp(_ATANH_MARGIN, 1.0 - _ATANH_MARGIN)
    w = torch.atanh(2.0 * frac - 1.0)
    return w.requires_grad_(True), lo, hi


def _make_opt(params, kind, lr):
    if kind == "adam":
        return torch.optim.Adam(params, lr=lr)
    return torch.optim.SGD(params, lr=lr)


def spa_optimize(x, y, manipulator, generator, model, cfg):
    """Run the outer optimization loop; returns (alpha, z, loss trace).

    Either component may be None: no manipulator means the noise-only
    attack on the raw images, no generator means the attribute-only attack.
    Gradient ascent steps use the configured optimizer; disabled parameters
    keep their random initialization (the "fixed random" ablation rows).
    """
    rng = make_generator(cfg.seed)
    x = x.detach()
    a_dim = manipulator.num_attributes if manipulator is not None else 0
    w = lo = hi = None
    if a_dim:
        w, lo, hi = _init_alpha_raw(manipulator.specs, x.shape[0], cfg, rng, x.dtype)
    z = None
    if generator is not None:
        z = torch.randn(x.shape[0], generator.z_dim, generator=rng)
        z.requires_grad_(True)

    targets, opts = [], []
    if a_dim and cfg.optimize_alpha:
        targets.append(w)
        opts.append(_make_opt([w], cfg.optimizer, cfg.alpha_lr))
    if generator is not None and cfg.optimize_z:
        targets.append(z)
        opts.append(_make_opt([z], cfg.optimizer, cfg.z_lr))

    trace = []
    for i in range(cfg.iters):
        x_attr = manipulator.apply(x, _alpha_of(w, lo, hi)) if a_dim else x
        if generator is not None:
            traj = generate_trajectory(
                generator, x_attr, z, y, model, cfg.steps, cfg.eps, cfg.eps_step
            )
            x_fin = traj.final
        else:
            x_fin = x_attr
        loss = cross_entropy_logits(model.logits(x_fin), y)
        if not torch.isfinite(loss):
            raise RuntimeError(f"attack loss became non-finite at iteration {i}")
        trace.append(loss.item())
        if not targets:
            break  # nothing to optimize; further iterations cannot change
        grads = torch.autograd.grad(loss, targets)
        for t, g in zip(targets, grads):
            t.grad = -g  # optimizers minimize; flip to ascend the loss
        for opt in opts:
            opt.step()

    alpha = _alpha_of(w, lo, hi).detach() if a_dim else None
    z_final = z.detach() if z is not None else None
    return alpha, z_final, trace


def joint_sample(x, y, manipulator, generator, model, cfg, alpha, z, keep_graph=False):
    """Regenerate the joint sample at fixed (alpha, z) from a zero-noise
    recursion restart. Returns (attribute base, final sample).

    With keep_graph=True the final sample stays differentiable with respect
    to the generator parameters (used by the training loop's updates).
    """
    a_dim = manipulator.num_attributes if manipulator is not None else 0
    ctx = torch.enable_grad() if keep_graph else torch.no_grad()
    with ctx:
        x_attr = manipulator.apply(x, alpha) if a_dim else x
        if generator is None:
            return x_attr, x_attr
        traj = generate_trajectory(
            generator, x_attr, z, y, model, cfg.steps, cfg.eps, cfg.eps_step
        )
        return x_attr, traj.final


def spa_attack(x, y, manipulator, generator, model, cfg):
    """Full attack: optimize (alpha, z), regenerate, report the result."""
    b = x.shape[0]
    with eval_mode(model):
        alpha, z, trace = spa_optimize(x, y, manipulator, generator, model, cfg)
        x_attr, x_spa = joint_sample(
            x, y, manipulator, generator, model, cfg, alpha, z
        )
        with torch.no_grad():
            logits = model.logits(x_spa)
        trace.append(cross_entropy_logits(logits, y).item())
        success = logits.argmax(dim=1) != y
    return PerturbationResult(
        x_spa=x_spa.detach(),
        alpha=alpha if alpha is not None else torch.zeros(b, 0),
        z=z if z is not None else torch.zeros(b, 0),
        delta=(x_spa - x_attr).detach(),
        loss_trace=trace,
        success=success,
    )


def attribute_only_attack(x, y, manipulator, model, cfg):
    """Attack with the generator branch removed (delta stays zero)."""
    return spa_attack(x, y, manipulator, None, model, cfg)


def noise_only_attack(x, y, generator, model, cfg):
    """Attack with the manipulator branch removed (raw images)."""
    return spa_attack(x, y, None, generator, model, cfg)
