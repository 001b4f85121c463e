"""Gradient-based baseline attacks and random-attribute hybrids."""

import torch

from sparobust.attack.result import PerturbationResult
from sparobust.classifier.losses import cross_entropy_logits
from sparobust.classifier.ops import eval_mode, input_gradient
from sparobust.generator.projection import project
from sparobust.manipulator.base import clamp_attributes
from sparobust.seeding import make_generator


def _finish(model, x_spa, x_base, y, trace):
    with eval_mode(model), torch.no_grad():
        logits = model.logits(x_spa)
    trace.append(cross_entropy_logits(logits, y).item())
    b = x_spa.shape[0]
    return PerturbationResult(
        x_spa=x_spa,
        alpha=torch.zeros(b, 0),
        z=torch.zeros(b, 0),
        delta=x_spa - x_base,
        loss_trace=trace,
        success=logits.argmax(dim=1) != y,
    )


def pgd_attack(x, y, model, eps, step, k, seed=0, random_start=True):
    """k steps of sign-gradient ascent with per-step projection."""
    if k < 1:
        raise ValueError("pgd needs at least one step")
    x0 = x.detach()
    with eval_mode(model):
        if random_start and eps > 0:
            noise = (2 * torch.rand(x0.shape, generator=make_generator(seed)) - 1) * eps
            x_adv = project(x0, x0 + noise, eps)
        else:
            x_adv = x0.clone()
        trace = [cross_entropy_logits(model.logits(x_adv), y).item()]
        for _ in range(k):
            g = input_gradient(model, x_adv, y, reduction="sum")
            x_adv = project(x0, x_adv + step * g.sign(), eps)
    return _finish(model, x_adv, x0, y, trace)


def fgsm_attack(x, y, model, eps):
    """Single full-size sign step; identical to pgd with k=1, step=eps and
    no random start."""
    return pgd_attack(x, y, model, eps, step=eps, k=1, random_start=False)


def _margin(logits, y):
    """True-class logit minus best other logit (negative = misclassified)."""
    true = logits.gather(1, y.view(-1, 1)).squeeze(1)
    other = logits.clone()
    other.scatter_(1, y.view(-1, 1), float("-inf"))
    return true - other.max(dim=1).values


def cw_margin_attack(x, y, model, eps, steps, seed=0, step=None, kappa=0.0):
    """l-inf projected descent on the hinged margin loss.

    Keeps the per-example iterate with the smallest margin, so inputs that
    start misclassified succeed with zero iterations.
    """
    if step is None:
        step = 2.5 * eps / max(steps, 1)
    x0 = x.detach()
    with eval_mode(model):
        x_adv = x0.clone()
        with torch.no_grad():
            best_margin = _margin(model.logits(x_adv), y)
        best = x_adv.clone()
        trace = [float(best_margin.mean())]
        for _ in range(steps):
            inp = x_adv.detach().requires_grad_(True)
            with torch.enable_grad():
                loss = torch.clamp(_margin(model.logits(inp), y), min=-kappa).sum()
                (g,) = torch.autograd.grad(loss, inp)
            x_adv = project(x0, x_adv - step * g.sign(), eps)
            with torch.no_grad():
                m = _margin(model.logits(x_adv), y)
            improved = m < best_margin
            best[improved] = x_adv[improved]
            best_margin = torch.where(improved, m, best_margin)
        trace.append(float(best_margin.mean()))
    return _finish(model, best, x0, y, trace)


def hybrid_random_attr_attack(x, y, manipulator, inner_attack, model, cfg):
    """Uniformly sampled attributes, then a pixel-space attack on the result.

    inner_attack is a callable (x, y, model) -> PerturbationResult, or None
    for the bare random natural perturbation.
    """
    rng = make_generator(cfg.seed)
    specs = manipulator.specs
    b = x.shape[0]
    lo = torch.tensor([s.lo for s in specs])
    hi = torch.tensor([s.hi for s in specs])
    alpha = lo + (hi - lo) * torch.rand(b, len(specs), generator=rng)
    alpha = clamp_attributes(specs, alpha, "attack")
    with torch.no_grad():
        x_attr = manipulator.apply(x, alpha)
    if inner_attack is None:
        res = _finish(model, x_attr, x_attr, y, [])
    else:
        res = inner_attack(x_attr, y, model)
    res.alpha = alpha
    return res


def clean_attack(x, y, model):
    """Identity attack; reports clean accuracy in the same record shape."""
    return _finish(model, x.detach(), x.detach(), y, [])
