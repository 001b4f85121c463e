"""Defense training loops.

`joint_adversarial_train` is the shared min-max loop: per batch it (1)
generates a jointly-perturbed sample with the current generator via the
inner attack, (2) draws fresh attributes and two diversity draws, duplicates
the batch, runs the noise recursion, (3) ascends the generator on the
classification + diversity losses, and (4) descends the classifier on
clean / attribute-perturbed / jointly-perturbed samples. Removing the
manipulator gives generator-only adversarial training; freezing the
classifier (and dropping the inner attack term) fits an attack generator
against a fixed model. The single-model defenses (pgd, attribute-augmented,
pgd-attr) are batch hooks over the plain classifier loop.
"""

import contextlib

import torch

from sparobust.attack.baselines import pgd_attack
from sparobust.attack.spa import attribute_only_attack, joint_sample, spa_optimize
from sparobust.classifier.losses import cross_entropy_logits
from sparobust.classifier.models import build_classifier
from sparobust.classifier.ops import eval_mode, evaluate
from sparobust.classifier.train import TrainConfig, epoch_batches, fit_classifier
from sparobust.generator.model import NoiseGenerator
from sparobust.generator.trajectory import diversity_loss, generate_trajectory
from sparobust.seeding import derive_seed, make_generator, seed_everything
from sparobust.training.config import TrainingLog


def duplicate_batch(x, y, alpha, z1, z2):
    """Algorithm line 3: two half-batches sharing (x, alpha, y), differing in z."""
    x2 = torch.cat([x, x])
    y2 = torch.cat([y, y])
    alpha2 = torch.cat([alpha, alpha]) if alpha is not None else None
    return x2, y2, alpha2, torch.cat([z1, z2])


def _sample_alpha(specs, b, rng, canonical_frac=0.0):
    lo = torch.tensor([s.lo for s in specs])
    hi = torch.tensor([s.hi for s in specs])
    alpha = lo + (hi - lo) * torch.rand(b, len(specs), generator=rng)
    if canonical_frac > 0:
        canon = torch.tensor([s.canonical for s in specs])
        pin = torch.rand(b, generator=rng) < canonical_frac
        alpha[pin] = canon
    return alpha


@contextlib.contextmanager
def _frozen(model):
    flags = [p.requires_grad for p in model.parameters()]
    for p in model.parameters():
        p.requires_grad_(False)
    try:
        yield
    finally:
        for p, f in zip(model.parameters(), flags):
            p.requires_grad_(f)


def joint_adversarial_train(
    handle,
    manipulator,
    cfg,
    model=None,
    generator=None,
    update_classifier=True,
    include_joint_term=True,
):
    """Shared min-max loop; see the module docstring for the roles of the
    flags. Returns (model, generator, TrainingLog)."""
    a_dim = manipulator.num_attributes if manipulator is not None else 0
    channels = handle.image_shape[0]
    if model is None:
        seed_everything(derive_seed(cfg.seed, "defense-model-init"))
        model = build_classifier(cfg.profile, channels, handle.num_classes)
    if generator is None:
        seed_everything(derive_seed(cfg.seed, "defense-gen-init"))
        generator = NoiseGenerator(
            channels, handle.num_classes, z_dim=cfg.z_dim, width=cfg.gen_width
        )

    opt_phi = torch.optim.Adam(
        generator.parameters(),
        lr=cfg.lr,
        betas=tuple(cfg.betas),
        weight_decay=cfg.weight_decay,
    )
    opt_theta = (
        torch.optim.Adam(
            model.parameters(),
            lr=cfg.lr,
            betas=tuple(cfg.betas),
            weight_decay=cfg.weight_decay,
        )
        if update_classifier
        else None
    )

    stream = epoch_batches(handle.train, cfg.batch_size, derive_seed(cfg.seed, "batches"))
    rng = make_generator(derive_seed(cfg.seed, "fresh-draws"))
    log = TrainingLog()
    atk = cfg.attack
    freeze_ctx = _frozen(model) if not update_classifier else contextlib.nullcontext()

    with freeze_ctx:
        for it in range(cfg.iters):
            x, y, _ = next(stream)
            b = x.shape[0]

            x_spa = None
            if include_joint_term:
                inner = atk.with_(seed=derive_seed(cfg.seed, "inner-attack", it))
                with eval_mode(model):
                    alpha_s, z_s, _ = spa_optimize(x, y, manipulator, generator, model, inner)
                    _, x_spa = joint_sample(
                        x, y, manipulator, generator, model, inner,
                        alpha_s, z_s, keep_graph=True,
                    )

            alpha = (
                _sample_alpha(manipulator.specs, b, rng, cfg.canonical_alpha_frac)
                if a_dim
                else None
            )
            z1 = torch.randn(b, cfg.z_dim, generator=rng)
            z2 = torch.randn(b, cfg.z_dim, generator=rng)
            x2, y2, alpha2, z = duplicate_batch(x, y, alpha, z1, z2)
            with torch.no_grad():
                x_attr2 = manipulator.apply(x2, alpha2) if a_dim else x2
            traj = generate_trajectory(
                generator, x_attr2, z, y2, model, atk.steps, atk.eps, atk.eps_step
            )

            l_div = diversity_loss(traj.half(0), traj.half(1))
            l_steps = torch.stack(
                [cross_entropy_logits(model.logits(s), y2) for s in traj.steps]
            ).mean()
            l_cls = l_steps
            l_spa = None
            if x_spa is not None:
                l_spa = cross_entropy_logits(model.logits(x_spa), y)
                l_cls = l_cls + l_spa
            loss_phi = -(l_cls + cfg.lambda_div * l_div)
            if not torch.isfinite(loss_phi):
                raise RuntimeError(f"generator loss non-finite at iteration {it}")
            opt_phi.zero_grad()
            loss_phi.backward()
            opt_phi.step()

            row = {
                "iter": it + 1,
                "loss_gen_cls": l_cls.item(),
                "loss_div": l_div.item(),
            }
            if update_classifier:
                opt_theta.zero_grad()
                l_clean = cross_entropy_logits(model.logits(x), y)
                l_attr = cross_entropy_logits(model.logits(traj.final.detach()), y2)
                loss_theta = l_clean + l_attr
                if x_spa is not None:
                    l_spa_theta = cross_entropy_logits(model.logits(x_spa.detach()), y)
                    loss_theta = loss_theta + l_spa_theta
                    row["loss_spa"] = l_spa_theta.item()
                if not torch.isfinite(loss_theta):
                    raise RuntimeError(f"classifier loss non-finite at iteration {it}")
                loss_theta.backward()
                opt_theta.step()
                row["loss_clean"] = l_clean.item()
                row["loss_attr"] = l_attr.item()
            log.append(**row)

            if cfg.eval_every and (it + 1) % cfg.eval_every == 0:
                _probe(model, handle, cfg, it + 1, log)

    model.eval()
    generator.eval()
    return model, generator, log


def _probe(model, handle, cfg, it, log):
    n = min(cfg.probe_samples, len(handle.val))
    clean = evaluate(model, handle.val.images[:n], handle.val.labels[:n])
    eps = cfg.attack.eps
    res = pgd_attack(
        handle.val.images[:n], handle.val.labels[:n], model,
        eps=eps, step=eps / 2, k=5, seed=derive_seed(cfg.seed, "probe", it),
    )
    log.append(iter=it, probe_clean_acc=clean, probe_pgd_acc=res.accuracy)
    model.train()


def spa_train(handle, manipulator, cfg, model=None, generator=None):
    """Joint defense training with a pretrained attribute manipulator."""
    if manipulator is None:
        raise ValueError(
            "joint training needs a manipulator; use "
            "generator_only_adversarial_train for the noise-only defense"
        )
    return joint_adversarial_train(handle, manipulator, cfg, model, generator)


def generator_only_adversarial_train(handle, cfg, model=None, generator=None):
    """Min-max training with the manipulator branch removed."""
    return joint_adversarial_train(handle, None, cfg, model, generator)


def train_attack_generator(model, manipulator, handle, cfg, generator=None):
    """Fit a noise generator against a frozen classifier.

    Warm-starting from a defense's co-trained generator is allowed via
    `generator`. The inner-attack term is dropped (it only matters for the
    classifier side); the generator ascends the trajectory classification
    loss plus the diversity objective.
    """
    _, generator, log = joint_adversarial_train(
        handle,
        manipulator,
        cfg,
        model=model,
        generator=generator,
        update_classifier=False,
        include_joint_term=False,
    )
    return generator, log


def _to_train_config(cfg):
    return TrainConfig(
        iters=cfg.iters,
        batch_size=cfg.batch_size,
        lr=cfg.lr,
        betas=tuple(cfg.betas),
        weight_decay=cfg.weight_decay,
        seed=cfg.seed,
        eval_every=cfg.eval_every,
        profile=cfg.profile,
    )


def _fresh_model(handle, cfg):
    # same init tag as train_plain, so hook-free runs match it exactly
    seed_everything(derive_seed(cfg.seed, "classifier-init"))
    return build_classifier(cfg.profile, handle.image_shape[0], handle.num_classes)


def pgd_adversarial_train(handle, cfg, model=None):
    """Min-max training with a pgd inner attack on every batch.

    With eps=0 the hook is a no-op and the run is identical to plain
    training under the same seed.
    """
    atk = cfg.attack
    step = 2.5 * atk.eps / max(atk.iters, 1)
    counter = {"it": 0}

    def hook(model, x, y):
        counter["it"] += 1
        if atk.eps == 0:
            return x, y
        res = pgd_attack(
            x, y, model, eps=atk.eps, step=step, k=max(atk.iters, 1),
            seed=derive_seed(cfg.seed, "pgd-batch", counter["it"]),
        )
        return res.x_spa, y

    model = model if model is not None else _fresh_model(handle, cfg)
    model, state, _ = fit_classifier(model, handle, _to_train_config(cfg), hook)
    return model, state


def attribute_augmented_train(handle, manipulator, cfg, model=None):
    """Augment every batch with attribute-space adversarial variants."""
    atk = cfg.attack.with_(alpha_init="random")
    counter = {"it": 0}

    def hook(model, x, y):
        counter["it"] += 1
        inner = atk.with_(seed=derive_seed(cfg.seed, "attr-batch", counter["it"]))
        res = attribute_only_attack(x, y, manipulator, model, inner)
        return torch.cat([x, res.x_spa]), torch.cat([y, y])

    model = model if model is not None else _fresh_model(handle, cfg)
    model, state, _ = fit_classifier(model, handle, _to_train_config(cfg), hook)
    return model, state


def pgd_attr_train(handle, manipulator, cfg, model=None):
    """pgd adversarial training on randomly attribute-perturbed batches."""
    atk = cfg.attack
    step = 2.5 * atk.eps / max(atk.iters, 1)
    specs = manipulator.specs
    rng = make_generator(derive_seed(cfg.seed, "pgd-attr-draws"))
    counter = {"it": 0}

    def hook(model, x, y):
        counter["it"] += 1
        alpha = _sample_alpha(specs, x.shape[0], rng)
        with torch.no_grad():
            x_attr = manipulator.apply(x, alpha)
        if atk.eps == 0:
            return x_attr, y
        res = pgd_attack(
            x_attr, y, model, eps=atk.eps, step=step, k=max(atk.iters, 1),
            seed=derive_seed(cfg.seed, "pgd-attr-batch", counter["it"]),
        )
        return res.x_spa, y

    model = model if model is not None else _fresh_model(handle, cfg)
    model, state, _ = fit_classifier(model, handle, _to_train_config(cfg), hook)
    return model, state
