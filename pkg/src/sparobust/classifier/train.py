"""Classifier training loop (plain and hook-augmented variants)."""

from dataclasses import dataclass, field

import torch

from sparobust.checkpoint import load_checkpoint, save_checkpoint
from sparobust.classifier.losses import cross_entropy_logits
from sparobust.classifier.models import build_classifier
from sparobust.classifier.ops import evaluate
from sparobust.data.loader import iter_batches
from sparobust.seeding import derive_seed, seed_everything


@dataclass
class TrainConfig:
    iters: int = 400
    batch_size: int = 100
    lr: float = 0.01
    betas: tuple = (0.9, 0.99)
    weight_decay: float = 1e-4
    seed: int = 0
    eval_every: int = 0  # 0: evaluate only at the end
    profile: str = "cnn-small"


@dataclass
class TrainState:
    lr: float
    betas: tuple
    weight_decay: float
    iteration: int = 0
    best_val_accuracy: float = 0.0
    history: list = field(default_factory=list)


def epoch_batches(split, batch_size, seed):
    """Endless batch stream; each pass reshuffles with an epoch-derived seed."""
    epoch = 0
    while True:
        yield from iter_batches(split, batch_size, derive_seed(seed, "epoch", epoch))
        epoch += 1


def fit_classifier(model, handle, cfg: TrainConfig, batch_fn=None):
    """Run `cfg.iters` optimizer steps; `batch_fn(model, x, y) -> (x, y)`
    may replace or augment each batch (adversarial training hooks).

    Aborts with a diagnostic if the loss goes non-finite.
    """
    state = TrainState(cfg.lr, tuple(cfg.betas), cfg.weight_decay)
    opt = torch.optim.Adam(
        model.parameters(),
        lr=cfg.lr,
        betas=tuple(cfg.betas),
        weight_decay=cfg.weight_decay,
    )
    stream = epoch_batches(handle.train, cfg.batch_size, cfg.seed)
    model.train()
    for it in range(cfg.iters):
        x, y, _ = next(stream)
        if batch_fn is not None:
            x, y = batch_fn(model, x, y)
        loss = cross_entropy_logits(model.logits(x), y)
        if not torch.isfinite(loss):
            raise RuntimeError(
                f"training diverged: non-finite loss at iteration {it}"
            )
        opt.zero_grad()
        loss.backward()
        opt.step()
        state.iteration = it + 1
        if cfg.eval_every and (it + 1) % cfg.eval_every == 0:
            acc = evaluate(model, handle.val)
            state.history.append({"iter": it + 1, "loss": float(loss), "val_acc": acc})
            state.best_val_accuracy = max(state.best_val_accuracy, acc)
            model.train()
    if cfg.iters:
        acc = evaluate(model, handle.val)
        state.best_val_accuracy = max(state.best_val_accuracy, acc)
    model.eval()
    return model, state, opt


def train_plain(handle, cfg: TrainConfig, model=None):
    """Standard (non-robust) training from random init."""
    if model is None:
        seed_everything(derive_seed(cfg.seed, "classifier-init"))
        model = build_classifier(cfg.profile, handle.image_shape[0], handle.num_classes)
    model, state, opt = fit_classifier(model, handle, cfg)
    return model, state


def save_classifier(path, model, optimizer=None, config_hash=None, extra=None):
    meta = {
        "profile": model.profile,
        "in_channels": model.in_channels,
        "num_classes": model.num_classes,
        "config_hash": config_hash,
    }
    meta.update(extra or {})
    state = {"model": model.state_dict()}
    if optimizer is not None:
        state["optimizer"] = optimizer.state_dict()
    save_checkpoint(path, "classifier", state, meta)


def load_classifier(path):
    blob = load_checkpoint(path, expected_kind="classifier")
    meta = blob["meta"]
    model = build_classifier(meta["profile"], meta["in_channels"], meta["num_classes"])
    model.load_state_dict(blob["state"]["model"])
    model.eval()
    return model
