"""Gradient and evaluation primitives used by every attack."""

import contextlib

import torch

from sparobust.classifier.losses import cross_entropy_logits


@contextlib.contextmanager
def eval_mode(model):
    was_training = model.training
    model.eval()
    try:
        yield model
    finally:
        if was_training:
            model.train()


def input_gradient(model, x, y, reduction="mean", scale=1.0, create_graph=False):
    """Gradient of the classification loss with respect to the input batch.

    reduction "mean" differentiates the batch-mean loss; "sum" gives
    per-example gradients that do not depend on batch size (what the noise
    generator consumes). The model is evaluated with frozen statistics.
    """
    with eval_mode(model), torch.enable_grad():
        inp = x.detach().requires_grad_(True)
        loss = scale * cross_entropy_logits(model.logits(inp), y, reduction=reduction)
        (grad,) = torch.autograd.grad(loss, inp, create_graph=create_graph)
    return grad


def evaluate(model, images, labels=None, batch_size=256):
    """Fraction of argmax-correct predictions. Errors on an empty set."""
    if labels is None:  # SplitData-like
        images, labels = images.images, images.labels
    if images.shape[0] == 0:
        raise ValueError("cannot evaluate on an empty example set")
    correct = 0
    with eval_mode(model), torch.no_grad():
        for start in range(0, images.shape[0], batch_size):
            xb = images[start : start + batch_size]
            yb = labels[start : start + batch_size]
            correct += int((model(xb).argmax(dim=1) == yb).sum())
    return correct / images.shape[0]
