"""Classification losses over probability outputs."""

import torch

# floor inside the log; keeps the loss finite if the true class gets
# numerically zero probability
PROB_FLOOR = 1e-12


def cross_entropy(probs, labels, reduction="mean"):
    """Negative log-probability of the true class.

    `probs` rows must be probability distributions (e.g. classifier
    `forward` output). Returns the batch mean by default; "sum" and "none"
    follow torch conventions.
    """
    picked = probs.gather(1, labels.view(-1, 1)).squeeze(1)
    losses = -torch.log(picked.clamp_min(PROB_FLOOR))
    return _reduce(losses, reduction)


def cross_entropy_logits(logits, labels, reduction="mean"):
    """The same loss computed from raw scores via log-softmax.

    Mathematically identical to `cross_entropy(softmax(logits), ...)` but
    keeps gradients alive when the model saturates (float32 softmax rounds
    confident rows to exactly one-hot, zeroing the probability-space
    gradient). All internal gradient consumers use this form.
    """
    logp = torch.log_softmax(logits, dim=1)
    losses = -logp.gather(1, labels.view(-1, 1)).squeeze(1)
    return _reduce(losses, reduction)


def _reduce(losses, reduction):
    if reduction == "mean":
        return losses.mean()
    if reduction == "sum":
        return losses.sum()
    if reduction == "none":
        return losses
    raise ValueError(f"unknown reduction {reduction!r}")
