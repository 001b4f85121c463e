"""Attack evaluation over a dataset split, with JSONL record persistence."""

import json
import os

import torch

from sparobust.classifier.losses import cross_entropy_logits
from sparobust.classifier.ops import eval_mode
from sparobust.seeding import derive_seed, make_generator


def evaluate_attack(
    model,
    attack_fn,
    split,
    n,
    seed=0,
    batch_size=100,
    check_eps=None,
    records_path=None,
):
    """Attack a seed-deterministic subset of `split` and report accuracy.

    attack_fn(x, y) -> PerturbationResult. Per-example records carry the
    split index, success flag, final loss, final attributes and noise
    magnitude; they are appended to `records_path` as JSON lines when given.
    With check_eps set, the ball/pixel-range invariants are asserted on
    every batch.
    """
    if n > len(split):
        raise ValueError(f"requested {n} examples from a split of {len(split)}")
    order = torch.randperm(len(split), generator=make_generator(derive_seed(seed, "eval-subset")))
    chosen = order[:n]

    records = []
    correct = 0
    for start in range(0, n, batch_size):
        sel = chosen[start : start + batch_size]
        x, y = split.images[sel], split.labels[sel]
        res = attack_fn(x, y)
        if check_eps is not None:
            res.check(check_eps)
        with eval_mode(model), torch.no_grad():
            losses = cross_entropy_logits(model.logits(res.x_spa), y, reduction="none")
        linf = res.delta_linf()
        correct += int((~res.success).sum())
        for i in range(x.shape[0]):
            records.append(
                {
                    "example_id": int(sel[i]),
                    "success": bool(res.success[i]),
                    "final_loss": float(losses[i]),
                    "alpha": [float(v) for v in res.alpha[i]],
                    "delta_linf": float(linf[i]),
                }
            )
    accuracy = correct / n
    if records_path:
        os.makedirs(os.path.dirname(os.path.abspath(records_path)), exist_ok=True)
        with open(records_path, "a") as fh:
            for rec in records:
                fh.write(json.dumps(rec) + "\n")
    return accuracy, records
