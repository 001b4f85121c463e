from sparobust.classifier.models import PROFILES, build_classifier
from sparobust.classifier.losses import cross_entropy, PROB_FLOOR
from sparobust.classifier.ops import evaluate, input_gradient
from sparobust.classifier.train import (
    TrainConfig,
    TrainState,
    fit_classifier,
    load_classifier,
    save_classifier,
    train_plain,
)

__all__ = [
    "PROFILES",
    "build_classifier",
    "cross_entropy",
    "PROB_FLOOR",
    "evaluate",
    "input_gradient",
    "TrainConfig",
    "TrainState",
    "fit_classifier",
    "train_plain",
    "save_classifier",
    "load_classifier",
]
