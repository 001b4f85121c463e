from sparobust.training.config import DefenseConfig, TrainingLog
from sparobust.training.loops import (
    attribute_augmented_train,
    duplicate_batch,
    generator_only_adversarial_train,
    joint_adversarial_train,
    pgd_adversarial_train,
    pgd_attr_train,
    spa_train,
    train_attack_generator,
)

__all__ = [
    "DefenseConfig",
    "TrainingLog",
    "duplicate_batch",
    "joint_adversarial_train",
    "spa_train",
    "generator_only_adversarial_train",
    "train_attack_generator",
    "pgd_adversarial_train",
    "pgd_attr_train",
    "attribute_augmented_train",
]
