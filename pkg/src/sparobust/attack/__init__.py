from sparobust.attack.config import AttackConfig
from sparobust.attack.result import PerturbationResult
from sparobust.attack.spa import (
    attribute_only_attack,
    noise_only_attack,
    spa_attack,
    spa_optimize,
)
from sparobust.attack.baselines import (
    clean_attack,
    cw_margin_attack,
    fgsm_attack,
    hybrid_random_attr_attack,
    pgd_attack,
)
from sparobust.attack.evaluate import evaluate_attack

__all__ = [
    "AttackConfig",
    "PerturbationResult",
    "spa_attack",
    "spa_optimize",
    "attribute_only_attack",
    "noise_only_attack",
    "clean_attack",
    "fgsm_attack",
    "pgd_attack",
    "cw_margin_attack",
    "hybrid_random_attr_attack",
    "evaluate_attack",
]
