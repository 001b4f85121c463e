"""Attack configuration."""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class AttackConfig:
    """Settings for the joint attribute/noise attack and its ablations.

    eps is the l-inf noise radius; eps_step the per-recursion step size
    (defaults to eps/4 so that the default depth saturates the ball);
    steps is the recursion depth T; iters the outer optimization count I.
    """

    eps: float = 0.1
    eps_step: float = None
    steps: int = 4
    iters: int = 10
    # lrs live in the unconstrained parameter spaces: alpha_lr in the
    # tanh-squashed attribute space (0.3 reaches range saturation in ~10
    # adaptive steps), z_lr in the diversity variable's unit-normal space
    alpha_lr: float = 0.3
    z_lr: float = 0.1
    optimizer: str = "adam"  # "sgd" gives the plain-ascent variant
    optimize_alpha: bool = True
    optimize_z: bool = True
    alpha_init: str = "canonical"  # or "random"
    alpha_init_jitter: float = 0.05  # uniform noise, fraction of range width
    seed: int = 0

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        if self.steps < 1:
            raise ValueError("recursion depth must be >= 1")
        if self.iters < 0:
            raise ValueError("iteration count must be >= 0")
        if self.eps_step is None:
            object.__setattr__(self, "eps_step", self.eps / 4.0)
        if self.eps_step > self.eps + 1e-12:
            raise ValueError("eps_step must not exceed eps")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.alpha_init not in ("canonical", "random"):
            raise ValueError(f"unknown alpha_init {self.alpha_init!r}")

    def with_(self, **kw):
        if "eps" in kw and "eps_step" not in kw:
            kw["eps_step"] = None
        return replace(self, **kw)
