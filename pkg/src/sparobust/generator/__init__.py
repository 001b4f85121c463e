from sparobust.generator.projection import project
from sparobust.generator.model import NoiseGenerator, load_generator, save_generator
from sparobust.generator.trajectory import (
    NoiseTrajectory,
    diversity_loss,
    generate_trajectory,
)

__all__ = [
    "project",
    "NoiseGenerator",
    "save_generator",
    "load_generator",
    "NoiseTrajectory",
    "generate_trajectory",
    "diversity_loss",
]
