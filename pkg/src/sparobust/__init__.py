"""Joint attribute/noise adversarial attacks and robust training."""

__version__ = "0.1.0"

from sparobust.seeding import seed_everything, set_deterministic

__all__ = ["seed_everything", "set_deterministic", "__version__"]
