"""Closed-form training schedules.

Generator learning rate: cosine decay from the base rate to zero.
Weight decay: increasing cosine from zero to the maximum, so later steps
are regularized harder. The discriminator rate is constant and lives in
the config, not here.
"""

import math

__all__ = ["generator_lr", "weight_decay"]


def generator_lr(step: int, total_steps: int, base_lr: float = 2e-4) -> float:
    """base_lr * 0.5 * (1 + cos(pi * t / T)); no floor."""
    t = min(max(step, 0), total_steps)
    return base_lr * 0.5 * (1.0 + math.cos(math.pi * t / total_steps))


def weight_decay(step: int, total_steps: int, wd_max: float) -> float:
    """wd_max * 0.5 * (1 - cos(pi * t / T))."""
    t = min(max(step, 0), total_steps)
    return wd_max * 0.5 * (1.0 - math.cos(math.pi * t / total_steps))
