"""Triangular2 cyclic learning-rate schedule.

The rate climbs linearly from ``base_rate`` to the cycle's peak over
``step_size`` iterations and falls back over the next ``step_size``; the
peak's height above the base halves every cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from wensemble.errors import WensembleError

DEFAULT_BASE_RATE = 1e-7
DEFAULT_MAX_RATE = 2e-3
# optimizer settings of the original training runs; documentation only
ADAMAX_LEARNING_RATE = 2e-4
ADAMAX_BETAS = (0.9, 0.999)


@dataclass(frozen=True)
class LrScheduleConfig:
    base_rate: float = DEFAULT_BASE_RATE
    max_rate: float = DEFAULT_MAX_RATE
    step_size: int = 1
    policy: str = "triangular2"

    def __post_init__(self):
        if self.policy != "triangular2":
            raise WensembleError(f"unsupported policy {self.policy!r}; only triangular2")
        if not (0 < self.base_rate < self.max_rate) or not math.isfinite(self.max_rate):
            raise WensembleError("need 0 < base_rate < max_rate")
        if int(self.step_size) != self.step_size or self.step_size < 1:
            raise WensembleError(f"step_size must be a positive integer, got {self.step_size}")

    @classmethod
    def from_epochs(cls, iter_per_epoch, epochs_per_step=6, base_rate=DEFAULT_BASE_RATE, max_rate=DEFAULT_MAX_RATE):
        """Step size of ``epochs_per_step`` epochs (6 in the original training)."""
        return cls(base_rate, max_rate, int(epochs_per_step) * int(iter_per_epoch))


def cycle_of(iteration, step_size):
    return 1 + iteration // (2 * step_size)


def lr_at(iteration: int, cfg: LrScheduleConfig) -> float:
    if iteration < 0:
        raise WensembleError("iteration must be non-negative")
    step = cfg.step_size
    cycle = cycle_of(iteration, step)
    x = abs(iteration / step - 2 * cycle + 1)
    return cfg.base_rate + (cfg.max_rate - cfg.base_rate) * math.ldexp(max(0.0, 1.0 - x), 1 - cycle)


def peak_rate(cycle: int, cfg: LrScheduleConfig) -> float:
    return cfg.base_rate + math.ldexp(cfg.max_rate - cfg.base_rate, 1 - cycle)


def schedule(cfg: LrScheduleConfig, total_iterations: int):
    """[(iteration, rate)] for iterations 0 .. total_iterations - 1."""
    if total_iterations < 1:
        raise WensembleError("total_iterations must be >= 1")
    return [(i, lr_at(i, cfg)) for i in range(total_iterations)]


def write_schedule(rows, stream):
    stream.write("iteration,lr\n")
    for i, r in rows:
        stream.write(f"{i},{r!r}\n")
