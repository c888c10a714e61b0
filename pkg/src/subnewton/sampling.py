"""Sample-size schedules and uniform index drawing."""

import dataclasses
import math

import numpy as np

from .objective import IndexSet

KINDS = ("constant", "geometric", "supergeometric", "full")


@dataclasses.dataclass(frozen=True)
class SampleSchedule:
    """Per-iteration sample sizes, clamped to the pool size.

    constant        size(k) = beta
    geometric       size(k) = ceil(x0 * eta^k),        eta > 1
    supergeometric  size(k) = ceil(x0 * eta_k^k) with eta_k = k+1
    full            size(k) = cap
    """

    kind: str
    cap: int
    beta: int = 0
    x0: float = 1.0
    eta: float = 2.0
    replacement: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.cap < 1:
            raise ValueError("cap must be positive")
        if self.kind == "constant" and self.beta < 1:
            raise ValueError("constant schedule needs beta >= 1")
        if self.kind == "geometric" and self.eta <= 1.0:
            raise ValueError("geometric schedule needs eta > 1")
        if self.kind in ("geometric", "supergeometric") and self.x0 < 1:
            raise ValueError("schedule needs x0 >= 1")

    def size_at(self, k):
        if k < 0:
            raise ValueError("iteration index must be nonnegative")
        if self.kind == "full":
            return self.cap
        if self.kind == "constant":
            size = self.beta
        elif self.kind == "geometric":
            log_size = math.log(self.x0) + k * math.log(self.eta)
            if log_size > math.log(self.cap):
                return self.cap  # saturate instead of overflowing
            size = math.ceil(self.x0 * self.eta ** k)
        else:  # supergeometric, eta_k = k + 1
            if k == 0:
                size = math.ceil(self.x0)
            else:
                log_size = math.log(self.x0) + k * math.log(k + 1)
                if log_size > math.log(self.cap):
                    return self.cap
                size = math.ceil(self.x0 * float(k + 1) ** k)
        return max(1, min(size, self.cap))


def full_schedule(cap):
    return SampleSchedule(kind="full", cap=cap)


def draw(sched, k, pool_size, rng):
    """Draw size_at(k) indices uniformly from 0..pool_size-1.

    Without replacement by default; a full-size draw is then exactly the
    pool (as a set).  Gradient and Hessian draws must use independent rng
    streams (the caller owns them).
    """
    if pool_size < 1:
        raise ValueError("pool must be nonempty")
    size = min(sched.size_at(k), pool_size) if not sched.replacement \
        else sched.size_at(k)
    if sched.replacement:
        idx = rng.integers(0, pool_size, size=size, dtype=np.int64)
    else:
        idx = rng.choice(pool_size, size=size, replace=False)
    return IndexSet(indices=idx, replacement=sched.replacement)
