"""Block-wise worker pool with order-preserving aggregation."""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._validation import ConfigurationError
from .rng import BLOCK_SIZE, block_ranges

WORKERS_ENV = "MAGNETOKERNEL_WORKERS"


def resolve_workers(workers=None):
    """Explicit value, else the environment default, else 1."""
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            workers = int(raw)
        except ValueError as exc:
            raise ConfigurationError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    if int(workers) < 1:
        raise ConfigurationError(f"workers must be >= 1, got {workers}")
    return int(workers)


def map_blocks(func, n, workers=None, block_size=BLOCK_SIZE):
    """``[func(b, start, stop) for each block]`` in block order, possibly threaded."""
    blocks = list(block_ranges(n, block_size))
    workers = resolve_workers(workers)
    if workers == 1 or len(blocks) == 1:
        return [func(*blk) for blk in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda blk: func(*blk), blocks))


class Moments:
    """Streaming mean and second central moment for real or complex samples.

    Blocks are merged with the pairwise update of Chan et al., always in the
    same order, so totals do not depend on how blocks were scheduled.
    """

    def __init__(self, count=0, mean=0.0, m2=0.0):
        self.count = count
        self.mean = mean
        self.m2 = m2

    @classmethod
    def of(cls, values):
        values = np.asarray(values)
        n = values.shape[0]
        if n == 0:
            return cls()
        mean = values.mean(axis=0)
        dev = values - mean
        m2 = np.sum((dev * np.conj(dev)).real, axis=0)
        return cls(n, mean, m2)

    def merge(self, other):
        if other.count == 0:
            return self
        if self.count == 0:
            return Moments(other.count, other.mean, other.m2)
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + (delta * np.conj(delta)).real * (self.count * other.count / n)
        return Moments(n, mean, m2)

    @property
    def variance(self):
        return self.m2 / (self.count - 1) if self.count > 1 else np.inf * np.ones_like(self.m2)

    @property
    def std_error(self):
        return np.sqrt(self.variance / self.count)


def combine(parts):
    total = Moments()
    for part in parts:
        total = total.merge(part)
    return total
