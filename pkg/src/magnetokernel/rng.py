"""Counter-based random streams.

Every random draw in the package is taken from a Philox stream keyed by
``(seed, *key)``.  Sample batches are cut into fixed-size blocks, and block
``b`` always uses the stream ``(seed, *key, b)``, so the values of sample
``i`` depend only on the seed, the key and ``i``.  Splitting work over any
number of workers therefore reproduces the same numbers bit for bit.
"""

import numpy as np

BLOCK_SIZE = 1024


def stream(seed, *key):
    """Return an independent generator for the stream ``(seed, *key)``."""
    if seed is None:
        raise ValueError("a seed is mandatory; entropy-based seeding is not supported")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def block_ranges(n, block_size=BLOCK_SIZE):
    """Yield ``(block_index, start, stop)`` covering ``range(n)``."""
    for b, start in enumerate(range(0, n, block_size)):
        yield b, start, min(start + block_size, n)


def standard_normal_rows(seed, key, start, stop, shape, block_size=BLOCK_SIZE):
    """Rows ``start:stop`` of an unbounded array of standard normal draws.

    Row ``i`` has trailing shape ``shape`` and comes from block
    ``i // block_size`` of stream ``(seed, *key)``.
    """
    out = np.empty((stop - start,) + tuple(shape))
    first = start // block_size
    last = (stop - 1) // block_size if stop > start else first - 1
    for b in range(first, last + 1):
        rows = stream(seed, *key, b).standard_normal((block_size,) + tuple(shape))
        lo = max(start, b * block_size)
        hi = min(stop, (b + 1) * block_size)
        out[lo - start : hi - start] = rows[lo - b * block_size : hi - b * block_size]
    return out
