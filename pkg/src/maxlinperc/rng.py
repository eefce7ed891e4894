"""Counter-based random streams keyed by (seed, trial, position).

Philox is a counter-based generator: the draw at a given counter value is a
pure function of ``(key, counter)``. Trial ``t`` owns the counter block
``[t * stride, (t + 1) * stride)`` so uniform number ``k`` of trial ``t`` is
the same no matter how trials are batched or which worker computes them.
"""

from __future__ import annotations

import numpy as np

from .lattice import DomainError

_WORDS_PER_BLOCK = 4  # Philox4x64 emits four 64-bit words per counter step
_MAX_KEY = 1 << 128


def _stride(width: int) -> int:
    return -(-max(width, 1) // _WORDS_PER_BLOCK)


def _generator(seed: int, counter: int) -> np.random.Generator:
    if not 0 <= int(seed) < _MAX_KEY:
        raise DomainError(f"seed must be in [0, 2**128), got {seed}")
    return np.random.Generator(np.random.Philox(key=int(seed), counter=int(counter)))


def trial_uniforms(seed: int, width: int, start: int, stop: int) -> np.ndarray:
    """Uniforms on [0, 1) for trials ``start..stop-1``, shape ``(stop - start, width)``."""
    stride = _stride(width)
    n = stop - start
    gen = _generator(seed, start * stride)
    return gen.random(n * stride * _WORDS_PER_BLOCK).reshape(n, -1)[:, :width]


def trial_open_uniforms(seed: int, width: int, start: int, stop: int) -> np.ndarray:
    """Uniforms strictly inside (0, 1), same keying as :func:`trial_uniforms`.

    Uses the top 53 bits ``k`` of each word as ``(k + 1/2) / 2**53`` so both
    endpoints are excluded (needed for ``-log U`` and ``(-log U)**(-1/a)``).
    """
    stride = _stride(width)
    n = stop - start
    bg = _generator(seed, start * stride).bit_generator
    raw = bg.random_raw(n * stride * _WORDS_PER_BLOCK).reshape(n, -1)[:, :width]
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / (1 << 53))


def chunks(trials: int, size: int):
    """Consecutive ``(start, stop)`` trial ranges of at most ``size`` trials."""
    for start in range(0, trials, size):
        yield start, min(trials, start + size)
