"""Seeded RNG stream hierarchy.

One integer seed drives the whole pipeline. Each consumer of randomness
(feature-map sampling, the Gibbs chain, per-draw predictive noise,
per-trajectory simulation noise) gets its own child stream, derived from the
root seed plus a structured spawn key, so that components can be re-run,
reordered, or resized without perturbing each other's draws.

Streams are counter-based (Philox) behind ``numpy.random.Generator``.
"""

from __future__ import annotations

import numpy as np

# Top-level stream tags. Keys are (tag, *indices); indices identify e.g. a
# retained draw, a forecast step, or a simulated trajectory.
FEATURE_MAP = 0
GIBBS = 1
FORECAST_NOISE = 2
SIM_NOISE = 3


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for the child stream identified by ``key``.

    Deterministic: the same (seed, key) always yields the same stream,
    independent of any other stream's consumption.
    """
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
