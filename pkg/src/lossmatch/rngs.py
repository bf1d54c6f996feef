"""Deterministic counter-based random streams.

All randomized work derives a Philox substream from (master seed, task index),
so fanning tasks out over workers can never change results.
"""

from __future__ import annotations

import numpy as np


def substream(master_seed: int, task_index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(task_index,))
    return np.random.Generator(np.random.Philox(seed=ss))
