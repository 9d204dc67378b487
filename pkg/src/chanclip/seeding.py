"""Deterministic per-clip random generators.

Every randomized stage derives its generator from (global seed, name), so
results never depend on scheduling or worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _name_entropy(name: str) -> int:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_rng(seed: int, name: str) -> np.random.Generator:
    """Generator keyed on (seed, name); stable across runs and platforms."""
    return np.random.default_rng([seed & _MASK64, _name_entropy(name)])


def derive_seed(seed: int, name: str) -> int:
    """A 64-bit sub-seed keyed on (seed, name), for nested components."""
    mix = hashlib.sha256(f"{seed & _MASK64}:{name}".encode("utf-8")).digest()
    return int.from_bytes(mix[:8], "little")
