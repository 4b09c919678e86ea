"""Deterministic randomness: one master seed, named substreams.

Every random decision in the toolkit draws from `substream(seed, label)`
where `label` names the consumer (for example ``"curate/easy"`` or
``"multi/<sample-id>"``). Substreams are independent of call order and
stable across platforms, so any component can be re-run in isolation and
reproduce the full pipeline's choices.
"""

from __future__ import annotations

import numpy as np

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes | str) -> int:
    """64-bit FNV-1a hash; the toolkit's only string-hashing primitive."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = FNV64_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV64_PRIME) & _MASK64
    return h


def substream(seed: int, label: str) -> np.random.Generator:
    """A generator keyed by (seed, label); same inputs, same stream."""
    return np.random.default_rng(np.random.SeedSequence([seed & _MASK64, fnv1a64(label)]))
