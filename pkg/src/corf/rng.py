"""Deterministic seed derivation.

All randomness in the package flows from a single user seed. Sub-tasks
(base forest, refit forest, CV folds, per-tree streams) get their own
streams via splitmix64 mixing of (seed, tag) pairs, so results never
depend on scheduling or on how many worker threads are active.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1

# stream tags for pipeline sub-tasks
TAG_BASE_FOREST = 0x1
TAG_CORF_FOREST = 0x2
TAG_FOLD_ASSIGN = 0x3
TAG_FOLD_RUN = 0x100


def splitmix64(state: int) -> int:
    """One splitmix64 output step for a 64-bit state."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, tag: int) -> int:
    """Map a (seed, tag) pair to an independent 64-bit stream seed."""
    return splitmix64(splitmix64(seed & _MASK64) ^ (tag & _MASK64))
