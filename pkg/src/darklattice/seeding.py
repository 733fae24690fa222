"""Deterministic per-task seed derivation.

Parallel sweeps and Monte Carlo ensembles must give identical results
regardless of scheduling, so every task derives its own 64-bit seed from the
master seed and its task index via a splitmix64 step. The mapping is pure:
task k always gets the same seed for a given master seed.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One output of the splitmix64 generator for the given state."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def task_seed(master: int, index: int) -> int:
    """Seed for task `index` of a run with the given master seed."""
    if index < 0:
        raise ValueError("task index must be nonnegative")
    return splitmix64((master & _MASK) ^ splitmix64(index))
