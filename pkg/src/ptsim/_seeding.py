"""Deterministic seed mixing (splitmix64) for per-cell / per-realization RNGs."""

from __future__ import annotations

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed; order matters, inputs may be negative."""
    state = 0
    for part in parts:
        state = splitmix64(state ^ (int(part) & _MASK))
    return state
