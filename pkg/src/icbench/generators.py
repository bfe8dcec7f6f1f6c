"""Benchmark environments and a description-length proxy for ensemble weights."""

from __future__ import annotations

import numpy as np

from .envs import Environment, from_rows
from .vm import gamma_length, state_bits

DEFAULT_TEMPERATURE = 8.0


def gated_corridor(x: str) -> Environment:
    """Corridor whose only successful route spells ``x`` then takes one more step.

    States ``0..n`` are the corridor cells, ``n + 1`` the goal and ``n + 2``
    the absorbing failure state.
    """
    if not x:
        raise ValueError("EmptyString: corridor needs a non-empty bit string")
    if any(c not in "01" for c in x):
        raise ValueError("corridor string must be binary")
    n = len(x)
    goal, fail = n + 1, n + 2
    rows = []
    for i, bit in enumerate(x):
        right = int(bit)
        row = [fail, fail]
        row[right] = i + 1
        rows.append(row)
    rows.append([goal, goal])
    rows.append([goal, goal])
    rows.append([fail, fail])
    return from_rows(f"corridor_{x}", rows)


def corridor_states(x: str) -> dict[str, int]:
    n = len(x)
    return {"start": 0, "end": n, "goal": n + 1, "fail": n + 2}


def random_env(n: int, m: int, seed: int) -> Environment:
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    rng = np.random.default_rng(seed)
    return Environment(f"random_{n}x{m}_s{seed}", rng.integers(0, n, size=(n, m)))


def cycle_env(n: int) -> Environment:
    if n < 1:
        raise ValueError("n must be >= 1")
    return from_rows(f"cycle_{n}", [[(i + 1) % n] for i in range(n)])


# grid actions
NORTH, EAST, SOUTH, WEST = range(4)


def grid_env(w: int, h: int) -> Environment:
    """``w`` x ``h`` grid, state ``y * w + x``; moves clamp at the border."""
    if w < 1 or h < 1:
        raise ValueError("w and h must be >= 1")
    rows = []
    for y in range(h):
        for x in range(w):
            moves = [(x, max(y - 1, 0)), (min(x + 1, w - 1), y), (x, min(y + 1, h - 1)), (max(x - 1, 0), y)]
            rows.append([yy * w + xx for xx, yy in moves])
    return from_rows(f"grid_{w}x{h}", rows)


def grid_state(w: int, x: int, y: int) -> int:
    return y * w + x


def _rle_bits(values, value_bits: int) -> int:
    bits = 0
    i = 0
    while i < len(values):
        j = i
        while j < len(values) and values[j] == values[i]:
            j += 1
        bits += value_bits + gamma_length(j - i)
        i = j
    return bits


def complexity_proxy(env: Environment) -> int:
    """Bits of a run-length code of the transition table.

    The table is coded one action column at a time; each column uses the
    cheaper of absolute targets or successor offsets ``(T(s,a) - s) mod n``
    (one flag bit says which).  This is a computable upper-bound surrogate,
    not Kolmogorov complexity.
    """
    n, m = env.dims
    width = state_bits(n)
    bits = gamma_length(n) + gamma_length(m)
    states = np.arange(n)
    for a in range(m):
        column = env.table[:, a]
        absolute = _rle_bits(column.tolist(), width)
        offsets = _rle_bits(((column - states) % n).tolist(), width)
        bits += 1 + min(absolute, offsets)
    return bits


def ensemble_weights(envs, temperature: float = DEFAULT_TEMPERATURE) -> np.ndarray:
    """Normalised ``2 ** (-proxy / temperature)`` weights."""
    proxies = np.array([complexity_proxy(e) for e in envs], dtype=float)
    logw = -(proxies - proxies.min()) / temperature
    w = np.exp2(logw)
    return w / w.sum()
