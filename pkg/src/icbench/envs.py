"""Finite deterministic environments and their state graphs.

An environment is a triple ``(n, m, T)`` with states ``0..n-1``, actions
``0..m-1`` and a total transition table ``T[s, a]``.  Everything downstream
(IC, agents, evaluation) reads environments through this module.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

INF = math.inf


class EnvFormatError(ValueError):
    """Base class for environment-file parse errors."""

    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class MalformedLine(EnvFormatError):
    pass


class IndexOutOfRange(EnvFormatError):
    pass


class DuplicateTransition(EnvFormatError):
    pass


class MissingTransition(EnvFormatError):
    def __init__(self, lineno: int, state: int, action: int):
        self.state = state
        self.action = action
        super().__init__(lineno, f"missing transition ({state},{action})")


@dataclass(frozen=True, eq=False)
class Environment:
    """Immutable finite deterministic transition system.

    ``table`` is a read-only ``(n, m)`` integer array, ``table[s, a]`` being
    the successor of ``s`` under ``a``.
    """

    name: str
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        table = np.array(self.table, dtype=np.int64, copy=True)
        if table.ndim != 2 or table.shape[0] < 1 or table.shape[1] < 1:
            raise ValueError("transition table must be a non-empty (n, m) array")
        n = table.shape[0]
        if table.min() < 0 or table.max() >= n:
            raise ValueError("transition target out of range")
        if not self.name or any(c.isspace() for c in self.name):
            raise ValueError(f"invalid environment name {self.name!r}")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_rows", tuple(tuple(int(v) for v in row) for row in table))

    @property
    def n(self) -> int:
        return self.table.shape[0]

    @property
    def m(self) -> int:
        return self.table.shape[1]

    @property
    def dims(self) -> tuple[int, int]:
        return self.n, self.m

    def step(self, s: int, a: int) -> int:
        return self._rows[s][a]

    def run(self, s: int, actions: Iterable[int]) -> int:
        """State reached from ``s`` after applying ``actions`` in order."""
        rows = self._rows
        for a in actions:
            s = rows[s][a]
        return s

    def trajectory(self, s: int, actions: Iterable[int]) -> list[int]:
        states = [s]
        for a in actions:
            s = self._rows[s][a]
            states.append(s)
        return states

    def __eq__(self, other):
        if not isinstance(other, Environment):
            return NotImplemented
        return self.name == other.name and self._rows == other._rows

    def __hash__(self):
        return hash((self.name, self._rows))

    def __repr__(self):
        return f"Environment(name={self.name!r}, n={self.n}, m={self.m})"


def from_rows(name: str, rows: Sequence[Sequence[int]]) -> Environment:
    return Environment(name, np.asarray(rows, dtype=np.int64))


def parse_env(text: str) -> Environment:
    """Parse the line-based environment format.

    Raises a subclass of :class:`EnvFormatError` naming the offending line.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body.split()))
    if not lines:
        raise MalformedLine(1, "empty environment file")

    def header(idx, keyword, *, integer):
        if idx >= len(lines):
            last = lines[-1][0] if lines else 1
            raise MalformedLine(last, f"expected '{keyword}' header")
        lineno, toks = lines[idx]
        if len(toks) != 2 or toks[0] != keyword:
            raise MalformedLine(lineno, f"expected '{keyword} <value>'")
        if not integer:
            return lineno, toks[1]
        try:
            value = int(toks[1])
        except ValueError:
            raise MalformedLine(lineno, f"'{keyword}' needs a decimal integer") from None
        if value < 1:
            raise IndexOutOfRange(lineno, f"'{keyword}' must be >= 1")
        return lineno, value

    _, name = header(0, "env", integer=False)
    _, n = header(1, "states", integer=True)
    _, m = header(2, "actions", integer=True)

    table = np.full((n, m), -1, dtype=np.int64)
    for lineno, toks in lines[3:]:
        if len(toks) != 4 or toks[0] != "t":
            raise MalformedLine(lineno, "expected 't <s> <a> <s2>'")
        try:
            s, a, s2 = (int(tok) for tok in toks[1:])
        except ValueError:
            raise MalformedLine(lineno, "transition indices must be decimal integers") from None
        if not 0 <= s < n or not 0 <= s2 < n:
            raise IndexOutOfRange(lineno, f"state index out of range [0,{n})")
        if not 0 <= a < m:
            raise IndexOutOfRange(lineno, f"action index out of range [0,{m})")
        if table[s, a] != -1:
            raise DuplicateTransition(lineno, f"duplicate transition ({s},{a})")
        table[s, a] = s2

    missing = np.argwhere(table < 0)
    if len(missing):
        s, a = (int(v) for v in missing[0])
        raise MissingTransition(lines[-1][0], s, a)
    return Environment(name, table)


def serialize_env(env: Environment) -> str:
    """Canonical text form: header then transitions in (s, a) order."""
    out = [f"env {env.name}", f"states {env.n}", f"actions {env.m}"]
    for s in range(env.n):
        for a in range(env.m):
            out.append(f"t {s} {a} {env.step(s, a)}")
    return "\n".join(out) + "\n"


def load_env(path) -> Environment:
    with open(path, encoding="utf-8") as fh:
        return parse_env(fh.read())


def bfs_tree(env: Environment, s: int) -> tuple[list[float], list[tuple[int, int] | None]]:
    """Distances from ``s`` plus a parent pointer ``(prev_state, action)``.

    Successors are expanded in increasing action order, which fixes the
    shortest path returned by :func:`shortest_path`.
    """
    dist: list[float] = [INF] * env.n
    parent: list[tuple[int, int] | None] = [None] * env.n
    dist[s] = 0
    queue = deque([s])
    rows = env._rows
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for a, v in enumerate(rows[u]):
            if dist[v] == INF:
                dist[v] = du
                parent[v] = (u, a)
                queue.append(v)
    return dist, parent


def bfs_distances(env: Environment, s: int) -> list[float]:
    return bfs_tree(env, s)[0]


def shortest_path(env: Environment, s: int, t: int) -> list[int] | None:
    """Action sequence of a shortest path ``s -> t``; ``None`` if unreachable."""
    dist, parent = bfs_tree(env, s)
    if dist[t] == INF:
        return None
    actions = []
    v = t
    while v != s:
        u, a = parent[v]
        actions.append(a)
        v = u
    actions.reverse()
    return actions


def reachable_set(env: Environment, s: int) -> set[int]:
    dist = bfs_distances(env, s)
    return {v for v, d in enumerate(dist) if d != INF}


def distance_matrix(env: Environment) -> np.ndarray:
    """All-pairs BFS distances as a float array with ``inf`` for unreachable."""
    return np.array([bfs_distances(env, s) for s in range(env.n)], dtype=float)


def diameter(env: Environment) -> int:
    """Largest finite shortest-path distance over reachable pairs."""
    dist = distance_matrix(env)
    return int(dist[np.isfinite(dist)].max())


def reachable_pairs(env: Environment, *, include_identity: bool = False) -> list[tuple[int, int]]:
    """Reachable ordered pairs ``(s, t)`` in lexicographic order."""
    dist = distance_matrix(env)
    return [
        (s, t)
        for s in range(env.n)
        for t in range(env.n)
        if np.isfinite(dist[s, t]) and (include_identity or s != t)
    ]
