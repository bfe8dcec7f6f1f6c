"""Agent contract and three reference agents.

The harness asks an agent for a plan, executes it in the true
environment and reports the observed transitions back.  A plan that does
not end at the target is exploratory; the harness keeps asking until the
target is reached, the agent gives up (``plan`` returns ``None``) or the
per-task move cap ``4 * n`` runs out.
"""

from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .envs import Environment, reachable_pairs, shortest_path

MOVE_CAP_FACTOR = 4


@dataclass(frozen=True)
class Task:
    start: int
    target: int


@dataclass
class History:
    observed: set = field(default_factory=set)
    task_count: int = 0

    def record(self, triples) -> None:
        self.observed.update(triples)


@dataclass(frozen=True)
class AgentPlan:
    actions: tuple
    claimed_cost: float = 0.0


class Agent:
    """Base class.  Subclasses override :meth:`plan` and usually :meth:`propose_task`."""

    name = "agent"

    def __init__(self, env_dims: tuple[int, int], seed: int = 0):
        self.n, self.m = env_dims
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.current = 0
        self.frozen = False

    def plan(self, task: Task, history: History) -> AgentPlan | None:
        raise NotImplementedError

    def observe(self, transitions) -> None:
        pass

    def propose_task(self, history: History, env_dims) -> Task:
        n = env_dims[0]
        return Task(self.current, int(self.rng.integers(n)))

    def frozen_copy(self) -> "Agent":
        """Independent copy that plans from the current experience without learning."""
        clone = copy.deepcopy(self)
        clone.frozen = True
        return clone


class OracleAgent(Agent):
    """Knows the transition table and always plans a BFS shortest path."""

    name = "oracle"

    def __init__(self, env: Environment, seed: int = 0):
        super().__init__(env.dims, seed)
        self.env = env
        self._pairs = reachable_pairs(env, include_identity=True)

    def plan(self, task, history):
        path = shortest_path(self.env, task.start, task.target)
        if path is None:
            return None
        return AgentPlan(tuple(path), len(path))

    def propose_task(self, history, env_dims):
        s, t = self._pairs[int(self.rng.integers(len(self._pairs)))]
        return Task(s, t)


class RandomAgent(Agent):
    """Takes uniformly random actions until the target shows up."""

    name = "random"

    def plan(self, task, history):
        if task.start == task.target:
            return AgentPlan(())
        return AgentPlan((int(self.rng.integers(self.m)),))

    def propose_task(self, history, env_dims):
        n = env_dims[0]
        return Task(int(self.rng.integers(n)), int(self.rng.integers(n)))


class TabularAgent(Agent):
    """Learns the transition table from observations and plans by BFS on it.

    When the target is not reachable in the learned model, or an untried
    action is closer than the best known route, the agent walks to the
    nearest state with an untried action and tries it.
    """

    name = "tabular"

    def __init__(self, env_dims, seed: int = 0):
        super().__init__(env_dims, seed)
        self.model: dict[tuple[int, int], int] = {}

    def observe(self, transitions):
        if self.frozen:
            return
        for s, a, s2 in transitions:
            self.model[(s, a)] = s2

    @property
    def complete(self) -> bool:
        return len(self.model) == self.n * self.m

    def _bfs(self, start):
        """Model distances and parent pointers from ``start`` (action order fixed)."""
        dist = {start: 0}
        parent = {}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for a in range(self.m):
                v = self.model.get((u, a))
                if v is not None and v not in dist:
                    dist[v] = dist[u] + 1
                    parent[v] = (u, a)
                    queue.append(v)
        return dist, parent

    @staticmethod
    def _path(parent, start, goal):
        actions = []
        v = goal
        while v != start:
            u, a = parent[v]
            actions.append(a)
            v = u
        return actions[::-1]

    def _frontier(self, start, dist=None, parent=None):
        """Nearest ``(state, untried action)`` by model distance, then index."""
        if dist is None:
            dist, parent = self._bfs(start)
        best = None
        for u, d in dist.items():
            for a in range(self.m):
                if (u, a) not in self.model:
                    key = (d, u, a)
                    if best is None or key < best:
                        best = key
                    break
        if best is None:
            return None
        d, u, a = best
        return self._path(parent, start, u), u, a

    def plan(self, task, history):
        """Known shortest path, unless an untried action could still beat it.

        Exploration is optimistic: an untried action is assumed to land on
        the target, so it is tried whenever that would be shorter than the
        best route through observed transitions.
        """
        if task.start == task.target:
            return AgentPlan(())
        dist, parent = self._bfs(task.start)
        known = dist.get(task.target)
        if not self.frozen:
            front = self._frontier(task.start, dist, parent)
            if front is not None and (known is None or len(front[0]) + 1 < known):
                path, _, a = front
                return AgentPlan(tuple(path) + (a,))
        if known is None:
            return None
        path = self._path(parent, task.start, task.target)
        return AgentPlan(tuple(path), len(path))

    def propose_task(self, history, env_dims):
        n = env_dims[0]
        if self.complete:
            dist = {s: self._bfs(s)[0] for s in range(n)}
            pairs = [(s, t) for s in range(n) for t in sorted(dist[s])]
            s, t = pairs[int(self.rng.integers(len(pairs)))]
            return Task(s, t)
        known, _ = self._bfs(self.current)
        front = self._frontier(self.current)
        if front is not None and front[1] != self.current:
            return Task(self.current, front[1])
        unknown = [t for t in range(n) if t not in known]
        if unknown:
            return Task(self.current, unknown[0])
        return Task(self.current, self.current)


AGENTS = {"oracle": OracleAgent, "random": RandomAgent, "tabular": TabularAgent}


def make_agent(name: str, env: Environment, seed: int = 0) -> Agent:
    if name not in AGENTS:
        raise KeyError(f"UnknownAgent: {name!r} (choose from {', '.join(sorted(AGENTS))})")
    if name == "oracle":
        return OracleAgent(env, seed)
    return AGENTS[name](env.dims, seed)


@dataclass(frozen=True)
class Attempt:
    task: Task
    actions: tuple
    success: bool
    end_state: int
    transitions: tuple

    @property
    def moves(self) -> int:
        return len(self.actions)


def attempt(agent: Agent, env: Environment, task: Task, history: History | None = None) -> Attempt:
    """Run one task: alternate agent plans and execution until done or capped."""
    history = history if history is not None else History()
    cap = MOVE_CAP_FACTOR * env.n
    state = task.start
    actions: list[int] = []
    seen: list[tuple[int, int, int]] = []
    while True:
        plan = agent.plan(Task(state, task.target), history)
        if plan is None:
            break
        if len(actions) + len(plan.actions) > cap:
            break
        new = []
        for a in plan.actions:
            nxt = env.step(state, a)
            new.append((state, a, nxt))
            state = nxt
        actions.extend(plan.actions)
        seen.extend(new)
        history.record(new)
        agent.observe(new)
        if state == task.target:
            return Attempt(task, tuple(actions), True, state, tuple(seen))
        if not plan.actions:
            break
    return Attempt(task, tuple(actions), False, state, tuple(seen))


def shadow_attempt(agent: Agent, env: Environment, task: Task, history: History | None = None) -> Attempt:
    """Cost an agent on a task without touching its state or history."""
    clone = agent.frozen_copy()
    hist = copy.deepcopy(history) if history is not None else History()
    return attempt(clone, env, task, hist)
