"""Interleaving semantics: outgoing transitions of a term and bounded state spaces."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

from .syntax import (
    TAU,
    Action,
    Agent,
    Par,
    Prefix,
    Process,
    Relabel,
    Restrict,
    Spec,
    Sum,
    apply_relabel,
    complement,
    pretty,
)


@dataclass(frozen=True)
class LtsTransition:
    source: Process
    label: Action
    target: Process


@dataclass(frozen=True)
class LtsGraph:
    states: tuple[Process, ...]
    transitions: tuple[LtsTransition, ...]
    initial: Process
    truncated: bool
    state_limited: bool = False  # the state bound dropped a successor
    depth_limited: bool = False  # the depth bound left a new successor unexplored


def step(spec: Spec, p: Process) -> frozenset[tuple[Action, Process]]:
    """All ``(a, p2)`` with ``p --a--> p2`` under the agent equations of ``spec``."""
    return _step(spec, p)


@lru_cache(maxsize=200_000)
def _step(spec: Spec, p: Process) -> frozenset[tuple[Action, Process]]:
    if isinstance(p, Prefix):
        return frozenset({(p.action, p.body)})
    if isinstance(p, Sum):
        out: set[tuple[Action, Process]] = set()
        for q in p.summands:
            out |= _step(spec, q)
        return frozenset(out)
    if isinstance(p, Agent):
        return _step(spec, spec.body(p.name))
    if isinstance(p, Par):
        left = _step(spec, p.left)
        right = _step(spec, p.right)
        out = {(a, Par(l2, p.right)) for a, l2 in left}
        out |= {(a, Par(p.left, r2)) for a, r2 in right}
        for a, l2 in left:
            if not a.is_handshake:
                continue
            co = complement(a)
            out |= {(TAU, Par(l2, r2)) for b, r2 in right if b == co}
        return frozenset(out)
    if isinstance(p, Restrict):
        return frozenset(
            (a, Restrict(q, p.name))
            for a, q in _step(spec, p.body)
            if not (a.is_handshake and a.label == p.name)
        )
    if isinstance(p, Relabel):
        f = p.relabelling
        return frozenset((apply_relabel(f, a), Relabel(q, f)) for a, q in _step(spec, p.body))
    raise TypeError(f"not a process: {p!r}")


def sorted_steps(spec: Spec, p: Process) -> list[tuple[Action, Process]]:
    return sorted(step(spec, p), key=lambda s: (s[0].sort_key(), pretty(s[1])))


def reachable_lts(spec: Spec, state_bound: int = 10_000, depth: int | None = None) -> LtsGraph:
    """Breadth-first state space from ``spec.main``.

    At most ``state_bound`` states are kept and, if ``depth`` is given, no state
    further than ``depth`` steps from the initial one is expanded.  Either cut
    sets ``truncated``; transitions into dropped states are dropped too, while
    frontier transitions back into known states are kept.
    """
    if state_bound < 1:
        raise ValueError("state_bound must be at least 1")
    init = spec.main
    dist = {init: 0}
    queue = deque([init])
    transitions: list[LtsTransition] = []
    by_state = by_depth = False
    frontier = []
    while queue:
        p = queue.popleft()
        succs = sorted_steps(spec, p)
        if depth is not None and dist[p] >= depth:
            frontier.append((p, succs))
            continue
        for a, q in succs:
            if q not in dist:
                if len(dist) >= state_bound:
                    by_state = True
                    continue
                dist[q] = dist[p] + 1
                queue.append(q)
            transitions.append(LtsTransition(p, a, q))
    for p, succs in frontier:
        for a, q in succs:
            if q in dist:
                transitions.append(LtsTransition(p, a, q))
            else:
                by_depth = True
    truncated = by_state or by_depth
    states = tuple(sorted(dist, key=pretty))
    transitions.sort(key=lambda t: (pretty(t.source), t.label.sort_key(), pretty(t.target)))
    return LtsGraph(states, tuple(transitions), init, truncated, by_state, by_depth)
