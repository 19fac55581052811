"""Net paths and lassos, continuous enabledness, completeness, decomposition and lifting.

Positions on a path ``M0 u1 M1 u2 M2 ...`` index markings: position ``k`` is
``Mk`` and the transitions after it are ``u(k+1), u(k+2), ...``.  A lasso
``prefix . cycle^omega`` is the infinite path that runs its prefix and then
repeats its cycle forever.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

from .lts import step
from .net import (
    LeftPar,
    Marking,
    Net,
    NetTransition,
    NotEnabledError,
    RelabelG,
    RestrictG,
    RightPar,
    dec,
    fire,
    net_of,
    undec,
)
from .syntax import Action, Process, Spec, apply_relabel, complement, is_non_blocking, pretty

EnabledSet = frozenset  # of Action


@dataclass(frozen=True)
class NetPath:
    """A finite path; ``markings[k]`` is the marking at position ``k``."""

    net: Net
    start: Marking
    transitions: tuple[NetTransition, ...] = ()
    markings: tuple[Marking, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "transitions", tuple(self.transitions))
        ms = [self.start]
        for u in self.transitions:
            ms.append(fire(ms[-1], u))
        object.__setattr__(self, "markings", tuple(ms))

    @property
    def length(self) -> int:
        return len(self.transitions)

    @property
    def end(self) -> Marking:
        return self.markings[-1]

    @property
    def labels(self) -> list[Action]:
        return [u.label for u in self.transitions]

    @property
    def steps(self) -> list[tuple[NetTransition, Marking]]:
        return list(zip(self.transitions, self.markings[1:]))

    def marking_at(self, k: int) -> Marking:
        return self.markings[k]

    def transition_at(self, i: int) -> NetTransition:
        """The ``i``-th transition, counting from 1."""
        return self.transitions[i - 1]

    def extend(self, *us: NetTransition) -> "NetPath":
        return NetPath(self.net, self.start, self.transitions + us)

    def positions(self) -> range:
        return range(self.length + 1)


@dataclass(frozen=True)
class Lasso:
    """The infinite path ``prefix . cycle^omega``; the cycle must return to ``prefix.end``."""

    prefix: NetPath
    cycle: tuple[NetTransition, ...]
    cycle_markings: tuple[Marking, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise ValueError("a lasso needs a nonempty cycle")
        ms = [self.prefix.end]
        for u in self.cycle:
            ms.append(fire(ms[-1], u))
        if ms[-1] != ms[0]:
            raise ValueError("cycle does not return to its starting marking")
        object.__setattr__(self, "cycle_markings", tuple(ms[:-1]))

    @property
    def net(self) -> Net:
        return self.prefix.net

    @property
    def start(self) -> Marking:
        return self.prefix.start

    @property
    def prefix_labels(self) -> list[Action]:
        return self.prefix.labels

    @property
    def cycle_labels(self) -> list[Action]:
        return [u.label for u in self.cycle]

    def marking_at(self, k: int) -> Marking:
        p = self.prefix.length
        if k <= p:
            return self.prefix.markings[k]
        return self.cycle_markings[(k - p) % len(self.cycle)]

    def transition_at(self, i: int) -> NetTransition:
        p = self.prefix.length
        if i <= p:
            return self.prefix.transitions[i - 1]
        return self.cycle[(i - p - 1) % len(self.cycle)]

    def unroll(self, times: int = 1) -> NetPath:
        return self.prefix.extend(*(self.cycle * times))

    def positions(self) -> range:
        # one unrolling of the cycle covers every position up to periodicity
        return range(self.prefix.length + len(self.cycle))


AnyPath = Union[NetPath, Lasso]


def _preplaces(us: Iterable[NetTransition]) -> set:
    out: set = set()
    for u in us:
        out |= u.pre.support()
    return out


def _later_places(path: AnyPath) -> list[set]:
    """``later[k]`` = places in presets of every transition after position ``k``."""
    if isinstance(path, Lasso):
        base = _preplaces(path.cycle)
        pre = path.prefix.transitions
        later = [set(base) for _ in path.positions()]
        acc = set(base)
        for k in range(len(pre) - 1, -1, -1):
            acc |= pre[k].pre.support()
            later[k] = set(acc)
        return later
    pre = path.transitions
    later = [set() for _ in path.positions()]
    acc: set = set()
    for k in range(len(pre) - 1, -1, -1):
        acc |= pre[k].pre.support()
        later[k] = set(acc)
    return later


def _normalise(path: AnyPath, k: int) -> int:
    if isinstance(path, Lasso):
        p, c = path.prefix.length, len(path.cycle)
        return k if k < p else p + (k - p) % c
    if not 0 <= k <= path.length:
        raise IndexError(f"position {k} outside a path of length {path.length}")
    return k


def continuously_enabled_from(path: AnyPath, v: NetTransition, k: int) -> bool:
    k = _normalise(path, k)
    if not v.pre <= path.marking_at(k):
        return False
    return v.pre.support().isdisjoint(_later_places(path)[k])


def continuously_enabled(path: AnyPath) -> Iterator[tuple[int, NetTransition]]:
    """Every ``(k, v)`` with ``v`` continuously enabled from position ``k``, by increasing ``k``."""
    later = _later_places(path)
    for k in path.positions():
        for v in path.net.enabled(path.marking_at(k)):
            if v.pre.support().isdisjoint(later[k]):
                yield k, v


def enabled_actions(path: AnyPath) -> EnabledSet:
    """Labels of transitions continuously enabled from some position.

    Only one marking needs checking.  On a finite path a transition
    continuously enabled from ``k`` is still enabled at the end.  On a lasso
    the places the cycle never consumes from keep their count around the
    cycle (it returns to its start marking), so such a transition is enabled
    where the cycle starts, with a preset the cycle never touches.
    """
    if isinstance(path, Lasso):
        m, later = path.prefix.end, _preplaces(path.cycle)
    else:
        m, later = path.end, set()
    return frozenset(v.label for v in path.net.enabled(m) if v.pre.support().isdisjoint(later))


def is_complete(path: AnyPath) -> bool:
    return not any(is_non_blocking(a) for a in enabled_actions(path))


def is_y_just(path: AnyPath, y: Iterable[Action]) -> bool:
    """Net criterion for Y-justness of the lifted path: Y covers every enabled action and holds only handshakes."""
    y = set(y)
    return all(a.is_handshake for a in y) and enabled_actions(path) <= y


def replay(path: AnyPath) -> bool:
    """Re-derive every transition from its source marking; False on the first underivable step."""
    if isinstance(path, Lasso):
        return replay(path.unroll(1))
    for m, u in zip(path.markings, path.transitions):
        if u not in path.net.enabled(m):
            return False
    return True


# --------------------------------------------------------------------------
# decomposition


class ShapeError(ValueError):
    pass


def _rebuild(path: AnyPath, start: Marking, project) -> AnyPath:
    """Apply a per-transition projection (returning a list of 0 or 1 transitions)."""
    net = path.net
    if isinstance(path, Lasso):
        pre_seq, ms = [], path.prefix.markings
        for m, u in zip(ms, path.prefix.transitions):
            pre_seq.extend(project(m, u))
        prefix = NetPath(net, start, pre_seq)
        cyc = []
        for m, u in zip(path.cycle_markings, path.cycle):
            cyc.extend(project(m, u))
        return Lasso(prefix, cyc) if cyc else prefix
    seq = []
    for m, u in zip(path.markings, path.transitions):
        seq.extend(project(m, u))
    return NetPath(net, start, seq)


def _untag(m: Marking, cls) -> Marking:
    return Marking([g.inner for g, n in m.items() if isinstance(g, cls) for _ in range(n)])


def decompose_parallel(path: AnyPath) -> tuple[AnyPath, AnyPath]:
    """Split a path from ``dec(P|Q)`` into its left and right projections."""
    start = path.start
    if not start or not all(isinstance(g, (LeftPar, RightPar)) for g in start.support()):
        raise ShapeError(f"{start!r} is not the decomposition of a parallel composition")
    net = path.net

    def sides(u: NetTransition) -> tuple[bool, bool]:
        kinds = {type(g) for g in u.pre.support()}
        return LeftPar in kinds, RightPar in kinds

    def sync_parts(m: Marking, u: NetTransition) -> tuple[NetTransition, NetTransition]:
        lm, rm = _untag(m, LeftPar), _untag(m, RightPar)
        lpre, lpost = _untag(u.pre, LeftPar), _untag(u.post, LeftPar)
        rpre, rpost = _untag(u.pre, RightPar), _untag(u.post, RightPar)
        rights = [w for w in net.enabled(rm) if w.pre == rpre and w.post == rpost]
        for v in net.enabled(lm):
            if v.pre == lpre and v.post == lpost and v.label.is_handshake:
                for w in rights:
                    if w.label == complement(v.label):
                        return v, w
        raise ShapeError(f"{u!r} is not a synchronisation")

    def project_left(m: Marking, u: NetTransition) -> list[NetTransition]:
        has_l, has_r = sides(u)
        if has_l and has_r:
            return [sync_parts(m, u)[0]]
        if has_l:
            return [NetTransition(_untag(u.pre, LeftPar), u.label, _untag(u.post, LeftPar))]
        return []

    def project_right(m: Marking, u: NetTransition) -> list[NetTransition]:
        has_l, has_r = sides(u)
        if has_l and has_r:
            return [sync_parts(m, u)[1]]
        if has_r:
            return [NetTransition(_untag(u.pre, RightPar), u.label, _untag(u.post, RightPar))]
        return []

    return (
        _rebuild(path, _untag(start, LeftPar), project_left),
        _rebuild(path, _untag(start, RightPar), project_right),
    )


def _common_tag(path: AnyPath, cls, attr: str):
    support = path.start.support()
    values = {getattr(g, attr) for g in support if isinstance(g, cls)}
    if not support or len(values) != 1 or not all(isinstance(g, cls) for g in support):
        raise ShapeError(f"{path.start!r} does not have the expected {cls.__name__} shape")
    return values.pop()


def decompose_restrict(path: AnyPath) -> AnyPath:
    _common_tag(path, RestrictG, "name")

    def project(m: Marking, u: NetTransition) -> list[NetTransition]:
        return [NetTransition(_untag(u.pre, RestrictG), u.label, _untag(u.post, RestrictG))]

    return _rebuild(path, _untag(path.start, RestrictG), project)


def decompose_relabel(path: AnyPath) -> AnyPath:
    """Projection through a relabelling; when several exist the canonically least is taken."""
    f = _common_tag(path, RelabelG, "relabelling")
    net = path.net

    def project(m: Marking, u: NetTransition) -> list[NetTransition]:
        inner = _untag(m, RelabelG)
        pre, post = _untag(u.pre, RelabelG), _untag(u.post, RelabelG)
        for v in net.enabled(inner):
            if v.pre == pre and v.post == post and apply_relabel(f, v.label) == u.label:
                return [v]
        raise ShapeError(f"{u!r} has no projection through [{f}]")

    return _rebuild(path, _untag(path.start, RelabelG), project)


_STEP = re.compile(r"^(tau|'?[A-Za-z_]\w*)(?:#(\d+))?$")


def from_labels(spec: Spec, prefix: str | Sequence[str], cycle: str | Sequence[str] = ()) -> AnyPath:
    """Build a path or lasso from ``dec(spec.main)`` out of label words.

    Each word (``r1``, ``'a``, ``tau``) picks the canonically least enabled
    transition with that label; ``label#i`` picks the i-th instead.  An empty
    cycle gives a finite path.
    """
    net = net_of(spec)
    words = prefix.split() if isinstance(prefix, str) else list(prefix)
    cwords = cycle.split() if isinstance(cycle, str) else list(cycle)
    m = net.initial
    seq = []
    for w in words + cwords:
        mt = _STEP.match(w)
        if not mt:
            raise ValueError(f"bad step {w!r}")
        label, idx = mt.group(1), int(mt.group(2) or 0)
        matches = [u for u in net.enabled(m) if str(u.label) == label]
        if idx >= len(matches):
            raise ValueError(f"step {w!r}: {len(matches)} enabled transitions carry {label} at {m!r}")
        u = matches[idx]
        seq.append(u)
        m = fire(m, u)
    head, tail = tuple(seq[: len(words)]), tuple(seq[len(words):])
    if not tail:
        return NetPath(net, net.initial, head)
    return Lasso(NetPath(net, net.initial, head), tail)


# --------------------------------------------------------------------------
# lifting to the LTS


@dataclass(frozen=True)
class LtsPath:
    spec: Spec
    start: Process
    steps: tuple[tuple[Action, Process], ...] = ()

    @property
    def end(self) -> Process:
        return self.steps[-1][1] if self.steps else self.start

    @property
    def labels(self) -> list[Action]:
        return [a for a, _ in self.steps]

    @property
    def states(self) -> list[Process]:
        return [self.start] + [q for _, q in self.steps]

    def __str__(self) -> str:
        return " ".join([pretty(self.start)] + [f"--{a}--> {pretty(q)}" for a, q in self.steps])


@dataclass(frozen=True)
class LtsLasso:
    prefix: LtsPath
    cycle: tuple[tuple[Action, Process], ...]

    @property
    def prefix_labels(self) -> list[Action]:
        return self.prefix.labels

    @property
    def cycle_labels(self) -> list[Action]:
        return [a for a, _ in self.cycle]


class LiftError(ValueError):
    pass


def _lift_steps(spec: Spec, p: Process, transitions: Sequence[NetTransition], markings: Sequence[Marking]):
    out = []
    for u, m2 in zip(transitions, markings[1:]):
        matches = [q for a, q in step(spec, p) if a == u.label and dec(q) == m2]
        if len(matches) != 1:
            raise LiftError(f"{len(matches)} LTS steps of {pretty(p)} match {u!r}")
        p = matches[0]
        out.append((u.label, p))
    return out


def lift_path(spec: Spec, path: AnyPath, process: Process | None = None) -> LtsPath | LtsLasso:
    """The unique LTS path through the terms whose decompositions are the path's markings."""
    p = undec(path.start) if process is None else process
    if dec(p) != path.start:
        raise LiftError(f"path does not start at dec({pretty(p)})")
    if isinstance(path, Lasso):
        prefix = LtsPath(spec, p, tuple(_lift_steps(spec, p, path.prefix.transitions, path.prefix.markings)))
        ms = list(path.cycle_markings) + [path.prefix.end]
        cyc = _lift_steps(spec, prefix.end, path.cycle, ms)
        return LtsLasso(prefix, tuple(cyc))
    return LtsPath(spec, p, tuple(_lift_steps(spec, p, path.transitions, path.markings)))


# --------------------------------------------------------------------------
# response property on lassos


def response_holds_labels(prefix: Sequence, cycle: Sequence, trigger, response) -> bool:
    """Decide G(trigger => F response) on ``prefix . cycle^omega`` (a finite path if the cycle is empty)."""
    prefix, cycle = list(prefix), list(cycle)
    if trigger in cycle and response not in cycle:
        return False
    for i, a in enumerate(prefix):
        if a == trigger and response not in prefix[i + 1:] and response not in cycle:
            return False
    return True


def response_holds(path, trigger: Action, response: Action) -> bool:
    if isinstance(path, (Lasso, LtsLasso)):
        return response_holds_labels(path.prefix_labels, path.cycle_labels, trigger, response)
    return response_holds_labels(path.labels, [], trigger, response)


__all__ = [
    "AnyPath", "EnabledSet", "LiftError", "Lasso", "LtsLasso", "LtsPath", "NetPath",
    "NotEnabledError", "ShapeError", "continuously_enabled", "continuously_enabled_from",
    "decompose_parallel", "decompose_relabel", "decompose_restrict", "enabled_actions", "from_labels",
    "is_complete", "is_y_just", "lift_path", "replay", "response_holds", "response_holds_labels",
]
