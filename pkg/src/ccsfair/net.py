"""Petri net semantics of CCS!: grapes, ``dec``, transition derivation and firing.

The system-wide net has infinitely many places, so it is never built.
:class:`Net` derives on demand the transitions whose preset fits inside a
given marking, following the rules for prefixes, choice, both parallel
components, synchronisation, restriction, relabelling and agent unfolding.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Union

from .lts import reachable_lts, step
from .syntax import (
    TAU,
    Action,
    Agent,
    Par,
    Prefix,
    Process,
    Relabel,
    Relabelling,
    Restrict,
    Spec,
    Sum,
    _cache_hash,
    apply_relabel,
    complement,
    pretty,
)
from .verdict import Verdict

# --------------------------------------------------------------------------
# grapes


@dataclass(frozen=True)
class AgentG:
    name: str


@_cache_hash
@dataclass(frozen=True)
class PrefixG:
    action: Action
    body: Process


@_cache_hash
@dataclass(frozen=True)
class SumG:
    summands: tuple[Process, ...]


@_cache_hash
@dataclass(frozen=True)
class LeftPar:
    inner: "Grape"


@_cache_hash
@dataclass(frozen=True)
class RightPar:
    inner: "Grape"


@_cache_hash
@dataclass(frozen=True)
class RestrictG:
    inner: "Grape"
    name: str


@_cache_hash
@dataclass(frozen=True)
class RelabelG:
    inner: "Grape"
    relabelling: Relabelling


Grape = Union[AgentG, PrefixG, SumG, LeftPar, RightPar, RestrictG, RelabelG]


@lru_cache(maxsize=None)
def grape_str(g: Grape) -> str:
    """Canonical text of a grape; also its sort key."""
    if isinstance(g, AgentG):
        return g.name
    if isinstance(g, PrefixG):
        return pretty(Prefix(g.action, g.body))
    if isinstance(g, SumG):
        return pretty(Sum(g.summands))
    if isinstance(g, LeftPar):
        return f"({grape_str(g.inner)})|"
    if isinstance(g, RightPar):
        return f"|({grape_str(g.inner)})"
    if isinstance(g, RestrictG):
        return f"({grape_str(g.inner)})\\{g.name}"
    if isinstance(g, RelabelG):
        return f"({grape_str(g.inner)})[{g.relabelling}]"
    raise TypeError(f"not a grape: {g!r}")


# --------------------------------------------------------------------------
# markings


class Marking:
    """Finite multiset of grapes.  Immutable and hashable."""

    __slots__ = ("_counts", "_key", "_hash")

    def __init__(self, items: Iterable[Grape] | dict = ()):
        if isinstance(items, dict):
            counts = {g: n for g, n in items.items() if n > 0}
        else:
            counts = {}
            for g in items:
                counts[g] = counts.get(g, 0) + 1
        self._counts = counts
        self._key = frozenset(self._counts.items())
        self._hash = hash(self._key)

    @classmethod
    def _raw(cls, counts: dict) -> "Marking":
        return cls(counts)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return isinstance(other, Marking) and self._hash == other._hash and self._key == other._key

    def __iter__(self) -> Iterator[Grape]:
        """Distinct elements, in canonical order."""
        return iter(sorted(self._counts, key=grape_str))

    def __contains__(self, g) -> bool:
        return g in self._counts

    def __len__(self) -> int:
        return sum(self._counts.values())

    def __bool__(self) -> bool:
        return bool(self._counts)

    def __call__(self, g: Grape) -> int:
        return self._counts.get(g, 0)

    def items(self):
        return self._counts.items()

    def support(self) -> frozenset[Grape]:
        return frozenset(self._counts)

    def __le__(self, other: "Marking") -> bool:
        oc = other._counts
        return all(oc.get(g, 0) >= n for g, n in self._counts.items())

    def __add__(self, other: "Marking") -> "Marking":
        out = dict(self._counts)
        for g, n in other._counts.items():
            out[g] = out.get(g, 0) + n
        return Marking(out)

    def __sub__(self, other: "Marking") -> "Marking":
        if not other <= self:
            raise ValueError("multiset difference A - B needs B <= A")
        out = dict(self._counts)
        for g, n in other._counts.items():
            out[g] -= n
        return Marking(out)

    def __and__(self, other: "Marking") -> "Marking":
        oc = other._counts
        return Marking({g: min(n, oc[g]) for g, n in self._counts.items() if g in oc})

    def is_set(self) -> bool:
        return all(n == 1 for n in self._counts.values())

    def disjoint(self, other: "Marking") -> bool:
        return self._counts.keys().isdisjoint(other._counts.keys())

    def map(self, fn) -> "Marking":
        out: dict = {}
        for g, n in self._counts.items():
            h = fn(g)
            out[h] = out.get(h, 0) + n
        return Marking(out)

    def strings(self) -> list[str]:
        return sorted(grape_str(g) for g, n in self._counts.items() for _ in range(n))

    def __repr__(self) -> str:
        return "{" + ", ".join(self.strings()) + "}"


EMPTY = Marking()


def left(m: Marking) -> Marking:
    return m.map(LeftPar)


def right(m: Marking) -> Marking:
    return m.map(RightPar)


def restrict(m: Marking, a: str) -> Marking:
    return m.map(lambda g: RestrictG(g, a))


def relabel(m: Marking, f: Relabelling) -> Marking:
    return m.map(lambda g: RelabelG(g, f))


@lru_cache(maxsize=200_000)
def dec(p: Process) -> Marking:
    """Decompose a term into its set of grapes."""
    if isinstance(p, Agent):
        return Marking([AgentG(p.name)])
    if isinstance(p, Prefix):
        return Marking([PrefixG(p.action, p.body)])
    if isinstance(p, Sum):
        return Marking([SumG(p.summands)])
    if isinstance(p, Par):
        return left(dec(p.left)) + right(dec(p.right))
    if isinstance(p, Restrict):
        return restrict(dec(p.body), p.name)
    if isinstance(p, Relabel):
        return relabel(dec(p.body), p.relabelling)
    raise TypeError(f"not a process: {p!r}")


class NotInImageError(ValueError):
    pass


def undec(m: Marking) -> Process:
    """The unique term ``p`` with ``dec(p) == m``; raises if there is none."""
    if not m or not m.is_set():
        raise NotInImageError(f"{m!r} is not dec of any term")
    gs = list(m)
    g0 = gs[0]
    if len(gs) == 1 and isinstance(g0, AgentG):
        return Agent(g0.name)
    if len(gs) == 1 and isinstance(g0, PrefixG):
        return Prefix(g0.action, g0.body)
    if len(gs) == 1 and isinstance(g0, SumG):
        return Sum(g0.summands)
    if all(isinstance(g, (LeftPar, RightPar)) for g in gs):
        ls = [g.inner for g in gs if isinstance(g, LeftPar)]
        rs = [g.inner for g in gs if isinstance(g, RightPar)]
        return Par(undec(Marking(ls)), undec(Marking(rs)))
    if all(isinstance(g, RestrictG) and g.name == g0.name for g in gs):
        return Restrict(undec(Marking(g.inner for g in gs)), g0.name)
    if all(isinstance(g, RelabelG) and g.relabelling == g0.relabelling for g in gs):
        return Relabel(undec(Marking(g.inner for g in gs)), g0.relabelling)
    raise NotInImageError(f"{m!r} is not dec of any term")


# --------------------------------------------------------------------------
# transitions


@dataclass(frozen=True)
class NetTransition:
    pre: Marking
    label: Action
    post: Marking

    def __post_init__(self):
        if not self.pre:
            raise ValueError("transitions need a nonempty preset")

    @cached_property
    def key(self) -> tuple:
        return (self.label.sort_key(), tuple(self.pre.strings()), tuple(self.post.strings()))

    def map(self, fn, label: Action | None = None) -> "NetTransition":
        return NetTransition(self.pre.map(fn), label or self.label, self.post.map(fn))

    def __repr__(self) -> str:
        return f"{self.pre!r} --{self.label}--> {self.post!r}"


def canonical(ts: Iterable[NetTransition]) -> tuple[NetTransition, ...]:
    return tuple(sorted(set(ts), key=lambda t: t.key))


class NotEnabledError(ValueError):
    pass


def fire(m: Marking, u: NetTransition) -> Marking:
    out = _fire(m, u)
    if out is None:
        raise NotEnabledError(f"{u!r} is not enabled at {m!r}")
    return out


_interned: dict[Marking, Marking] = {}


@lru_cache(maxsize=500_000)
def _fire(m: Marking, u: NetTransition) -> Marking | None:
    if not u.pre <= m:
        return None
    out = m - u.pre + u.post
    if len(_interned) > 1_000_000:
        _interned.clear()
    # one object per distinct marking keeps later dict lookups on the identity fast path
    return _interned.setdefault(out, out)


class Net:
    """The unmarked net of one agent environment, with derivation caches."""

    def __init__(self, spec: Spec):
        self.spec = spec
        self._cache: dict[frozenset, tuple[NetTransition, ...]] = {}
        self._enabled: dict[Marking, tuple[NetTransition, ...]] = {}

    def __eq__(self, other) -> bool:
        return isinstance(other, Net) and self.spec == other.spec

    def __hash__(self) -> int:
        return hash(self.spec)

    def __repr__(self) -> str:
        return f"Net({pretty(self.spec.main)})"

    @property
    def initial(self) -> Marking:
        return dec(self.spec.main)

    def enabled(self, m: Marking) -> tuple[NetTransition, ...]:
        """Transitions with preset <= m, canonically ordered."""
        hit = self._enabled.get(m)
        if hit is None:
            hit = tuple(t for t in self._derive(m.support()) if t.pre <= m)
            self._enabled[m] = hit
        return hit

    def _derive(self, places: frozenset) -> tuple[NetTransition, ...]:
        hit = self._cache.get(places)
        if hit is not None:
            return hit
        out: list[NetTransition] = []
        lefts, rights = [], []
        restricted: dict[str, list] = {}
        relabelled: dict[Relabelling, list] = {}
        for g in places:
            if isinstance(g, PrefixG):
                out.append(NetTransition(Marking([g]), g.action, dec(g.body)))
            elif isinstance(g, SumG):
                for e in g.summands:
                    out.extend(self._unfold(g, dec(e)))
            elif isinstance(g, AgentG):
                out.extend(self._unfold(g, dec(self.spec.body(g.name))))
            elif isinstance(g, LeftPar):
                lefts.append(g.inner)
            elif isinstance(g, RightPar):
                rights.append(g.inner)
            elif isinstance(g, RestrictG):
                restricted.setdefault(g.name, []).append(g.inner)
            elif isinstance(g, RelabelG):
                relabelled.setdefault(g.relabelling, []).append(g.inner)
        lts = self._derive(frozenset(lefts)) if lefts else ()
        rts = self._derive(frozenset(rights)) if rights else ()
        out.extend(t.map(LeftPar) for t in lts)
        out.extend(t.map(RightPar) for t in rts)
        for tl in lts:
            if not tl.label.is_handshake:
                continue
            co = complement(tl.label)
            for tr in rts:
                if tr.label == co:
                    out.append(
                        NetTransition(left(tl.pre) + right(tr.pre), TAU, left(tl.post) + right(tr.post))
                    )
        for c, inner in restricted.items():
            for t in self._derive(frozenset(inner)):
                if not (t.label.is_handshake and t.label.label == c):
                    out.append(t.map(lambda g, c=c: RestrictG(g, c)))
        for f, inner in relabelled.items():
            for t in self._derive(frozenset(inner)):
                out.append(t.map(lambda g, f=f: RelabelG(g, f), apply_relabel(f, t.label)))
        result = canonical(out)
        self._cache[places] = result
        return result

    def _unfold(self, g: Grape, body: Marking) -> Iterator[NetTransition]:
        # choice and agent rules: K is the part of dec(body) the sub-transition leaves alone
        for t in self._derive(body.support()):
            yield NetTransition(Marking([g]), t.label, t.post + (body - t.pre))


@lru_cache(maxsize=256)
def net_of(spec: Spec) -> Net:
    return Net(spec)


def enabled_transitions(spec: Spec, m: Marking) -> tuple[NetTransition, ...]:
    return net_of(spec).enabled(m)


# --------------------------------------------------------------------------
# net-level checks


def reachable_markings(spec: Spec, marking_bound: int):
    """BFS over markings from ``dec(spec.main)``.

    Returns ``(order, parent, truncated)`` where ``parent`` maps a marking to
    the ``(marking, transition)`` it was first reached by.
    """
    net = net_of(spec)
    init = net.initial
    parent: dict[Marking, tuple[Marking, NetTransition] | None] = {init: None}
    order = [init]
    queue = deque([init])
    truncated = False
    while queue:
        m = queue.popleft()
        for u in net.enabled(m):
            m2 = fire(m, u)
            if m2 in parent:
                continue
            if len(parent) >= marking_bound:
                truncated = True
                continue
            parent[m2] = (m, u)
            order.append(m2)
            queue.append(m2)
    return order, parent, truncated


def _trace(parent, m: Marking) -> list[NetTransition]:
    seq = []
    while parent[m] is not None:
        m, u = parent[m]
        seq.append(u)
    return seq[::-1]


def check_safe(spec: Spec, marking_bound: int = 500) -> Verdict:
    net = net_of(spec)
    order, parent, truncated = reachable_markings(spec, marking_bound)
    for m in order:
        if not m.is_set():
            return Verdict("unsafe", False, witness=_trace(parent, m), explored=len(order),
                           detail=f"marking {m!r} holds a place twice")
        for u in net.enabled(m):
            if not u.pre:
                return Verdict("unsafe", False, detail=f"transition with empty preset {u!r}")
    if truncated:
        return Verdict("truncated", None, explored=len(order), truncated=True)
    return Verdict("safe", True, explored=len(order))


def check_structural_conflict(spec: Spec, marking_bound: int = 500) -> Verdict:
    net = net_of(spec)
    order, parent, truncated = reachable_markings(spec, marking_bound)
    for m in order:
        ts = net.enabled(m)
        for i, u in enumerate(ts):
            for v in ts[i:]:
                if u.pre + v.pre <= m and not u.pre.disjoint(v.pre):
                    return Verdict("conflict", False, witness=_trace(parent, m), explored=len(order),
                                   detail=f"{u!r} and {v!r} are jointly enabled but share a preplace")
    if truncated:
        return Verdict("truncated", None, explored=len(order), truncated=True)
    return Verdict("holds", True, explored=len(order))


def check_bisim(spec: Spec, state_bound: int = 10_000, depth: int | None = None) -> Verdict:
    """Match every LTS step of each reachable term against the net steps of its ``dec``."""
    net = net_of(spec)
    graph = reachable_lts(spec, state_bound, depth)
    for r in graph.states:
        m = dec(r)
        net_steps = {(u.label, fire(m, u)) for u in net.enabled(m)}
        lts_steps = {(a, dec(r2)) for a, r2 in step(spec, r)}
        missing = lts_steps - net_steps
        extra = net_steps - lts_steps
        if missing or extra:
            if missing:
                a, m2 = sorted(missing, key=lambda s: (s[0].sort_key(), s[1].strings()))[0]
                detail = f"{pretty(r)} --{a}--> has no net counterpart reaching {m2!r}"
            else:
                a, m2 = sorted(extra, key=lambda s: (s[0].sort_key(), s[1].strings()))[0]
                detail = f"net step {m!r} --{a}--> {m2!r} has no LTS counterpart"
            return Verdict("mismatch", False, witness=r, detail=detail, explored=len(graph.states))
    # a depth cut is the requested scope; only a state-bound cut leaves the verdict open
    detail = f"checked to depth {depth}" if graph.depth_limited else ""
    return Verdict("bisimilar", True, explored=len(graph.states), detail=detail,
                   truncated=graph.state_limited)


def check_dec_injective(corpus: Iterable[Process]) -> Verdict:
    seen: dict[Marking, Process] = {}
    count = 0
    for p in corpus:
        count += 1
        m = dec(p)
        other = seen.setdefault(m, p)
        if other != p:
            return Verdict("collision", False, witness=(other, p), explored=count,
                           detail=f"{pretty(other)} and {pretty(p)} both decompose to {m!r}")
    return Verdict("injective", True, explored=count)
