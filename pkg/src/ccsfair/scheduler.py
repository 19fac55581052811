"""Bounded checks of the four fair-scheduler requirements, and the hat construction.

Requirements, for i in {1, 2}:

1. a complete path with finitely many ``r_i`` is ``r_i``-enabled;
2. on each complete path every ``r_i`` is followed by a ``t_i``;
3. no finite path has more ``t_i`` than ``r_i``;
4. between any two occurrences of ``t_1``/``t_2`` an ``e`` occurs.

Requirements 1 and 2 quantify over complete paths and are checked on the
simple lassos and finite complete paths within the prefix/cycle bounds, so
"holds" means "holds within bounds".
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator

from .net import Marking, NetTransition, fire, net_of
from .paths import AnyPath, Lasso, NetPath, enabled_actions, response_holds
from .syntax import (
    Action,
    Agent,
    Par,
    Prefix,
    Relabel,
    Relabelling,
    Restrict,
    Spec,
    SpecError,
    coname,
    handshake_names,
    is_non_blocking,
    name,
    output,
    validate,
)
from .verdict import Verdict

HOLDS = "holds-within-bounds"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SchedulerSignature:
    r1: Action
    r2: Action
    t1: Action
    t2: Action
    e: Action

    @classmethod
    def of(cls, spec: Spec, r1="r1", r2="r2", t1="t1", t2="t2", e="e") -> "SchedulerSignature":
        labels = [r1, r2, t1, t2, e]
        if len(set(labels)) != 5:
            raise SpecError("scheduler signature needs five distinct labels")
        for t in (t1, t2, e):
            if t not in spec.outputs:
                raise SpecError(f"{t} must be a declared output")
        for r in (r1, r2):
            if r in spec.outputs or r == "tau":
                raise SpecError(f"{r} must be a handshake name")
        return cls(name(r1), name(r2), output(t1), output(t2), output(e))

    def channels(self):
        return ((1, self.r1, self.t1), (2, self.r2, self.t2))


@dataclass(frozen=True)
class Bounds:
    prefix: int = 8
    cycle: int = 8
    depth: int = 12
    balance_cap: int = 8
    run_budget: int = 200_000  # search nodes for the complete-run enumeration


@dataclass(frozen=True)
class RequirementReport:
    verdicts: dict[int, Verdict]
    bounds: Bounds

    def violated(self) -> list[int]:
        return [i for i, v in sorted(self.verdicts.items()) if v.ok is False]

    @property
    def exit_code(self) -> int:
        codes = [v.exit_code for v in self.verdicts.values()]
        return 1 if 1 in codes else (2 if 2 in codes else 0)


# --------------------------------------------------------------------------
# complete runs within bounds


class CompleteRuns:
    """Complete simple lassos and complete finite paths from ``dec(spec.main)``, lazily.

    A run is simple when no marking repeats except where the cycle closes.
    Finite paths are included when their end enables no non-blocking
    transition and they are at most ``prefix_bound`` long.  Order is the
    depth-first order over canonically sorted transitions.  Runs are cached,
    so iterating twice costs one search.  With a ``budget`` the search stops
    after that many search nodes and sets ``cut``.
    """

    def __init__(self, spec: Spec, prefix_bound: int, cycle_bound: int, budget: int | None = None):
        if prefix_bound < 1 or cycle_bound < 1:
            raise ValueError("bounds must be at least 1")
        self.spec = spec
        self.prefix_bound = prefix_bound
        self.cycle_bound = cycle_bound
        self.budget = budget
        self.nodes = 0
        self.cut = False
        self._seen: list[AnyPath] = []
        self._gen = self._walk()

    def __iter__(self) -> Iterator[AnyPath]:
        i = 0
        while True:
            if i < len(self._seen):
                yield self._seen[i]
                i += 1
                continue
            run = next(self._gen, None)
            if run is None:
                return
            self._seen.append(run)

    def __len__(self) -> int:
        return sum(1 for _ in self)

    def _walk(self) -> Iterator[AnyPath]:
        net = net_of(self.spec)
        pb, cb = self.prefix_bound, self.cycle_bound
        start = net.initial
        seq: list[NetTransition] = []
        ms: list[Marking] = [start]
        pos = {start: 0}

        def closing(q: int) -> bool:
            # complete iff nothing non-blocking is enabled at the cycle start
            # with a preset the cycle leaves alone
            places = set()
            for t in seq[q:]:
                places |= t.pre.support()
            return not any(is_non_blocking(v.label) and v.pre.support().isdisjoint(places)
                           for v in net.enabled(ms[q]))

        def walk() -> Iterator[AnyPath]:
            self.nodes += 1
            if self.budget is not None and self.nodes > self.budget:
                self.cut = True
                return
            n = len(seq)
            m = ms[-1]
            ts = net.enabled(m)
            if n <= pb and not any(is_non_blocking(u.label) for u in ts):
                yield NetPath(net, start, tuple(seq))
            for u in ts:
                if self.cut:
                    return
                m2 = fire(m, u)
                q = pos.get(m2)
                if q is not None:
                    if q <= pb and n + 1 - q <= cb:
                        seq.append(u)
                        if closing(q):
                            yield Lasso(NetPath(net, start, tuple(seq[:q])), tuple(seq[q:]))
                        seq.pop()
                    continue
                if n + 1 <= pb or n + 2 <= pb + cb:
                    seq.append(u)
                    ms.append(m2)
                    pos[m2] = n + 1
                    yield from walk()
                    del pos[m2]
                    ms.pop()
                    seq.pop()

        yield from walk()


def enumerate_complete_lassos(spec: Spec, prefix_bound: int = 8, cycle_bound: int = 8) -> Iterator[AnyPath]:
    """All complete simple lassos and complete finite paths within the bounds (see :class:`CompleteRuns`)."""
    yield from CompleteRuns(spec, prefix_bound, cycle_bound)


def _runs(spec: Spec, bounds: Bounds) -> CompleteRuns:
    return CompleteRuns(spec, bounds.prefix, bounds.cycle, bounds.run_budget)


def _no_violation(runs: CompleteRuns) -> Verdict:
    if runs.cut:
        return Verdict(INCONCLUSIVE, None, explored=len(runs), truncated=True,
                       detail=f"run enumeration stopped after {runs.budget} search nodes")
    return Verdict(HOLDS, True, explored=len(runs))


def _labels(run: AnyPath) -> tuple[list[Action], list[Action]]:
    if isinstance(run, Lasso):
        return run.prefix_labels, run.cycle_labels
    return run.labels, []


def check_requirement_1(spec: Spec, sig: SchedulerSignature, bounds: Bounds = Bounds(),
                        runs: CompleteRuns | None = None) -> Verdict:
    if runs is None:
        runs = _runs(spec, bounds)
    for i, r, _ in sig.channels():
        for run in runs:
            _, cycle = _labels(run)
            if r in cycle:
                continue
            if r not in enabled_actions(run):
                return Verdict(VIOLATED, False, witness=run, explored=len(runs),
                               detail=f"complete path with finitely many {r} is not {r}-enabled")
    return _no_violation(runs)


def check_requirement_2(spec: Spec, sig: SchedulerSignature, bounds: Bounds = Bounds(),
                        runs: CompleteRuns | None = None) -> Verdict:
    if runs is None:
        runs = _runs(spec, bounds)
    for i, r, t in sig.channels():
        for run in runs:
            if not response_holds(run, r, t):
                return Verdict(VIOLATED, False, witness=run, explored=len(runs),
                               detail=f"complete path where some {r} is never followed by {t}")
    return _no_violation(runs)


def _trace(parent: dict, state) -> tuple[NetTransition, ...]:
    seq = []
    while parent[state] is not None:
        state, u = parent[state]
        seq.append(u)
    return tuple(reversed(seq))


def check_requirement_3(spec: Spec, sig: SchedulerSignature, depth_bound: int = 12,
                        balance_cap: int = 8) -> Verdict:
    """Breadth-first search for a finite path with more ``t_i`` than ``r_i``.

    A state is a marking plus the two balances ``#r_i - #t_i``.  A state is
    skipped when a visited state with the same marking has balances no larger
    (it can reach every violation the new one can).  Balances above the cap
    are pruned, which makes a clean search inconclusive.
    """
    net = net_of(spec)
    start = (net.initial, 0, 0)
    parent = {start: None}
    seen: dict[Marking, list[tuple[int, int]]] = {net.initial: [(0, 0)]}
    queue = deque([(start, 0)])
    capped = depth_hit = False
    while queue:
        state, depth = queue.popleft()
        m, b1, b2 = state
        ts = net.enabled(m)
        if depth >= depth_bound:
            depth_hit = depth_hit or bool(ts)
            continue
        for u in ts:
            n1 = b1 + (u.label == sig.r1) - (u.label == sig.t1)
            n2 = b2 + (u.label == sig.r2) - (u.label == sig.t2)
            m2 = fire(m, u)
            nxt = (m2, n1, n2)
            if n1 < 0 or n2 < 0:
                parent.setdefault(nxt, (state, u))
                witness = NetPath(net, net.initial, _trace(parent, nxt))
                which = sig.t1 if n1 < 0 else sig.t2
                return Verdict(VIOLATED, False, witness=witness, explored=len(parent),
                               detail=f"finite path with more {which} than requests")
            if n1 > balance_cap or n2 > balance_cap:
                capped = True
                continue
            olds = seen.setdefault(m2, [])
            if any(c1 <= n1 and c2 <= n2 for c1, c2 in olds):
                continue
            olds[:] = [c for c in olds if not (n1 <= c[0] and n2 <= c[1])] + [(n1, n2)]
            parent[nxt] = (state, u)
            queue.append((nxt, depth + 1))
    if capped:
        return Verdict(INCONCLUSIVE, None, explored=len(parent), truncated=True,
                       detail=f"balance above cap {balance_cap} was pruned")
    return Verdict(HOLDS, True, explored=len(parent), truncated=depth_hit)


def check_requirement_4(spec: Spec, sig: SchedulerSignature, depth_bound: int = 12) -> Verdict:
    """Reachability in the product with a monitor remembering "a task since the last e"."""
    net = net_of(spec)
    tasks = {sig.t1, sig.t2}
    start = (net.initial, False)
    parent = {start: None}
    queue = deque([(start, 0)])
    depth_hit = False
    while queue:
        state, depth = queue.popleft()
        m, pending = state
        ts = net.enabled(m)
        if depth >= depth_bound:
            depth_hit = depth_hit or bool(ts)
            continue
        for u in ts:
            m2 = fire(m, u)
            if u.label in tasks:
                if pending:
                    nxt = (m2, True)
                    witness = NetPath(net, net.initial, _trace(parent, state) + (u,))
                    return Verdict(VIOLATED, False, witness=witness, explored=len(parent),
                                   detail="two task grants without an e in between")
                nxt = (m2, True)
            elif u.label == sig.e:
                nxt = (m2, False)
            else:
                nxt = (m2, pending)
            if nxt not in parent:
                parent[nxt] = (state, u)
                queue.append((nxt, depth + 1))
    return Verdict(HOLDS, True, explored=len(parent), truncated=depth_hit)


def check_all(spec: Spec, sig: SchedulerSignature, bounds: Bounds = Bounds()) -> RequirementReport:
    runs = _runs(spec, bounds)
    return RequirementReport(
        {
            1: check_requirement_1(spec, sig, bounds, runs),
            2: check_requirement_2(spec, sig, bounds, runs),
            3: check_requirement_3(spec, sig, bounds.depth, bounds.balance_cap),
            4: check_requirement_4(spec, sig, bounds.depth),
        },
        bounds,
    )


# --------------------------------------------------------------------------
# hat construction


def _fresh(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    i = 1
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


def build_hat(spec: Spec, f: Relabelling, r1: str = "r1", r2: str = "r2") -> Spec:
    """Wrap ``spec.main`` as ``(I1 | main[f] | I2)\\c1\\c2`` with ``Ii = ri.'ci.Ii`` and ``ci = f(ri)``.

    ``f`` must be injective on the handshake names in use, send ``r1``/``r2``
    to fresh names, and hit neither ``r1`` nor ``r2``.
    """
    c1, c2 = f(r1), f(r2)
    if c1 == r1 or c2 == r2:
        raise SpecError(f"relabelling must rename {r1} and {r2}")
    used = set(f.mapping)
    for term in [spec.main, *spec.definitions.values()]:
        used |= handshake_names(term)
    images: dict[str, str] = {}
    for x in sorted(used):
        y = f(x)
        if y in images:
            raise SpecError(f"relabelling is not injective: {images[y]} and {x} both map to {y}")
        images[y] = x
    if r1 in images or r2 in images:
        raise SpecError(f"{r1} and {r2} must not be in the image of the relabelling")
    taken = set(spec.definitions)
    i1 = _fresh("I1", taken)
    i2 = _fresh("I2", taken | {i1})
    agents = dict(spec.definitions)
    agents[i1] = Prefix(name(r1), Prefix(coname(c1), Agent(i1)))
    agents[i2] = Prefix(name(r2), Prefix(coname(c2), Agent(i2)))
    main = Restrict(Restrict(Par(Par(Agent(i1), Relabel(spec.main, f)), Agent(i2)), c1), c2)
    return validate(Spec(spec.outputs, agents, main))


def default_hat_relabelling(r1: str = "r1", r2: str = "r2", c1: str = "c1", c2: str = "c2") -> Relabelling:
    return Relabelling.of({r1: c1, r2: c2})


def _meets(report: RequirementReport, which) -> bool | None:
    """True if all of ``which`` hold, False if one is violated, None if undecided."""
    oks = [report.verdicts[i].ok for i in which]
    if False in oks:
        return False
    return None if None in oks else True


@dataclass(frozen=True)
class CharacterisationCheck:
    """One instance of: F meets requirements 1-4 iff hat(F) meets 2-4.

    ``consistent`` is None when an inconclusive verdict leaves the instance open.
    """

    plain: RequirementReport
    hat: RequirementReport

    @property
    def plain_ok(self) -> bool | None:
        return _meets(self.plain, (1, 2, 3, 4))

    @property
    def hat_ok(self) -> bool | None:
        return _meets(self.hat, (2, 3, 4))

    @property
    def consistent(self) -> bool | None:
        if self.plain_ok is None or self.hat_ok is None:
            return None
        if self.plain_ok != self.hat_ok:
            return False
        # hat(F) meeting 2-4 must carry requirement 1 along
        return not (self.hat_ok and self.hat.verdicts[1].ok is False)


def check_characterisation(spec: Spec, sig: SchedulerSignature, bounds: Bounds = Bounds(),
                           f: Relabelling | None = None) -> CharacterisationCheck:
    r1, r2 = sig.r1.label, sig.r2.label
    used = set()
    for term in [spec.main, *spec.definitions.values()]:
        used |= handshake_names(term)
    if f is None:
        f = default_hat_relabelling(r1, r2, _fresh("c1", used), _fresh("c2", used | {"c1"}))
    hat = build_hat(spec, f, r1, r2)
    return CharacterisationCheck(check_all(spec, sig, bounds), check_all(hat, sig, bounds))


__all__ = [
    "Bounds", "CharacterisationCheck", "CompleteRuns", "HOLDS", "INCONCLUSIVE", "RequirementReport",
    "SchedulerSignature", "VIOLATED", "build_hat", "check_all", "check_characterisation",
    "check_requirement_1", "check_requirement_2", "check_requirement_3", "check_requirement_4",
    "default_hat_relabelling", "enumerate_complete_lassos",
]
