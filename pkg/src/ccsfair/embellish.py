"""Insertion of continuously enabled transitions and the (k, n)-incompleteness measure.

The completion procedures are bounded versions of the usual limit
constructions: they run for a fixed number of rounds and report exhaustion
instead of converging.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .net import NetTransition, NotEnabledError
from .paths import AnyPath, Lasso, NetPath, continuously_enabled, continuously_enabled_from, is_complete
from .syntax import is_non_blocking


@dataclass(frozen=True)
class Incompleteness:
    k: float  # a position, or math.inf for complete paths
    n: int
    witnesses: tuple[NetTransition, ...] = ()

    @property
    def complete(self) -> bool:
        return self.k == math.inf


COMPLETE = Incompleteness(math.inf, 0, ())


def incompleteness(path: AnyPath) -> Incompleteness:
    found = None
    witnesses: list[NetTransition] = []
    for k, v in continuously_enabled(path):
        if not is_non_blocking(v.label):
            continue
        if found is None:
            found = k
        if k != found:
            break
        witnesses.append(v)
    if found is None:
        return COMPLETE
    places = set()
    for w in witnesses:
        places |= w.pre.support()
    return Incompleteness(found, len(places), tuple(sorted(witnesses, key=lambda t: t.key)))


def insert(path: AnyPath, k: int, w: NetTransition) -> AnyPath:
    """Fire ``w`` at position ``k``; ``w`` must be continuously enabled from ``k``.

    Later markings shift by ``-pre(w) + post(w)``.  On a lasso the cycle is
    kept: positions inside the cycle region unroll whole turns into the prefix.
    """
    if not continuously_enabled_from(path, w, k):
        raise NotEnabledError(f"{w!r} is not continuously enabled from position {k}")
    if isinstance(path, Lasso):
        p, c = path.prefix.length, len(path.cycle)
        seq = path.prefix.transitions
        if k > p:
            turns, r = divmod(k - p, c)
            seq = seq + path.cycle * turns + path.cycle[:r]
            rest = path.cycle[r:]
        else:
            seq, rest = seq[:k], seq[k:]
        prefix = NetPath(path.net, path.start, seq + (w,) + rest)
        return Lasso(prefix, path.cycle)
    seq = path.transitions
    return NetPath(path.net, path.start, seq[:k] + (w,) + seq[k:])


def insert_periodic(path: Lasso, offset: int, w: NetTransition) -> Lasso:
    """Insert ``w`` into every turn of the cycle, before cycle step ``offset``.

    Only meaningful when ``w`` puts back what it takes (``pre == post``) so the
    cycle still closes.
    """
    if w.pre != w.post:
        raise ValueError("periodic insertion needs a transition with pre == post")
    p = path.prefix.length
    if not continuously_enabled_from(path, w, p + offset):
        raise NotEnabledError(f"{w!r} is not continuously enabled on the cycle")
    return Lasso(path.prefix, path.cycle[:offset] + (w,) + path.cycle[offset:])


def _same_prefix(rho: AnyPath, pi: AnyPath, k: int) -> bool:
    if rho.start != pi.start:
        return False
    for i in range(1, k + 1):
        try:
            if rho.transition_at(i) != pi.transition_at(i):
                return False
        except IndexError:
            return False
    return True


def less_incomplete(rho: AnyPath, pi: AnyPath) -> bool:
    inc_pi = incompleteness(pi)
    if inc_pi.complete:
        return False
    inc_rho = incompleteness(rho)
    if not _same_prefix(rho, pi, int(inc_pi.k)):
        return False
    return inc_rho.k > inc_pi.k or (inc_rho.k == inc_pi.k and inc_rho.n < inc_pi.n)


@dataclass(frozen=True)
class CompletionResult:
    status: str  # "complete" or "exhausted"
    path: AnyPath
    rounds: int

    @property
    def complete(self) -> bool:
        return self.status == "complete"


def embellish_to_complete(path: Lasso, max_rounds: int = 16) -> CompletionResult:
    """Insert witnesses at position ``k + 2i`` in round ``i`` until the lasso is complete.

    A position that falls inside the cycle region is realised by periodic
    insertion when the witness leaves the marking unchanged, so one insertion
    per turn can close the gap for good; otherwise the cycle is unrolled.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    current: AnyPath = path
    for i in range(max_rounds):
        inc = incompleteness(current)
        if inc.complete:
            return CompletionResult("complete", current, i)
        k = int(inc.k)
        w = inc.witnesses[0]
        pos = k + 2 * i
        p = current.prefix.length
        if pos > p and w.pre == w.post:
            nxt = insert_periodic(current, (pos - p) % len(current.cycle), w)
        else:
            nxt = insert(current, pos, w)
        if not less_incomplete(nxt, current):
            raise RuntimeError(f"round {i}: inserting {w!r} did not reduce incompleteness")
        current = nxt
    status = "complete" if incompleteness(current).complete else "exhausted"
    return CompletionResult(status, current, max_rounds)


def extend_to_complete(path: NetPath, max_steps: int = 64) -> CompletionResult:
    """Append witnesses until the path is complete.

    Whenever the end marking revisits an earlier one the loop is closed into a
    lasso; a complete lasso is returned, an incomplete one is ignored.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    current = path
    for i in range(max_steps + 1):
        inc = incompleteness(current)
        if inc.complete:
            return CompletionResult("complete", current, i)
        if i > 0:
            end = current.end
            q = current.markings.index(end)
            if q < current.length:
                lasso = Lasso(NetPath(current.net, current.start, current.transitions[:q]),
                              current.transitions[q:])
                if is_complete(lasso):
                    return CompletionResult("complete", lasso, i)
        if i == max_steps:
            break
        w = inc.witnesses[0]
        if not is_non_blocking(w.label):
            raise RuntimeError("witness with a blocking label")
        current = current.extend(w)
    return CompletionResult("exhausted", current, max_steps)
