"""Named example specifications and a seeded generator of random guarded specs.

Random specs keep every agent body sequential (prefixes, sums, agent calls),
so each component is finite-state; parallel composition, restriction and
relabelling appear only in ``main`` above the agents.
"""
from __future__ import annotations

import random
from typing import Iterator

from .net import NetTransition, net_of
from .paths import Lasso, NetPath
from .syntax import (
    NIL,
    TAU,
    Agent,
    Par,
    Prefix,
    Process,
    Relabel,
    Relabelling,
    Restrict,
    Spec,
    choice,
    coname,
    name,
    output,
    parse,
    validate,
)

SCHEDULER_OUTPUTS = "output t1 t2 e\n"

NAMED_TEXTS: dict[str, str] = {
    "F0": "output t e\nagent F0 = r.e.t.F0\nmain F0\n",
    "F1|F2": SCHEDULER_OUTPUTS + "agent F1 = r1.t1.F1\nagent F2 = r2.t2.F2\nmain F1 | F2\n",
    "E1|E2": SCHEDULER_OUTPUTS + "agent E1 = r1.E1\nagent E2 = r2.E2\nmain E1 | E2\n",
    "E1|G1|E2": SCHEDULER_OUTPUTS
    + "agent E1 = r1.E1\nagent E2 = r2.E2\nagent G1 = t1.e.t2.e.G1\nmain E1 | G1 | E2\n",
    "G2": SCHEDULER_OUTPUTS + "agent G2 = r1.t1.e.G2 + r2.t2.e.G2\nmain G2\n",
    "fair": SCHEDULER_OUTPUTS
    + "agent I1 = r1.'c1.I1\nagent I2 = r2.'c2.I2\n"
    + "agent G = c1.t1.e.G + c2.t2.e.G\nmain (I1 | G | I2)\\c1\\c2\n",
    "E": "agent E = a.E + b.0\nmain E\n",
    "A|B": "agent A = a.A\nagent B = b.B\nmain A | B\n",
    "B|B": "output b\nagent B = b.B\nmain B | B\n",
    "((P|Q)\\a)|R": "agent P = a.P + c.P\nagent Q = 'a.Q\nagent R = b.R + 'c.R\nmain ((P | Q)\\a) | R\n",
    "b.0+(A|b.0)": "output b\nagent A = a.A\nmain b.0 + (A | b.0)\n",
    "a.(A|b.0)": "output b\nagent A = a.A\nmain a.(A | b.0)\n",
    "A|b.0": "output b\nagent A = a.A\nmain A | b.0\n",
    "C": "agent C = a.C + b.C\nmain C\n",
    "D": "agent D = a.b.D\nmain D\n",
    "a.0|b.0": "main a.0 | b.0\n",
    "'a.0|a.0": "main 'a.0 | a.0\n",
    "nil": "main 0\n",
}

# scheduler candidates over r1 r2 / t1 t2 e, for the requirement checks
SCHEDULER_NAMES = ("F1|F2", "E1|E2", "E1|G1|E2", "G2", "fair")


def named_specs() -> dict[str, Spec]:
    from .scheduler import build_hat, default_hat_relabelling

    specs = {k: parse(v) for k, v in NAMED_TEXTS.items()}
    specs["hat(G2)"] = build_hat(specs["G2"], default_hat_relabelling())
    return specs


# --------------------------------------------------------------------------
# random specs


class SpecGenerator:
    """Random guarded specs from a seed.

    ``names`` are handshake names and ``outputs`` the declared outputs used
    for actions.  Sizes are kept small so reachable state spaces stay in the
    tens of states.
    """

    def __init__(self, seed: int, names=("a", "b", "c"), outputs=("o",), agents=(1, 3),
                 body_depth=3, components=(1, 3), tau_weight=0.1):
        self.rng = random.Random(seed)
        self.names = tuple(names)
        self.outputs = tuple(outputs)
        self.agents = agents
        self.body_depth = body_depth
        self.components = components
        self.tau_weight = tau_weight

    def action(self):
        rng = self.rng
        x = rng.random()
        if x < self.tau_weight:
            return TAU
        if self.outputs and x < self.tau_weight + 0.25:
            return output(rng.choice(self.outputs))
        n = rng.choice(self.names)
        return name(n) if rng.random() < 0.5 else coname(n)

    def body(self, ids: list[str], depth: int, guarded: bool) -> Process:
        """A sequential term; agent calls only once ``guarded`` (below a prefix)."""
        rng = self.rng
        if depth <= 0:
            if guarded and rng.random() < 0.8:
                return Agent(rng.choice(ids))
            return NIL
        x = rng.random()
        if x < 0.55 or not guarded:
            if x > 0.85 and not guarded:
                return choice(self.body(ids, depth - 1, False), Prefix(self.action(), self.body(ids, depth - 1, True)))
            return Prefix(self.action(), self.body(ids, depth - 1, True))
        if x < 0.8:
            return choice(*[Prefix(self.action(), self.body(ids, depth - 1, True))
                            for _ in range(rng.randint(2, 3))])
        return Agent(rng.choice(ids))

    def relabelling(self) -> Relabelling:
        rng = self.rng
        olds = rng.sample(self.names, rng.randint(1, min(2, len(self.names))))
        return Relabelling.of({o: rng.choice(self.names) for o in olds})

    def wrap(self, p: Process) -> Process:
        x = self.rng.random()
        if x < 0.25:
            return Restrict(p, self.rng.choice(self.names))
        if x < 0.35:
            return Relabel(p, self.relabelling())
        return p

    def _agents(self):
        ids = [f"X{i}" for i in range(self.rng.randint(*self.agents))]
        return ids, {x: self.body(ids, self.rng.randint(1, self.body_depth), False) for x in ids}

    def _component(self, ids) -> Process:
        part = Agent(self.rng.choice(ids)) if self.rng.random() < 0.7 else self.body(ids, 2, True)
        return self.wrap(part)

    def shaped(self, top: str) -> Spec:
        """A spec whose main is a parallel composition, restriction or relabelling (``top``)."""
        ids, agents = self._agents()
        if top == "par":
            main = Par(self._component(ids), self._component(ids))
        elif top == "restrict":
            inner = Par(self._component(ids), self._component(ids)) if self.rng.random() < 0.6 else self._component(ids)
            main = Restrict(inner, self.rng.choice(self.names))
        elif top == "relabel":
            inner = Par(self._component(ids), self._component(ids)) if self.rng.random() < 0.6 else self._component(ids)
            main = Relabel(inner, self.relabelling())
        else:
            raise ValueError(f"unknown shape {top!r}")
        return validate(Spec(frozenset(self.outputs), agents, main))

    def spec(self) -> Spec:
        rng = self.rng
        ids, agents = self._agents()
        parts = []
        for _ in range(rng.randint(*self.components)):
            parts.append(self._component(ids))
        main = parts[0]
        for q in parts[1:]:
            main = self.wrap(Par(main, q))
        if rng.random() < 0.15:
            main = Prefix(self.action(), main)
        return validate(Spec(frozenset(self.outputs), agents, main))

    def __iter__(self) -> Iterator[Spec]:
        while True:
            yield self.spec()


def random_specs(seed: int, count: int, **kw) -> list[Spec]:
    gen = SpecGenerator(seed, **kw)
    return [gen.spec() for _ in range(count)]


def random_scheduler_specs(seed: int, count: int) -> list[Spec]:
    """Random specs over the scheduler alphabet (r1 r2 c handshakes; t1 t2 e outputs)."""
    return random_specs(seed, count, names=("r1", "r2", "c"), outputs=("t1", "t2", "e"),
                        components=(1, 2), tau_weight=0.05)


def corpus(seed: int = 0, random_count: int = 48) -> dict[str, Spec]:
    """The named example specs followed by ``random_count`` random ones named ``rand<i>``."""
    out = named_specs()
    for i, s in enumerate(random_specs(seed, random_count)):
        out[f"rand{i}"] = s
    return out


# --------------------------------------------------------------------------
# random paths


def random_path(spec: Spec, rng: random.Random, length: int) -> NetPath:
    """A random firing sequence of at most ``length`` steps from ``dec(main)``."""
    net = net_of(spec)
    seq: list[NetTransition] = []
    m = net.initial
    for _ in range(length):
        ts = net.enabled(m)
        if not ts:
            break
        u = rng.choice(ts)
        seq.append(u)
        m = m - u.pre + u.post
    return NetPath(net, net.initial, tuple(seq))


def random_lasso(spec: Spec, rng: random.Random, length: int) -> Lasso | None:
    """Walk until a marking repeats and close the loop there; None on deadlock or no repeat."""
    net = net_of(spec)
    seq: list[NetTransition] = []
    m = net.initial
    seen = {m: 0}
    for _ in range(length):
        ts = net.enabled(m)
        if not ts:
            return None
        u = rng.choice(ts)
        seq.append(u)
        m = m - u.pre + u.post
        if m in seen:
            q = seen[m]
            return Lasso(NetPath(net, net.initial, tuple(seq[:q])), tuple(seq[q:]))
        seen[m] = len(seq)
    return None


__all__ = [
    "NAMED_TEXTS", "SCHEDULER_NAMES", "SpecGenerator", "corpus", "named_specs",
    "random_lasso", "random_path", "random_scheduler_specs", "random_specs",
]
