"""Actions, relabellings, CCS! process terms and the spec-file parser.

A spec file looks like::

    # the one-channel scheduler
    output t e
    agent F0 = r.e.t.F0
    main F0

Expression grammar, loosest binding first::

    par  ::= sum ('|' sum)*
    sum  ::= seq ('+' seq)*
    seq  ::= act '.' seq | post
    post ::= post '\\' id | post '[' id '/' id (',' id '/' id)* ']' | atom
    atom ::= '0' | Id | '(' par ')'
    act  ::= id | "'" id | 'tau'

``[b/a]`` renames ``a`` to ``b``.  Identifiers declared with ``output`` are
output actions; every other action identifier is a handshake name.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Union


class CCSError(Exception):
    """Base class for all errors raised on malformed input."""


class ParseError(CCSError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)


class SpecError(ParseError):
    """A spec that is syntactically fine but violates a well-formedness rule."""


class NoComplementError(CCSError, ValueError):
    pass


# --------------------------------------------------------------------------
# actions


class Kind(enum.Enum):
    NAME = "name"
    CONAME = "coname"
    OUTPUT = "output"
    TAU = "tau"


@dataclass(frozen=True)
class Action:
    kind: Kind
    label: str = ""

    def __post_init__(self):
        if (self.kind is Kind.TAU) != (self.label == ""):
            raise ValueError("tau carries no label; every other action needs one")

    @property
    def is_handshake(self) -> bool:
        return self.kind in (Kind.NAME, Kind.CONAME)

    def __str__(self) -> str:
        if self.kind is Kind.TAU:
            return "tau"
        if self.kind is Kind.CONAME:
            return "'" + self.label
        return self.label

    def __repr__(self) -> str:
        return f"Action({self})"

    def sort_key(self) -> tuple[str, str]:
        return (str(self), self.kind.value)


TAU = Action(Kind.TAU)


def name(label: str) -> Action:
    return Action(Kind.NAME, label)


def coname(label: str) -> Action:
    return Action(Kind.CONAME, label)


def output(label: str) -> Action:
    return Action(Kind.OUTPUT, label)


def complement(a: Action) -> Action:
    if a.kind is Kind.NAME:
        return Action(Kind.CONAME, a.label)
    if a.kind is Kind.CONAME:
        return Action(Kind.NAME, a.label)
    raise NoComplementError(f"{a} has no complement")


def is_non_blocking(a: Action) -> bool:
    return a.kind in (Kind.OUTPUT, Kind.TAU)


@dataclass(frozen=True)
class Relabelling:
    """Finite renaming of handshake names; identity outside its domain.

    ``pairs`` holds ``(old, new)`` sorted by ``old``.
    """

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        olds = [old for old, _ in self.pairs]
        if len(set(olds)) != len(olds):
            raise ValueError("relabelling maps a name twice")
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))

    @classmethod
    def of(cls, mapping: Mapping[str, str]) -> "Relabelling":
        return cls(tuple(mapping.items()))

    @cached_property
    def mapping(self) -> dict[str, str]:
        return dict(self.pairs)

    def __call__(self, label: str) -> str:
        return self.mapping.get(label, label)

    def __str__(self) -> str:
        return ",".join(f"{new}/{old}" for old, new in self.pairs)

    def names(self) -> set[str]:
        return {x for pair in self.pairs for x in pair}


def apply_relabel(f: Relabelling, a: Action) -> Action:
    if a.is_handshake:
        return Action(a.kind, f(a.label))
    return a


def _cache_hash(cls):
    """Memoise the generated field hash; terms are deep and hashed often."""
    base = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = base(self)
            object.__setattr__(self, "_hash", h)
            return h

    cls.__hash__ = __hash__
    return cls


# --------------------------------------------------------------------------
# process terms


@dataclass(frozen=True)
class Agent:
    name: str


@_cache_hash
@dataclass(frozen=True)
class Prefix:
    action: Action
    body: "Process"


@_cache_hash
@dataclass(frozen=True)
class Sum:
    """Finite choice.  ``Sum(())`` is the inert process 0.

    Single-summand sums have no concrete syntax and are rejected; use
    :func:`choice` to build sums from arbitrary lists.
    """

    summands: tuple["Process", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "summands", tuple(self.summands))
        if len(self.summands) == 1:
            raise ValueError("a sum needs zero or at least two summands")


@_cache_hash
@dataclass(frozen=True)
class Par:
    left: "Process"
    right: "Process"


@_cache_hash
@dataclass(frozen=True)
class Restrict:
    body: "Process"
    name: str


@_cache_hash
@dataclass(frozen=True)
class Relabel:
    body: "Process"
    relabelling: Relabelling


Process = Union[Agent, Prefix, Sum, Par, Restrict, Relabel]
NIL = Sum(())


def choice(*procs: Process) -> Process:
    return procs[0] if len(procs) == 1 else Sum(procs)


def par(*procs: Process) -> Process:
    """Left-nested parallel composition, matching how ``A | B | C`` parses."""
    out = procs[0]
    for p in procs[1:]:
        out = Par(out, p)
    return out


def subterms(p: Process) -> Iterator[Process]:
    yield p
    if isinstance(p, Prefix):
        yield from subterms(p.body)
    elif isinstance(p, Sum):
        for q in p.summands:
            yield from subterms(q)
    elif isinstance(p, Par):
        yield from subterms(p.left)
        yield from subterms(p.right)
    elif isinstance(p, (Restrict, Relabel)):
        yield from subterms(p.body)


def handshake_names(p: Process) -> set[str]:
    """Every handshake name mentioned by ``p`` (prefixes, restrictions, relabellings)."""
    out: set[str] = set()
    for q in subterms(p):
        if isinstance(q, Prefix) and q.action.is_handshake:
            out.add(q.action.label)
        elif isinstance(q, Restrict):
            out.add(q.name)
        elif isinstance(q, Relabel):
            out |= q.relabelling.names()
    return out


def agent_refs(p: Process) -> set[str]:
    return {q.name for q in subterms(p) if isinstance(q, Agent)}


def _unguarded_refs(p: Process) -> set[str]:
    if isinstance(p, Agent):
        return {p.name}
    if isinstance(p, Prefix):
        return set()
    if isinstance(p, Sum):
        return set().union(*map(_unguarded_refs, p.summands)) if p.summands else set()
    if isinstance(p, Par):
        return _unguarded_refs(p.left) | _unguarded_refs(p.right)
    return _unguarded_refs(p.body)


# precedence levels for printing
_PAR, _SUM, _SEQ, _POST, _ATOM = range(5)


def _level(p: Process) -> int:
    if isinstance(p, Par):
        return _PAR
    if isinstance(p, Sum):
        return _ATOM if not p.summands else _SUM
    if isinstance(p, Prefix):
        return _SEQ
    if isinstance(p, (Restrict, Relabel)):
        return _POST
    return _ATOM


def _pp(p: Process, need: int) -> str:
    text = pretty(p)
    return f"({text})" if _level(p) < need else text


def pretty(p: Process) -> str:
    """Render a term so that :func:`parse_expr` reads it back identically."""
    if isinstance(p, Agent):
        return p.name
    if isinstance(p, Prefix):
        return f"{p.action}.{_pp(p.body, _SEQ)}"
    if isinstance(p, Sum):
        if not p.summands:
            return "0"
        return " + ".join(_pp(q, _SEQ) for q in p.summands)
    if isinstance(p, Par):
        return f"{_pp(p.left, _PAR)} | {_pp(p.right, _SUM)}"
    if isinstance(p, Restrict):
        return f"{_pp(p.body, _POST)}\\{p.name}"
    if isinstance(p, Relabel):
        return f"{_pp(p.body, _POST)}[{p.relabelling}]"
    raise TypeError(f"not a process: {p!r}")


# --------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class Spec:
    """Output declarations, agent defining equations and a main term.

    ``agents`` is stored as name-sorted pairs so specs hash and compare by value.
    """

    outputs: frozenset[str]
    agents: tuple[tuple[str, Process], ...]
    main: Process

    def __post_init__(self):
        object.__setattr__(self, "outputs", frozenset(self.outputs))
        if isinstance(self.agents, Mapping):
            object.__setattr__(self, "agents", tuple(sorted(self.agents.items())))
        else:
            object.__setattr__(self, "agents", tuple(sorted(self.agents)))

    @cached_property
    def definitions(self) -> dict[str, Process]:
        return dict(self.agents)

    def body(self, agent: str) -> Process:
        return self.definitions[agent]

    @cached_property
    def _hash(self) -> int:
        return hash((self.outputs, self.agents, self.main))

    def __hash__(self) -> int:
        return self._hash

    def with_main(self, main: Process) -> "Spec":
        return Spec(self.outputs, self.agents, main)

    def action(self, label: str) -> Action:
        """The action an identifier denotes in this spec."""
        if label == "tau":
            return TAU
        if label.startswith("'"):
            return coname(label[1:])
        return output(label) if label in self.outputs else name(label)


def validate(spec: Spec) -> Spec:
    """Check the well-formedness rules; raise :class:`SpecError` on the first violation."""
    defs = spec.definitions
    terms = [spec.main, *defs.values()]
    for ref in sorted(set().union(*map(agent_refs, terms))):
        if ref not in defs:
            raise SpecError(f"undefined agent {ref}")
    for agent, body in spec.agents:
        if _unguarded_refs(body):
            raise SpecError(f"unguarded recursion in the definition of {agent}")
    for term in terms:
        for q in subterms(term):
            if isinstance(q, Prefix):
                a = q.action
                if a.is_handshake and a.label in spec.outputs:
                    raise SpecError(f"{a.label} is an output and cannot be used as a handshake")
                if a.kind is Kind.OUTPUT and a.label not in spec.outputs:
                    raise SpecError(f"{a.label} is not a declared output")
            elif isinstance(q, Restrict) and q.name in spec.outputs:
                raise SpecError(f"cannot restrict output {q.name}")
            elif isinstance(q, Relabel) and q.relabelling.names() & spec.outputs:
                bad = sorted(q.relabelling.names() & spec.outputs)[0]
                raise SpecError(f"cannot relabel output {bad}")
    return spec


def pretty_spec(spec: Spec) -> str:
    lines = []
    if spec.outputs:
        lines.append("output " + " ".join(sorted(spec.outputs)))
    for agent, body in spec.agents:
        lines.append(f"agent {agent} = {pretty(body)}")
    lines.append(f"main {pretty(spec.main)}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<zero>0)|(?P<punct>[.+|\\\[\]/,()='])"
)
_KEYWORDS = {"output", "agent", "main"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "id" and chunk in _KEYWORDS:
            kind = "kw"
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, chunk, line, pos - line_start + 1))
        for i, ch in enumerate(chunk):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, outputs: Iterable[str] = ()):
        self.toks = _tokenize(text)
        self.i = 0
        self.outputs = set(outputs)
        self.refs: dict[str, _Tok] = {}

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, n: int = 1) -> _Tok:
        return self.toks[min(self.i + n, len(self.toks) - 1)]

    def error(self, message: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def advance(self) -> _Tok:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.kind not in ("punct", "kw", "zero"):
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> _Tok:
        if self.tok.kind != "id":
            raise self.error(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def handshake_ident(self, what: str) -> str:
        tok = self.ident(what)
        if tok.text == "tau":
            raise self.error(f"tau cannot be used in a {what}", tok)
        if tok.text in self.outputs:
            raise SpecError(f"cannot use output {tok.text} in a {what}", tok.line, tok.col)
        return tok.text

    # expressions

    def expr(self) -> Process:
        p = self.sum()
        while self.tok.text == "|" and self.tok.kind == "punct":
            self.advance()
            p = Par(p, self.sum())
        return p

    def sum(self) -> Process:
        ps = [self.seq()]
        while self.tok.text == "+" and self.tok.kind == "punct":
            self.advance()
            ps.append(self.seq())
        return choice(*ps)

    def seq(self) -> Process:
        tok = self.tok
        if tok.kind == "id" and self.peek().text == ".":
            self.advance()
            self.advance()
            if tok.text == "tau":
                act = TAU
            elif tok.text in self.outputs:
                act = output(tok.text)
            else:
                act = name(tok.text)
            return Prefix(act, self.seq())
        if tok.kind == "punct" and tok.text == "'":
            self.advance()
            label = self.handshake_ident("co-name")
            self.expect(".")
            return Prefix(coname(label), self.seq())
        return self.post()

    def post(self) -> Process:
        p = self.atom()
        while self.tok.kind == "punct" and self.tok.text in ("\\", "["):
            if self.advance().text == "\\":
                p = Restrict(p, self.handshake_ident("restriction"))
            else:
                start = self.tok
                pairs = [self.pair()]
                while self.tok.text == ",":
                    self.advance()
                    pairs.append(self.pair())
                self.expect("]")
                try:
                    p = Relabel(p, Relabelling(tuple(pairs)))
                except ValueError as exc:
                    raise self.error(str(exc), start) from None
        return p

    def pair(self) -> tuple[str, str]:
        new = self.handshake_ident("relabelling")
        self.expect("/")
        old = self.handshake_ident("relabelling")
        return (old, new)

    def atom(self) -> Process:
        tok = self.tok
        if tok.kind == "zero":
            self.advance()
            return NIL
        if tok.kind == "id":
            if tok.text == "tau":
                raise self.error("tau must be followed by '.'")
            self.advance()
            self.refs.setdefault(tok.text, tok)
            return Agent(tok.text)
        if tok.kind == "punct" and tok.text == "(":
            self.advance()
            p = self.expr()
            self.expect(")")
            return p
        raise self.error(f"expected a process, found {tok.text or 'end of input'!r}")

    # statements

    def spec(self) -> Spec:
        agents: dict[str, Process] = {}
        agent_toks: dict[str, _Tok] = {}
        main = None
        while self.tok.kind != "eof":
            tok = self.tok
            if tok.kind != "kw":
                raise self.error(f"expected 'output', 'agent' or 'main', found {tok.text!r}")
            self.advance()
            if tok.text == "output":
                self.ident("output name")
                while self.tok.kind == "id":
                    self.advance()
            elif tok.text == "agent":
                ident = self.ident("agent name")
                if ident.text == "tau":
                    raise self.error("tau is not an agent name", ident)
                if ident.text in agents:
                    raise SpecError(f"agent {ident.text} defined twice", ident.line, ident.col)
                self.expect("=")
                agents[ident.text] = self.expr()
                agent_toks[ident.text] = ident
            else:
                if main is not None:
                    raise SpecError("more than one main", tok.line, tok.col)
                main = self.expr()
        if main is None:
            raise self.error("missing 'main'")
        for ref, tok in self.refs.items():
            if ref not in agents:
                raise SpecError(f"undefined agent {ref}", tok.line, tok.col)
        for agent, body in agents.items():
            if _unguarded_refs(body):
                tok = agent_toks[agent]
                raise SpecError(f"unguarded recursion in the definition of {agent}", tok.line, tok.col)
        return Spec(frozenset(self.outputs), agents, main)


def _declared_outputs(text: str) -> set[str]:
    toks = _tokenize(text)
    outs: set[str] = set()
    for i, tok in enumerate(toks):
        if tok.kind == "kw" and tok.text == "output":
            j = i + 1
            while toks[j].kind == "id":
                if toks[j].text == "tau":
                    raise ParseError("tau cannot be declared an output", toks[j].line, toks[j].col)
                outs.add(toks[j].text)
                j += 1
    return outs


def parse(text: str) -> Spec:
    """Parse a spec file; raises :class:`ParseError` (or :class:`SpecError`) with a location."""
    spec = _Parser(text, _declared_outputs(text)).spec()
    return validate(spec)


def parse_expr(text: str, outputs: Iterable[str] = ()) -> Process:
    """Parse a single expression (no agent checks)."""
    p = _Parser(text, outputs)
    out = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return out
