from hypothesis import given, settings

from ccsfair.lts import reachable_lts, sorted_steps, step
from ccsfair.syntax import (
    NIL, TAU, Agent, Kind, Par, Prefix, Relabel, Restrict, Sum, coname, name, parse, pretty,
)

from .strategies import specs


def derivations(spec, p):
    """Every proof tree of the operational rules, as (rule, action, target) triples.

    Written rule by rule, without the shortcuts of the library version, to
    serve as an oracle.  Guardedness bounds the recursion through agents.
    """
    out = []
    if isinstance(p, Prefix):
        out.append(("act", p.action, p.body))
    elif isinstance(p, Sum):
        for j, q in enumerate(p.summands):
            out += [(f"sum{j}/" + r, a, t) for r, a, t in derivations(spec, q)]
    elif isinstance(p, Agent):
        out += [("rec/" + r, a, t) for r, a, t in derivations(spec, spec.body(p.name))]
    elif isinstance(p, Par):
        ls = derivations(spec, p.left)
        rs = derivations(spec, p.right)
        out += [("par-l/" + r, a, Par(t, p.right)) for r, a, t in ls]
        out += [("par-r/" + r, a, Par(p.left, t)) for r, a, t in rs]
        for r1, a, t1 in ls:
            for r2, b, t2 in rs:
                pair = {a.kind, b.kind}
                if pair == {Kind.NAME, Kind.CONAME} and a.label == b.label:
                    out.append((f"comm/{r1}/{r2}", TAU, Par(t1, t2)))
    elif isinstance(p, Restrict):
        for r, a, t in derivations(spec, p.body):
            if a in (name(p.name), coname(p.name)):
                continue
            out.append(("res/" + r, a, Restrict(t, p.name)))
    elif isinstance(p, Relabel):
        f = p.relabelling.mapping
        for r, a, t in derivations(spec, p.body):
            if a.kind in (Kind.NAME, Kind.CONAME):
                a = type(a)(a.kind, f.get(a.label, a.label))
            out.append(("rel/" + r, a, Relabel(t, p.relabelling)))
    return out


def _labels(spec, p):
    return sorted((str(a), pretty(q)) for a, q in step(spec, p))


def test_f0_cycle():
    spec = parse("output t e\nagent F0 = r.e.t.F0\nmain F0")
    g = reachable_lts(spec)
    assert len(g.states) == 3 and len(g.transitions) == 3
    assert [str(t.label) for t in g.transitions] == ["r", "e", "t"]


def test_sync_yields_tau():
    spec = parse("main 'a.0 | a.0")
    assert _labels(spec, spec.main) == [("'a", "0 | a.0"), ("a", "'a.0 | 0"), ("tau", "0 | 0")]


def test_restriction_blocks_handshake_only():
    spec = parse("output t\nmain (a.0 | t.0 | 'a.0)\\a")
    labels = [l for l, _ in _labels(spec, spec.main)]
    assert labels == ["t", "tau"]


def test_relabel_renames():
    spec = parse("output t\nmain (a.0 + t.0)[b/a]")
    assert [l for l, _ in _labels(spec, spec.main)] == ["b", "t"]


def test_g2_graph():
    spec = parse("output t1 t2 e\nagent G2 = r1.t1.e.G2 + r2.t2.e.G2\nmain G2")
    g = reachable_lts(spec)
    assert (len(g.states), len(g.transitions)) == (4, 5)


def test_nil_and_depth():
    spec = parse("main 0")
    g = reachable_lts(spec, depth=5)
    assert g.states == (NIL,) and g.transitions == () and not g.truncated
    spec = parse("agent A = a.b.c.A\nmain A")
    g = reachable_lts(spec, depth=1)
    assert g.truncated and g.depth_limited and not g.state_limited and len(g.states) == 2
    # frontier edges back into known states do not count as a cut
    g = reachable_lts(parse("agent A = a.b.A\nmain A"), depth=1)
    assert not g.truncated and len(g.transitions) == 2


def test_state_bound_truncates():
    spec = parse("agent A = a.(A | A)\nmain A")
    g = reachable_lts(spec, state_bound=10)
    assert g.truncated and len(g.states) == 10


def test_sorted_steps_deterministic():
    spec = parse("output o\nmain o.0 + b.0 + 'a.0 + tau.0 + a.0")
    assert [str(a) for a, _ in sorted_steps(spec, spec.main)] == ["'a", "a", "b", "o", "tau"]


@given(specs())
@settings(max_examples=250, deadline=None)
def test_step_matches_derivation_oracle(spec):
    for p in reachable_lts(spec, state_bound=30).states:
        want = {(a, t) for _, a, t in derivations(spec, p)}
        assert step(spec, p) == want


def test_par_exposes_tau_whenever_complementary():
    spec = parse("agent X = a.X + b.0\nmain (X | 'a.0) | ('b.0 | c.0)")
    got = {str(a) for a, _ in step(spec, spec.main)}
    assert "tau" in got
    assert {str(a) for _, a, _ in derivations(spec, spec.main)} == got
