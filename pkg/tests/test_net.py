import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccsfair.lts import reachable_lts
from ccsfair.net import (
    EMPTY, AgentG, LeftPar, Marking, NetTransition, NotEnabledError, NotInImageError, PrefixG, RightPar,
    SumG, check_bisim, check_dec_injective, check_safe, check_structural_conflict, dec, enabled_transitions,
    fire, grape_str, left, net_of, reachable_markings, right, undec,
)
from ccsfair.syntax import NIL, TAU, name, parse, parse_expr

from .strategies import specs, terms

grapes = st.sampled_from([AgentG("A"), AgentG("B"), PrefixG(name("a"), NIL), SumG(())])
markings = st.lists(grapes, max_size=6).map(Marking)


def test_dec_parallel_tags_sides():
    p = parse_expr("a.0 | b.0")
    assert dec(p) == left(dec(parse_expr("a.0"))) + right(dec(parse_expr("b.0")))
    assert dec(p).strings() == ["(a.0)|", "|(b.0)"]


def test_binding_of_tags_matters():
    assert dec(parse_expr("a.0 | 0")) != dec(parse_expr("0 | a.0"))
    assert check_dec_injective([parse_expr("a.0 | 0"), parse_expr("0 | a.0")]).ok


def test_restrict_and_relabel_grapes():
    assert dec(parse_expr("(a.0 | b.0)\\a")).strings() == ["((a.0)|)\\a", "(|(b.0))\\a"]
    assert dec(parse_expr("(a.0)[b/a]")).strings() == ["(a.0)[b/a]"]
    assert dec(NIL) == Marking([SumG(())])


def test_sync_transition():
    spec = parse("main 'a.0 | a.0")
    ts = enabled_transitions(spec, dec(spec.main))
    assert sorted(str(u.label) for u in ts) == ["'a", "a", "tau"]
    (sync,) = [u for u in ts if u.label == TAU]
    assert sync.pre == dec(spec.main) and len(sync.post) == 2


def test_choice_transition_consumes_sum_grape():
    spec = parse("output b\nagent A = a.A\nmain b.0 + (A | b.0)")
    ts = enabled_transitions(spec, dec(spec.main))
    assert sorted(str(u.label) for u in ts) == ["a", "b", "b"]
    assert all(u.pre == dec(spec.main) for u in ts)


def test_g2_transitions():
    spec = parse("output t1 t2 e\nagent G2 = r1.t1.e.G2 + r2.t2.e.G2\nmain G2")
    ts = enabled_transitions(spec, dec(spec.main))
    assert [str(u.label) for u in ts] == ["r1", "r2"]
    assert ts[0].post.strings() == ["t1.e.G2"]


def test_fire_and_errors():
    spec = parse("main a.0")
    (u,) = enabled_transitions(spec, dec(spec.main))
    m = fire(dec(spec.main), u)
    assert m == dec(NIL)
    with pytest.raises(NotEnabledError):
        fire(m, u)
    with pytest.raises(ValueError):
        NetTransition(EMPTY, TAU, m)


def test_undec_rejects_non_images():
    with pytest.raises(NotInImageError):
        undec(Marking([LeftPar(AgentG("A"))]))
    with pytest.raises(NotInImageError):
        undec(Marking([AgentG("A"), AgentG("A")]))
    with pytest.raises(NotInImageError):
        undec(EMPTY)


@given(markings, markings)
def test_multiset_laws(a, b):
    assert (a + b) - b == a
    assert a <= a + b and b <= a + b
    assert a + b == b + a
    assert (a & b) <= a and (a & b) <= b
    assert len(a + b) == len(a) + len(b)
    if not b <= a:
        with pytest.raises(ValueError):
            a - b


@given(terms())
@settings(max_examples=300)
def test_undec_inverts_dec(p):
    m = dec(p)
    assert m.is_set() and len(m) >= 1
    assert undec(m) == p


def test_grape_strings():
    assert grape_str(LeftPar(RightPar(AgentG("A")))) == "(|(A))|"


def test_named_specs_safe_bisimilar_conflict_free(named):
    for key, spec in named.items():
        assert check_safe(spec, 500).status == "safe", key
        assert check_bisim(spec).status == "bisimilar", key
        assert check_structural_conflict(spec, 500).ok, key


def test_fair_spec_markings(named):
    order, _, truncated = reachable_markings(named["fair"], 500)
    assert not truncated and len(order) == 16


def test_safe_truncates_on_growth():
    spec = parse("agent A = a.(A | A)\nmain A")
    v = check_safe(spec, 20)
    assert v.status == "truncated" and v.ok is None


@given(specs())
@settings(max_examples=120, deadline=None)
def test_random_specs_bisimilar_and_safe(spec):
    assert check_bisim(spec, state_bound=60).ok
    v = check_safe(spec, 60)
    assert v.ok is not False
    states = reachable_lts(spec, state_bound=60).states
    assert check_dec_injective(states).ok


def test_net_derivation_cached_per_support(named):
    net = net_of(named["G2"])
    assert net.enabled(net.initial) is net.enabled(net.initial)
