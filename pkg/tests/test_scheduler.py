import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccsfair.corpus import random_scheduler_specs
from ccsfair.net import check_bisim
from ccsfair.paths import Lasso, enabled_actions, is_complete, replay, response_holds
from ccsfair.scheduler import (
    HOLDS, VIOLATED, Bounds, SchedulerSignature, build_hat, check_all, check_characterisation,
    check_requirement_3, check_requirement_4, default_hat_relabelling, enumerate_complete_lassos,
)
from ccsfair.syntax import Relabelling, SpecError, parse, pretty, pretty_spec


def _text(run):
    if isinstance(run, Lasso):
        return (tuple(str(a) for a in run.prefix_labels), tuple(str(a) for a in run.cycle_labels))
    return (tuple(str(a) for a in run.labels), ())


def _sig(spec):
    return SchedulerSignature.of(spec)


def test_signature_checks(named):
    with pytest.raises(SpecError):
        SchedulerSignature.of(named["G2"], t1="r1")
    with pytest.raises(SpecError):
        SchedulerSignature.of(named["G2"], t1="x")
    with pytest.raises(SpecError):
        SchedulerSignature.of(named["G2"], r1="e", e="t9")


def test_enumeration_g2(named):
    runs = {_text(r) for r in enumerate_complete_lassos(named["G2"], 3, 3)}
    assert ((), ("r2", "t2", "e")) in runs and ((), ("r1", "t1", "e")) in runs
    assert all(is_complete(r) for r in enumerate_complete_lassos(named["G2"], 3, 3))


def test_enumeration_nil_and_f0(named):
    assert [_text(r) for r in enumerate_complete_lassos(named["nil"], 2, 2)] == [((), ())]
    runs = {_text(r) for r in enumerate_complete_lassos(named["F0"], 3, 3)}
    assert ((), ()) in runs and ((), ("r", "e", "t")) in runs
    with pytest.raises(ValueError):
        list(enumerate_complete_lassos(named["F0"], 0, 3))


@pytest.mark.parametrize(
    "key, failing",
    [("F1|F2", [4]), ("E1|G1|E2", [3]), ("E1|E2", [2]), ("G2", [1]), ("hat(G2)", [1, 2]), ("fair", [1, 2])],
)
def test_named_candidates(named, key, failing):
    rep = check_all(named[key], _sig(named[key]))
    assert rep.violated() == failing
    for v in rep.verdicts.values():
        if v.ok is False:
            assert replay(v.witness)


def test_witnesses_match_golden(named):
    g2 = check_all(named["G2"], _sig(named["G2"])).verdicts[1]
    assert _text(g2.witness) == ((), ("r2", "t2", "e")) and enabled_actions(g2.witness) == frozenset()
    f = check_all(named["F1|F2"], _sig(named["F1|F2"])).verdicts[4]
    assert _text(f.witness)[0] == ("r1", "r2", "t1", "t2")
    e = check_all(named["E1|G1|E2"], _sig(named["E1|G1|E2"])).verdicts[3]
    assert _text(e.witness)[0] == ("t1",)
    v = check_all(named["E1|E2"], _sig(named["E1|E2"])).verdicts[2]
    assert not response_holds(v.witness, _sig(named["E1|E2"]).r1, _sig(named["E1|E2"]).t1)


def test_nil_fails_requirement_1():
    spec = parse("output t1 t2 e\nmain 0")
    assert check_all(spec, _sig(spec)).violated() == [1]


def test_requirement_3_balance_cap():
    # a state with a larger balance at a known marking is subsumed, so growth needs new markings
    spec = parse("output t1 t2 e\nagent R = r1.R\nmain R")
    assert check_requirement_3(spec, _sig(spec), 12, 1).status == HOLDS
    spec = parse("output t1 t2 e\nagent R = r1.(t1.0 | R)\nmain R")
    v = check_requirement_3(spec, _sig(spec), depth_bound=12, balance_cap=3)
    assert v.status == "inconclusive" and v.ok is None
    v = check_requirement_3(spec, _sig(spec), depth_bound=3, balance_cap=8)
    assert v.status == HOLDS


def test_requirement_4_monotone_in_depth(named):
    spec = named["F1|F2"]
    for d in range(0, 8):
        here = check_requirement_4(spec, _sig(spec), d).status
        later = check_requirement_4(spec, _sig(spec), d + 3).status
        if here == VIOLATED:
            assert later == VIOLATED
    assert check_requirement_4(spec, _sig(spec), 3).status == HOLDS
    assert check_requirement_4(spec, _sig(spec), 4).status == VIOLATED


def test_build_hat_g2_matches_fair_spec(named):
    hat = named["hat(G2)"]
    assert pretty(hat.main) == "(I1 | G2[c1/r1,c2/r2] | I2)\\c1\\c2"
    assert pretty(hat.body("I1")) == "r1.'c1.I1"
    assert hat.outputs == named["G2"].outputs
    assert check_bisim(hat).ok


def test_build_hat_nil_and_errors(named):
    hat = build_hat(named["nil"], default_hat_relabelling())
    assert pretty(hat.main) == "(I1 | 0[c1/r1,c2/r2] | I2)\\c1\\c2"
    with pytest.raises(SpecError):
        build_hat(named["G2"], Relabelling.of({"r1": "c", "r2": "c"}))
    with pytest.raises(SpecError):
        build_hat(named["G2"], Relabelling.of({"r1": "c1"}))
    spec = parse("agent X = r1.x.X + r2.X\nmain X")
    with pytest.raises(SpecError):
        build_hat(spec, Relabelling.of({"r1": "c1", "r2": "c2", "x": "r1"}))


def test_build_hat_fresh_agent_names():
    spec = parse("output t1 t2 e\nagent I1 = r1.t1.I1\nmain I1")
    hat = build_hat(spec, default_hat_relabelling())
    assert "I1_1" in hat.definitions and "I2" in hat.definitions
    assert parse(pretty_spec(hat)) == hat


def test_characterisation_named(named):
    for key in ("F1|F2", "E1|E2", "E1|G1|E2", "G2"):
        c = check_characterisation(named[key], _sig(named[key]), Bounds(6, 6, 10, 6))
        assert c.consistent and not c.plain_ok, key
    nil = parse("output t1 t2 e\nmain 0")
    assert check_characterisation(nil, _sig(nil), Bounds(6, 6, 10, 6)).consistent


@given(st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_violation_witnesses_replay(seed):
    spec = random_scheduler_specs(seed, 1)[0]
    rep = check_all(spec, _sig(spec), Bounds(5, 5, 8, 4))
    for v in rep.verdicts.values():
        if v.ok is False:
            assert replay(v.witness)
