import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccsfair.corpus import random_lasso, random_path, random_specs
from ccsfair.embellish import (
    COMPLETE, embellish_to_complete, extend_to_complete, incompleteness, insert, less_incomplete,
)
from ccsfair.net import NotEnabledError, net_of
from ccsfair.paths import Lasso, NetPath, from_labels, is_complete, replay
from ccsfair.syntax import is_non_blocking, parse


def _labels(path):
    if isinstance(path, Lasso):
        return [str(a) for a in path.prefix_labels], [str(a) for a in path.cycle_labels]
    return [str(a) for a in path.labels]


def _embeds(small, big):
    """``small`` is ``big`` with some non-blocking transitions removed (greedy is exact here)."""
    i = 0
    for u in big:
        if i == len(small):
            return True
        if u == small[i]:
            i += 1
        elif not is_non_blocking(u.label):
            return False
    return i == len(small)


def _firing(path, turns=3):
    if isinstance(path, Lasso):
        return list(path.prefix.transitions) + list(path.cycle) * turns
    return list(path.transitions)


def test_incompleteness_examples(named):
    assert incompleteness(from_labels(named["G2"], "", "r2 t2 e")) == COMPLETE
    inc = incompleteness(from_labels(named["A|b.0"], ""))
    assert (inc.k, inc.n) == (0, 1)
    assert [str(u.label) for u in inc.witnesses] == ["b"]
    assert incompleteness(from_labels(parse("main a.0"), "a")).k == math.inf


def test_less_incomplete_basics(named):
    spec = named["F1|F2"]
    pi = from_labels(spec, "r1", "r2 t2")
    assert (incompleteness(pi).k, incompleteness(pi).n) == (1, 1)
    assert not less_incomplete(pi, pi)
    w = incompleteness(pi).witnesses[0]
    assert less_incomplete(insert(pi, 1, w), pi)


def test_insert_requires_continuous_enabledness(named):
    spec = named["G2"]
    lasso = from_labels(spec, "", "r2 t2 e")
    r1 = [u for u in net_of(spec).enabled(lasso.start) if str(u.label) == "r1"][0]
    with pytest.raises(NotEnabledError):
        insert(lasso, 0, r1)


def test_embellish_b_b(named):
    spec = named["B|B"]
    net = net_of(spec)
    left_b = [u for u in net.enabled(net.initial) if u.pre.strings()[0].endswith("|")][0]
    res = embellish_to_complete(Lasso(NetPath(net, net.initial, ()), (left_b,)), 8)
    assert res.complete
    cyc = res.path.cycle
    sides = {u.pre.strings()[0].endswith("|") for u in cyc}
    assert sides == {True, False}


def test_embellish_complete_is_identity(named):
    lasso = from_labels(named["G2"], "", "r2 t2 e")
    res = embellish_to_complete(lasso, 4)
    assert res.complete and res.rounds == 0 and res.path == lasso


def test_embellish_f1_f2(named):
    lasso = from_labels(named["F1|F2"], "r1", "r2 t2")
    res = embellish_to_complete(lasso, 8)
    assert res.complete
    assert _labels(res.path) == (["r1", "t1"], ["r2", "t2"])


def test_embellish_rejects_zero_rounds(named):
    with pytest.raises(ValueError):
        embellish_to_complete(from_labels(named["G2"], "", "r2 t2 e"), 0)


def test_extend_f0():
    spec = parse("output t e\nagent F0 = r.e.t.F0\nmain F0")
    res = extend_to_complete(from_labels(spec, "r"), 8)
    assert res.complete and _labels(res.path) == ["r", "e", "t"]
    done = from_labels(spec, "r e t")
    assert extend_to_complete(done, 8).path == done


def test_extend_detects_lasso(named):
    res = extend_to_complete(from_labels(named["E1|G1|E2"], "t1"), 16)
    assert res.complete and isinstance(res.path, Lasso)
    assert _labels(res.path) == ([], ["t1", "e", "t2", "e"])


@given(st.integers(0, 50_000))
@settings(max_examples=150, deadline=None)
def test_insert_is_less_incomplete(seed):
    rng = random.Random(seed)
    spec = random_specs(seed, 1)[0]
    path = random_lasso(spec, rng, 20) if rng.random() < 0.5 else None
    if path is None:
        path = random_path(spec, rng, rng.randint(0, 10))
    inc = incompleteness(path)
    if inc.complete:
        return
    w = rng.choice(inc.witnesses)
    i = rng.randint(0, 6) if isinstance(path, Lasso) else rng.randint(0, path.length - int(inc.k))
    rho = insert(path, int(inc.k) + i, w)
    assert replay(rho)
    assert less_incomplete(rho, path)


@given(st.integers(0, 50_000))
@settings(max_examples=80, deadline=None)
def test_embellishment_keeps_original_firings(seed):
    rng = random.Random(seed)
    spec = random_specs(seed, 1)[0]
    lasso = random_lasso(spec, rng, 20)
    if lasso is None:
        return
    res = embellish_to_complete(lasso, 8)
    assert replay(res.path)
    if res.complete:
        assert is_complete(res.path)
        # the original firing sequence survives, with only non-blocking steps inserted
        assert _embeds(_firing(lasso, 3), _firing(res.path, 3 * len(lasso.cycle) + 20))


@given(st.integers(0, 50_000))
@settings(max_examples=80, deadline=None)
def test_extension_appends_only_non_blocking(seed):
    rng = random.Random(seed)
    spec = random_specs(seed, 1)[0]
    path = random_path(spec, rng, rng.randint(0, 6))
    res = extend_to_complete(path, 24)
    seq = _firing(res.path, 1)
    assert seq[: path.length] == list(path.transitions)
    assert all(is_non_blocking(u.label) for u in seq[path.length:])
