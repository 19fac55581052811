import pytest
from hypothesis import given, settings

from ccsfair.syntax import (
    NIL, TAU, Agent, Kind, NoComplementError, Par, ParseError, Prefix, Relabelling, Restrict, SpecError,
    Sum, apply_relabel, choice, complement, coname, is_non_blocking, name, output, parse, parse_expr,
    pretty, pretty_spec, validate,
)

from .strategies import actions, specs, terms


def test_action_printing():
    assert [str(a) for a in (name("a"), coname("a"), output("t"), TAU)] == ["a", "'a", "t", "tau"]


@given(actions)
def test_complement_involution(a):
    if a.is_handshake:
        assert complement(complement(a)) == a
        assert complement(a) != a
    else:
        with pytest.raises(NoComplementError):
            complement(a)


def test_non_blocking():
    assert is_non_blocking(TAU) and is_non_blocking(output("t"))
    assert not is_non_blocking(name("a")) and not is_non_blocking(coname("a"))


def test_relabel_fixes_outputs_and_tau():
    f = Relabelling.of({"a": "b"})
    assert apply_relabel(f, coname("a")) == coname("b")
    assert apply_relabel(f, output("a")) == output("a")
    assert apply_relabel(f, TAU) == TAU
    assert str(f) == "b/a"


def test_single_summand_rejected():
    with pytest.raises(ValueError):
        Sum((NIL,))
    assert choice(NIL) == NIL
    assert choice() == NIL


def test_parse_f0():
    spec = parse("output t e\nagent F0 = r.e.t.F0\nmain F0\n")
    assert spec.outputs == {"t", "e"}
    body = spec.body("F0")
    assert body == Prefix(name("r"), Prefix(output("e"), Prefix(output("t"), Agent("F0"))))


def test_parse_precedence():
    p = parse_expr("a.0 + b.0 | 'c.0\\c")
    assert isinstance(p, Par)
    assert isinstance(p.left, Sum)
    # postfix operators bind tighter than prefixing
    assert p.right == Prefix(coname("c"), Restrict(NIL, "c"))


@pytest.mark.parametrize(
    "text, where",
    [
        ("agent A = A\nmain A", (1, 7)),
        ("agent A = a.0 + A\nmain A", (1, 7)),
        ("main B", (1, 6)),
        ("output t\nmain (t.0)\\t", (2, 12)),
        ("main a.0 +", (1, 11)),
        ("main a..0", (1, 8)),
    ],
)
def test_parse_errors_have_locations(text, where):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert (info.value.line, info.value.col) == where


def test_output_relabel_rejected():
    with pytest.raises(SpecError):
        parse("output t\nmain (t.0)[a/t]")


def test_comments_and_blank_lines():
    spec = parse("# scheduler\noutput t e\n\nagent F0 = r.e.t.F0  # loop\nmain F0\n")
    assert spec.main == Agent("F0")


@given(terms())
@settings(max_examples=300)
def test_pretty_parse_roundtrip(p):
    assert parse_expr(pretty(p), ["o"]) == p


@given(specs())
@settings(max_examples=150)
def test_spec_roundtrip(spec):
    spec = validate(spec)
    assert parse(pretty_spec(spec)) == spec


def test_action_kinds_consistent():
    with pytest.raises(SpecError):
        validate(parse("main a.0").__class__(frozenset({"t"}), {}, Prefix(name("t"), NIL)))
    assert Kind.OUTPUT.value == "output"
