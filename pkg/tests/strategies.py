"""Hypothesis strategies for terms and specs."""
from hypothesis import strategies as st

from ccsfair.syntax import (
    NIL, TAU, Agent, Par, Prefix, Relabel, Relabelling, Restrict, Spec, Sum, coname, name, output,
)

NAMES = ("a", "b", "c")
OUTPUTS = ("o",)

actions = st.one_of(
    st.just(TAU),
    st.sampled_from(OUTPUTS).map(output),
    st.sampled_from(NAMES).map(name),
    st.sampled_from(NAMES).map(coname),
)
relabellings = st.dictionaries(st.sampled_from(NAMES), st.sampled_from(NAMES), min_size=1, max_size=2).map(
    Relabelling.of
)


def terms(agents=("X",), max_leaves=8):
    """Terms where agent calls appear only under a prefix, so any body drawn is guarded."""
    guarded = st.recursive(
        st.one_of(st.just(NIL), st.sampled_from(agents).map(Agent)),
        lambda inner: st.one_of(
            st.builds(Prefix, actions, inner),
            st.lists(inner, min_size=2, max_size=3).map(lambda xs: Sum(tuple(xs))),
            st.builds(Par, inner, inner),
            st.builds(Restrict, inner, st.sampled_from(NAMES)),
            st.builds(Relabel, inner, relabellings),
        ),
        max_leaves=max_leaves,
    )
    return st.recursive(
        st.just(NIL),
        lambda inner: st.one_of(
            st.builds(Prefix, actions, guarded),
            st.lists(inner, min_size=2, max_size=3).map(lambda xs: Sum(tuple(xs))),
            st.builds(Par, inner, inner),
            st.builds(Restrict, inner, st.sampled_from(NAMES)),
            st.builds(Relabel, inner, relabellings),
        ),
        max_leaves=max_leaves,
    )


def specs(max_leaves=6):
    return st.builds(
        lambda body, main: Spec(frozenset(OUTPUTS), {"X": body}, main),
        terms(max_leaves=max_leaves),
        st.one_of(st.just(Agent("X")), terms(max_leaves=max_leaves)),
    )
