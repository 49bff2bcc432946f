from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpts_agar import Dist, Lpts, Transition, classify, complete_spec, dirac, mass, validate
from lpts_agar.core import restrict_alphabet


def chain(n=3, alphabet=("a",)):
    trans = tuple(Transition(i, "a", dirac(i + 1)) for i in range(n - 1))
    return Lpts(tuple(f"s{i}" for i in range(n)), 0, frozenset(alphabet), trans)


def test_dist_drops_zero_and_sorts():
    d = Dist({2: F(1, 2), 0: F(1, 2), 5: 0})
    assert d.support == (0, 2)
    assert d[5] == 0
    assert d.total() == 1
    assert d == Dist([(0, F(1, 2)), (2, F(1, 2))])
    assert hash(d) == hash(Dist({0: F(1, 2), 2: F(1, 2)}))


def test_dist_rejects_negative():
    with pytest.raises(ValueError):
        Dist({0: F(-1, 2), 1: F(3, 2)})


def test_dist_remap_merges_mass():
    d = Dist({0: F(1, 3), 1: F(1, 3), 2: F(1, 3)})
    merged = d.remap(lambda s: s // 2)
    assert merged == Dist({0: F(2, 3), 1: F(1, 3)})
    assert mass(d, [0, 2]) == F(2, 3)


def test_dirac():
    assert dirac("x").support == ("x",)
    assert dirac(3)[3] == 1


@given(st.lists(st.fractions(min_value=0, max_value=10), min_size=3, max_size=3))
def test_fraction_field_laws(xs):
    a, b, c = xs
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    if b:
        assert (a / b) * b == a


def test_lpts_dedupes_transitions():
    t = Transition(0, "a", dirac(0))
    l = Lpts(("s",), 0, frozenset("a"), (t, t))
    assert len(l.transitions) == 1
    assert l.outgoing(0) == (0,)
    assert l.on_action(0, "b") == []
    assert l.state_id("s") == 0


def test_classify_chain_is_tree_and_reactive():
    kind = classify(chain())
    assert kind.tree and kind.reactive and kind.fully_probabilistic


def test_classify_detects_nondeterminism():
    l = Lpts(("p", "q"), 0, frozenset("ab"), (
        Transition(0, "a", dirac(1)),
        Transition(0, "a", dirac(0)),
        Transition(0, "b", dirac(1)),
    ))
    kind = classify(l)
    assert not kind.reactive
    assert not kind.fully_probabilistic
    assert not kind.tree


def test_tree_requires_unique_parent_and_root_without_parent():
    two_parents = Lpts(("r", "x", "y"), 0, frozenset("a"), (
        Transition(0, "a", dirac(1)),
        Transition(0, "a", Dist({1: F(1, 2), 2: F(1, 2)})),
    ))
    assert not classify(two_parents).tree
    loop = Lpts(("r",), 0, frozenset("a"), (Transition(0, "a", dirac(0)),))
    assert not classify(loop).tree


def test_validate_reports_problems():
    bad = Lpts(("s", "s"), 5, frozenset("a"), (
        Transition(0, "b", Dist({0: F(1, 2)})),
        Transition(0, "a", dirac(7)),
    ))
    messages = " | ".join(str(v) for v in validate(bad))
    assert "start" in messages
    assert "duplicate" in messages
    assert "alphabet" in messages
    assert "sums to 1/2" in messages
    assert "target" in messages
    assert validate(chain()) == []


def test_complete_spec_adds_self_loops():
    p = chain(2)
    done = complete_spec(p, {"a", "send", "ack"})
    assert done.alphabet == {"a", "send", "ack"}
    for s in range(2):
        assert [done.transitions[i].dist for i in done.on_action(s, "send")] == [dirac(s)]
        assert len(done.on_action(s, "ack")) == 1
    assert complete_spec(p, {"a"}) is p or complete_spec(p, {"a"}) == p


def test_complete_spec_rejects_larger_spec_alphabet():
    with pytest.raises(ValueError):
        complete_spec(chain(2, ("a", "z")), {"a"})


def test_restrict_alphabet_drops_moves():
    l = Lpts(("s", "t"), 0, frozenset("ab"), (Transition(0, "a", dirac(1)), Transition(1, "b", dirac(0))))
    r = restrict_alphabet(l, {"a"})
    assert r.alphabet == {"a"}
    assert [t.action for t in r.transitions] == ["a"]
