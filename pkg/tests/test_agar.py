import importlib
import random

import pytest

from conftest import load
from lpts_agar import (
    agar2,
    agar_n,
    check_exec_map,
    complete_spec,
    compose,
    compose_all,
    holds,
)
from oracles import random_lpts

compose_module = importlib.import_module("lpts_agar.compose")

ALPHABETS = [("a", "b"), ("b", "c"), ("a", "c"), ("a", "b", "c")]


def system(rng, n, max_states=4):
    comps = [random_lpts(rng, max_states=max_states, alphabet=rng.choice(ALPHABETS), prefix=f"c{i}_") for i in range(n)]
    alpha = frozenset().union(*(c.alphabet for c in comps))
    spec = random_lpts(rng, max_states=4, alphabet=alpha, prefix="p", max_out=3)
    return comps, spec


def monolithic(comps, spec):
    l = compose_all(comps)
    return holds(l, complete_spec(spec, l.alphabet))


def test_client_server_fixture_needs_one_refinement():
    model = load("client_server.lpts")
    t, s, p = model.lpts["T"], model.lpts["S"], model.lpts["P"]
    result = agar2(t, s, p)
    assert result.holds
    assert result.refinements == [1]
    a = result.assumptions[0]
    assert a.num_states == 2 < s.num_states
    assert holds(s, a)
    assert sorted(sorted(c) for c in result.partitions[0].classes) == [[0, 2], [1]]


def test_agar2_matches_monolithic():
    rng = random.Random(0)
    verdicts = set()
    for _ in range(150):
        (l1, l2), p = system(rng, 2)
        result = agar2(l1, l2, p)
        assert result.holds == monolithic([l1, l2], p)
        assert result.refinements[0] <= l2.num_states - 1
        verdicts.add(result.holds)
        assert holds(l2, result.assumptions[0])
        if not result.holds:
            c = result.counterexample
            assert check_exec_map(c, result.cex_system)
            full = complete_spec(p, result.cex_system.alphabet)
            assert not holds(c.lpts, full)
            assert holds(c.lpts, compose(l1, l2).lpts)
    assert verdicts == {True, False}


def test_agar2_never_composes_with_the_concrete_right_component(monkeypatch):
    rng = random.Random(1)
    real_compose = compose_module.compose
    seen = []

    def guarded(a, b):
        seen.append(b)
        return real_compose(a, b)

    for _ in range(40):
        (l1, l2), p = system(rng, 2)
        seen.clear()
        monkeypatch.setattr(compose_module, "compose", guarded)
        try:
            agar2(l1, l2, p)
        finally:
            monkeypatch.setattr(compose_module, "compose", real_compose)
        assert seen
        assert all(b is not l2 for b in seen)


def test_agar_n_matches_monolithic():
    rng = random.Random(2)
    verdicts = set()
    for _ in range(80):
        comps, p = system(rng, 3, max_states=3)
        result = agar_n(comps, p)
        assert result.holds == monolithic(comps, p)
        verdicts.add(result.holds)
        if not result.holds:
            assert check_exec_map(result.counterexample, result.cex_system)
    assert verdicts == {True, False}


def test_agar_n_with_two_components_behaves_like_agar2():
    rng = random.Random(3)
    for _ in range(60):
        (l1, l2), p = system(rng, 2)
        assert agar_n([l1, l2], p).holds == agar2(l1, l2, p).holds


def test_agar_n_order_does_not_change_the_verdict():
    model = load("pipeline.lpts")
    comps = model.components()
    for order in ([0, 1, 2], [2, 0, 1], [1, 2, 0]):
        assert agar_n(comps, model.lpts["Spec"], order).holds
        assert not agar_n(comps, model.lpts["Tight"], order).holds


def test_agar_n_rejects_bad_input():
    model = load("pipeline.lpts")
    comps = model.components()
    with pytest.raises(ValueError):
        agar_n(comps, model.lpts["Spec"], [0, 0, 1])
    with pytest.raises(ValueError):
        agar_n(comps[:1], model.lpts["Spec"])


def test_statistics_are_recorded():
    model = load("pipeline.lpts")
    result = agar_n(model.components(), model.lpts["Spec"])
    assert result.iterations == len(result.log)
    assert result.max_assumption >= max(a.num_states for a in result.assumptions)
    assert result.total_refinements == sum(result.refinements)
    assert all(e <= r for e, r in zip(result.epoch_refinements, result.refinements))
