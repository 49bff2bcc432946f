import random

import pytest

from conftest import load
from lpts_agar import (
    Lpts,
    StochasticTree,
    Transition,
    build_cex,
    check_exec_map,
    classify,
    coarsest_simulation,
    dirac,
    holds,
    lift_tree,
    subtree,
    tree_simulation,
)
from oracles import naive_holds, random_pair


def cex_for(l1, l2):
    r = coarsest_simulation(l1, l2)
    return build_cex(r.removal_trace, (l1.start, l2.start), l1)


def failing_pairs(seed, count, reactive_left=False):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        l1, l2 = random_pair(rng, reactive_left)
        if not holds(l1, l2):
            out.append((l1, l2))
    return out


def test_counterexamples_are_sound():
    for l1, l2 in failing_pairs(1, 150):
        c = cex_for(l1, l2)
        assert classify(c.lpts).tree
        assert check_exec_map(c, l1)
        assert c.trans_map is not None
        assert holds(c.lpts, l1)
        assert not holds(c.lpts, l2)
        assert naive_holds(c.lpts, l1) and not naive_holds(c.lpts, l2)


def test_reactive_systems_give_reactive_counterexamples():
    for l1, l2 in failing_pairs(2, 100, reactive_left=True):
        assert classify(l1).reactive
        assert classify(cex_for(l1, l2).lpts).reactive


def test_counterexample_names_follow_paths():
    l1, l2 = failing_pairs(3, 1)[0]
    c = cex_for(l1, l2)
    names = c.lpts.states
    assert names[0] == "root"
    for t in c.lpts.transitions:
        for kid in t.dist.support:
            assert names[kid].rsplit(".", 1)[0] == names[t.src]


def test_counterexample_is_deterministic():
    for l1, l2 in failing_pairs(4, 20):
        assert cex_for(l1, l2) == cex_for(l1, l2)


def test_single_transition_mismatch():
    l1 = Lpts(("s",), 0, frozenset("a"), (Transition(0, "a", dirac(0)),))
    l2 = Lpts(("t",), 0, frozenset("a"), ())
    c = cex_for(l1, l2)
    assert c.size == 2
    assert c.exec_map == (0, 0)


def test_unknown_pair_is_rejected():
    l = Lpts(("s",), 0, frozenset("a"), ())
    with pytest.raises(ValueError):
        build_cex([], (0, 0), l)


def test_not_fully_probabilistic_fixture():
    model = load("branching.lpts")
    l1, l2 = model.lpts["R1"], model.lpts["R2"]
    kind1 = classify(l1)
    assert kind1.reactive and not kind1.fully_probabilistic
    c = cex_for(l1, l2)
    kind = classify(c.lpts)
    assert kind.tree and not kind.fully_probabilistic
    assert holds(c.lpts, l1) and not holds(c.lpts, l2)


def test_not_reactive_fixture():
    model = load("nondeterministic.lpts")
    l1, l2 = model.lpts["L"], model.lpts["R"]
    c = cex_for(l1, l2)
    kind = classify(c.lpts)
    assert kind.tree and not kind.reactive
    assert holds(c.lpts, l1) and not holds(c.lpts, l2)


def test_exec_map_validation_catches_wrong_images():
    l1, l2 = failing_pairs(5, 1)[0]
    c = cex_for(l1, l2)
    broken = StochasticTree(c.lpts, (l1.num_states,) + c.exec_map[1:])
    assert not check_exec_map(broken, l1)
    assert not check_exec_map(StochasticTree(c.lpts, c.exec_map[:-1]), l1)
    assert check_exec_map(StochasticTree(c.lpts, c.exec_map), l1)


def test_subtrees_are_valid_trees():
    rng = random.Random(6)
    for l1, l2 in failing_pairs(6, 40):
        c = cex_for(l1, l2)
        node = rng.randrange(c.size)
        sub = subtree(c, node)
        assert classify(sub.lpts).tree
        assert check_exec_map(sub, l1)
        assert sub.exec_map[0] == c.exec_map[node]


def test_lift_tree_grounds_a_simulated_tree():
    for l1, l2 in failing_pairs(7, 60):
        c = cex_for(l1, l2)
        r, _ = tree_simulation(c.lpts, l1, stop_at_root=False)
        lifted = lift_tree(c, r, l1)
        assert classify(lifted.lpts).tree
        assert check_exec_map(lifted, l1)
        assert holds(c.lpts, lifted.lpts)


def test_lift_tree_requires_related_root():
    l1, l2 = failing_pairs(8, 1)[0]
    c = cex_for(l1, l2)
    r, _ = tree_simulation(c.lpts, l2, stop_at_root=False)
    with pytest.raises(ValueError):
        lift_tree(c, r, l2)
