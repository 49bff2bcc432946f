"""Stochastic-tree counterexamples to strong simulation."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .core import Dist, Lpts, Transition
from .simulate import RemovalRecord, SimRelation, dist_leq


@dataclass(frozen=True)
class StochasticTree:
    """A tree-shaped LPTS together with its execution mapping into a system.

    ``exec_map[c]`` is the system state of tree state ``c`` and
    ``trans_map[k]`` the system transition executed by tree transition ``k``
    (None when unknown; it can be recovered with :func:`resolve_trans_map`).
    """

    lpts: Lpts
    exec_map: tuple[int, ...]
    trans_map: tuple[int, ...] | None = None

    @property
    def root(self) -> int:
        return self.lpts.start

    @property
    def size(self) -> int:
        return self.lpts.num_states


def _executes(tree: Lpts, exec_map, t: Transition, u: Transition) -> bool:
    if t.action != u.action or exec_map[t.src] != u.src:
        return False
    images = [exec_map[c] for c in t.dist.support]
    if len(set(images)) != len(images):
        return False
    return all(p == u.dist[exec_map[c]] for c, p in t.dist.items())


def resolve_trans_map(c: StochasticTree, l: Lpts) -> tuple[int, ...] | None:
    """Find, for every tree transition, a system transition it executes."""
    tree = c.lpts
    found = []
    for t in tree.transitions:
        src = c.exec_map[t.src]
        match = next(
            (j for j in l.outgoing(src) if _executes(tree, c.exec_map, t, l.transitions[j])), None
        )
        if match is None:
            return None
        found.append(match)
    return tuple(found)


def check_exec_map(c: StochasticTree, l: Lpts) -> bool:
    """Verify that ``exec_map`` is an execution mapping from the tree into ``l``."""
    tree = c.lpts
    if len(c.exec_map) != tree.num_states:
        return False
    if any(not 0 <= s < l.num_states for s in c.exec_map):
        return False
    if c.trans_map is not None:
        if len(c.trans_map) != len(tree.transitions):
            return False
        return all(
            0 <= j < len(l.transitions) and _executes(tree, c.exec_map, t, l.transitions[j])
            for t, j in zip(tree.transitions, c.trans_map)
        )
    return resolve_trans_map(c, l) is not None


class _TreeBuilder:
    """Accumulates fresh tree states named by their path from the root."""

    def __init__(self, root_state: int):
        self.names = ["root"]
        self.exec_map = [root_state]
        self.children = [0]
        self.transitions: list[Transition] = []
        self.trans_map: list[int] = []

    def fresh(self, parent: int, state: int) -> int:
        node = len(self.names)
        self.names.append(f"{self.names[parent]}.{self.children[parent]}")
        self.children[parent] += 1
        self.children.append(0)
        self.exec_map.append(state)
        return node

    def add(self, node: int, action: str, mu: Dist, system_trans: int) -> dict[int, int]:
        """Attach a copy of ``mu`` below ``node``; return system state -> new child."""
        kids = {s: self.fresh(node, s) for s in mu.support}
        self.transitions.append(Transition(node, action, Dist((kids[s], p) for s, p in mu.items())))
        self.trans_map.append(system_trans)
        return kids

    def build(self, alphabet) -> StochasticTree:
        lpts = Lpts(tuple(self.names), 0, alphabet, tuple(self.transitions))
        return StochasticTree(lpts, tuple(self.exec_map), tuple(self.trans_map))


def build_cex(trace: list[RemovalRecord], pair: tuple[int, int], l1: Lpts) -> StochasticTree:
    """Tree counterexample to ``s1 <= s2`` for a pair removed during the fixed point.

    The root executes the offending transition ``s1 -a-> mu1``. Below each
    support state ``s`` we graft the counterexample for ``(s, t)`` for every
    ``t`` that ``s`` failed to be matched with, i.e. every ``t`` in some
    ``supp(mu) \\ R(S)`` whose witness ``S`` contains ``s``. Those pairs were
    removed strictly earlier, so the recursion is well founded. Grafts that
    fail on the same transition are merged into one copy of it. Expansions
    are memoized per pair and copied into fresh states at every graft.
    """
    records = {rec.pair: rec for rec in trace}
    if pair not in records:
        raise ValueError(f"pair {pair} was never removed")
    position = {rec.pair: i for i, rec in enumerate(trace)}

    @lru_cache(maxsize=None)
    def expand(p: tuple[int, int]) -> tuple[int, tuple[tuple[int, tuple[tuple[int, int], ...]], ...]]:
        rec = records[p]
        mu1 = l1.transitions[rec.transition].dist
        grafts: dict[int, list[tuple[int, int]]] = {s: [] for s in mu1.support}
        for w in rec.witnesses:
            for s in sorted(w.left):
                for t in sorted(w.right):
                    sub = (s, t)
                    if position.get(sub, len(trace)) >= position[p]:
                        raise ValueError(f"trace does not remove {sub} before {p}")
                    if sub not in grafts[s]:
                        grafts[s].append(sub)
        return rec.transition, tuple((s, tuple(grafts[s])) for s in mu1.support)

    builder = _TreeBuilder(pair[0])

    def materialize(node: int, subpairs) -> None:
        # Subpairs failing on the same transition share one copy of it, with
        # their grafts merged below each child; this keeps reactive inputs reactive.
        groups: dict[int, dict[int, list[tuple[int, int]]]] = {}
        for sub in subpairs:
            ti, children = expand(sub)
            merged = groups.setdefault(ti, {})
            for s, grafts in children:
                bucket = merged.setdefault(s, [])
                for g in grafts:
                    if g not in bucket:
                        bucket.append(g)
        for ti, merged in groups.items():
            t = l1.transitions[ti]
            kids = builder.add(node, t.action, t.dist, ti)
            for s in t.dist.support:
                materialize(kids[s], merged[s])

    materialize(0, [pair])
    return builder.build(l1.alphabet)


def subtree(c: StochasticTree, node: int) -> StochasticTree:
    """The part of ``c`` below ``node``, re-rooted and renamed."""
    tree = c.lpts
    builder = _TreeBuilder(c.exec_map[node])
    stack = [(0, node)]
    while stack:
        new, old = stack.pop()
        for k in tree.outgoing(old):
            t = tree.transitions[k]
            mu = Dist((c.exec_map[x], p) for x, p in t.dist.items())
            kids = builder.add(new, t.action, mu, c.trans_map[k] if c.trans_map else -1)
            stack.extend((kids[c.exec_map[x]], x) for x in reversed(t.dist.support))
    built = builder.build(tree.alphabet)
    if c.trans_map is None:
        return StochasticTree(built.lpts, built.exec_map)
    return built


def lift_tree(c: StochasticTree | Lpts, r: SimRelation, target: Lpts, at: int | None = None) -> StochasticTree:
    """Turn a tree simulated by ``target`` via ``r`` into an execution of ``target``.

    For every tree transition the first target transition (in id order) whose
    distribution matches it under ``r`` is chosen, and the maximal flow found
    by ``dist_leq`` splits the tree's children over the target's support.
    Each new child executes one target state and carries every tree child
    that sends flow to it, so the result simulates ``c`` and maps
    injectively into ``target``.
    """
    tree = c.lpts if isinstance(c, StochasticTree) else c
    root_target = target.start if at is None else at
    if (tree.start, root_target) not in r:
        raise ValueError("relation does not relate the tree root to the target state")
    builder = _TreeBuilder(root_target)
    stack = [(0, root_target, (tree.start,))]
    while stack:
        node, state, group = stack.pop()
        pending = []
        for x in group:
            if (x, state) not in r:
                raise ValueError(f"tree state {x} is not related to target state {state}")
            for k in tree.outgoing(x):
                t = tree.transitions[k]
                for j in target.on_action(state, t.action):
                    check = dist_leq(t.dist, target.transitions[j].dist, r)
                    if check.holds:
                        break
                else:
                    raise ValueError("relation is not a strong simulation")
                mu = target.transitions[j].dist
                kids = builder.add(node, t.action, mu, j)
                for s in mu.support:
                    carried = tuple(y for y in t.dist.support if check.flow.get((y, s), 0) > 0)
                    pending.append((kids[s], s, carried))
        stack.extend(reversed(pending))
    return builder.build(target.alphabet)
