"""Parallel composition with provenance, and projection of trees onto components."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Literal

from .core import Dist, Lpts, Transition
from .cex import StochasticTree, resolve_trans_map

Side = Literal["left", "right"]


def product_dist(mu1: Dist, mu2: Dist) -> Dist:
    return Dist(((s1, s2), p1 * p2) for s1, p1 in mu1.items() for s2, p2 in mu2.items())


@dataclass(frozen=True)
class Provenance:
    """Which component transitions produced a composed transition.

    ``kind`` is ``"sync"`` (both move), ``"left"`` (only the left component
    moves, the right one stalls in ``stall``) or ``"right"``.
    """

    kind: Literal["sync", "left", "right"]
    left: int | None  # transition index in the left component
    right: int | None
    stall: int | None = None


@dataclass(frozen=True)
class ComposedLpts:
    lpts: Lpts
    provenance: tuple[Provenance, ...]  # aligned with lpts.transitions
    pairs: tuple[tuple[int, int], ...]  # composed state -> (left state, right state)
    left: Lpts
    right: Lpts

    def component_dist(self, ti: int, side: Side) -> Dist | None:
        """The distribution ``side`` contributes to composed transition ``ti``; None if it stalls."""
        prov = self.provenance[ti]
        idx = prov.left if side == "left" else prov.right
        if idx is None:
            return None
        comp = self.left if side == "left" else self.right
        return comp.transitions[idx].dist

    def expected_dist(self, ti: int) -> Dist:
        """Rebuild the composed distribution of ``ti`` from its provenance alone."""
        prov = self.provenance[ti]
        s1, s2 = self.pairs[self.lpts.transitions[ti].src]
        mu1 = self.left.transitions[prov.left].dist if prov.left is not None else Dist({s1: 1})
        mu2 = self.right.transitions[prov.right].dist if prov.right is not None else Dist({s2: 1})
        index = {p: i for i, p in enumerate(self.pairs)}
        return product_dist(mu1, mu2).remap(index.__getitem__)


def _pair_moves(l1: Lpts, l2: Lpts, s1: int, s2: int):
    for ti in l1.outgoing(s1):
        t = l1.transitions[ti]
        if t.action in l2.alphabet:
            for tj in l2.on_action(s2, t.action):
                u = l2.transitions[tj]
                yield t.action, product_dist(t.dist, u.dist), Provenance("sync", ti, tj)
        else:
            yield t.action, product_dist(t.dist, Dist({s2: 1})), Provenance("left", ti, None, s2)
    for tj in l2.outgoing(s2):
        u = l2.transitions[tj]
        if u.action not in l1.alphabet:
            yield u.action, product_dist(Dist({s1: 1}), u.dist), Provenance("right", None, tj, s1)


def compose(l1: Lpts, l2: Lpts) -> ComposedLpts:
    """Reachable part of ``l1 || l2``; pair states are numbered row-major."""
    start = (l1.start, l2.start)
    seen = {start}
    queue = deque([start])
    while queue:
        s1, s2 = queue.popleft()
        for _, mu, _ in _pair_moves(l1, l2, s1, s2):
            for pair in mu.support:
                if pair not in seen:
                    seen.add(pair)
                    queue.append(pair)
    pairs = tuple(sorted(seen))
    index = {p: i for i, p in enumerate(pairs)}
    trans: list[Transition] = []
    provenance: list[Provenance] = []
    known = set()
    for i, (s1, s2) in enumerate(pairs):
        for action, mu, prov in _pair_moves(l1, l2, s1, s2):
            t = Transition(i, action, mu.remap(index.__getitem__))
            if t in known:
                continue
            known.add(t)
            trans.append(t)
            provenance.append(prov)
    names = tuple(f"({l1.states[a]},{l2.states[b]})" for a, b in pairs)
    lpts = Lpts(names, index[start], l1.alphabet | l2.alphabet, tuple(trans))
    return ComposedLpts(lpts, tuple(provenance), pairs, l1, l2)


def compose_all(components: Iterable[Lpts]) -> Lpts:
    """Left-associative composition of two or more components."""
    it = iter(components)
    acc = next(it)
    for l in it:
        acc = compose(acc, l).lpts
    return acc


def widen_alphabet(l: Lpts, alpha: Iterable[str]) -> Lpts:
    alpha = frozenset(alpha)
    if not l.alphabet <= alpha:
        raise ValueError("widened alphabet must contain the original one")
    return Lpts(l.states, l.start, alpha, l.transitions)


def project(c: StochasticTree, composed: ComposedLpts, side: Side) -> StochasticTree:
    """The contribution of one component to a tree executed in ``composed``.

    Each tree transition is replaced by the distribution that ``side``
    contributed to it. Tree children that agree on the component state are
    merged into one node, and steps where ``side`` only stalls are contracted,
    so the merged node inherits the children's own transitions.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    comp = composed.left if side == "left" else composed.right
    pick = 0 if side == "left" else 1
    tree = c.lpts
    trans_map = c.trans_map if c.trans_map is not None else resolve_trans_map(c, composed.lpts)
    if trans_map is None:
        raise ValueError("tree is not an execution of the composed LPTS")
    owner = {}
    for k, t in enumerate(tree.transitions):
        owner.setdefault(t.src, []).append(k)

    names: list[str] = ["root"]
    exec_map: list[int] = [composed.pairs[c.exec_map[tree.start]][pick]]
    child_count = [0]
    transitions: list[Transition] = []
    new_trans_map: list[int] = []

    def fresh(parent: int, comp_state: int) -> int:
        node = len(names)
        names.append(f"{names[parent]}.{child_count[parent]}")
        child_count[parent] += 1
        child_count.append(0)
        exec_map.append(comp_state)
        return node

    stack = [(0, tree.start)]
    while stack:
        node, tnode = stack.pop()
        pending = []
        for k in owner.get(tnode, []):
            t = tree.transitions[k]
            prov = composed.provenance[trans_map[k]]
            comp_idx = prov.left if side == "left" else prov.right
            if comp_idx is None:
                # stutter on this side: the children collapse into this node
                pending.extend((node, child) for child in t.dist.support)
                continue
            mu = comp.transitions[comp_idx].dist
            fresh_for = {s: fresh(node, s) for s in mu.support}
            transitions.append(Transition(node, t.action, Dist((fresh_for[s], p) for s, p in mu.items())))
            new_trans_map.append(comp_idx)
            for child in t.dist.support:
                pair = composed.pairs[c.exec_map[child]]
                pending.append((fresh_for[pair[pick]], child))
        stack.extend(reversed(pending))

    lpts = Lpts(tuple(names), 0, comp.alphabet, tuple(transitions))
    return StochasticTree(lpts, tuple(exec_map), tuple(new_trans_map))
