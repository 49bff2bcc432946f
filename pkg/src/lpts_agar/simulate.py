"""Strong simulation between LPTSes.

``dist_leq`` lifts a state relation to distributions via an exact maxflow
computation, ``coarsest_simulation`` runs the greatest fixed point and keeps a
removal trace detailed enough to rebuild tree counterexamples, and
``tree_simulation`` is the single bottom-up pass used when the simulated side
is a stochastic tree.
"""

from __future__ import annotations

import heapq
from collections import deque
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from fractions import Fraction

from .core import Dist, Lpts, classify
from .flow import FlowNetwork


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(states: Iterable[int]) -> int:
    m = 0
    for s in states:
        m |= 1 << s
    return m


@dataclass(frozen=True)
class Witness:
    """Why ``mu1`` failed against one candidate ``mu`` of the simulating state."""

    transition: int  # index of mu in the simulating LPTS
    left: frozenset[int]  # S with mu1(S) > mu(R(S))
    right: frozenset[int]  # supp(mu) minus R(S)


@dataclass(frozen=True)
class RemovalRecord:
    pair: tuple[int, int]
    transition: int  # the offending s1 -a-> mu1, indexed into the simulated LPTS
    witnesses: tuple[Witness, ...]  # one per a-transition of s2, possibly none
    snapshot: int  # number of removals that preceded this one


class SimRelation:
    """A relation over ``S1 x S2`` stored as one bitmask row per ``s1``.

    ``removal_trace`` lists the pairs removed by :func:`coarsest_simulation` in
    order. The relation as it was before the k-th removal is recovered with
    ``snapshot(k)``.
    """

    def __init__(self, n1: int, n2: int, rows: Iterable[int] | None = None):
        self.n1 = n1
        self.n2 = n2
        full = (1 << n2) - 1
        self.rows = list(rows) if rows is not None else [full] * n1
        self.initial = tuple(self.rows)
        self.removal_trace: list[RemovalRecord] = []

    @classmethod
    def from_pairs(cls, n1: int, n2: int, pairs: Iterable[tuple[int, int]]) -> SimRelation:
        rows = [0] * n1
        for s1, s2 in pairs:
            rows[s1] |= 1 << s2
        return cls(n1, n2, rows)

    def __contains__(self, pair) -> bool:
        s1, s2 = pair
        return bool(self.rows[s1] >> s2 & 1)

    def __len__(self) -> int:
        return sum(bin(r).count("1") for r in self.rows)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SimRelation)
            and (self.n1, self.n2) == (other.n1, other.n2)
            and self.rows == other.rows
        )

    def __repr__(self) -> str:
        return f"SimRelation({self.n1}x{self.n2}, {self.pairs()})"

    def image(self, s1: int) -> frozenset[int]:
        return frozenset(bits(self.rows[s1]))

    def image_of(self, states: Iterable[int]) -> frozenset[int]:
        m = 0
        for s in states:
            m |= self.rows[s]
        return frozenset(bits(m))

    def pairs(self) -> list[tuple[int, int]]:
        return [(s1, s2) for s1 in range(self.n1) for s2 in bits(self.rows[s1])]

    def remove(self, s1: int, s2: int) -> None:
        self.rows[s1] &= ~(1 << s2)

    def copy(self) -> SimRelation:
        return SimRelation(self.n1, self.n2, self.rows)

    def snapshot(self, k: int) -> SimRelation:
        rows = list(self.initial)
        for rec in self.removal_trace[:k]:
            s1, s2 = rec.pair
            rows[s1] &= ~(1 << s2)
        return SimRelation(self.n1, self.n2, rows)


@dataclass(frozen=True)
class FlowCheck:
    """Outcome of ``dist_leq``: the maximal flow and whether it saturates."""

    holds: bool
    value: Fraction
    flow: dict[tuple[int, int], Fraction]  # positive middle-edge flows only

    @property
    def weights(self) -> dict[tuple[int, int], Fraction]:
        if not self.holds:
            raise ValueError("no weight function: the distributions are not related")
        return self.flow


def dist_leq(mu1: Dist, mu2: Dist, r) -> FlowCheck:
    """Decide ``mu1 [=_R mu2`` by maxflow; ``r`` is anything supporting ``(s1, s2) in r``."""
    left = mu1.support
    right = mu2.support
    k1 = len(left)
    source, sink = 0, k1 + len(right) + 1
    net = FlowNetwork(sink + 1)
    for i, s1 in enumerate(left):
        net.add_edge(source, 1 + i, mu1[s1])
    middle = {}
    for i, s1 in enumerate(left):
        for j, s2 in enumerate(right):
            if (s1, s2) in r:
                middle[s1, s2] = net.add_edge(1 + i, 1 + k1 + j, 1)
    for j, s2 in enumerate(right):
        net.add_edge(1 + k1 + j, sink, mu2[s2])
    value = net.max_flow(source, sink)
    flow = {pair: net.flow[e] for pair, e in middle.items() if net.flow[e] > 0}
    return FlowCheck(value == 1, value, flow)


def witness_subset(mu1: Dist, mu: Dist, r, flow: dict | None = None) -> frozenset[int]:
    """Find ``T`` within ``supp(mu1)`` with ``mu1(T) > mu(R(T))`` from a maximal flow.

    Starting from a state whose outgoing flow falls short of its weight, ``T``
    is grown by every state that sends flow into ``R(T)`` until the inequality
    holds. Growth is cumulative: at the fixed point every state of ``R(T)`` is
    saturated by flow from ``T`` alone, which forces the strict inequality.
    """
    if flow is None:
        check = dist_leq(mu1, mu, r)
        if check.holds:
            raise ValueError("distributions are related; no witness subset exists")
        flow = check.flow
    left = mu1.support
    right = mu.support
    sent = {s1: Fraction(0) for s1 in left}
    for (s1, _), f in flow.items():
        sent[s1] += f
    seed = next((s1 for s1 in left if mu1[s1] > sent[s1]), None)
    if seed is None:
        raise ValueError("flow saturates mu1; no witness subset exists")

    def image(states):
        return {s2 for s2 in right for s1 in states if (s1, s2) in r}

    t = {seed}
    while mu1.mass(t) <= mu.mass(image(t)):
        targets = image(t)
        grown = t | {s1 for s1 in left if any(flow.get((s1, s2), 0) > 0 for s2 in targets)}
        if grown == t:
            raise RuntimeError("flow passed in is not maximal")
        t = grown
    return frozenset(t)


def check_pair(l1: Lpts, l2: Lpts, s1: int, s2: int, r: SimRelation) -> RemovalRecord | None:
    """Return a removal record if ``(s1, s2)`` violates the simulation condition under ``r``."""
    for ti in l1.outgoing(s1):
        t = l1.transitions[ti]
        witnesses = []
        for tj in l2.on_action(s2, t.action):
            mu = l2.transitions[tj].dist
            check = dist_leq(t.dist, mu, r)
            if check.holds:
                break
            left = witness_subset(t.dist, mu, r, check.flow)
            right = frozenset(mu.support) - r.image_of(left)
            witnesses.append(Witness(tj, left, right))
        else:
            return RemovalRecord((s1, s2), ti, tuple(witnesses), len(r.removal_trace))
    return None


def _predecessors(l: Lpts) -> list[set[int]]:
    pred: list[set[int]] = [set() for _ in range(l.num_states)]
    for t in l.transitions:
        for s in t.dist.support:
            pred[s].add(t.src)
    return pred


def coarsest_simulation(l1: Lpts, l2: Lpts, *, early_exit: bool = False) -> SimRelation:
    """Greatest fixed point of the strong simulation condition from ``S1 x S2``.

    Pairs are examined in lexicographic order and the scan restarts from the
    smallest pair after every removal. Only pairs whose successor pairs lost a
    member can change verdict, so the scan is driven by a heap of such
    "dirty" pairs; the removal order is the same as a naive rescan.
    With ``early_exit`` the loop stops once the pair of start states goes.
    """
    n1, n2 = l1.num_states, l2.num_states
    r = SimRelation(n1, n2)
    start = (l1.start, l2.start)
    pred1, pred2 = _predecessors(l1), _predecessors(l2)
    dirty = [[True] * n2 for _ in range(n1)]
    heap = [(s1, s2) for s1 in range(n1) for s2 in range(n2)]
    while heap:
        s1, s2 = heapq.heappop(heap)
        if not dirty[s1][s2]:
            continue
        dirty[s1][s2] = False
        if (s1, s2) not in r:
            continue
        record = check_pair(l1, l2, s1, s2, r)
        if record is None:
            continue
        r.removal_trace.append(record)
        r.remove(s1, s2)
        if early_exit and (s1, s2) == start:
            break
        for p1 in pred1[s1]:
            for p2 in pred2[s2]:
                if not dirty[p1][p2] and (p1, p2) in r:
                    dirty[p1][p2] = True
                    heapq.heappush(heap, (p1, p2))
    return r


def holds(l1: Lpts, l2: Lpts) -> bool:
    """True iff ``l2`` strongly simulates ``l1`` from their start states."""
    r = coarsest_simulation(l1, l2, early_exit=True)
    return (l1.start, l2.start) in r


def is_simulation(r: SimRelation, l1: Lpts, l2: Lpts) -> bool:
    """Check the strong simulation condition for every pair of ``r``."""
    for s1, s2 in r.pairs():
        for ti in l1.outgoing(s1):
            t = l1.transitions[ti]
            if not any(
                dist_leq(t.dist, l2.transitions[tj].dist, r).holds
                for tj in l2.on_action(s2, t.action)
            ):
                return False
    return True


@dataclass(frozen=True)
class Iteration:
    """One step of the tree algorithm: transition ``transition`` of ``state``."""

    index: int
    state: int
    transition: int
    before: tuple[int, ...]  # relation rows at the start of the step
    after: tuple[int, ...]

    def related_before(self, s: int) -> frozenset[int]:
        return frozenset(bits(self.before[s]))

    def related_after(self, s: int) -> frozenset[int]:
        return frozenset(bits(self.after[s]))


def bottom_up_order(c: Lpts) -> list[int]:
    """Non-leaf states reachable from the root, deepest first."""
    depth = {c.start: 0}
    queue = deque([c.start])
    while queue:
        s = queue.popleft()
        for ti in c.outgoing(s):
            for child in c.transitions[ti].dist.support:
                if child not in depth:
                    depth[child] = depth[s] + 1
                    queue.append(child)
    inner = [s for s in depth if c.outgoing(s)]
    return sorted(inner, key=lambda s: (-depth[s], s))


def iter_tree_simulation(
    c: Lpts, l: Lpts, r0: SimRelation, *, stop_at_root: bool = True
) -> Iterator[Iteration]:
    """Run the bottom-up tree algorithm from ``r0``, yielding each iteration.

    Every iteration handles one transition ``s1 -a-> mu1`` of the tree and
    drops each ``(s1, s2)`` for which no ``s2 -a-> mu2`` has
    ``mu1 [=_R mu2``. With ``stop_at_root`` the run ends as soon as the root
    loses ``l.start``.
    """
    if not classify(c).tree:
        raise ValueError("tree simulation needs a stochastic tree")
    r = r0.copy()
    k = 0
    for s1 in bottom_up_order(c):
        for ti in c.outgoing(s1):
            t = c.transitions[ti]
            before = tuple(r.rows)
            candidates = [(s2, l.on_action(s2, t.action)) for s2 in bits(r.rows[s1])]
            for s2, options in candidates:
                if not any(dist_leq(t.dist, l.transitions[tj].dist, r).holds for tj in options):
                    r.remove(s1, s2)
            yield Iteration(k, s1, ti, before, tuple(r.rows))
            k += 1
            if stop_at_root and s1 == c.start and (c.start, l.start) not in r:
                return


def tree_simulation(
    c: Lpts, l: Lpts, r0: SimRelation | None = None, *, stop_at_root: bool = True
) -> tuple[SimRelation, list[Iteration]]:
    if r0 is None:
        r0 = SimRelation(c.num_states, l.num_states)
    log = list(iter_tree_simulation(c, l, r0, stop_at_root=stop_at_root))
    final = SimRelation(c.num_states, l.num_states, log[-1].after) if log else r0.copy()
    return final, log
