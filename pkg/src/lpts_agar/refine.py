"""Quotient abstractions, counterexample analysis and the CEGAR loop."""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field

from .cex import StochasticTree, build_cex, check_exec_map, lift_tree
from .core import Lpts, Transition, complete_spec
from .simulate import SimRelation, coarsest_simulation, iter_tree_simulation, mask_of

log = logging.getLogger(__name__)


class Partition:
    """Disjoint non-empty classes covering ``0..n-1``, ordered by smallest member."""

    def __init__(self, classes: Iterable[Iterable[int]], n: int | None = None):
        cls = [frozenset(c) for c in classes]
        if any(not c for c in cls):
            raise ValueError("partition has an empty class")
        self.classes: tuple[frozenset[int], ...] = tuple(sorted(cls, key=min))
        covered = set().union(*self.classes) if cls else set()
        size = sum(len(c) for c in self.classes)
        n = len(covered) if n is None else n
        if size != len(covered) or covered != set(range(n)):
            raise ValueError("classes do not form an exact cover of the states")
        self.n = n
        lookup = [0] * n
        for i, c in enumerate(self.classes):
            for s in c:
                lookup[s] = i
        self.class_of: tuple[int, ...] = tuple(lookup)

    @classmethod
    def coarsest(cls, n: int) -> Partition:
        return cls([range(n)], n)

    @classmethod
    def singletons(cls, n: int) -> Partition:
        return cls([[s] for s in range(n)], n)

    def __len__(self) -> int:
        return len(self.classes)

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and self.classes == other.classes

    def __repr__(self) -> str:
        return f"Partition({[sorted(c) for c in self.classes]})"

    def refines(self, other: Partition) -> bool:
        """True if every class of ``self`` lies inside a class of ``other``."""
        return all(len({other.class_of[s] for s in c}) == 1 for c in self.classes)


def quotient(l: Lpts, pi: Partition) -> Lpts:
    """Collapse every class into one state, summing mass per class."""
    if pi.n != l.num_states:
        raise ValueError("partition does not cover the states of the LPTS")
    trans = [Transition(pi.class_of[t.src], t.action, t.dist.remap(pi.class_of.__getitem__)) for t in l.transitions]
    names = tuple("{" + ",".join(l.states[s] for s in sorted(c)) + "}" for c in pi.classes)
    return Lpts(names, pi.class_of[l.start], l.alphabet, tuple(trans))


@dataclass(frozen=True)
class Split:
    class_index: int  # class of the partition being refined
    kept: frozenset[int]  # the part matched by the old relation
    rest: frozenset[int]
    reason: str


@dataclass
class RefinementOutcome:
    """Result of analysing one abstract counterexample.

    Spurious outcomes carry the strictly finer ``partition``; real ones carry
    the final relation between tree and concrete LPTS and ``tree``, the
    counterexample re-expressed as an execution of the concrete LPTS.
    """

    spurious: bool
    partition: Partition | None = None
    relation: SimRelation | None = None
    tree: StochasticTree | None = None
    case: int | None = None  # 1: a tree state lost every partner, 2: the start class lost l.start
    splits: list[Split] = field(default_factory=list)
    iterations: int = 0


class _Splitter:
    def __init__(self, pi: Partition):
        self.pi = pi
        self.pieces = [set(c) for c in pi.classes]
        self.splits: list[Split] = []
        self.split_classes: set[int] = set()

    def split(self, k: int, keep: frozenset[int], reason: str) -> bool:
        members = self.pi.classes[k]
        inside = keep & members
        if not inside or inside == members:
            return False
        refined = []
        for piece in self.pieces:
            if piece <= members:
                refined += [p for p in (piece & inside, piece - inside) if p]
            else:
                refined.append(piece)
        if len(refined) == len(self.pieces):
            return False
        self.pieces = refined
        self.split_classes.add(k)
        self.splits.append(Split(k, frozenset(inside), members - inside, reason))
        return True

    def partition(self) -> Partition:
        return Partition(self.pieces, self.pi.n)


def analyze_and_refine(c_proj: StochasticTree, a: Lpts, l: Lpts, pi: Partition) -> RefinementOutcome:
    """Decide whether a counterexample found against ``a = l/pi`` is spurious.

    Runs the tree algorithm from ``R_M = {(x, s) | M(x) = [s]}`` and watches
    for a tree state losing all of its partners (case 1) or the class of the
    start state losing ``l.start`` (case 2). The relation before the first
    iteration is ``R_M`` itself.
    """
    if a.num_states != len(pi) or l.num_states != pi.n:
        raise ValueError("abstraction does not match the partition")
    tree = c_proj.lpts
    if not check_exec_map(c_proj, a):
        raise ValueError("tree has no execution mapping into the abstraction")
    M = c_proj.exec_map
    r_m = SimRelation(tree.num_states, l.num_states, [mask_of(pi.classes[M[x]]) for x in range(tree.num_states)])
    start_class = pi.class_of[l.start]
    start_bit = 1 << l.start

    count = 0
    final_rows = tuple(r_m.rows)
    for it in iter_tree_simulation(tree, l, r_m):
        count += 1
        final_rows = it.after
        s1 = it.state
        splitter = _Splitter(pi)
        if it.after[s1] == 0:
            k1 = M[s1]
            splitter.split(k1, it.related_before(s1), "state lost every partner")
            for s in tree.transitions[it.transition].dist.support:
                k = M[s]
                if k == k1 and k1 in splitter.split_classes:
                    continue
                splitter.split(k, it.related_before(s), "successor lost its partners")
            case = 1
        elif M[s1] == start_class and it.before[s1] & start_bit and not it.after[s1] & start_bit:
            splitter.split(M[s1], it.related_before(s1) - it.related_after(s1), "start state lost")
            case = 2
        else:
            continue
        if not splitter.splits:
            raise RuntimeError("refinement made no progress")
        new_pi = splitter.partition()
        log.debug("spurious counterexample (case %d): %d -> %d classes", case, len(pi), len(new_pi))
        return RefinementOutcome(True, partition=new_pi, case=case, splits=splitter.splits, iterations=count)

    relation = SimRelation(tree.num_states, l.num_states, final_rows)
    grounded = lift_tree(c_proj, relation, l)
    return RefinementOutcome(False, relation=relation, tree=grounded, iterations=count)


@dataclass
class CegarResult:
    holds: bool
    counterexample: StochasticTree | None  # an execution of the concrete LPTS
    abstract_counterexample: StochasticTree | None  # the same failure as found on the abstraction
    refinements: int
    partition: Partition
    log: list[dict] = field(default_factory=list)


def cegar(l: Lpts, p: Lpts) -> CegarResult:
    """Check ``l <= p`` by refining quotients of ``l``, starting from one class."""
    p = complete_spec(p, l.alphabet)
    pi = Partition.coarsest(l.num_states)
    refinements = 0
    events: list[dict] = []
    while True:
        a = quotient(l, pi)
        r = coarsest_simulation(a, p, early_exit=True)
        start = (a.start, p.start)
        entry = {"iteration": len(events), "abstraction": a.num_states, "holds": start in r}
        if start in r:
            events.append(entry)
            return CegarResult(True, None, None, refinements, pi, events)
        c = build_cex(r.removal_trace, start, a)
        outcome = analyze_and_refine(c, a, l, pi)
        entry["spurious"] = outcome.spurious
        if not outcome.spurious:
            events.append(entry)
            return CegarResult(False, outcome.tree, c, refinements, pi, events)
        entry["splits"] = [describe_split(pi, s) for s in outcome.splits]
        entry["classes_before"] = len(pi)
        entry["classes_after"] = len(outcome.partition)
        events.append(entry)
        pi = outcome.partition
        refinements += 1


def describe_split(pi: Partition, split: Split) -> dict:
    return {
        "class": split.class_index,
        "size": len(pi.classes[split.class_index]),
        "kept": sorted(split.kept),
        "rest": sorted(split.rest),
        "reason": split.reason,
    }
