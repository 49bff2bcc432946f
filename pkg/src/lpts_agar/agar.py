"""Assume-guarantee abstraction refinement for two or more components."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

from . import compose as _compose
from .cex import StochasticTree, build_cex, check_exec_map, lift_tree
from .core import Lpts, complete_spec
from .refine import Partition, analyze_and_refine, describe_split, quotient
from .simulate import coarsest_simulation

__all__ = ["AgarResult", "agar2", "agar_n", "lift_tree"]

log = logging.getLogger(__name__)


@dataclass
class AgarResult:
    """Verdict and statistics of one AGAR run.

    ``refinements[i]`` counts refinements of the i-th assumption and
    ``epoch_refinements[i]`` the most it saw between two resets.
    ``max_composed`` and ``max_assumption`` are the largest composed LPTS and
    assumption built during the run.
    """

    holds: bool
    counterexample: StochasticTree | None
    assumptions: list[Lpts]
    partitions: list[Partition]
    refinements: list[int]
    epoch_refinements: list[int]
    cex_system: Lpts | None = None  # the composition the counterexample executes in
    max_composed: int = 0
    max_assumption: int = 0
    iterations: int = 0
    log: list[dict] = field(default_factory=list)

    @property
    def total_refinements(self) -> int:
        return sum(self.refinements)


def _union(alphabets) -> frozenset[str]:
    out: frozenset[str] = frozenset()
    for a in alphabets:
        out |= a
    return out


def agar2(l1: Lpts, l2: Lpts, p: Lpts) -> AgarResult:
    """Check ``l1 || l2 <= p`` with an assumption kept as a quotient of ``l2``.

    The second premise ``l2 <= A`` holds for every quotient, so only
    ``l1 || A <= p`` is checked. Counterexamples are projected onto ``A`` and
    analysed against ``l2``; spurious ones refine the partition of ``l2``.
    """
    p = complete_spec(p, l1.alphabet | l2.alphabet)
    pi = Partition.coarsest(l2.num_states)
    result = AgarResult(False, None, [], [pi], [0], [0])
    while True:
        a = quotient(l2, pi)
        composed = _compose.compose(l1, a)
        result.max_composed = max(result.max_composed, composed.lpts.num_states)
        result.max_assumption = max(result.max_assumption, a.num_states)
        r = coarsest_simulation(composed.lpts, p, early_exit=True)
        start = (composed.lpts.start, p.start)
        entry = {
            "iteration": result.iterations,
            "assumption": a.num_states,
            "composed": composed.lpts.num_states,
            "premise1": start in r,
        }
        result.iterations += 1
        if start in r:
            result.log.append(entry)
            result.holds = True
            break
        c = build_cex(r.removal_trace, start, composed.lpts)
        c_a = _compose.project(c, composed, "right")
        outcome = analyze_and_refine(c_a, a, l2, pi)
        entry["outcome"] = "spurious" if outcome.spurious else "real"
        if not outcome.spurious:
            result.log.append(entry)
            result.counterexample = c
            result.cex_system = composed.lpts
            break
        entry["splits"] = [describe_split(pi, s) for s in outcome.splits]
        result.log.append(entry)
        log.info("assumption refined: %d -> %d states", len(pi), len(outcome.partition))
        pi = outcome.partition
        result.refinements[0] += 1
        result.epoch_refinements[0] = result.refinements[0]
    result.assumptions = [a]
    result.partitions = [pi]
    return result


def agar_n(components: Sequence[Lpts], p: Lpts, order: Sequence[int] | None = None) -> AgarResult:
    """Nested AGAR for ``L1 || ... || Ln <= p``.

    Assumption ``A_i`` is a quotient of ``L_{i+1} || A_{i+1}`` (of ``L_n`` for
    the last one). A counterexample to the first premise is pushed down the
    levels: at level i it is analysed against ``L_{i+1} || A_{i+1}``; if
    real, it is re-expressed as an execution of that composition and its
    projection onto ``A_{i+1}`` becomes the tree analysed one level deeper.
    Refining ``A_i`` resets every ``A_j`` with ``j < i`` to one class.

    ``order`` is a permutation of component indices (0-based).
    """
    comps = list(components)
    if order is not None:
        if sorted(order) != list(range(len(comps))):
            raise ValueError(f"order {list(order)} is not a permutation of the components")
        comps = [comps[i] for i in order]
    n = len(comps)
    if n < 2:
        raise ValueError("AGAR needs at least two components")
    p = complete_spec(p, _union(c.alphabet for c in comps))
    levels = n - 1
    # level i (0-based) abstracts comps[i+1] || A_{i+1}, or comps[n-1] at the deepest level
    parts: list[Partition | None] = [None] * levels
    result = AgarResult(False, None, [], [], [0] * levels, [0] * levels)
    epoch = [0] * levels

    while True:
        structs: list = [None] * levels
        abstractions: list = [None] * levels
        for i in reversed(range(levels)):
            if i == levels - 1:
                struct_lpts = comps[n - 1]
                structs[i] = comps[n - 1]
            else:
                structs[i] = _compose.compose(comps[i + 1], abstractions[i + 1])
                struct_lpts = structs[i].lpts
                result.max_composed = max(result.max_composed, struct_lpts.num_states)
            if parts[i] is None:
                parts[i] = Partition.coarsest(struct_lpts.num_states)
            abstractions[i] = quotient(struct_lpts, parts[i])
            result.max_assumption = max(result.max_assumption, abstractions[i].num_states)

        top = _compose.compose(comps[0], abstractions[0])
        result.max_composed = max(result.max_composed, top.lpts.num_states)
        r = coarsest_simulation(top.lpts, p, early_exit=True)
        start = (top.lpts.start, p.start)
        entry = {
            "iteration": result.iterations,
            "assumptions": [a.num_states for a in abstractions],
            "composed": top.lpts.num_states,
            "premise1": start in r,
        }
        result.iterations += 1
        if start in r:
            result.log.append(entry)
            result.holds = True
            break

        c = build_cex(r.removal_trace, start, top.lpts)
        tree = _compose.project(c, top, "right")
        level = 0
        while True:
            struct = structs[level]
            struct_lpts = struct if isinstance(struct, Lpts) else struct.lpts
            outcome = analyze_and_refine(tree, abstractions[level], struct_lpts, parts[level])
            if outcome.spurious:
                entry["outcome"] = "spurious"
                entry["level"] = level
                entry["splits"] = [describe_split(parts[level], s) for s in outcome.splits]
                parts[level] = outcome.partition
                result.refinements[level] += 1
                epoch[level] += 1
                result.epoch_refinements[level] = max(result.epoch_refinements[level], epoch[level])
                for j in range(level):
                    parts[j] = None
                    epoch[j] = 0
                break
            if level == levels - 1:
                entry["outcome"] = "real"
                result.counterexample = c
                result.cex_system = top.lpts
                break
            lifted = outcome.tree
            if not check_exec_map(lifted, struct_lpts):
                raise RuntimeError("lifted tree is not an execution of the composition")
            tree = _compose.project(lifted, struct, "right")
            level += 1
        result.log.append(entry)
        if result.counterexample is not None:
            break

    result.assumptions = abstractions
    result.partitions = parts
    return result
