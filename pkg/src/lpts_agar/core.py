"""Exact-rational data model for labeled probabilistic transition systems."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, NamedTuple

Rat = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class Dist:
    """A finite probability distribution with exact rational weights.

    Entries with zero weight are dropped and the remaining ones are kept sorted
    by key, so two distributions with the same weights compare and hash equal.
    Keys are state ids (ints) for LPTS transitions, or pairs of ids for
    product distributions.
    """

    __slots__ = ("_items", "_map", "_hash")

    def __init__(self, weights: Mapping[Any, Any] | Iterable[tuple[Any, Any]] = ()):
        merged: dict[Hashable, Fraction] = {}
        pairs = weights.items() if isinstance(weights, Mapping) else weights
        for key, p in pairs:
            p = Fraction(p)
            if p < 0:
                raise ValueError(f"negative weight {p} for {key!r}")
            if p:
                merged[key] = merged.get(key, ZERO) + p
        self._items = tuple(sorted(merged.items()))
        self._map = dict(self._items)
        self._hash = hash(self._items)

    def __getitem__(self, key) -> Fraction:
        return self._map.get(key, ZERO)

    def __contains__(self, key) -> bool:
        return key in self._map

    def __iter__(self):
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._items)

    def __eq__(self, other) -> bool:
        return isinstance(other, Dist) and self._items == other._items

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{k!r}: {p}" for k, p in self._items)
        return f"Dist({{{inner}}})"

    def items(self) -> tuple[tuple[Any, Fraction], ...]:
        return self._items

    @property
    def support(self) -> tuple:
        return tuple(k for k, _ in self._items)

    def total(self) -> Fraction:
        return sum((p for _, p in self._items), ZERO)

    def mass(self, states: Iterable) -> Fraction:
        return sum((self[s] for s in set(states)), ZERO)

    def remap(self, f) -> Dist:
        """Push the distribution forward along ``f``, summing colliding keys."""
        return Dist((f(k), p) for k, p in self._items)


def dirac(s) -> Dist:
    return Dist({s: ONE})


def mass(mu: Dist, states: Iterable) -> Fraction:
    return mu.mass(states)


class Transition(NamedTuple):
    src: int
    action: str
    dist: Dist


@dataclass(frozen=True)
class Lpts:
    """A finite LPTS ``<S, s0, alpha, tau>``.

    States are dense integer ids ``0..n-1`` with display names in ``states``.
    Duplicate transitions are dropped (``tau`` is a set) but the order of first
    occurrence is kept, which makes every algorithm over it deterministic.
    Construction does not check well-formedness; see :func:`validate`.
    """

    states: tuple[str, ...]
    start: int
    alphabet: frozenset[str]
    transitions: tuple[Transition, ...]
    _out: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        seen = set()
        trans = []
        for t in self.transitions:
            t = Transition(*t)
            if t not in seen:
                seen.add(t)
                trans.append(t)
        object.__setattr__(self, "transitions", tuple(trans))
        out: list[list[int]] = [[] for _ in self.states]
        for i, t in enumerate(trans):
            if 0 <= t.src < len(out):
                out[t.src].append(i)
        object.__setattr__(self, "_out", tuple(tuple(o) for o in out))
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(self.states)})

    @property
    def num_states(self) -> int:
        return len(self.states)

    def outgoing(self, s: int) -> tuple[int, ...]:
        """Indices of the transitions leaving ``s``, in definition order."""
        return self._out[s]

    def on_action(self, s: int, action: str) -> list[int]:
        return [i for i in self._out[s] if self.transitions[i].action == action]

    def state_id(self, name: str) -> int:
        return self._index[name]

    def sorted_alphabet(self) -> list[str]:
        return sorted(self.alphabet)


@dataclass(frozen=True)
class LptsKind:
    reactive: bool
    fully_probabilistic: bool
    tree: bool


def classify(l: Lpts) -> LptsKind:
    reactive = True
    fully = True
    for s in range(l.num_states):
        out = l.outgoing(s)
        if len(out) > 1:
            fully = False
        actions = [l.transitions[i].action for i in out]
        if len(set(actions)) != len(actions):
            reactive = False
    occurrences = [0] * l.num_states
    for t in l.transitions:
        for s in t.dist.support:
            occurrences[s] += 1
    tree = occurrences[l.start] == 0 and all(
        n == 1 for s, n in enumerate(occurrences) if s != l.start
    )
    return LptsKind(reactive, fully, tree)


@dataclass(frozen=True)
class Violation:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


def _describe(l: Lpts, i: int, t: Transition) -> str:
    src = l.states[t.src] if 0 <= t.src < l.num_states else str(t.src)
    return f"transition #{i} ({src} -{t.action}->)"


def validate(l: Lpts) -> list[Violation]:
    """Return every well-formedness violation of ``l``; empty means valid."""
    problems = []
    n = l.num_states
    if n == 0:
        problems.append(Violation("states", "no states"))
    if not 0 <= l.start < n:
        problems.append(Violation("start", f"start state {l.start} is not a state"))
    if len(set(l.states)) != n:
        problems.append(Violation("states", "duplicate state names"))
    for i, t in enumerate(l.transitions):
        where = _describe(l, i, t)
        if not 0 <= t.src < n:
            problems.append(Violation(where, f"source {t.src} is not a state"))
        if t.action not in l.alphabet:
            problems.append(Violation(where, f"action {t.action!r} not in alphabet"))
        for s in t.dist.support:
            if not (isinstance(s, int) and 0 <= s < n):
                problems.append(Violation(where, f"target {s!r} is not a state"))
        total = t.dist.total()
        if total != 1:
            problems.append(Violation(where, f"distribution sums to {total}"))
    return problems


def complete_spec(p: Lpts, target_alphabet: Iterable[str]) -> Lpts:
    """Add a Dirac self-loop on every missing action to every state of ``p``."""
    target = frozenset(target_alphabet)
    if not p.alphabet <= target:
        extra = ", ".join(sorted(p.alphabet - target))
        raise ValueError(f"spec alphabet has actions outside the target: {extra}")
    missing = sorted(target - p.alphabet)
    if not missing:
        return p
    loops = [Transition(s, a, dirac(s)) for s in range(p.num_states) for a in missing]
    return Lpts(p.states, p.start, target, p.transitions + tuple(loops))


def restrict_alphabet(l: Lpts, alphabet: Iterable[str]) -> Lpts:
    """Drop transitions on actions outside ``alphabet`` and shrink the alphabet."""
    keep = frozenset(alphabet)
    trans = tuple(t for t in l.transitions if t.action in keep)
    return Lpts(l.states, l.start, l.alphabet & keep, trans)
