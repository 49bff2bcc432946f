"""Exact maximum flow by shortest augmenting paths (Edmonds-Karp)."""

from __future__ import annotations

from collections import deque
from fractions import Fraction


class FlowNetwork:
    """Residual network over nodes ``0..n-1`` with rational capacities.

    Edges are explored in insertion order, so the flow found is a
    deterministic function of the order in which edges were added.
    """

    def __init__(self, n: int):
        self.n = n
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.head: list[int] = []
        self.cap: list[Fraction] = []
        self.flow: list[Fraction] = []

    def add_edge(self, u: int, v: int, capacity) -> int:
        """Add ``u -> v`` and its reverse; return the forward edge id."""
        eid = len(self.head)
        self.head += [v, u]
        self.cap += [Fraction(capacity), Fraction(0)]
        self.flow += [Fraction(0), Fraction(0)]
        self.adj[u].append(eid)
        self.adj[v].append(eid + 1)
        return eid

    def residual(self, e: int) -> Fraction:
        return self.cap[e] - self.flow[e]

    def _augmenting_path(self, source: int, sink: int) -> list[int] | None:
        parent_edge: list[int | None] = [None] * self.n
        seen = [False] * self.n
        seen[source] = True
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for e in self.adj[u]:
                v = self.head[e]
                if not seen[v] and self.residual(e) > 0:
                    seen[v] = True
                    parent_edge[v] = e
                    if v == sink:
                        path = []
                        while v != source:
                            e = parent_edge[v]
                            path.append(e)
                            v = self.head[e ^ 1]
                        return path[::-1]
                    queue.append(v)
        return None

    def max_flow(self, source: int, sink: int) -> Fraction:
        value = Fraction(0)
        while (path := self._augmenting_path(source, sink)) is not None:
            push = min(self.residual(e) for e in path)
            for e in path:
                self.flow[e] += push
                self.flow[e ^ 1] -= push
            value += push
        return value
