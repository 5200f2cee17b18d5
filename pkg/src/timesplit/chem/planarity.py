"""Left-right planarity test (Brandes' formulation of de Fraysseix-Rosenstiehl).

Only the testing phase is implemented; no embedding is produced.
"""

from __future__ import annotations

import sys
from typing import Iterable

Edge = tuple[int, int]


class _Interval:
    __slots__ = ("low", "high")

    def __init__(self, low: Edge | None = None, high: Edge | None = None):
        self.low = low
        self.high = high

    def empty(self) -> bool:
        return self.low is None and self.high is None

    def copy(self) -> "_Interval":
        return _Interval(self.low, self.high)


class _Pair:
    __slots__ = ("left", "right")

    def __init__(self, left: _Interval | None = None, right: _Interval | None = None):
        self.left = left if left is not None else _Interval()
        self.right = right if right is not None else _Interval()

    def swap(self) -> None:
        self.left, self.right = self.right, self.left


class _LRTest:
    def __init__(self, n: int, adj: list[list[int]]):
        self.n = n
        self.adj = adj
        self.height: list[int | None] = [None] * n
        self.parent_edge: list[Edge | None] = [None] * n
        self.lowpt: dict[Edge, int] = {}
        self.lowpt2: dict[Edge, int] = {}
        self.nesting_depth: dict[Edge, int] = {}
        self.out: list[list[int]] = [[] for _ in range(n)]
        self.oriented: set[Edge] = set()
        self.ref: dict[Edge, Edge | None] = {}
        self.lowpt_edge: dict[Edge, Edge] = {}
        self.stack_bottom: dict[Edge, _Pair | None] = {}
        self.S: list[_Pair] = []

    # orientation ------------------------------------------------------
    def orient(self, v: int) -> None:
        e = self.parent_edge[v]
        for w in self.adj[v]:
            if (v, w) in self.oriented or (w, v) in self.oriented:
                continue
            vw = (v, w)
            self.oriented.add(vw)
            self.out[v].append(w)
            self.lowpt[vw] = self.lowpt2[vw] = self.height[v]
            if self.height[w] is None:  # tree edge
                self.parent_edge[w] = vw
                self.height[w] = self.height[v] + 1
                self.orient(w)
            else:  # back edge
                self.lowpt[vw] = self.height[w]
            self.nesting_depth[vw] = 2 * self.lowpt[vw] + (1 if self.lowpt2[vw] < self.height[v] else 0)
            if e is not None:
                if self.lowpt[vw] < self.lowpt[e]:
                    self.lowpt2[e] = min(self.lowpt[e], self.lowpt2[vw])
                    self.lowpt[e] = self.lowpt[vw]
                elif self.lowpt[vw] > self.lowpt[e]:
                    self.lowpt2[e] = min(self.lowpt2[e], self.lowpt[vw])
                else:
                    self.lowpt2[e] = min(self.lowpt2[e], self.lowpt2[vw])

    # testing ----------------------------------------------------------
    def _top(self) -> _Pair | None:
        return self.S[-1] if self.S else None

    def _conflicting(self, interval: _Interval, b: Edge) -> bool:
        return not interval.empty() and self.lowpt[interval.high] > self.lowpt[b]

    def _lowest(self, p: _Pair) -> int:
        if p.left.empty():
            return self.lowpt[p.right.low]
        if p.right.empty():
            return self.lowpt[p.left.low]
        return min(self.lowpt[p.left.low], self.lowpt[p.right.low])

    def test(self, v: int) -> bool:
        e = self.parent_edge[v]
        first = self.out[v][0] if self.out[v] else None
        for w in self.out[v]:
            ei = (v, w)
            self.stack_bottom[ei] = self._top()
            if ei == self.parent_edge[w]:
                if not self.test(w):
                    return False
            else:
                self.lowpt_edge[ei] = ei
                self.S.append(_Pair(right=_Interval(ei, ei)))
            if self.lowpt[ei] < self.height[v]:  # ei has a return edge
                if w == first:
                    self.lowpt_edge[e] = self.lowpt_edge[ei]
                elif not self._add_constraints(ei, e):
                    return False
        if e is not None:
            self._remove_back_edges(e)
        return True

    def _add_constraints(self, ei: Edge, e: Edge) -> bool:
        P = _Pair()
        while True:
            Q = self.S.pop()
            if not Q.left.empty():
                Q.swap()
            if not Q.left.empty():
                return False
            if self.lowpt[Q.right.low] > self.lowpt[e]:
                if P.right.empty():
                    P.right = Q.right.copy()
                else:
                    self.ref[P.right.low] = Q.right.high
                P.right.low = Q.right.low
            else:
                self.ref[Q.right.low] = self.lowpt_edge[e]
            if self._top() is self.stack_bottom[ei]:
                break
        while self.S and (self._conflicting(self.S[-1].left, ei) or self._conflicting(self.S[-1].right, ei)):
            Q = self.S.pop()
            if self._conflicting(Q.right, ei):
                Q.swap()
            if self._conflicting(Q.right, ei):
                return False
            self.ref[P.right.low] = Q.right.high
            if Q.right.low is not None:
                P.right.low = Q.right.low
            if P.left.empty():
                P.left = Q.left.copy()
            else:
                self.ref[P.left.low] = Q.left.high
            P.left.low = Q.left.low
        if not (P.left.empty() and P.right.empty()):
            self.S.append(P)
        return True

    def _remove_back_edges(self, e: Edge) -> None:
        u = e[0]
        while self.S and self._lowest(self.S[-1]) == self.height[u]:
            self.S.pop()
        if self.S:
            P = self.S.pop()
            while P.left.high is not None and P.left.high[1] == u:
                P.left.high = self.ref.get(P.left.high)
            if P.left.high is None and P.left.low is not None:
                self.ref[P.left.low] = P.right.low
                P.left.low = None
            while P.right.high is not None and P.right.high[1] == u:
                P.right.high = self.ref.get(P.right.high)
            if P.right.high is None and P.right.low is not None:
                self.ref[P.right.low] = P.left.low
                P.right.low = None
            self.S.append(P)
        if self.lowpt[e] < self.height[u] and self.S:
            hl = self.S[-1].left.high
            hr = self.S[-1].right.high
            if hl is not None and (hr is None or self.lowpt[hl] > self.lowpt[hr]):
                self.ref[e] = hl
            else:
                self.ref[e] = hr


def is_planar(n: int, edges: Iterable[Edge]) -> bool:
    """Planarity of the simple undirected graph on nodes ``0..n-1``."""
    adj: list[list[int]] = [[] for _ in range(n)]
    m = 0
    seen = set()
    for a, b in edges:
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key in seen:
            continue
        seen.add(key)
        adj[a].append(b)
        adj[b].append(a)
        m += 1
    if n > 2 and m > 3 * n - 6:
        return False
    limit = sys.getrecursionlimit()
    if limit < 4 * n + 200:
        sys.setrecursionlimit(4 * n + 200)
    lr = _LRTest(n, adj)
    roots = []
    for v in range(n):
        if lr.height[v] is None:
            lr.height[v] = 0
            roots.append(v)
            lr.orient(v)
    for v in range(n):
        lr.out[v].sort(key=lambda w: lr.nesting_depth[(v, w)])
    return all(lr.test(v) for v in roots)
