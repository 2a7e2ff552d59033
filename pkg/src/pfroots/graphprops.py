"""Treewidth of network graphs."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .netmodel import Network

EXACT_LIMIT = 24


@dataclass(frozen=True)
class SimpleGraph:
    n: int
    adjacency: tuple[frozenset[int], ...]

    @classmethod
    def from_edges(cls, n: int, edges) -> "SimpleGraph":
        adj = [set() for _ in range(n)]
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) out of range for {n} vertices")
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            adj[a].add(b)
            adj[b].add(a)
        return cls(n, tuple(frozenset(s) for s in adj))

    @classmethod
    def from_network(cls, net: Network) -> "SimpleGraph":
        return cls.from_edges(net.n_buses, net.edges)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(self.n) for b in self.adjacency[a] if a < b]


@dataclass(frozen=True)
class TreewidthResult:
    width: int
    order: tuple[int, ...]
    exact: bool

    def __iter__(self):
        # unpacks as (width, order)
        return iter((self.width, self.order))


def order_width(g: SimpleGraph, order) -> int:
    """Largest number of higher neighbours met while eliminating in ``order``."""
    if sorted(order) != list(range(g.n)):
        raise ValueError("order is not a permutation of the vertices")
    adj = [set(s) for s in g.adjacency]
    width = 0
    for v in order:
        nb = adj[v]
        width = max(width, len(nb))
        for a in nb:
            adj[a] |= nb
            adj[a].discard(a)
            adj[a].discard(v)
        adj[v] = set()
    return width


def _min_fill_order(g: SimpleGraph) -> list[int]:
    adj = [set(s) for s in g.adjacency]
    alive = set(range(g.n))
    order = []
    while alive:
        def fill(v):
            nb = list(adj[v])
            return sum(1 for i, a in enumerate(nb) for b in nb[i + 1:] if b not in adj[a])

        v = min(alive, key=lambda x: (fill(x), len(adj[x]), x))
        nb = adj[v]
        for a in nb:
            adj[a] |= nb
            adj[a].discard(a)
            adj[a].discard(v)
        adj[v] = set()
        alive.discard(v)
        order.append(v)
    return order


def treewidth(g: SimpleGraph) -> TreewidthResult:
    """Treewidth and a witnessing elimination order.

    Exact for up to ``EXACT_LIMIT`` vertices by dynamic programming over the
    set of already-eliminated vertices; larger graphs get a min-fill upper
    bound with ``exact=False``.
    """
    if g.n == 0:
        return TreewidthResult(0, (), True)
    heuristic = _min_fill_order(g)
    upper = order_width(g, heuristic)
    if g.n > EXACT_LIMIT:
        return TreewidthResult(upper, tuple(heuristic), False)

    nbr = [sum(1 << b for b in g.adjacency[v]) for v in range(g.n)]
    full = (1 << g.n) - 1

    def q_size(eliminated: int, v: int) -> int:
        # vertices outside eliminated+v reachable from v through eliminated ones
        seen = 1 << v
        stack = [v]
        reach = 0
        while stack:
            x = stack.pop()
            frontier = nbr[x] & ~seen
            seen |= frontier
            reach |= frontier & ~eliminated
            inner = frontier & eliminated
            while inner:
                low = inner & -inner
                stack.append(low.bit_length() - 1)
                inner ^= low
        return bin(reach).count("1")

    @lru_cache(maxsize=None)
    def best(eliminated: int) -> int:
        if eliminated == full:
            return 0
        out = g.n
        rest = full & ~eliminated
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            rest ^= low
            q = q_size(eliminated, v)
            if q >= out or q >= upper + 1:
                continue
            out = min(out, max(q, best(eliminated | low)))
        return out

    width = best(0)
    if width >= upper:
        return TreewidthResult(upper, tuple(heuristic), True)
    order = []
    eliminated = 0
    while eliminated != full:
        for v in range(g.n):
            low = 1 << v
            if eliminated & low:
                continue
            if max(q_size(eliminated, v), best(eliminated | low)) == best(eliminated) and \
                    q_size(eliminated, v) <= width:
                order.append(v)
                eliminated |= low
                break
    best.cache_clear()
    return TreewidthResult(width, tuple(order), True)
