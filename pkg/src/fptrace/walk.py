"""Covering walk on the cover graph: the discrete space-filling curve.

The walk is an Euler tour of a depth-first spanning tree with the trailing
backtrack steps dropped, so it visits every vertex, every consecutive pair is
an edge (or a repeat), and the length satisfies N <= 2|V| - 2.
"""

from __future__ import annotations

from dataclasses import dataclass

from .covers import CoverGraph
from .errors import DisconnectedGraph
from .unionfind import UnionFind


@dataclass(frozen=True)
class Walk:
    """Sequence of cover-element indices; consecutive entries are adjacent."""

    sequence: tuple

    @property
    def N(self) -> int:
        return len(self.sequence) - 1

    def to_list(self) -> list[int]:
        return list(self.sequence)


def covering_walk(graph: CoverGraph, start: int = 0) -> Walk:
    """Deterministic covering walk from ``start``, neighbors in index order."""
    n = graph.n_vertices
    if not 0 <= start < n:
        raise ValueError(f"start vertex {start} out of range")
    uf = UnionFind(n)
    for i, j in graph.edges:
        uf.union(i, j)
    if uf.n_components != 1:
        raise DisconnectedGraph("covering walk requires a connected graph")

    adj = graph.adjacency()
    visited = [False] * n
    tour: list[int] = []
    last_new = 0
    # iterative DFS emitting the vertex on entry and after each child subtree
    stack: list[tuple[int, int]] = [(start, 0)]
    visited[start] = True
    tour.append(start)
    while stack:
        v, ptr = stack[-1]
        advanced = False
        for k in range(ptr, len(adj[v])):
            w = adj[v][k]
            if not visited[w]:
                stack[-1] = (v, k + 1)
                visited[w] = True
                tour.append(w)
                last_new = len(tour) - 1
                stack.append((w, 0))
                advanced = True
                break
        if not advanced:
            stack.pop()
            if stack:
                tour.append(stack[-1][0])
    return Walk(sequence=tuple(tour[: last_new + 1]))
