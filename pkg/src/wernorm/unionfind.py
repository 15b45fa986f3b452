"""Disjoint-set forest used for phone classes and spelling equivalence classes."""

from __future__ import annotations


class UnionFind:
    """Union-find over hashable elements, created on first use."""

    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        parent = self.parent
        if x not in parent:
            parent[x] = x
            return x
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:  # path compression
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def groups(self) -> list[list]:
        """Connected components, each sorted, ordered by first member."""
        by_root: dict = {}
        for x in list(self.parent):
            by_root.setdefault(self.find(x), []).append(x)
        return sorted((sorted(g) for g in by_root.values()), key=lambda g: g[0])
