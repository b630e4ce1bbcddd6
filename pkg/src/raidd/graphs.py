"""Undirected simple graphs, Laplacians and the Laplacian eigenvalue pool."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotConnected, TooLarge

__all__ = [
    "Graph", "TopologyBank", "EigenvaluePool", "laplacian", "is_connected",
    "nonzero_laplacian_eigenvalues", "build_eigenvalue_pool", "enumerate_connected_graphs",
    "path_graph", "cycle_graph", "star_graph", "complete_graph",
]

CONNECTIVITY_TOL = 1e-9


@dataclass(frozen=True)
class Graph:
    """Labeled undirected simple graph on nodes ``1..n``.

    Edges are stored normalized as sorted pairs ``(i, j)`` with ``i < j``.
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)
    name: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a graph needs at least one node")
        norm = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"edge {(i, j)} references a node outside 1..{self.n}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    def edge_list(self):
        return sorted(self.edges)

    def neighbors(self, i):
        return sorted({b if a == i else a for a, b in self.edges if i in (a, b)})


def path_graph(n):
    return Graph(n, frozenset((i, i + 1) for i in range(1, n)), name=f"path{n}")


def cycle_graph(n):
    if n < 3:
        raise ValueError("a cycle needs at least 3 nodes")
    return Graph(n, frozenset((i, i % n + 1) for i in range(1, n + 1)), name=f"cycle{n}")


def star_graph(n):
    return Graph(n, frozenset((1, i) for i in range(2, n + 1)), name=f"star{n}")


def complete_graph(n):
    return Graph(n, frozenset(itertools.combinations(range(1, n + 1), 2)), name=f"complete{n}")


def laplacian(G: Graph) -> np.ndarray:
    """Degree matrix minus adjacency matrix (integer valued, returned as float)."""
    L = np.zeros((G.n, G.n), dtype=np.int64)
    for i, j in G.edges:
        L[i - 1, j - 1] -= 1
        L[j - 1, i - 1] -= 1
        L[i - 1, i - 1] += 1
        L[j - 1, j - 1] += 1
    return L.astype(float)


def is_connected(G: Graph) -> bool:
    """Breadth-first search from node 1."""
    adj = {i: [] for i in range(1, G.n + 1)}
    for i, j in G.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {1}
    queue = deque([1])
    while queue:
        for nb in adj[queue.popleft()]:
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return len(seen) == G.n


def nonzero_laplacian_eigenvalues(G: Graph) -> np.ndarray:
    """The ``n - 1`` Laplacian eigenvalues left after dropping the single zero, ascending."""
    ev = np.linalg.eigvalsh(laplacian(G))
    if G.n > 1 and ev[1] <= CONNECTIVITY_TOL:
        raise NotConnected(f"graph {G.name or G.edge_list()} is not connected")
    return ev[1:]


@dataclass
class TopologyBank:
    """Graph sets for the nominal, post-attrition and post-inclusion agent counts.

    ``sets`` maps an agent count to the list of graphs used while that many
    agents are live; ``nominal``, ``reduced`` and ``enlarged`` name the
    three counts ``N``, ``N-P`` and ``N+M``.
    """

    sets: dict[int, list[Graph]]
    nominal: int | None = None
    reduced: int | None = None
    enlarged: int | None = None

    def __post_init__(self):
        for count, graphs in self.sets.items():
            for G in graphs:
                if G.n != count:
                    raise DimensionMismatch(f"graph on {G.n} nodes filed under count {count}")

    @classmethod
    def from_sets(cls, graphs_N, graphs_NmP=(), graphs_NpM=()):
        sets, counts = {}, []
        for graphs in (graphs_N, graphs_NmP, graphs_NpM):
            graphs = list(graphs)
            counts.append(graphs[0].n if graphs else None)
            if graphs:
                sets.setdefault(graphs[0].n, []).extend(graphs)
        return cls(sets, *counts)

    @property
    def k(self):
        return len(self.sets.get(self.nominal, [])) if self.nominal else 0

    @property
    def r(self):
        return len(self.sets.get(self.reduced, [])) if self.reduced else 0

    @property
    def p(self):
        return len(self.sets.get(self.enlarged, [])) if self.enlarged else 0

    def graphs_for(self, count: int) -> list[Graph]:
        return self.sets.get(count, [])

    def counts(self) -> list[int]:
        """Agent counts in pool order: ``N``, ``N-P``, ``N+M``, then any others ascending."""
        named = [c for c in (self.nominal, self.reduced, self.enlarged) if c in self.sets]
        named = list(dict.fromkeys(named))
        return named + sorted(c for c in self.sets if c not in named)

    def all_graphs(self):
        for count in self.counts():
            yield from self.sets[count]


@dataclass(frozen=True)
class EigenvaluePool:
    lambdas: tuple
    sources: tuple = ()

    @property
    def xi(self) -> int:
        return len(self.lambdas)

    def __len__(self):
        return len(self.lambdas)

    def __iter__(self):
        return iter(self.lambdas)


def build_eigenvalue_pool(bank: TopologyBank) -> EigenvaluePool:
    """Concatenate the nonzero Laplacian spectra of every graph in the bank.

    Order follows :meth:`TopologyBank.counts`, then the bank's list order,
    then ascending eigenvalue. ``sources`` records ``(count, graph position)``.
    """
    lambdas, sources = [], []
    expected = 0
    for count in bank.counts():
        for h, G in enumerate(bank.sets[count]):
            ev = nonzero_laplacian_eigenvalues(G)
            lambdas.extend(float(v) for v in ev)
            sources.extend((count, h) for _ in ev)
            expected += count - 1
    pool = EigenvaluePool(tuple(lambdas), tuple(sources))
    assert pool.xi == expected
    return pool


def enumerate_connected_graphs(n: int) -> list[Graph]:
    """Every labeled connected simple graph on ``n <= 5`` nodes, by brute force."""
    if n > 5:
        raise TooLarge(f"enumeration over 2^{n * (n - 1) // 2} edge subsets is not supported")
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    out = []
    for mask in range(1 << len(pairs)):
        edges = frozenset(e for b, e in enumerate(pairs) if mask >> b & 1)
        G = Graph(n, edges)
        if is_connected(G):
            out.append(G)
    return out
