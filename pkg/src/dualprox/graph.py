"""Undirected graphs with 1-based node labels."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Fixed undirected graph on nodes ``1..n``.

    Edges are stored as sorted pairs ``(i, j)`` with ``i < j``.
    """

    n: int
    edges: frozenset
    adjacency: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise GraphError(f"need at least one node, got n={self.n}")
        norm = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise GraphError(f"edge ({i}, {j}) outside 1..{self.n}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))
        nbrs = [[] for _ in range(self.n + 1)]
        for i, j in norm:
            nbrs[i].append(j)
            nbrs[j].append(i)
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(a)) for a in nbrs))

    @classmethod
    def from_edges(cls, n, edges):
        return cls(n, frozenset(edges))

    @property
    def num_edges(self):
        return len(self.edges)

    def degree(self, i):
        return len(neighbors(self, i))

    def sorted_edges(self):
        return sorted(self.edges)

    def nodes(self):
        return range(1, self.n + 1)


def neighbors(g: Graph, i: int) -> tuple:
    """Neighbors of node ``i`` in ascending order."""
    if not 1 <= i <= g.n:
        raise GraphError(f"node id {i} outside 1..{g.n}")
    return g.adjacency[i]


def is_connected(g: Graph) -> bool:
    seen = {1}
    queue = deque([1])
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == g.n


def erdos_renyi_connected(n: int, p: float, rng_seed: int, max_resamples: int = 10000) -> Graph:
    """Sample G(n, p) conditioned on connectivity by whole-graph rejection.

    Every unordered pair is kept independently with probability ``p``; the
    draw is repeated until the sample is connected.
    """
    if n < 2:
        raise GraphError(f"need n >= 2, got {n}")
    if not 0 < p <= 1:
        raise GraphError(f"edge probability must lie in (0, 1], got {p}")
    rng = np.random.default_rng(rng_seed)
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(max_resamples):
        keep = rng.random(iu.size) < p
        g = Graph.from_edges(n, zip((iu[keep] + 1).tolist(), (ju[keep] + 1).tolist()))
        if is_connected(g):
            return g
    raise GraphError(
        f"no connected G({n}, {p}) sample within {max_resamples} draws; raise p or the budget"
    )


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(1, n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)])


def laplacian(g: Graph) -> np.ndarray:
    lap = np.zeros((g.n, g.n))
    for i, j in g.edges:
        lap[i - 1, j - 1] = lap[j - 1, i - 1] = -1.0
        lap[i - 1, i - 1] += 1.0
        lap[j - 1, j - 1] += 1.0
    return lap


def format_edge_list(g: Graph) -> str:
    lines = [str(g.n)] + [f"{i} {j}" for i, j in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 1:
        raise GraphError("edge list must start with a line holding the node count")
    try:
        n = int(rows[0][0])
        edges = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise GraphError(f"malformed edge list: {exc}") from None
    return Graph.from_edges(n, edges)


def save_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g))


def load_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text())
