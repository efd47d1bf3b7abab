"""Ground-truth network graph, synthetic generators and edge-list ingestion.

Node ids are dense integers ``0..n-1``. A failed node keeps its id (so a
replica can reuse it) but loses every incident edge.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional, TextIO, Union

__all__ = [
    "Graph",
    "GeneratorKind",
    "GeneratorParams",
    "TopologyError",
    "UnknownNodeError",
    "EdgeListParseError",
    "generate_small_world",
    "generate_community",
    "generate_scale_free",
    "generate_hub_spoke",
    "generate_forest_hub_spoke",
    "load_edge_list",
    "write_edge_list",
    "build_graph",
]

EDGELIST_FORMAT = "netheal-edgelist/1"
MAX_REWIRE_ATTEMPTS = 100


class TopologyError(ValueError):
    """Invalid generator parameters or an impossible graph request."""


class UnknownNodeError(KeyError):
    pass


class EdgeListParseError(ValueError):
    def __init__(self, path: str, lineno: int, line: str):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: expected '<u> <v>', got {line.strip()!r}")


class Graph:
    """Undirected simple graph over a fixed id universe ``range(n)``.

    ``adj`` only holds alive nodes. Killing a node drops it from ``adj``
    together with all incident edges; recreating it inserts it back with an
    empty neighbourhood.
    """

    def __init__(self, n: int, labels: Optional[list] = None):
        if n < 0:
            raise TopologyError("node count must be non-negative")
        self.n = n
        self.adj: dict[int, set[int]] = {i: set() for i in range(n)}
        # external ids (edge-list ingestion); defaults to the dense id itself
        self.labels: list = list(labels) if labels is not None else list(range(n))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels=None) -> "Graph":
        g = cls(n, labels)
        for u, v in edges:
            g.add_edge(u, v)
        return g

    def copy(self) -> "Graph":
        g = Graph.__new__(Graph)
        g.n = self.n
        g.adj = {u: set(vs) for u, vs in self.adj.items()}
        g.labels = list(self.labels)
        return g

    # -- queries -------------------------------------------------------
    def alive(self, u: int) -> bool:
        return u in self.adj

    def nodes(self) -> list[int]:
        return sorted(self.adj)

    def neighbors(self, u: int) -> set[int]:
        try:
            return self.adj[u]
        except KeyError:
            raise UnknownNodeError(u) from None

    def degree(self, u: int) -> int:
        return len(self.neighbors(u))

    def has_edge(self, u: int, v: int) -> bool:
        return u in self.adj and v in self.adj[u]

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in sorted(self.adj):
            for v in sorted(self.adj[u]):
                if u < v:
                    yield (u, v)

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges())

    def number_of_nodes(self) -> int:
        return len(self.adj)

    def number_of_edges(self) -> int:
        return sum(len(vs) for vs in self.adj.values()) // 2

    def is_symmetric(self) -> bool:
        return all(u in self.adj.get(v, ()) and u != v for u, vs in self.adj.items() for v in vs)

    def bfs_distances(self, source: int) -> dict[int, int]:
        dist = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in self.adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def is_connected(self) -> bool:
        if not self.adj:
            return True
        return len(self.bfs_distances(next(iter(self.adj)))) == len(self.adj)

    def diameter(self) -> int:
        if not self.is_connected():
            raise TopologyError("diameter of a disconnected graph is undefined")
        return max((max(self.bfs_distances(u).values()) for u in self.adj), default=0)

    def same_as(self, other: "Graph") -> bool:
        return set(self.adj) == set(other.adj) and self.edge_set() == other.edge_set()

    # -- mutation ------------------------------------------------------
    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            return
        if u not in self.adj:
            raise UnknownNodeError(u)
        if v not in self.adj:
            raise UnknownNodeError(v)
        self.adj[u].add(v)
        self.adj[v].add(u)

    def remove_edge(self, u: int, v: int) -> None:
        self.adj[u].discard(v)
        self.adj[v].discard(u)

    def kill(self, u: int) -> None:
        nbrs = self.adj.pop(u, None)
        if nbrs is None:
            raise UnknownNodeError(u)
        for v in nbrs:
            self.adj[v].discard(u)

    def recreate(self, u: int) -> None:
        if not 0 <= u < self.n:
            raise UnknownNodeError(u)
        if u in self.adj:
            raise TopologyError(f"node {u} is already alive")
        self.adj[u] = set()

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, alive={len(self.adj)}, edges={self.number_of_edges()})"


# ---------------------------------------------------------------------------
# generators

class GeneratorKind(str, Enum):
    SMALL_WORLD = "small_world"
    COMMUNITY = "community"
    SCALE_FREE = "scale_free"
    HUB_SPOKE = "hub_spoke"
    FOREST_HUB_SPOKE = "forest_hub_spoke"
    EDGE_LIST = "edge_list"


@dataclass(frozen=True)
class GeneratorParams:
    kind: GeneratorKind
    n: int = 100
    k: int = 4
    beta: float = 0.1
    n_clusters: int = 4
    sn: int = 9
    eta: int = 1
    path: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GeneratorKind(self.kind))
        if not 0.0 <= self.beta <= 1.0:
            raise TopologyError(f"beta must lie in [0, 1], got {self.beta}")
        if self.eta < 1:
            raise TopologyError("eta must be >= 1")
        if self.n_clusters < 1:
            raise TopologyError("n_clusters must be >= 1")
        if self.kind is GeneratorKind.EDGE_LIST and not self.path:
            raise TopologyError("edge_list generator needs a path")


def _ring_lattice(ids: list[int], k: int, g: Graph) -> list[tuple[int, int]]:
    n = len(ids)
    lattice = []
    for j in range(1, k // 2 + 1):
        for i in range(n):
            u, v = ids[i], ids[(i + j) % n]
            g.add_edge(u, v)
            lattice.append((u, v))
    return lattice


def _small_world_into(g: Graph, ids: list[int], k: int, beta: float, rng: random.Random) -> None:
    n = len(ids)
    if k % 2 or not 2 <= k < n:
        raise TopologyError(f"small-world needs an even lattice degree 2 <= k < n (k={k}, n={n})")
    for _ in range(MAX_REWIRE_ATTEMPTS):
        for u in ids:
            g.adj[u].clear()
        lattice = _ring_lattice(ids, k, g)
        for u, v in lattice:
            if rng.random() >= beta:
                continue
            if len(g.adj[u]) >= n - 1:
                continue
            w = rng.choice(ids)
            while w == u or w in g.adj[u]:
                w = rng.choice(ids)
            g.remove_edge(u, v)
            g.add_edge(u, w)
        if _component_connected(g, ids):
            return
    raise TopologyError(f"no connected small-world after {MAX_REWIRE_ATTEMPTS} attempts")


def _component_connected(g: Graph, ids: list[int]) -> bool:
    members = set(ids)
    seen = {ids[0]}
    queue = deque([ids[0]])
    while queue:
        u = queue.popleft()
        for v in g.adj[u]:
            if v in members and v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(members)


def generate_small_world(n: int, k: int, beta: float, rng: random.Random) -> Graph:
    """Watts-Strogatz ring lattice with per-edge rewiring, resampled until connected."""
    if not 0.0 <= beta <= 1.0:
        raise TopologyError(f"beta must lie in [0, 1], got {beta}")
    g = Graph(n)
    _small_world_into(g, list(range(n)), k, beta, rng)
    return g


def _partition(n: int, parts: int) -> list[list[int]]:
    size = n // parts
    blocks = [list(range(i * size, (i + 1) * size)) for i in range(parts)]
    blocks[-1].extend(range(parts * size, n))
    return blocks


def generate_community(n: int, n_clusters: int, k: int, beta: float, rng: random.Random) -> Graph:
    """Small-world clusters joined in a ring by one random node pair per consecutive cluster pair."""
    if n_clusters < 1 or n // max(n_clusters, 1) < 3:
        raise TopologyError(f"cannot split {n} nodes into {n_clusters} clusters")
    g = Graph(n)
    clusters = _partition(n, n_clusters)
    for ids in clusters:
        _small_world_into(g, ids, min(k, len(ids) - 1 - (len(ids) - 1) % 2), beta, rng)
    if n_clusters == 1:
        return g
    for i in range(n_clusters):
        a, b = clusters[i], clusters[(i + 1) % n_clusters]
        u, v = rng.choice(a), rng.choice(b)
        while g.has_edge(u, v):
            u, v = rng.choice(a), rng.choice(b)
        g.add_edge(u, v)
    return g


def preferential_targets(candidates: list[int], degrees: list[int], eta: int, rng: random.Random) -> list[int]:
    """Draw ``eta`` distinct targets, each with probability k_i / sum_j k_j over the remaining pool."""
    pool = list(candidates)
    weights = list(degrees)
    chosen = []
    for _ in range(eta):
        idx = rng.choices(range(len(pool)), weights=weights)[0]
        chosen.append(pool.pop(idx))
        weights.pop(idx)
    return chosen


def generate_scale_free(n: int, sn: int, eta: int, rng: random.Random) -> Graph:
    """Preferential attachment grown from a complete seed graph on ``sn`` nodes."""
    if not (sn >= eta >= 1 and n > sn and sn >= 2):
        raise TopologyError(f"scale-free needs sn >= eta >= 1, sn >= 2 and n > sn (n={n}, sn={sn}, eta={eta})")
    g = Graph(n)
    for u in range(sn):
        for v in range(u + 1, sn):
            g.add_edge(u, v)
    for v in range(sn, n):
        existing = list(range(v))
        targets = preferential_targets(existing, [len(g.adj[u]) for u in existing], eta, rng)
        for u in targets:
            g.add_edge(v, u)
    return g


def generate_hub_spoke(n: int) -> Graph:
    if n < 2:
        raise TopologyError("hub & spoke needs at least 2 nodes")
    return Graph.from_edges(n, ((0, v) for v in range(1, n)))


def generate_forest_hub_spoke(n: int, n_clusters: int) -> Graph:
    """Stars of ``n // n_clusters`` nodes whose leaves are chained in a ring.

    Star ``i``'s last leaf links to star ``i+1``'s first leaf. With n=100 and
    4 stars this gives 100 edges and diameter 8.
    """
    if n_clusters < 1 or n < 2 * n_clusters:
        raise TopologyError(f"cannot build {n_clusters} stars from {n} nodes")
    blocks = _partition(n, n_clusters)
    if n_clusters >= 3 and min(len(b) for b in blocks) < 3:
        raise TopologyError("ring of stars needs at least two leaves per star")
    g = Graph(n)
    for block in blocks:
        for leaf in block[1:]:
            g.add_edge(block[0], leaf)
    links = n_clusters if n_clusters >= 3 else n_clusters - 1
    for i in range(links):
        g.add_edge(blocks[i][-1], blocks[(i + 1) % n_clusters][1])
    return g


# ---------------------------------------------------------------------------
# edge lists

def _sort_key(token: str):
    try:
        return (0, int(token), token)
    except ValueError:
        return (1, 0, token)


def load_edge_list(path: Union[str, Path]) -> Graph:
    """Read a SNAP-style edge list (``#`` comments, ``u v`` per line).

    Self-loops and duplicate/reversed pairs are dropped. External ids are
    mapped to dense ids in ascending numeric order; the originals are kept
    in ``graph.labels``.
    """
    path = str(path)
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#") or stripped.startswith("%"):
                continue
            parts = stripped.split()
            if len(parts) < 2:
                raise EdgeListParseError(path, lineno, line)
            pairs.append((parts[0], parts[1]))
    tokens = sorted({t for pair in pairs for t in pair}, key=_sort_key)
    index = {t: i for i, t in enumerate(tokens)}
    labels = [int(t) if _sort_key(t)[0] == 0 else t for t in tokens]
    return Graph.from_edges(len(tokens), ((index[a], index[b]) for a, b in pairs), labels=labels)


def write_edge_list(graph: Graph, out: Union[str, Path, TextIO], comments: Iterable[str] = ()) -> None:
    lines = [f"# {EDGELIST_FORMAT}",
             f"# nodes: {graph.number_of_nodes()} edges: {graph.number_of_edges()}"]
    lines += [f"# {c}" for c in comments]
    lines += [f"{graph.labels[u]} {graph.labels[v]}" for u, v in graph.edges()]
    text = "\n".join(lines) + "\n"
    if hasattr(out, "write"):
        out.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def build_graph(params: GeneratorParams, rng: random.Random) -> Graph:
    kind = params.kind
    if kind is GeneratorKind.SMALL_WORLD:
        return generate_small_world(params.n, params.k, params.beta, rng)
    if kind is GeneratorKind.COMMUNITY:
        return generate_community(params.n, params.n_clusters, params.k, params.beta, rng)
    if kind is GeneratorKind.SCALE_FREE:
        return generate_scale_free(params.n, params.sn, params.eta, rng)
    if kind is GeneratorKind.HUB_SPOKE:
        return generate_hub_spoke(params.n)
    if kind is GeneratorKind.FOREST_HUB_SPOKE:
        return generate_forest_hub_spoke(params.n, params.n_clusters)
    return load_edge_list(params.path)
