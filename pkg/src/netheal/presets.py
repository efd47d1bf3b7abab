"""Named topologies and the experiment parameters tied to them.

The AS router-level snapshot is not bundled. ``as_surrogate`` is a
deterministic stand-in with the same node and edge counts: preferential
attachment with triad closure, a mix of single- and multi-homed joiners,
then triad-closing edges until the edge budget is met. Point
``NETHEAL_AS_PATH`` at a SNAP-style edge list to use the real graph instead.
"""

from __future__ import annotations

import os
import random
from importlib import resources
from pathlib import Path
from typing import Optional

from .topology import Graph, GeneratorKind, GeneratorParams, load_edge_list

__all__ = [
    "TOPOLOGIES",
    "MAX_PF",
    "REFERENCE_POINTS",
    "generator_for",
    "as_path",
    "generate_as_surrogate",
    "scenario_window",
    "AS_ENV_VAR",
]

AS_ENV_VAR = "NETHEAL_AS_PATH"
AS_SURROGATE_SEED = 9
AS_SURROGATE_FILE = "as_surrogate_512.txt"

TOPOLOGIES = ("as", "small_world", "community", "scale_free", "hub_spoke", "forest_hub_spoke")

# largest p_f at which an all-info run still recovers every time
MAX_PF = {
    "as": 0.5,
    "small_world": 0.5,
    "community": 0.5,
    "scale_free": 0.25,
    "hub_spoke": 0.25,
    "forest_hub_spoke": 0.25,
}

# (trickle, mobile agents) rounds until collected knowledge stops growing
REFERENCE_POINTS = {
    "as": (13, 38),
    "small_world": (12, 25),
    "community": (20, 41),
    "forest_hub_spoke": (17, 35),
    "hub_spoke": (5, 14),
    "scale_free": (17, 33),
}

_PARAMS = {
    "small_world": GeneratorParams(GeneratorKind.SMALL_WORLD, n=100, k=4, beta=0.45),
    "community": GeneratorParams(GeneratorKind.COMMUNITY, n=100, n_clusters=4, k=4, beta=0.6),
    "scale_free": GeneratorParams(GeneratorKind.SCALE_FREE, n=100, sn=9, eta=1),
    "hub_spoke": GeneratorParams(GeneratorKind.HUB_SPOKE, n=100),
    "forest_hub_spoke": GeneratorParams(GeneratorKind.FOREST_HUB_SPOKE, n=100, n_clusters=4),
}


def scenario_window(start: int, length: int = 25) -> tuple[int, int, int]:
    """Fail for ``length`` rounds from ``start``, then recover for as long."""
    return (start, start + length, start + 2 * length)


def as_path() -> Path:
    override = os.environ.get(AS_ENV_VAR)
    if override:
        return Path(override)
    return Path(str(resources.files("netheal") / "data" / AS_SURROGATE_FILE))


def generator_for(name: str, path: Optional[str] = None) -> GeneratorParams:
    """Generator parameters for a named topology, or for an edge-list file."""
    if name == "as":
        return GeneratorParams(GeneratorKind.EDGE_LIST, n=512, path=str(path or as_path()))
    if name in _PARAMS:
        return _PARAMS[name]
    raise KeyError(f"unknown topology {name!r}; choose one of {', '.join(TOPOLOGIES)}")


_JOIN_DEGREES = [1] * 40 + [2] * 25 + [3] * 15 + [4] * 10 + [5] * 5 + [7] * 5


def generate_as_surrogate(seed: int = AS_SURROGATE_SEED, n: int = 512, m: int = 1273,
                          p_triad: float = 0.5) -> Graph:
    rng = random.Random(seed)
    g = Graph(n)
    core = range(4)
    pool: list[int] = []
    for u in core:
        for v in core:
            if u < v:
                g.add_edge(u, v)
                pool += [u, v]
    for new in range(4, n):
        want = min(rng.choice(_JOIN_DEGREES), new)
        first = rng.choice(pool)
        chosen = [first]
        while len(chosen) < want:
            if rng.random() < p_triad:
                nbrs = sorted(x for x in g.adj[first] if x not in chosen)
                if nbrs:
                    chosen.append(rng.choice(nbrs))
                    continue
            c = rng.choice(pool)
            if c not in chosen:
                chosen.append(c)
        for t in chosen:
            g.add_edge(new, t)
            pool += [new, t]
    while g.number_of_edges() < m:
        u = rng.choice(pool)
        v = rng.choice(sorted(g.adj[u]))
        w = rng.choice(sorted(g.adj[v]))
        if w != u and not g.has_edge(u, w):
            g.add_edge(u, w)
            pool += [u, w]
    return g


def load_as() -> Graph:
    return load_edge_list(as_path())
