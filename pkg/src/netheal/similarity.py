"""Neighbour-matching graph similarity.

Node-pair similarity starts at 1 and is refined by sweeps: the new score of
``(i, j)`` is the value of a maximum-weight matching between the neighbours
of ``i`` and of ``j`` under the previous scores, divided by the larger of
the two degrees. Sweeps stop when no score moves by more than ``eps`` (or
after ``max_sweeps``). The graph score is a maximum-weight assignment of
nodes divided by the larger node count, so identical graphs score 1.0.

Scores only depend on the pair of colour classes produced by colour
refinement, so sweeps run over class pairs instead of node pairs.
"""

from __future__ import annotations

import numba as nb
import numpy as np
from scipy.optimize import linear_sum_assignment

from .topology import Graph

__all__ = ["graph_similarity", "node_similarity_matrix", "EPSILON", "MAX_SWEEPS"]

EPSILON = 1e-4
MAX_SWEEPS = 100


@nb.njit(cache=True)
def _max_matching(w, nr, nc):
    """Maximum-weight matching value of the top-left ``nr x nc`` block, nr <= nc."""
    if nr == 1:
        best = w[0, 0]
        for j in range(1, nc):
            if w[0, j] > best:
                best = w[0, j]
        return best
    inf = 1e18
    u = np.zeros(nr + 1)
    v = np.zeros(nc + 1)
    p = np.zeros(nc + 1, np.int64)
    way = np.zeros(nc + 1, np.int64)
    minv = np.empty(nc + 1)
    used = np.empty(nc + 1, np.bool_)
    for i in range(1, nr + 1):
        p[0] = i
        j0 = 0
        for j in range(nc + 1):
            minv[j] = inf
            used[j] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = 0
            for j in range(1, nc + 1):
                if not used[j]:
                    cur = -w[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(nc + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    total = 0.0
    for j in range(1, nc + 1):
        if p[j] != 0:
            total += w[p[j] - 1, j - 1]
    return total


@nb.njit(cache=True)
def _sweep(x, aptr, aidx, bptr, bidx, out, buf):
    na = aptr.size - 1
    nb_ = bptr.size - 1
    diff = 0.0
    for i in range(na):
        da = aptr[i + 1] - aptr[i]
        for j in range(nb_):
            db = bptr[j + 1] - bptr[j]
            if da == 0 and db == 0:
                val = 1.0
            elif da == 0 or db == 0:
                val = 0.0
            elif da <= db:
                for r in range(da):
                    p = aidx[aptr[i] + r]
                    for c in range(db):
                        buf[r, c] = x[p, bidx[bptr[j] + c]]
                val = _max_matching(buf, da, db) / db
            else:
                for r in range(db):
                    q = bidx[bptr[j] + r]
                    for c in range(da):
                        buf[r, c] = x[aidx[aptr[i] + c], q]
                val = _max_matching(buf, db, da) / da
            d = abs(val - x[i, j])
            if d > diff:
                diff = d
            out[i, j] = val
    return diff


def _refine(graphs: list[Graph]) -> list[dict[int, int]]:
    """Joint colour refinement over the disjoint union of ``graphs``."""
    colour = [{u: len(g.adj[u]) for u in g.adj} for g in graphs]
    n_classes = len({c for col in colour for c in col.values()})
    while True:
        table: dict = {}
        new = []
        for g, col in zip(graphs, colour):
            nxt = {}
            for u in g.adj:
                sig = (col[u], tuple(sorted(col[v] for v in g.adj[u])))
                nxt[u] = table.setdefault(sig, len(table))
            new.append(nxt)
        colour = new
        if len(table) == n_classes:
            return colour
        n_classes = len(table)


def _class_csr(g: Graph, colour: dict[int, int]):
    classes = sorted(set(colour.values()))
    index = {c: i for i, c in enumerate(classes)}
    rep = {}
    for u in sorted(g.adj):
        rep.setdefault(colour[u], u)
    ptr = [0]
    idx: list[int] = []
    for c in classes:
        idx.extend(sorted(index[colour[v]] for v in g.adj[rep[c]]))
        ptr.append(len(idx))
    node_class = np.array([index[colour[u]] for u in sorted(g.adj)], dtype=np.int64)
    return np.array(ptr, np.int64), np.array(idx, np.int64), node_class


def node_similarity_matrix(a: Graph, b: Graph, eps: float = EPSILON, max_sweeps: int = MAX_SWEEPS):
    """Converged node-pair scores, rows ordered like ``sorted(a.adj)``, columns like ``sorted(b.adj)``."""
    col_a, col_b = _refine([a, b])
    aptr, aidx, acls = _class_csr(a, col_a)
    bptr, bidx, bcls = _class_csr(b, col_b)
    x = np.ones((aptr.size - 1, bptr.size - 1))
    out = np.empty_like(x)
    dmax = max([len(v) for v in a.adj.values()] + [len(v) for v in b.adj.values()] + [1])
    buf = np.empty((dmax, dmax))
    for _ in range(max_sweeps):
        diff = _sweep(x, aptr, aidx, bptr, bidx, out, buf)
        x, out = out, x
        if diff < eps:
            break
    return x[np.ix_(acls, bcls)]


def graph_similarity(original: Graph, current: Graph, eps: float = EPSILON, max_sweeps: int = MAX_SWEEPS) -> float:
    """Similarity score in [0, 1]; 1.0 for identical (and isomorphic) graphs."""
    if not original.adj or not current.adj:
        raise ValueError("graph similarity is undefined for an empty graph")
    if set(original.adj) == set(current.adj) and original.edge_set() == current.edge_set():
        return 1.0
    scores = node_similarity_matrix(original, current, eps, max_sweeps)
    rows, cols = linear_sum_assignment(scores, maximize=True)
    total = float(scores[rows, cols].sum())
    return min(1.0, total / max(scores.shape))
