"""Louvain community detection with a fixed seed, plus Newman modularity.

The randomness is confined to the node visit order (shuffled once per sweep
from the given seed), so results are reproducible.  Community detection runs
on the unweighted graph regardless of stored co-occurrence weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ModelError
from .graphs import UndirectedGraph

DEFAULT_SEED = 8

# Strictly-better margin for moving a node; guards against float-noise cycling.
_GAIN_EPS = 1e-12


def modularity(
    graph: UndirectedGraph, communities: Sequence[Sequence[int]], resolution: float = 1.0
) -> float:
    """Newman modularity Q of a partition on the unweighted graph.

    Q = sum_c [e_c / m - resolution * (d_c / 2m)^2] with e_c the number of
    intra-community edges, d_c the total degree of community c, and m the
    number of edges.  An edgeless graph scores 0 by convention.
    """
    m = graph.n_edges
    if m == 0:
        return 0.0
    com_of: dict[int, int] = {}
    for ci, members in enumerate(communities):
        for v in members:
            if v in com_of:
                raise ModelError(f"node {v} appears in two communities")
            com_of[v] = ci
    if len(com_of) != graph.n_nodes:
        raise ModelError("communities must partition all nodes")

    q = 0.0
    for members in communities:
        internal = 0
        degree_sum = 0
        member_set = set(members)
        for v in members:
            degree_sum += graph.degree(v)
            internal += sum(1 for u in graph.neighbors(v) if u in member_set)
        internal //= 2  # each intra edge seen from both endpoints
        q += internal / m - resolution * (degree_sum / (2 * m)) ** 2
    return q


@dataclass(frozen=True)
class CommunityResult:
    communities: list[list[int]]
    modularity: float
    # Q on the original graph after each aggregation level; non-decreasing.
    level_modularities: list[float]


def _one_level(
    adj: list[dict[int, float]],
    loops: list[float],
    m: float,
    rng: np.random.Generator,
    resolution: float,
) -> tuple[list[int], bool]:
    n = len(adj)
    node2com = list(range(n))
    k = [sum(adj[i].values()) + 2.0 * loops[i] for i in range(n)]
    com_tot = k.copy()
    moved_any = False
    while True:
        moved = False
        for i in rng.permutation(n).tolist():
            ci = node2com[i]
            weight_to: dict[int, float] = {}
            for j, w in adj[i].items():
                cj = node2com[j]
                weight_to[cj] = weight_to.get(cj, 0.0) + w
            com_tot[ci] -= k[i]
            best_com = ci
            best_gain = weight_to.get(ci, 0.0) - resolution * com_tot[ci] * k[i] / (
                2.0 * m
            )
            for c in sorted(weight_to):
                if c == ci:
                    continue
                gain = weight_to[c] - resolution * com_tot[c] * k[i] / (2.0 * m)
                if gain > best_gain + _GAIN_EPS:
                    best_com, best_gain = c, gain
            com_tot[best_com] += k[i]
            node2com[i] = best_com
            if best_com != ci:
                moved = True
                moved_any = True
        if not moved:
            return node2com, moved_any


def _aggregate(
    adj: list[dict[int, float]], loops: list[float], node2com: list[int]
) -> tuple[list[dict[int, float]], list[float], list[list[int]]]:
    labels = sorted(set(node2com))
    relabel = {c: i for i, c in enumerate(labels)}
    groups: list[list[int]] = [[] for _ in labels]
    for v, c in enumerate(node2com):
        groups[relabel[c]].append(v)
    new_adj: list[dict[int, float]] = [{} for _ in labels]
    new_loops = [0.0 for _ in labels]
    for i, row in enumerate(adj):
        ci = relabel[node2com[i]]
        new_loops[ci] += loops[i]
        for j, w in row.items():
            cj = relabel[node2com[j]]
            if ci == cj:
                if i < j:
                    new_loops[ci] += w
            else:
                new_adj[ci][cj] = new_adj[ci].get(cj, 0.0) + w
    return new_adj, new_loops, groups


def find_communities(
    graph: UndirectedGraph, seed: int = DEFAULT_SEED, resolution: float = 1.0
) -> CommunityResult:
    """Run Louvain on the unweighted graph; deterministic for a given seed."""
    n = graph.n_nodes
    if graph.n_edges == 0:
        return CommunityResult([[v] for v in range(n)], 0.0, [])

    rng = np.random.default_rng(seed)
    adj: list[dict[int, float]] = [
        {j: 1.0 for j in graph.neighbors(i)} for i in range(n)
    ]
    loops = [0.0] * n
    m = float(graph.n_edges)
    members: list[list[int]] = [[v] for v in range(n)]
    history: list[float] = []

    while True:
        node2com, improved = _one_level(adj, loops, m, rng, resolution)
        if not improved:
            break
        adj, loops, groups = _aggregate(adj, loops, node2com)
        members = [
            sorted(v for g_idx in group for v in members[g_idx]) for group in groups
        ]
        history.append(modularity(graph, members, resolution))

    communities = sorted(members, key=lambda ms: ms[0])
    return CommunityResult(communities, modularity(graph, communities, resolution), history)


def louvain_modularity(
    graph: UndirectedGraph, seed: int = DEFAULT_SEED, resolution: float = 1.0
) -> float:
    """Modularity of the Louvain partition; 0 for graphs without edges."""
    return find_communities(graph, seed=seed, resolution=resolution).modularity
