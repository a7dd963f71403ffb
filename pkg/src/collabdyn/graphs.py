"""A small undirected graph over dense integer nodes with counted edge weights."""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np


class UndirectedGraph:
    """Undirected graph on nodes 0..n-1; no self-loops; integer edge weights.

    The node count is fixed at construction.  Adding an existing edge
    accumulates its weight (co-occurrence counting).  Instances are built once
    and treated as immutable afterwards, so they are safe to share.
    """

    __slots__ = ("_n", "_adj", "_n_edges")

    def __init__(self, n_nodes: int):
        if n_nodes < 0:
            raise ValueError("node count must be >= 0")
        self._n = int(n_nodes)
        self._adj: list[dict[int, int]] = [{} for _ in range(self._n)]
        self._n_edges = 0

    @classmethod
    def from_edges(
        cls, n_nodes: int, edges: Iterable[tuple[int, int] | tuple[int, int, int]]
    ) -> "UndirectedGraph":
        g = cls(n_nodes)
        for edge in edges:
            g.add_edge(*edge)
        return g

    def add_edge(self, u: int, v: int, weight: int = 1) -> None:
        if u == v:
            raise ValueError(f"self-loop on node {u}")
        if not (0 <= u < self._n and 0 <= v < self._n):
            raise ValueError(f"edge ({u}, {v}) outside node range 0..{self._n - 1}")
        if weight <= 0:
            raise ValueError("edge weight must be positive")
        if v not in self._adj[u]:
            self._n_edges += 1
        self._adj[u][v] = self._adj[u].get(v, 0) + weight
        self._adj[v][u] = self._adj[v].get(u, 0) + weight

    @property
    def n_nodes(self) -> int:
        return self._n

    @property
    def n_edges(self) -> int:
        return self._n_edges

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def weight(self, u: int, v: int) -> int:
        return self._adj[u].get(v, 0)

    def degree(self, u: int) -> int:
        return len(self._adj[u])

    def neighbors(self, u: int) -> Iterator[int]:
        return iter(self._adj[u])

    def neighbor_weights(self, u: int) -> Iterator[tuple[int, int]]:
        return iter(self._adj[u].items())

    def edges(self) -> list[tuple[int, int, int]]:
        """Sorted (u, v, weight) triples with u < v."""
        return sorted(
            (u, v, w) for u in range(self._n) for v, w in self._adj[u].items() if u < v
        )

    def adjacency_matrix(self, *, weighted: bool = False, dtype=None) -> np.ndarray:
        """Dense symmetric adjacency; 0/1 by default, counts if weighted."""
        if dtype is None:
            dtype = np.float64 if weighted else np.int8
        mat = np.zeros((self._n, self._n), dtype=dtype)
        for u in range(self._n):
            for v, w in self._adj[u].items():
                mat[u, v] = w if weighted else 1
        return mat

    def copy(self) -> "UndirectedGraph":
        g = UndirectedGraph(self._n)
        g._adj = [dict(d) for d in self._adj]
        g._n_edges = self._n_edges
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, UndirectedGraph):
            return NotImplemented
        return self._n == other._n and self._adj == other._adj

    def __repr__(self) -> str:
        return f"UndirectedGraph(n_nodes={self._n}, n_edges={self._n_edges})"


def from_adjacency(matrix: np.ndarray, *, weighted: bool = False) -> UndirectedGraph:
    """Build a graph from a symmetric adjacency (or weight) matrix."""
    mat = np.asarray(matrix)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("adjacency matrix must be square")
    if not np.array_equal(mat, mat.T):
        raise ValueError("adjacency matrix must be symmetric")
    if np.any(np.diagonal(mat) != 0):
        raise ValueError("adjacency matrix must have a zero diagonal")
    g = UndirectedGraph(mat.shape[0])
    rows, cols = np.nonzero(mat)
    for u, v in zip(rows.tolist(), cols.tolist()):
        if u < v:
            g.add_edge(u, v, int(mat[u, v]) if weighted else 1)
    return g
