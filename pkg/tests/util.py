"""Shared fixture builders for the test suite."""

from __future__ import annotations

import numpy as np

from walksynth import Graph, Partition, is_connected


def gnp_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    a, b = np.triu_indices(n, k=1)
    keep = rng.random(len(a)) < p
    return Graph(n=n, u=a[keep], v=b[keep], w=np.ones(int(keep.sum())))


def random_connected_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    """Rejection-sample G(n, p) until connected (implies positive degrees)."""
    while True:
        g = gnp_graph(rng, n, p)
        if g.num_edges and is_connected(g):
            return g


def random_partition(rng: np.random.Generator, n: int, k_max: int | None = None) -> Partition:
    k = int(rng.integers(1, (k_max or n) + 1))
    assignment = rng.integers(0, k, size=n)
    return Partition(assignment)


def triangle() -> Graph:
    return Graph(n=3, u=np.array([0, 0, 1]), v=np.array([1, 2, 2]), w=np.ones(3))


def path3() -> Graph:
    return Graph(n=3, u=np.array([0, 1]), v=np.array([1, 2]), w=np.ones(2))
