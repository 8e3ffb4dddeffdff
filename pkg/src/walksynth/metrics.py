"""Partition comparison and per-node / per-cluster structure statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .graph import Graph
from .partitions import Partition


def contingency(a: Partition, b: Partition) -> np.ndarray:
    """Cluster overlap counts; rows index a's clusters, columns b's.

    Raises:
        ValueError: partitions cover different node counts.
    """
    if a.n != b.n:
        raise ValueError(f"partitions cover {a.n} and {b.n} nodes")
    table = np.zeros((a.num_clusters, b.num_clusters), dtype=np.int64)
    np.add.at(table, (a.assignment, b.assignment), 1)
    return table


def _entropy(counts: np.ndarray, n: int) -> float:
    c = counts[counts > 0]
    # mirror the term shape of the mutual-information sum (exact integer
    # ratios inside the log) so a perfect match cancels bit-exactly to 1.0
    return float(np.sum((c / n) * np.log(n / c)))


def _expected_mi(a_counts: np.ndarray, b_counts: np.ndarray, n: int) -> float:
    """Exact expectation of the mutual information (nats) over random
    contingency tables with these fixed marginals."""
    log_fact = [math.lgamma(x + 1) for x in range(n + 1)]
    total = 0.0
    for ai in a_counts:
        ai = int(ai)
        for bj in b_counts:
            bj = int(bj)
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            for nij in range(lo, hi + 1):
                log_prob = (
                    log_fact[ai]
                    + log_fact[bj]
                    + log_fact[n - ai]
                    + log_fact[n - bj]
                    - log_fact[n]
                    - log_fact[nij]
                    - log_fact[ai - nij]
                    - log_fact[bj - nij]
                    - log_fact[n - ai - bj + nij]
                )
                term = (nij / n) * math.log(n * nij / (ai * bj))
                total += term * math.exp(log_prob)
    return total


def ami(a: Partition, b: Partition) -> float:
    """Adjusted mutual information: mutual information centered by its exact
    expectation under random labelings with the same cluster sizes, scaled by
    the larger entropy. 1.0 for identical partitions, about 0 for independent
    ones, slightly negative below chance.

    Two identical single-cluster partitions score 1.0 by convention.
    """
    table = contingency(a, b)
    n = a.n
    a_counts = table.sum(axis=1)
    b_counts = table.sum(axis=0)
    h_a = _entropy(a_counts, n)
    h_b = _entropy(b_counts, n)
    if a.num_clusters == 1 and b.num_clusters == 1:
        return 1.0
    nz = table[table > 0]
    rows, cols = np.nonzero(table)
    mi = float(
        np.sum((nz / n) * np.log(n * nz / (a_counts[rows] * b_counts[cols])))
    )
    emi = _expected_mi(a_counts, b_counts, n)
    return float((mi - emi) / (max(h_a, h_b) - emi))


def greedy_match(table: np.ndarray) -> dict[int, int]:
    """Greedy one-to-one matching of clusters by descending overlap.

    Repeatedly takes the largest remaining entry whose row and column are
    both unmatched (ties to the smallest row, then column) until
    min(rows, columns) pairs are fixed. Returns row cluster -> column
    cluster.
    """
    table = np.asarray(table)
    rows_left = list(range(table.shape[0]))
    cols_left = list(range(table.shape[1]))
    matches: dict[int, int] = {}
    for _ in range(min(table.shape)):
        sub = table[np.ix_(rows_left, cols_left)]
        flat = int(np.argmax(sub))
        ri, ci = divmod(flat, sub.shape[1])
        matches[rows_left[ri]] = cols_left[ci]
        rows_left.pop(ri)
        cols_left.pop(ci)
    return matches


def classify_nodes(
    y_true: Partition, y_pred: Partition, mapping: dict[int, int] | None = None
) -> np.ndarray:
    """Boolean per-node correctness: a node counts as correctly classified
    when its predicted cluster is the greedy match of its true cluster.
    Nodes of unmatched true clusters are never correct."""
    if mapping is None:
        mapping = greedy_match(contingency(y_true, y_pred))
    expected = np.array([mapping.get(int(c), -1) for c in y_true.assignment])
    return expected == y_pred.assignment


def _require_simple(g: Graph, what: str) -> None:
    if g.directed:
        raise ValueError(f"{what} is defined here for undirected graphs only")
    if not g.is_unweighted:
        raise ValueError(f"{what} is defined here for unweighted graphs only")


def mixing_parameter(g: Graph, part: Partition, node: int) -> float:
    """Fraction of a node's links that leave its cluster.

    Raises:
        ValueError: weighted or directed graph, or zero-degree node.
    """
    _require_simple(g, "the mixing parameter")
    if part.n != g.n:
        raise ValueError("partition does not cover the graph")
    k = g.degrees[node]
    if k <= 0:
        raise ValueError(f"node {node} has zero degree")
    row = g.adjacency.getrow(node)
    external = sum(
        1 for j in row.indices if j != node and part.assignment[j] != part.assignment[node]
    )
    return float(external / k)


def nld(g: Graph, part: Partition, node: int) -> float:
    """Normalized local degree: degree over the number of distinct pairs in
    the node's cluster.

    Raises:
        ValueError: cluster smaller than two nodes.
    """
    if part.n != g.n:
        raise ValueError("partition does not cover the graph")
    size = int(part.sizes()[part.assignment[node]])
    if size < 2:
        raise ValueError(f"node {node} sits in a singleton cluster; nld undefined")
    return float(g.degrees[node]) / (size * (size - 1) / 2)


@dataclass
class ClusterStatsRow:
    cluster: int
    size: int
    density: float
    clustering: float
    conductance: float
    cut_ratio: float
    whole_graph: bool = False


def cluster_stats(g: Graph, part: Partition, min_size: int = 3) -> list[ClusterStatsRow]:
    """Structural statistics for every cluster of at least ``min_size`` nodes.

    Per cluster S with m_s internal and c_s external links: density
    m_s / C(|S|, 2); mean member clustering coefficient (0 for members with
    fewer than two neighbors); conductance c_s / (m_s + c_s) (0 when S has no
    links at all); cut ratio c_s / (|S| (n - |S|)), reported as 0 with the
    ``whole_graph`` flag when S covers the whole graph.

    Raises:
        ValueError: weighted or directed graph.
    """
    _require_simple(g, "cluster statistics")
    if part.n != g.n:
        raise ValueError("partition does not cover the graph")
    assign = part.assignment
    k = part.num_clusters
    sizes = part.sizes()

    internal = np.zeros(k, dtype=np.int64)
    external = np.zeros(k, dtype=np.int64)
    neighbors: list[set[int]] = [set() for _ in range(g.n)]
    for a, b in zip(g.u.tolist(), g.v.tolist()):
        if a == b:
            internal[assign[a]] += 1
            continue
        neighbors[a].add(b)
        neighbors[b].add(a)
        if assign[a] == assign[b]:
            internal[assign[a]] += 1
        else:
            external[assign[a]] += 1
            external[assign[b]] += 1

    coeff = np.zeros(g.n)
    for node in range(g.n):
        around = sorted(neighbors[node])
        deg = len(around)
        if deg < 2:
            continue
        links = sum(
            1
            for i in range(deg)
            for j in range(i + 1, deg)
            if around[j] in neighbors[around[i]]
        )
        coeff[node] = links / (deg * (deg - 1) / 2)

    rows = []
    members = part.members()
    for c in range(k):
        size = int(sizes[c])
        if size < min_size:
            continue
        m_s = int(internal[c])
        c_s = int(external[c])
        rho = m_s / (size * (size - 1) / 2) if size > 1 else 0.0
        cbar = float(coeff[members[c]].mean())
        kappa = c_s / (m_s + c_s) if (m_s + c_s) > 0 else 0.0
        whole = size == g.n
        xi = 0.0 if whole else c_s / (size * (g.n - size))
        rows.append(
            ClusterStatsRow(
                cluster=c,
                size=size,
                density=rho,
                clustering=cbar,
                conductance=kappa,
                cut_ratio=xi,
                whole_graph=whole,
            )
        )
    return rows


def write_cluster_stats_csv(rows: list[ClusterStatsRow], sink: str | Path | IO[str]) -> None:
    lines = ["cluster,size,density,clustering_coefficient,conductance,cut_ratio"]
    for r in rows:
        lines.append(
            f"{r.cluster},{r.size},{r.density!r},{r.clustering!r},{r.conductance!r},{r.cut_ratio!r}"
        )
    text = "\n".join(lines) + "\n"
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        Path(sink).write_text(text)
