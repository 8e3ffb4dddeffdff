"""Partition quality criteria on stationary walks.

The primary criterion ("synthesis") scores a partition by how well a
block-structured synthetic walk can mimic the network's walk: per cluster it
takes the KL divergence between the conditional one-step stay probability and
the cluster's stationary mass, weighted by that mass. Modularity and the
cluster-level mutual information are carried as comparison criteria.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .partitions import Partition
from .walk import (
    ClusterAggregates,
    RandomWalk,
    binary_kld,
    cluster_aggregates,
    kld_rate,
    mutual_info_clusters,
    mutual_info_nodes,
)

#: Sentinel target for moving a node into a brand-new singleton cluster.
FRESH = -1

_BOUND_SLACK = 1e-9


@dataclass
class ObjectiveReport:
    """Synthesis objective value with its per-cluster terms and upper bounds.

    ``bound_cluster_mi`` is the mutual information of the induced cluster
    process; ``bound_node_mi`` is the node-level mutual information, which
    does not depend on the partition (None when the caller had no access to
    the full walk). The chain value <= bound_cluster_mi <= bound_node_mi
    holds up to numerical slack.
    """

    value: float
    per_cluster: np.ndarray
    bound_cluster_mi: float
    bound_node_mi: float | None = None

    def __post_init__(self):
        self.per_cluster = np.asarray(self.per_cluster, dtype=np.float64)
        if self.value < -_BOUND_SLACK:
            raise ValueError("objective value must be nonnegative")
        if self.value > self.bound_cluster_mi + _BOUND_SLACK:
            raise ValueError("objective value exceeds its cluster-level bound")
        if self.bound_node_mi is not None and self.bound_cluster_mi > self.bound_node_mi + _BOUND_SLACK:
            raise ValueError("cluster-level bound exceeds the node-level bound")

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "per_cluster": [float(x) for x in self.per_cluster],
            "bound_cluster_mi": self.bound_cluster_mi,
            "bound_node_mi": self.bound_node_mi,
        }


def synthesis_objective(agg: ClusterAggregates, node_mi: float | None = None) -> ObjectiveReport:
    """Score cluster aggregates: sum over clusters of
    p_i * KLD(stay_probability_i || p_i), in bits.

    A single-cluster partition scores 0 by definition. Pass ``node_mi`` when
    the walk's node-level mutual information is available so the report can
    carry both bounds.

    Raises:
        ValueError: a cluster with zero stationary mass.
    """
    k = agg.num_clusters
    if np.any(agg.p_i <= 0.0):
        raise ValueError("every cluster needs positive stationary mass")
    if k == 1:
        per = np.zeros(1)
        return ObjectiveReport(0.0, per, mutual_info_clusters(agg), node_mi)
    stay = np.clip(agg.stay_probabilities(), 0.0, 1.0)
    per = np.array([agg.p_i[i] * binary_kld(float(stay[i]), float(agg.p_i[i])) for i in range(k)])
    return ObjectiveReport(float(per.sum()), per, mutual_info_clusters(agg), node_mi)


def evaluate_partition(walk: RandomWalk, part: Partition) -> ObjectiveReport:
    """Full synthesis report for a partition of a walk, both bounds filled."""
    agg = cluster_aggregates(walk, part)
    return synthesis_objective(agg, node_mi=mutual_info_nodes(walk))


def cluster_mi_objective(agg: ClusterAggregates) -> float:
    """Mutual information of the induced cluster process, in bits.

    A looser criterion than the synthesis objective: it keeps the full
    cluster-to-cluster flow structure instead of only the stay/leave split.
    """
    return mutual_info_clusters(agg)


def modularity(g: Graph, part: Partition) -> float:
    """Newman modularity of a partition of an unweighted undirected graph.

    Raises:
        ValueError: directed or weighted input, or node-count mismatch.
    """
    if g.directed:
        raise ValueError("modularity is defined here for undirected graphs only")
    if not g.is_unweighted:
        raise ValueError("modularity is defined here for unweighted graphs only")
    if part.n != g.n:
        raise ValueError(f"partition covers {part.n} nodes, graph has {g.n}")
    m_edges = g.num_edges
    if m_edges == 0:
        raise ValueError("modularity needs at least one edge")
    assign = part.assignment
    internal = np.bincount(
        assign[g.u], weights=(assign[g.u] == assign[g.v]).astype(float), minlength=part.num_clusters
    )
    degree_sums = np.bincount(assign, weights=g.degrees, minlength=part.num_clusters)
    return float(np.sum(internal / m_edges - (degree_sums / (2.0 * m_edges)) ** 2))


@dataclass
class SyntheticWalkParams:
    """Parameters of the block-structured synthetic walk.

    ``r`` holds one entry per node: the within-cluster visit distribution of
    the node's own cluster (each cluster's entries sum to 1). ``s`` is the
    per-cluster leave probability, ``u`` the cluster choice distribution used
    after leaving.
    """

    r: np.ndarray
    s: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=np.float64)
        self.s = np.asarray(self.s, dtype=np.float64)
        self.u = np.asarray(self.u, dtype=np.float64)
        if len(self.s) != len(self.u):
            raise ValueError("s and u must have one entry per cluster")

    def validate(self, part: Partition) -> None:
        if len(self.r) != part.n or len(self.s) != part.num_clusters:
            raise ValueError("parameter shapes do not match the partition")
        sums = np.bincount(part.assignment, weights=self.r, minlength=part.num_clusters)
        if np.any(np.abs(sums - 1.0) > 1e-12):
            raise ValueError("per-cluster node distributions must sum to 1")
        if np.any((self.s < 0) | (self.s > 1)):
            raise ValueError("leave probabilities must lie in [0, 1]")
        if np.any(self.u < 0) or abs(self.u.sum() - 1.0) > 1e-12:
            raise ValueError("cluster choice distribution must be a probability vector")


def optimal_parameters(walk: RandomWalk, part: Partition) -> SyntheticWalkParams:
    """Divergence-minimizing synthetic-walk parameters for a partition:
    within-cluster distributions proportional to stationary mass, leave
    probabilities matching the walk's, and cluster choice equal to cluster
    mass."""
    agg = cluster_aggregates(walk, part)
    r = walk.p / agg.p_i[part.assignment]
    s = np.clip(1.0 - agg.stay_probabilities(), 0.0, 1.0)
    # a cluster holding all stationary mass has nowhere to leave to; kill
    # the accumulated-roundoff dust that would otherwise land in s
    s[agg.p_i >= 1.0] = 0.0
    return SyntheticWalkParams(r=r, s=s, u=agg.p_i.copy())


def synthetic_transition_matrix(part: Partition, params: SyntheticWalkParams) -> np.ndarray:
    """Dense transition matrix of the synthetic walk.

    Within cluster i: q(a -> b) = r_b (1 - s_i). Across clusters i -> j:
    q(a -> b) = r_b s_i u_j / (1 - u_i).

    Raises:
        ValueError: invalid parameters, or u_i = 1 with s_i > 0 (leaving a
            cluster that holds all choice mass is ill-defined).
    """
    params.validate(part)
    m = part.assignment
    s_row = params.s[m]
    u_row = params.u[m]
    remain = 1.0 - u_row
    if np.any((remain <= 0.0) & (s_row > 0.0)):
        raise ValueError("u = 1 with positive leave probability is ill-defined")
    cross = np.where(remain > 0.0, s_row / np.where(remain > 0.0, remain, 1.0), 0.0)
    same = m[:, None] == m[None, :]
    q = params.r[None, :] * np.where(
        same, (1.0 - s_row)[:, None], cross[:, None] * params.u[m][None, :]
    )
    rows = q.sum(axis=1)
    if np.any(np.abs(rows - 1.0) > 1e-12):
        raise ValueError("synthetic rows failed to normalize")
    return q


def objective_identity_check(walk: RandomWalk, part: Partition) -> tuple[float, float]:
    """Evaluate both sides of the divergence identity.

    Left side: KL divergence rate between the walk and the optimal synthetic
    walk for this partition. Right side: node-level mutual information minus
    the synthesis objective. The left side never exceeds the right side (up
    to numerics); equality holds when no cluster switches occur or the
    cluster choice distribution is exact.
    """
    params = optimal_parameters(walk, part)
    q = synthetic_transition_matrix(part, params)
    lhs = kld_rate(walk.P, q, walk.p)
    agg = cluster_aggregates(walk, part)
    rhs = mutual_info_nodes(walk) - synthesis_objective(agg).value
    return lhs, rhs


def _synthesis_term(mass: float, within: float) -> float:
    """One cluster's objective contribution from its mass and within-flow."""
    if mass <= 0.0 or mass >= 1.0:
        return 0.0
    s = within / mass
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    total = 0.0
    if s > 0.0:
        total += s * math.log2(s / mass)
    if s < 1.0:
        total += (1.0 - s) * math.log2((1.0 - s) / (1.0 - mass))
    return mass * total


def _modularity_term(mass: float, within: float) -> float:
    """Weighted-modularity contribution in stationary-flow form."""
    return within - mass * mass


class FlowMoveState:
    """Incremental evaluator for criteria that depend only on each cluster's
    stationary mass and within-cluster flow.

    Tracks the current assignment and supports O(degree) gain evaluation of
    single-node moves plus exact snapshot/restore, which the optimizer uses
    for its tentative move chains.
    """

    def __init__(self, walk: RandomWalk, part: Partition, term=_synthesis_term):
        n = walk.n
        if part.n != n:
            raise ValueError(f"partition covers {part.n} nodes, walk has {n}")
        self.walk = walk
        self.term = term
        #: whether move search should scan every active cluster as a target
        #: (the divergence objectives) or only flow-adjacent ones (modularity)
        self.dense_targets = True
        self.node_mass = walk.p.copy()
        f = walk.flows
        self.self_flow = f.diagonal().copy()

        csr = f.tocsr()
        csc = f.tocsc()
        symmetric = (abs(f - f.T) > 1e-15).nnz == 0
        self.out_idx: list[list[int]] = []
        self.out_val: list[list[float]] = []
        for a in range(n):
            lo, hi = csr.indptr[a], csr.indptr[a + 1]
            idx = csr.indices[lo:hi]
            val = csr.data[lo:hi]
            keep = idx != a
            self.out_idx.append(idx[keep].tolist())
            self.out_val.append(val[keep].tolist())
        if symmetric:
            self.in_idx, self.in_val = self.out_idx, self.out_val
        else:
            self.in_idx, self.in_val = [], []
            for a in range(n):
                lo, hi = csc.indptr[a], csc.indptr[a + 1]
                idx = csc.indices[lo:hi]
                val = csc.data[lo:hi]
                keep = idx != a
                self.in_idx.append(idx[keep].tolist())
                self.in_val.append(val[keep].tolist())

        self.assignment = part.assignment.copy()
        k = part.num_clusters
        self.mass = np.zeros(n, dtype=np.float64)
        self.within = np.zeros(n, dtype=np.float64)
        self.counts = np.zeros(n, dtype=np.int64)
        np.add.at(self.mass, self.assignment, walk.p)
        coo = f.tocoo()
        same = self.assignment[coo.row] == self.assignment[coo.col]
        np.add.at(self.within, self.assignment[coo.row[same]], coo.data[same])
        np.add.at(self.counts, self.assignment, 1)
        self.free_ids = [c for c in range(n - 1, k - 1, -1)]

    def flows_to_clusters(self, node: int) -> dict[int, float]:
        """Total stationary flow (both directions) between a node and each
        cluster holding at least one of its walk neighbors."""
        assign = self.assignment
        flows: dict[int, float] = {}
        for j, f in zip(self.out_idx[node], self.out_val[node]):
            c = assign[j]
            flows[c] = flows.get(c, 0.0) + f
        if self.in_idx is self.out_idx:
            for c in flows:
                flows[c] *= 2.0
        else:
            for j, f in zip(self.in_idx[node], self.in_val[node]):
                c = assign[j]
                flows[c] = flows.get(c, 0.0) + f
        return flows

    def gain(self, node: int, to_cluster: int, flows: dict[int, float] | None = None) -> float:
        """Objective change from moving ``node`` into ``to_cluster``
        (FRESH for a new singleton), leaving everything else fixed."""
        a = int(self.assignment[node])
        if to_cluster == a:
            return 0.0
        if flows is None:
            flows = self.flows_to_clusters(node)
        p = float(self.node_mass[node])
        sl = float(self.self_flow[node])
        f_a = flows.get(a, 0.0)
        mass_a = float(self.mass[a])
        within_a = float(self.within[a])
        old = self.term(mass_a, within_a)
        if self.counts[a] == 1:
            new = 0.0
        else:
            new = self.term(mass_a - p, within_a - f_a - sl)
        if to_cluster == FRESH:
            new += self.term(p, sl)
        else:
            f_b = flows.get(to_cluster, 0.0)
            mass_b = float(self.mass[to_cluster])
            within_b = float(self.within[to_cluster])
            old += self.term(mass_b, within_b)
            new += self.term(mass_b + p, within_b + f_b + sl)
        return new - old

    def apply(self, node: int, to_cluster: int) -> int:
        """Move the node; returns the concrete target cluster id."""
        a = int(self.assignment[node])
        if to_cluster == FRESH:
            to_cluster = self.free_ids.pop()
        if to_cluster == a:
            return a
        flows = self.flows_to_clusters(node)
        p = float(self.node_mass[node])
        sl = float(self.self_flow[node])
        if self.counts[a] == 1:
            self.mass[a] = 0.0
            self.within[a] = 0.0
            self.counts[a] = 0
            self.free_ids.append(a)
        else:
            self.mass[a] -= p
            self.within[a] -= flows.get(a, 0.0) + sl
            self.counts[a] -= 1
        self.mass[to_cluster] += p
        self.within[to_cluster] += flows.get(to_cluster, 0.0) + sl
        self.counts[to_cluster] += 1
        self.assignment[node] = to_cluster
        return to_cluster

    def value(self) -> float:
        active = np.nonzero(self.counts)[0]
        return float(sum(self.term(float(self.mass[c]), float(self.within[c])) for c in active))

    def partition(self) -> Partition:
        return Partition(self.assignment)

    def snapshot(self) -> tuple:
        return (
            self.assignment.copy(),
            self.mass.copy(),
            self.within.copy(),
            self.counts.copy(),
            list(self.free_ids),
        )

    def restore(self, snap: tuple) -> None:
        self.assignment, self.mass, self.within, self.counts, free = (
            snap[0].copy(),
            snap[1].copy(),
            snap[2].copy(),
            snap[3].copy(),
            snap[4],
        )
        self.free_ids = list(free)


def synthesis_delta_move(state: FlowMoveState, node: int, from_cluster: int, to_cluster: int) -> float:
    """Gain of moving one node between clusters under the synthesis
    objective, evaluated incrementally against the state's caches.

    Raises:
        ValueError: ``from_cluster`` disagrees with the state's assignment.
    """
    if int(state.assignment[node]) != from_cluster:
        raise ValueError(f"node {node} is in cluster {state.assignment[node]}, not {from_cluster}")
    return state.gain(node, to_cluster)
