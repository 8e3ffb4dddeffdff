"""Partition search: greedy local moving with cluster aggregation, plus an
exhaustive enumeration oracle for small graphs.

Local moving alone can stall on small dense graphs where every single-node
merge loses before the first cluster forms, so each level also runs a
deterministic chained-move phase: apply the best move repeatedly even when it
loses, then roll back to the best prefix and keep it only if it gained.
Aggregation collapses clusters into super-nodes whose edge weights carry the
stationary flows, so objective values at coarser levels equal the flat ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .objective import (
    FRESH,
    FlowMoveState,
    ObjectiveReport,
    _modularity_term,
    _synthesis_term,
    evaluate_partition,
    synthesis_objective,
)
from .partitions import Partition
from .walk import RandomWalk, cluster_aggregates, mutual_info_clusters, transition_matrix

OBJECTIVES = ("synthesis", "modularity", "cluster_mi")

#: Levels at most this large also get the chained-move escape phase.
CHAIN_NODE_CAP = 128


@dataclass
class OptimizerConfig:
    objective: str = "synthesis"
    seed: int = 0
    max_outer_passes: int = 100
    min_gain: float = 1e-12
    node_order: str = "random-shuffle"

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}, expected one of {OBJECTIVES}")
        if self.max_outer_passes < 1:
            raise ValueError("max_outer_passes must be at least 1")
        if not self.min_gain > 0.0:
            raise ValueError("min_gain must be positive")
        if self.node_order not in ("random-shuffle", "index"):
            raise ValueError("node_order must be 'random-shuffle' or 'index'")


class ClusterMIMoveState(FlowMoveState):
    """Incremental evaluator for the cluster-level mutual information.

    Keeps the full cluster-to-cluster flow matrix; only meaningful for walks
    with symmetric flows (undirected graphs), which the optimizer enforces.
    """

    def __init__(self, walk: RandomWalk, part: Partition):
        super().__init__(walk, part, term=None)
        if self.in_idx is not self.out_idx:
            raise ValueError("cluster-mi moves need symmetric stationary flows")
        n = walk.n
        self.pm = np.zeros((n, n))
        coo = walk.flows.tocoo()
        np.add.at(self.pm, (self.assignment[coo.row], self.assignment[coo.col]), coo.data)

    @staticmethod
    def _mi_terms(x: np.ndarray, mi: float, mj: np.ndarray) -> float:
        mask = x > 0.0
        if not np.any(mask):
            return 0.0
        return float(np.sum(x[mask] * np.log2(x[mask] / (mi * mj[mask]))))

    def _affected_sum(self, row_a, row_b, corner, mass_a, mass_b, mass_o):
        # symmetric flows: column terms over untouched clusters mirror the rows
        total = 2.0 * (self._mi_terms(row_a, mass_a, mass_o) + self._mi_terms(row_b, mass_b, mass_o))
        aa, ab, bb = corner
        for x, mi, mj in ((aa, mass_a, mass_a), (bb, mass_b, mass_b)):
            if x > 0.0:
                total += x * np.log2(x / (mi * mj))
        if ab > 0.0:
            total += 2.0 * ab * np.log2(ab / (mass_a * mass_b))
        return total

    def gain(self, node: int, to_cluster: int, flows: dict[int, float] | None = None) -> float:
        a = int(self.assignment[node])
        if to_cluster == a:
            return 0.0
        if flows is None:
            flows = self.flows_to_clusters(node)
        p = float(self.node_mass[node])
        sl = float(self.self_flow[node])
        d = {c: f * 0.5 for c, f in flows.items()}
        active = np.nonzero(self.counts)[0]
        b = to_cluster
        fresh = b == FRESH
        others = active[(active != a) & (active != b)]
        mass_o = self.mass[others]

        row_a_old = self.pm[a, others]
        row_b_old = self.pm[b, others] if not fresh else np.zeros(len(others))
        corner_old = (
            float(self.pm[a, a]),
            float(self.pm[a, b]) if not fresh else 0.0,
            float(self.pm[b, b]) if not fresh else 0.0,
        )
        mass_a, mass_b = float(self.mass[a]), float(self.mass[b]) if not fresh else 0.0
        old = self._affected_sum(row_a_old, row_b_old, corner_old, mass_a, mass_b, mass_o)

        d_o = np.array([d.get(int(c), 0.0) for c in others])
        d_a, d_b = d.get(a, 0.0), d.get(b, 0.0) if not fresh else 0.0
        emptied = self.counts[a] == 1
        row_a_new = np.zeros(len(others)) if emptied else row_a_old - d_o
        row_b_new = row_b_old + d_o
        corner_new = (
            0.0 if emptied else corner_old[0] - 2.0 * d_a - sl,
            0.0 if emptied else corner_old[1] + d_a - d_b,
            corner_old[2] + 2.0 * d_b + sl,
        )
        new = self._affected_sum(row_a_new, row_b_new, corner_new, mass_a - p, mass_b + p, mass_o)
        return float(new - old)

    def apply(self, node: int, to_cluster: int) -> int:
        a = int(self.assignment[node])
        flows = self.flows_to_clusters(node)
        d = {c: f * 0.5 for c, f in flows.items()}
        sl = float(self.self_flow[node])
        emptied = self.counts[a] == 1
        b = super().apply(node, to_cluster)
        if a == b:
            return b
        d_a, d_b = d.get(a, 0.0), d.get(b, 0.0)
        for c, val in d.items():
            if c in (a, b) or val == 0.0:
                continue
            self.pm[a, c] -= val
            self.pm[c, a] -= val
            self.pm[b, c] += val
            self.pm[c, b] += val
        self.pm[a, a] -= 2.0 * d_a + sl
        self.pm[b, b] += 2.0 * d_b + sl
        delta_ab = d_a - d_b
        self.pm[a, b] += delta_ab
        self.pm[b, a] += delta_ab
        if emptied:
            self.pm[a, :] = 0.0
            self.pm[:, a] = 0.0
        return b

    def value(self) -> float:
        active = np.nonzero(self.counts)[0]
        sub = self.pm[np.ix_(active, active)]
        outer = self.mass[active, None] * self.mass[None, active]
        mask = sub > 0.0
        return float(np.sum(sub[mask] * np.log2(sub[mask] / outer[mask])))

    def snapshot(self) -> tuple:
        return super().snapshot() + (self.pm.copy(),)

    def restore(self, snap: tuple) -> None:
        super().restore(snap[:5])
        self.pm = snap[5].copy()


def _make_state(walk: RandomWalk, part: Partition, objective: str) -> FlowMoveState:
    if objective == "synthesis":
        state = FlowMoveState(walk, part, term=_synthesis_term)
    elif objective == "modularity":
        state = FlowMoveState(walk, part, term=_modularity_term)
    else:
        state = ClusterMIMoveState(walk, part)
    # a modularity gain needs shared edges, so only flow-adjacent targets can
    # win; the divergence objectives also reward moving a node into a cluster
    # it has no flow to (low stay probability scores too), so they must scan
    # every active cluster
    state.dense_targets = objective != "modularity"
    return state


def _move_targets(state: FlowMoveState, a: int, flows: dict[int, float]):
    if state.dense_targets:
        return np.flatnonzero(state.counts > 0).tolist()
    return flows


def _best_move(state: FlowMoveState, node: int, min_gain: float):
    flows = state.flows_to_clusters(node)
    a = int(state.assignment[node])
    best_gain, best = min_gain, None
    for c in _move_targets(state, a, flows):
        if c == a:
            continue
        g = state.gain(node, c, flows)
        if g > best_gain:
            best_gain, best = g, c
    if state.counts[a] > 1:
        g = state.gain(node, FRESH, flows)
        if g > best_gain:
            best_gain, best = g, FRESH
    return best_gain, best


def _local_moving(state: FlowMoveState, rng: np.random.Generator, cfg: OptimizerConfig) -> bool:
    n = len(state.assignment)
    order = np.arange(n)
    moved_any = False
    while True:
        if cfg.node_order == "random-shuffle":
            rng.shuffle(order)
        moves = 0
        for node in order.tolist():
            _, target = _best_move(state, node, cfg.min_gain)
            if target is not None:
                state.apply(node, target)
                moves += 1
        if moves == 0:
            return moved_any
        moved_any = True


def _chain_pass(state: FlowMoveState, min_gain: float) -> bool:
    """Tentatively chain best moves (each node at most once), then keep the
    best prefix if it improved; otherwise roll everything back."""
    n = len(state.assignment)
    snap = state.snapshot()
    moved: set[int] = set()
    seq: list[tuple[int, int]] = []
    cum = 0.0
    best_cum = 0.0
    best_len = 0
    for _ in range(n):
        best = None
        for node in range(n):
            if node in moved:
                continue
            flows = state.flows_to_clusters(node)
            a = int(state.assignment[node])
            for c in _move_targets(state, a, flows):
                if c == a:
                    continue
                g = state.gain(node, c, flows)
                if best is None or g > best[0]:
                    best = (g, node, c)
            if state.counts[a] > 1:
                g = state.gain(node, FRESH, flows)
                if best is None or g > best[0]:
                    best = (g, node, FRESH)
        if best is None:
            break
        g, node, target = best
        state.apply(node, target)
        moved.add(node)
        seq.append((node, target))
        cum += g
        if cum > best_cum:
            best_cum = cum
            best_len = len(seq)
    if best_cum > min_gain:
        state.restore(snap)
        for node, target in seq[:best_len]:
            state.apply(node, target)
        return True
    state.restore(snap)
    return False


def _mi_terms_of(f, outer_mass) -> float:
    f = np.atleast_1d(np.asarray(f, dtype=float))
    o = np.broadcast_to(np.asarray(outer_mass, dtype=float), f.shape)
    mask = f > 0.0
    if not mask.any():
        return 0.0
    return float(np.sum(f[mask] * np.log2(f[mask] / o[mask])))


def _mi_merge_delta(F: np.ndarray, m: np.ndarray, i: int, j: int) -> float:
    # only terms touching rows/cols i or j change; F stays symmetric
    others = [c for c in range(len(m)) if c not in (i, j) and m[c] > 0.0]
    mo = m[others]
    fi, fj = F[i, others], F[j, others]
    mm = m[i] + m[j]
    delta = 2.0 * (_mi_terms_of(fi + fj, mm * mo) - _mi_terms_of(fi, m[i] * mo) - _mi_terms_of(fj, m[j] * mo))
    delta += _mi_terms_of(F[i, i] + F[j, j] + 2.0 * F[i, j], mm * mm)
    delta -= _mi_terms_of(F[i, i], m[i] * m[i]) + _mi_terms_of(F[j, j], m[j] * m[j])
    delta -= 2.0 * _mi_terms_of(F[i, j], m[i] * m[j])
    return delta


def _merge_chain(state: FlowMoveState, min_gain: float) -> bool:
    """Merge the least-bad adjacent cluster pair all the way down, then keep
    the best prefix if it gained; complements single-node chains, which
    cannot coordinate multi-node regroupings."""
    ids = np.flatnonzero(state.counts > 0)
    k = len(ids)
    if k < 2:
        return False
    F = np.zeros((k, k))
    dense = np.full(len(state.counts), -1)
    dense[ids] = np.arange(k)
    asg = dense[state.assignment]
    coo = state.walk.flows.tocoo()
    np.add.at(F, (asg[coo.row], asg[coo.col]), coo.data)
    F = 0.5 * (F + F.T)

    sim = _SimState(state, ids, F)
    seq: list[tuple[int, int]] = []
    cum, best_cum, best_len = 0.0, 0.0, 0
    for _ in range(k - 1):
        step = sim.best_merge()
        if step is None:
            break
        delta, i, j = step
        sim.merge(i, j)
        seq.append((int(ids[i]), int(ids[j])))
        cum += delta
        if cum > best_cum:
            best_cum, best_len = cum, len(seq)
    if best_cum <= min_gain:
        return False
    for target, source in seq[:best_len]:
        for node in np.flatnonzero(state.assignment == source).tolist():
            state.apply(node, target)
    return True


class _SimState:
    """Cluster-level scratchpad for simulating a merge sequence."""

    def __init__(self, state: FlowMoveState, ids: np.ndarray, F: np.ndarray):
        self.state = state
        self.F = F
        self.m = state.mass[ids].astype(float)
        self.alive = np.ones(len(ids), dtype=bool)

    def best_merge(self):
        deltas = _merge_deltas_live(self.state, self.m, self.F, self.alive)
        i, j = np.unravel_index(int(np.argmax(deltas)), deltas.shape)
        if not np.isfinite(deltas[i, j]):
            return None
        return float(deltas[i, j]), int(i), int(j)

    def merge(self, i: int, j: int) -> None:
        self.F[i, :] += self.F[j, :]
        self.F[:, i] += self.F[:, j]
        self.F[j, :] = 0.0
        self.F[:, j] = 0.0
        self.m[i] += self.m[j]
        self.m[j] = 0.0
        self.alive[j] = False


def _merge_deltas_live(
    state: FlowMoveState, m: np.ndarray, F: np.ndarray, alive: np.ndarray
) -> np.ndarray:
    if isinstance(state, ClusterMIMoveState):
        k = len(m)
        deltas = np.full((k, k), -np.inf)
        live = np.flatnonzero(alive)
        for a in range(len(live)):
            for b in range(a + 1, len(live)):
                i, j = int(live[a]), int(live[b])
                if F[i, j] <= 0.0:
                    continue
                deltas[i, j] = _mi_merge_delta(F, m, i, j)
        return deltas
    term = np.vectorize(state.term, otypes=[float])
    w = np.diag(F)
    M2 = m[:, None] + m[None, :]
    W2 = w[:, None] + w[None, :] + 2.0 * F
    deltas = term(M2, W2) - term(m, w)[:, None] - term(m, w)[None, :]
    dead = ~alive
    if not state.dense_targets:
        deltas[F <= 0.0] = -np.inf
    deltas[dead, :] = -np.inf
    deltas[:, dead] = -np.inf
    deltas[np.tril_indices_from(deltas)] = -np.inf
    return deltas


def _refine_level(state: FlowMoveState, rng: np.random.Generator, cfg: OptimizerConfig) -> None:
    _local_moving(state, rng, cfg)
    if len(state.assignment) > CHAIN_NODE_CAP:
        return
    while True:
        changed = False
        if _merge_chain(state, cfg.min_gain):
            _local_moving(state, rng, cfg)
            changed = True
        if _chain_pass(state, cfg.min_gain):
            _local_moving(state, rng, cfg)
            changed = True
        if not changed:
            return


def _partition_value(walk: RandomWalk, part: Partition, objective: str) -> float:
    agg = cluster_aggregates(walk, part)
    if objective == "synthesis":
        return synthesis_objective(agg).value
    if objective == "modularity":
        return float(np.sum(np.diag(agg.p_ij) - agg.p_i**2))
    return mutual_info_clusters(agg)


def _aggregate_graph(walk: RandomWalk, part: Partition) -> Graph:
    """Super-node graph whose induced walk reproduces the aggregated flows,
    so objective values computed on it equal the flat ones."""
    agg = cluster_aggregates(walk, part)
    k = agg.num_clusters
    f = agg.p_ij
    us: list[int] = []
    vs: list[int] = []
    ws: list[float] = []
    for i in range(k):
        if f[i, i] > 0.0:
            us.append(i)
            vs.append(i)
            ws.append(f[i, i] / 2.0)
        for j in range(i + 1, k):
            if f[i, j] > 0.0:
                us.append(i)
                vs.append(j)
                ws.append(f[i, j])
    return Graph(n=k, u=np.array(us), v=np.array(vs), w=np.array(ws), directed=False)


def optimize(g: Graph, cfg: OptimizerConfig | None = None) -> tuple[Partition, ObjectiveReport]:
    """Search for a high-value partition of an undirected graph.

    Each round refines the current partition by single-node moves on the
    original walk, then coarsens it through merge-only rounds on aggregated
    graphs. Rounds repeat until the objective stops improving (or the round
    cap is hit). Deterministic for a given config.

    Args:
        g: undirected graph with positive degrees.
        cfg: optimizer settings; defaults to the synthesis objective, seed 0.

    Returns:
        (Partition, ObjectiveReport) for the best partition found.
    """
    if g.directed:
        raise ValueError("the optimizer handles undirected graphs only")
    cfg = cfg if cfg is not None else OptimizerConfig()
    rng = np.random.default_rng(cfg.seed)
    walk0 = transition_matrix(g)

    restarts = 1 if cfg.node_order == "index" else _restart_count(g.n)
    best_part, best_value = None, -np.inf
    for i in range(restarts):
        if i == 0 or g.n > CHAIN_NODE_CAP:
            init = Partition.singletons(g.n)
        else:
            # small graphs have rugged landscapes where every merge from
            # singletons loses; random starts land in other basins
            k = int(rng.integers(1, g.n + 1))
            init = Partition(rng.integers(0, k, size=g.n))
        part, value = _search_rounds(walk0, init, rng, cfg)
        if value > best_value + cfg.min_gain:
            best_part, best_value = part, value
    return best_part, evaluate_partition(walk0, best_part)


def _restart_count(n: int) -> int:
    if n <= CHAIN_NODE_CAP:
        return 16
    return 4


def _search_rounds(
    walk0: RandomWalk, init: Partition, rng: np.random.Generator, cfg: OptimizerConfig
) -> tuple[Partition, float]:
    part = init
    value = -np.inf
    for _ in range(cfg.max_outer_passes):
        # single-node moves on the original walk; this is also what undoes
        # merges that an earlier round's aggregation locked in
        state = _make_state(walk0, part, cfg.objective)
        _refine_level(state, rng, cfg)
        part = state.partition()
        # merge rounds on progressively coarser graphs
        while part.num_clusters > 1:
            level_walk = transition_matrix(_aggregate_graph(walk0, part))
            st = _make_state(level_walk, Partition.singletons(part.num_clusters), cfg.objective)
            _refine_level(st, rng, cfg)
            sub = st.partition()
            if sub.num_clusters == part.num_clusters:
                break
            part = Partition(sub.assignment[part.assignment])
        new_value = _partition_value(walk0, part, cfg.objective)
        if new_value <= value + cfg.min_gain:
            break
        value = new_value
    return part, value


def set_partitions(n: int):
    """Yield every partition of n items as a dense assignment array, in
    lexicographic restricted-growth order (single cluster first)."""
    a = np.zeros(n, dtype=np.int64)
    prefix_max = np.zeros(n, dtype=np.int64)
    while True:
        yield a
        i = n - 1
        while i > 0 and a[i] == prefix_max[i - 1] + 1:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        prefix_max[i] = max(prefix_max[i - 1], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            prefix_max[j] = prefix_max[i]


def brute_force_optimum(
    g: Graph, objective: str = "synthesis", n_cap: int = 12
) -> tuple[Partition, float]:
    """Exhaustively maximize a criterion over all partitions of a small graph.

    Ties break toward fewer clusters, then the lexicographically smallest
    assignment (enumeration order).

    Args:
        g: the graph; must have at most ``n_cap`` nodes.
        objective: one of OBJECTIVES.
        n_cap: enumeration guard; growth is the Bell number of n.

    Returns:
        (Partition, value) of the exact optimum.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}, expected one of {OBJECTIVES}")
    if g.n > n_cap:
        raise ValueError(f"graph has {g.n} nodes, exceeding the enumeration cap {n_cap}")

    if objective == "modularity":
        if g.directed:
            raise ValueError("modularity is defined here for undirected graphs only")
        if not g.is_unweighted:
            raise ValueError("modularity is defined here for unweighted graphs only")
        gu, gv = g.u, g.v
        degrees = g.degrees
        m_edges = g.num_edges
        two_m = 2.0 * m_edges

        def value_of(a: np.ndarray, k: int) -> float:
            internal = np.bincount(a[gu], weights=(a[gu] == a[gv]).astype(float), minlength=k)
            degsum = np.bincount(a, weights=degrees, minlength=k)
            return float(np.sum(internal / m_edges - (degsum / two_m) ** 2))

    else:
        walk = transition_matrix(g)
        p = walk.p
        coo = walk.flows.tocoo()
        rows, cols, data = coo.row, coo.col, coo.data

        if objective == "synthesis":

            def value_of(a: np.ndarray, k: int) -> float:
                if k == 1:
                    return 0.0
                p_i = np.bincount(a, weights=p, minlength=k)
                same = a[rows] == a[cols]
                within = np.bincount(a[rows[same]], weights=data[same], minlength=k)
                s = np.clip(within / p_i, 0.0, 1.0)
                total = 0.0
                for i in range(k):
                    si, ti = s[i], p_i[i]
                    term = 0.0
                    if si > 0.0:
                        term += si * np.log2(si / ti)
                    if si < 1.0:
                        term += (1.0 - si) * np.log2((1.0 - si) / (1.0 - ti))
                    total += ti * term
                return float(total)

        else:

            def value_of(a: np.ndarray, k: int) -> float:
                p_i = np.bincount(a, weights=p, minlength=k)
                pij = np.zeros((k, k))
                np.add.at(pij, (a[rows], a[cols]), data)
                outer = p_i[:, None] * p_i[None, :]
                mask = pij > 0.0
                return float(np.sum(pij[mask] * np.log2(pij[mask] / outer[mask])))

    best_val = -np.inf
    best_a: np.ndarray | None = None
    best_k = 0
    for a in set_partitions(g.n):
        k = int(a.max()) + 1
        val = value_of(a, k)
        if val > best_val or (val == best_val and k < best_k):
            best_val = val
            best_a = a.copy()
            best_k = k
    assert best_a is not None
    return Partition(best_a), float(best_val)
