"""Community detection by fitting a block-structured synthetic random walk
to the stationary walk a network induces."""

from .graph import (
    EdgeListParseError,
    Graph,
    InfeasibleModelError,
    PlantedPartitionParams,
    complete_graph,
    connected_components,
    density,
    disconnected_cliques,
    dump_edge_list,
    is_connected,
    load_edge_list,
    planted_partition,
    write_label_map,
)
from .metrics import (
    ClusterStatsRow,
    ami,
    classify_nodes,
    cluster_stats,
    contingency,
    greedy_match,
    mixing_parameter,
    nld,
    write_cluster_stats_csv,
)
from .objective import (
    FRESH,
    FlowMoveState,
    ObjectiveReport,
    SyntheticWalkParams,
    cluster_mi_objective,
    evaluate_partition,
    modularity,
    objective_identity_check,
    optimal_parameters,
    synthesis_delta_move,
    synthesis_objective,
    synthetic_transition_matrix,
)
from .optimizer import (
    OBJECTIVES,
    OptimizerConfig,
    brute_force_optimum,
    optimize,
    set_partitions,
)
from .partitions import Partition, partition_for_graph, read_partition_labels, write_partition
from .walk import (
    ClusterAggregates,
    IsolatedNodeError,
    NonErgodicError,
    RandomWalk,
    binary_kld,
    cluster_aggregates,
    kld_rate,
    mutual_info_clusters,
    mutual_info_nodes,
    transition_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "EdgeListParseError",
    "Graph",
    "InfeasibleModelError",
    "PlantedPartitionParams",
    "complete_graph",
    "connected_components",
    "density",
    "disconnected_cliques",
    "dump_edge_list",
    "is_connected",
    "load_edge_list",
    "planted_partition",
    "write_label_map",
    "ClusterStatsRow",
    "ami",
    "classify_nodes",
    "cluster_stats",
    "contingency",
    "greedy_match",
    "mixing_parameter",
    "nld",
    "write_cluster_stats_csv",
    "FRESH",
    "FlowMoveState",
    "ObjectiveReport",
    "SyntheticWalkParams",
    "cluster_mi_objective",
    "evaluate_partition",
    "modularity",
    "objective_identity_check",
    "optimal_parameters",
    "synthesis_delta_move",
    "synthesis_objective",
    "synthetic_transition_matrix",
    "OBJECTIVES",
    "OptimizerConfig",
    "brute_force_optimum",
    "optimize",
    "set_partitions",
    "Partition",
    "partition_for_graph",
    "read_partition_labels",
    "write_partition",
    "ClusterAggregates",
    "IsolatedNodeError",
    "NonErgodicError",
    "RandomWalk",
    "binary_kld",
    "cluster_aggregates",
    "kld_rate",
    "mutual_info_clusters",
    "mutual_info_nodes",
    "transition_matrix",
]
