"""Partition-based massively parallel maximal matching: pipeline simulator,
greedy-matching query oracles, and statistical verification harness."""

from .graph import (Graph, Matching, PartitionAssignment, Priorities,
                    Subgraph, edge_sample, induced_subgraph,
                    intersecting_pair_count, load_graph, load_graph_file,
                    parse_edge_list, residual_degree, residual_degrees,
                    save_edge_list, verify_matching)
from .greedy import greedy_mm, match_status_delta, sample_and_greedy
from .mpc import (MachineSpec, RoundLog, assign_partitions, charge_round,
                  space_of_subgraph)
from .oracles import (degree_oracle, edge_oracle, partitioned_edge_oracle,
                      query_complexity_stats)
from .pipeline import (DriverResult, PhaseConfig, PhaseReport,
                       amplified_partition_mm, degree_reduction_phase,
                       leftover_cleanup, maximal_matching_driver,
                       partition_mm, vertex_cover_2approx)

__version__ = "0.1.0"

__all__ = [
    "Graph", "Matching", "PartitionAssignment", "Priorities", "Subgraph",
    "edge_sample", "induced_subgraph", "intersecting_pair_count",
    "load_graph", "load_graph_file", "parse_edge_list", "residual_degree",
    "residual_degrees", "save_edge_list", "verify_matching",
    "greedy_mm", "match_status_delta", "sample_and_greedy",
    "MachineSpec", "RoundLog", "assign_partitions", "charge_round",
    "space_of_subgraph",
    "degree_oracle", "edge_oracle", "partitioned_edge_oracle",
    "query_complexity_stats",
    "DriverResult", "PhaseConfig", "PhaseReport", "amplified_partition_mm",
    "degree_reduction_phase", "leftover_cleanup", "maximal_matching_driver",
    "partition_mm", "vertex_cover_2approx",
]
