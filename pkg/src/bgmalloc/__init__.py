"""Conflict-free sidelink subchannel allocation for overlapping vehicle clusters."""
from .bgm_pa import GroupMetric, Grouping, group_weights, pre_group, run_bgm_pa
from .bgm_sa import InfeasibleError, allocate_cluster, order_clusters, run_bgm_sa
from .channel import SinrModelConfig, WeightMatrix, generate_weights, load_weights, save_weights
from .evaluation import RunCriteria, aggregate, criteria, empirical_cdf
from .grid import (
    Allocation,
    ResourceGrid,
    Scenario,
    build_membership,
    intersection_summary,
    shared_intersection_scenario,
    slot_to_subchannel,
    subchannel_to_slot,
    validate_allocation,
)
from .hungarian import solve as max_weight_matching
from .oracle import exhaustive_solve
from .reduction import recover_subchannel, reduce

__version__ = "0.1.0"
