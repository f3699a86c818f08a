"""Mobile/cloud DNN partition planning with butterfly-unit feature compression."""

from splitplan.model_graph import (
    AccuracyTable,
    LayerProfile,
    ModelProfile,
    ProfileError,
    TensorShape,
    compression_ratio,
    load_bundled_profile,
    load_profile,
    offloaded_bytes,
)
from splitplan.planner import (
    CostBreakdown,
    LoadState,
    NoFeasiblePartition,
    PartitionPlan,
    cost_of,
    min_dr,
    select,
    select_bruteforce,
)
from splitplan.wireless import NetworkModel, uplink_energy, uplink_power, uplink_time

__version__ = "0.1.0"
