"""Uniform random set partitions, their statistics, and limit-law checks."""

__version__ = "0.1.0"

from .bell import (
    AlphaValue,
    BellTable,
    bell_ratio_asymptotic,
    bell_ratio_exact,
    build_bell_table,
    dobinski_partial,
    mu_log_weight,
    solve_alpha,
)
from .errors import InvalidProfileError, ResourceLimitError
from .partition import (
    Arc,
    SetPartition,
    arcs,
    block_count,
    block_size_of,
    crossings,
    dimension_index,
    enumerate_partitions,
    enumerate_rgs,
    from_rgs,
    levels,
    to_rgs,
)
from .sampler import (
    BallsTrace,
    ConditionalDraw,
    MinMaxProfile,
    StamDraw,
    balls_process,
    conditional_sample,
    min_max_profile,
    sample_m,
    stam_sample,
)
