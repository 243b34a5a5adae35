"""Leak competitiveness of deterministic cache replacement policies."""
from .congruence import (
    Bounded,
    PairClass,
    PumpFamily,
    QuotientGraph,
    Renaming,
    Unbounded,
    canonicalize,
    detect_unbounded,
    find_pump_family,
    pump,
    quotient_explore,
    rename,
)
from .core import (
    BudgetExceeded,
    CacheAlgorithm,
    Configuration,
    PolicyDescriptor,
    PolicyError,
    format_trace,
    initial_configuration,
    make_policy,
    parse_trace,
    update,
)
from .leak import (
    LeakRatioTable,
    achievable_pairs,
    leak_ratio_bruteforce,
    leak_ratio_quotient,
    miss_competitive_scan,
    observations,
    ratio_tables,
)
from .sim import count_misses, diff_profile, miss_profile
from .witness import build_dense_set, build_equalizing_trace, interpolate_trace, max_gap_search

__version__ = "0.1.0"
