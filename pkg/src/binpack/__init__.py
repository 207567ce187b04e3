"""Constraint-programming solver core for the decision bin packing problem."""

from .bounds import (
    DEFAULT_DFF_ORDER,
    BoundResult,
    DffKind,
    L2Partition,
    LambdaRange,
    dff_bound,
    dff_value,
    l1,
    l2,
    lambda_range,
    lower_bound_seq,
)
from .instances import (
    Instance,
    ParseError,
    ReducedInstance,
    WeibullSpec,
    format_instance,
    generate_weibull,
    parse_falkenauer,
    parse_instance,
    reduce_packing,
    write_instance,
)
from .parallel import ParallelBoundEngine, SharedMax, lower_bound_par
from .propagator import (
    PropagationOutcome,
    PropagationStatus,
    propagate,
    reachable_sums,
)
from .search import (
    BoundMode,
    DecisionResult,
    MinimizeResult,
    SearchConfig,
    SearchStats,
    Solution,
    SolveStatus,
    minimize,
    solve_decision,
)
from .store import DomainStore, Wipeout

__version__ = "0.1.0"

__all__ = [
    "BoundMode",
    "BoundResult",
    "DecisionResult",
    "DEFAULT_DFF_ORDER",
    "DffKind",
    "DomainStore",
    "Instance",
    "L2Partition",
    "LambdaRange",
    "MinimizeResult",
    "ParallelBoundEngine",
    "ParseError",
    "PropagationOutcome",
    "PropagationStatus",
    "ReducedInstance",
    "SearchConfig",
    "SearchStats",
    "SharedMax",
    "Solution",
    "SolveStatus",
    "WeibullSpec",
    "Wipeout",
    "dff_bound",
    "dff_value",
    "format_instance",
    "generate_weibull",
    "l1",
    "l2",
    "lambda_range",
    "lower_bound_par",
    "lower_bound_seq",
    "minimize",
    "parse_falkenauer",
    "parse_instance",
    "propagate",
    "reachable_sums",
    "reduce_packing",
    "solve_decision",
    "write_instance",
    "__version__",
]
