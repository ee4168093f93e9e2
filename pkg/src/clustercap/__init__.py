"""Capacity planning for multi-chamber cluster tools with two load locks."""

from .cuts import (
    BasicCut,
    CutMatrix,
    DoubledGraph,
    build_cut_matrix,
    cuts_to_matrix,
    double_graph,
    enumerate_minimal_cuts,
    read_matrix_csv,
    render_matrix_csv,
    write_matrix_csv,
)
from .errors import (
    ClusterCapError,
    DomainError,
    EnumerationBudgetError,
    InstanceFormatError,
    LpSolverError,
    NotQualifiedError,
    StructurallyInfeasibleError,
)
from .flows import (
    FlowSolution,
    ParallelizationPlan,
    flow_to_xi,
    makespan_via_cuts,
    solve_maxflow,
    solve_parallelization_lp,
)
from .instances import GenParams, generate, read_instance, write_instance
from .lp import (
    LpBuilder,
    LpProblem,
    LpSolution,
    SizeStats,
    export_lp_text,
    parse_lp_text,
    size_stats,
    solve,
)
from .models import (
    Assignment,
    BuiltModel,
    CapacityResult,
    Instance,
    Job,
    Qualification,
    RateOverride,
    build_alternative,
    build_basic,
    build_generalized,
    build_serial,
    derive_recipe_rate,
    predict_sizes,
    solve_capacity,
)
from .recipes import ParallelGraph, Recipe, build_parallel_graph, predict_graph_counts
from .redundancy import (
    RedundancyVerdict,
    is_redundant_hull,
    is_redundant_lp,
    reduce_to_minimal,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BasicCut",
    "BuiltModel",
    "CapacityResult",
    "ClusterCapError",
    "CutMatrix",
    "DomainError",
    "DoubledGraph",
    "EnumerationBudgetError",
    "FlowSolution",
    "GenParams",
    "Instance",
    "InstanceFormatError",
    "Job",
    "LpBuilder",
    "LpProblem",
    "LpSolution",
    "LpSolverError",
    "NotQualifiedError",
    "ParallelGraph",
    "ParallelizationPlan",
    "Qualification",
    "RateOverride",
    "Recipe",
    "RedundancyVerdict",
    "SizeStats",
    "StructurallyInfeasibleError",
    "build_alternative",
    "build_basic",
    "build_cut_matrix",
    "build_generalized",
    "build_parallel_graph",
    "build_serial",
    "cuts_to_matrix",
    "derive_recipe_rate",
    "double_graph",
    "enumerate_minimal_cuts",
    "export_lp_text",
    "flow_to_xi",
    "generate",
    "is_redundant_hull",
    "is_redundant_lp",
    "makespan_via_cuts",
    "parse_lp_text",
    "predict_graph_counts",
    "predict_sizes",
    "read_instance",
    "read_matrix_csv",
    "reduce_to_minimal",
    "render_matrix_csv",
    "size_stats",
    "solve",
    "solve_capacity",
    "solve_maxflow",
    "solve_parallelization_lp",
    "write_instance",
    "write_matrix_csv",
]
