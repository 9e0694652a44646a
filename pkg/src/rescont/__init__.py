from rescont._version import __version__
from rescont.branch import Branch, BranchCollector, ContinuationPoint
from rescont.config import RunConfig, SolverConfig, load_run_config, load_solver_config
from rescont.continuation import (
    ContinuationOptions,
    ResidualMap,
    detect_branch_point,
    jacobian,
    predict_correct,
    switch_branch,
    trace_branch,
)
from rescont.exceptions import (
    ConfigError,
    NumericalError,
    RescontError,
)
from rescont.potentials import ChannelSet, PotentialModel, effective_range, evaluate
from rescont.radial_solver import AsymptoticSample, RadialGrid, propagate
from rescont.rootfinding import RootResult, classify_root, newton_complex, scan_bound_states
from rescont.scattering import (
    DeterminantMap,
    ResidualValue,
    ScatteringResidual,
    SMatrix,
    determinant_map,
    extract_smatrix,
    regularized_det,
    residual,
)
from rescont.special_functions import riccati_h, riccati_j, riccati_n

__all__ = [
    "AsymptoticSample",
    "Branch",
    "BranchCollector",
    "ChannelSet",
    "ConfigError",
    "ContinuationOptions",
    "ContinuationPoint",
    "DeterminantMap",
    "NumericalError",
    "PotentialModel",
    "RadialGrid",
    "RescontError",
    "ResidualMap",
    "ResidualValue",
    "RootResult",
    "RunConfig",
    "SMatrix",
    "ScatteringResidual",
    "SolverConfig",
    "__version__",
    "classify_root",
    "detect_branch_point",
    "determinant_map",
    "effective_range",
    "evaluate",
    "extract_smatrix",
    "jacobian",
    "load_run_config",
    "load_solver_config",
    "newton_complex",
    "predict_correct",
    "propagate",
    "regularized_det",
    "residual",
    "riccati_h",
    "riccati_j",
    "riccati_n",
    "scan_bound_states",
    "switch_branch",
    "trace_branch",
]
