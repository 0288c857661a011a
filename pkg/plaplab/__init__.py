"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

from .__version__ import __author__, __copyright__, __email__, __license__, __version__
from ._logger import set_logger
from .config import ProblemConfig, parse_config, parse_config_text
from .discretization import (
    AssembledQuadratic,
    DiscreteField,
    Mesh1D,
    assemble_energy,
    assemble_gradient,
    assemble_hessian,
    build_mesh,
    norms,
)
from .energy import EnergySpec, Family, Nonlinearity, PrincipalPart, check_growth_a, classify_b
from .error import (
    BadConfigError,
    BlowUpError,
    BracketFailureError,
    ConvergenceFailureError,
    DegenerateElementError,
    DegeneratePointError,
    DimTooHighError,
    FactorizationBreakdownError,
    InfiniteIndexError,
    MaxIterExceededError,
    MorseError,
    NotCriticalError,
    NotFoundError,
    PathCollapseError,
    PLapLabError,
    RegimeExcludedError,
    ResonantError,
    ShootingError,
    SingularHessianError,
    SolverError,
    SolverFailureError,
    SpectrumError,
    TableTooShortError,
)
from .morse import MorseData, assemble_Q, classify_critical_groups, compute_morse, morse_indices
from .pipeline import AZReport, HypothesisClass, Verdict, run_az_check
from .reduction import build_decomposition, classify_origin, psi_map, sample_polar_grid
from .report import emit_report
from .shooting import cross_check, integrate_ivp, shoot_bvp, shoot_eigenvalue
from .solver import (
    CriticalPointRecord,
    SolverConfig,
    minimize_over_subspace,
    mountain_pass,
    multistart_deflated,
    newton_solve,
)
from .spectrum import (
    build_spectrum_table,
    check_nonresonance,
    eigenvalue_1d,
    inertia_of,
    locate_m_infinity,
    lowest_eigenpairs,
    pi_p,
)
from .verification import run_all, run_scenario


__all__ = (
    "__author__",
    "__copyright__",
    "__email__",
    "__license__",
    "__version__",
    "BadConfigError",
    "BlowUpError",
    "BracketFailureError",
    "ConvergenceFailureError",
    "DegenerateElementError",
    "DegeneratePointError",
    "DimTooHighError",
    "FactorizationBreakdownError",
    "InfiniteIndexError",
    "MaxIterExceededError",
    "MorseError",
    "NotCriticalError",
    "NotFoundError",
    "PathCollapseError",
    "PLapLabError",
    "RegimeExcludedError",
    "ResonantError",
    "ShootingError",
    "SingularHessianError",
    "SolverError",
    "SolverFailureError",
    "SpectrumError",
    "TableTooShortError",
    "AZReport",
    "AssembledQuadratic",
    "CriticalPointRecord",
    "DiscreteField",
    "EnergySpec",
    "Family",
    "HypothesisClass",
    "Mesh1D",
    "MorseData",
    "Nonlinearity",
    "PrincipalPart",
    "ProblemConfig",
    "SolverConfig",
    "Verdict",
    "assemble_Q",
    "assemble_energy",
    "assemble_gradient",
    "assemble_hessian",
    "build_decomposition",
    "build_mesh",
    "build_spectrum_table",
    "check_growth_a",
    "check_nonresonance",
    "classify_b",
    "classify_critical_groups",
    "classify_origin",
    "compute_morse",
    "cross_check",
    "eigenvalue_1d",
    "emit_report",
    "inertia_of",
    "integrate_ivp",
    "locate_m_infinity",
    "lowest_eigenpairs",
    "minimize_over_subspace",
    "morse_indices",
    "mountain_pass",
    "multistart_deflated",
    "newton_solve",
    "norms",
    "parse_config",
    "parse_config_text",
    "pi_p",
    "psi_map",
    "run_all",
    "run_az_check",
    "run_scenario",
    "sample_polar_grid",
    "set_logger",
    "shoot_bvp",
    "shoot_eigenvalue",
)
