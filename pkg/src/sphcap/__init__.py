"""Storage-capacity bounds for the spherical perceptron.

Analytic side: the classical capacity curve 1/f_gar(kappa) and the
exponentially lifted bound that lowers it for negative margins.
Empirical side: seeded Monte Carlo feasibility experiments on random
instances, with convex certificates for kappa >= 0.
"""

from .scalars import (
    KappaRangeWarning,
    NormalScalars,
    QuadratureError,
    alpha_c_upper,
    f_gar_closed,
    f_gar_quadrature,
    std_normal,
)
from .lifted import (
    BoundEvaluation,
    Iper1Intermediates,
    OptimizationError,
    gamma_hat,
    i_per,
    i_per1_closed,
    i_per1_mc,
    i_sph,
    infeasibility_condition,
    lower_bound_L,
)
from .capacity import (
    BracketError,
    CapacityRecord,
    TableComparison,
    TableRow,
    alpha_c_lowered,
    reproduce_tables,
    sweep,
)
from .empirical import (
    ConvexCertificate,
    EmpiricalTrialResult,
    FeasibilitySummary,
    PerceptronInstance,
    convex_certify,
    estimate_feasibility,
    feasibility_tolerance,
    inner_max,
    minimize_sphere,
    objective_and_subgradient,
    sample_instance,
    verify_stability,
)

__version__ = "0.1.0"

__all__ = [
    "KappaRangeWarning",
    "NormalScalars",
    "QuadratureError",
    "alpha_c_upper",
    "f_gar_closed",
    "f_gar_quadrature",
    "std_normal",
    "BoundEvaluation",
    "Iper1Intermediates",
    "OptimizationError",
    "gamma_hat",
    "i_per",
    "i_per1_closed",
    "i_per1_mc",
    "i_sph",
    "infeasibility_condition",
    "lower_bound_L",
    "BracketError",
    "CapacityRecord",
    "TableComparison",
    "TableRow",
    "alpha_c_lowered",
    "reproduce_tables",
    "sweep",
    "ConvexCertificate",
    "EmpiricalTrialResult",
    "FeasibilitySummary",
    "PerceptronInstance",
    "convex_certify",
    "estimate_feasibility",
    "feasibility_tolerance",
    "inner_max",
    "minimize_sphere",
    "objective_and_subgradient",
    "sample_instance",
    "verify_stability",
    "__version__",
]
