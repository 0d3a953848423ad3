"""gaflab: zeros of power-exponential Gaussian analytic functions.

Closed-form equilibrium measures for the hole-conditioned zero
distribution, an independent variational solver that re-derives them,
and seeded Monte Carlo experiments for hole probabilities and
forbidden-band depletion.
"""

from .errors import (
    ContourError,
    ConvergenceError,
    CoverageError,
    DegenerateDegreeError,
    DomainError,
    EmptyBulkError,
    GafLabError,
    ParameterError,
    SingularParameterError,
    UnsupportedRegimeError,
)
from .gaf import (
    GafSample,
    evaluate_truncated,
    expected_count,
    first_intensity,
    kernel_diag,
    log_kernel_diag,
    sample_gaf,
    standard_complex_gaussians,
    tail_bound,
)
from .measures import (
    EnergyReport,
    HoleParams,
    RadialMeasure,
    b_functional,
    equilibrium_report,
    hole_params,
    limiting_measure,
    log_energy,
    minimizer_measure,
    potential_closed,
    potential_quadrature,
    q_of_p,
    z_of_p,
)
from .mc import (
    HoleExperiment,
    conditional_linear_statistics,
    depletion_statistic,
    dominant_monomial_probability,
    estimate_hole_probability,
    make_hole_plan,
)
from .polydensity import (
    PolyDensityParams,
    a_functional,
    i_star,
    joint_density,
    make_density_params,
    s_functional,
    weighted_norm,
)
from .special import (
    TruncationPlan,
    WeightModel,
    coefficient,
    log_coefficient,
    log_gamma,
    make_truncation_plan,
    stirling_bounds,
    stirling_threshold,
)
from .varopt import (
    CONSTRAINT_GE,
    CONSTRAINT_LE,
    DiscretizedRadialMeasure,
    VarOptResult,
    atom_mass,
    forbidden_band_mass,
    minimize_constrained,
)
from .zeros import (
    TestFunction,
    ZeroSet,
    count_zeros_argument,
    find_zeros,
    linear_statistic,
    mollified_annulus,
    poly_bump,
    radial_bump,
)

__version__ = "0.1.0"
