"""Berezin-Toeplitz approximation operators on the polarized Riemann sphere."""

from .approximation import (
    ApproxRecord,
    ApproxReport,
    apply_P0N,
    apply_PN,
    apply_PN_coherent,
    apply_QN,
    apply_tN,
    convergence_study,
    density_ratio_error,
    error_stats,
    probe_grid,
    rate_fit,
    sup_error,
    trace_mean_deviation,
)
from .errors import (
    ApproxError,
    DegenerateFit,
    EquivarianceViolation,
    GramNotPositiveDefinite,
    NonFiniteIntegrand,
    NonPositiveCurvature,
    NonPositiveDensity,
    NumericalError,
    QuadratureUnderresolved,
    ValidationError,
)
from .geometry import (
    HomogeneousRep,
    ModelGeometry,
    Perturbation,
    SpherePoint,
    make_geometry,
    sphere_to_homogeneous,
    total_volume,
    volume_density,
)
from .kernels import KernelEvaluator, bergman_B, coherent_state, density_E, kernel_K
from .quadrature import QuadratureRule, gauss_legendre, integrate, product_rule, recommended_rule
from .sections import (
    MonomialBasis,
    SectionBasis,
    closed_form_norms,
    eval_sections,
    gram_matrix,
    orthonormal_basis,
)
from .spectral_sphere import (
    SpectralTable,
    chi_via_operator,
    funk_hecke_chi,
    legendre,
    real_spherical_harmonic,
    spectral_table,
)
from .toeplitz import (
    TestFunction,
    ToeplitzMatrix,
    moment_map_value,
    toeplitz_matrix,
    trace,
    trace_identity_residual,
    traceless,
)

__version__ = "0.1.0"
