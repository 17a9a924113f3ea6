"""Geometric momentum and constrained Hamiltonians on embedded hypersurfaces."""

from .algebra import (
    AlgebraReport,
    alpha_survey,
    check_constraint,
    check_first_fcr,
    check_hermitization_identity,
    check_second_fcr,
    check_so_algebra,
    commutator,
    extract_alpha,
    hermitize,
    interior_projector,
    run_all,
    true_alpha,
)
from .geometry import (
    CurvatureData,
    ImplicitSurface,
    PhysicalParams,
    check_divergence_identity,
    check_lb_position_identity,
    geometric_potential,
    parse_surface,
    principal_curvatures,
    project_to_surface,
    unit_normal,
)
from .sphere_ops import (
    BasisSpec,
    OperatorMatrix,
    build_hamiltonian,
    build_laplace_beltrami,
    build_momentum,
    build_operator_set,
    build_position,
)
from .spectra import SpectrumTable, compare_to_analytic, spectrum

__version__ = "0.1.0"
