"""cmclab: a numerical laboratory for CMC surfaces in product spaces M2 x R.

The package represents a base surface as a conformal chart, builds
conformally parametrized surfaces in chart x R, verifies the structure
equations and angle-function identities as numerical residuals, solves
the prescribed-mean-curvature graph equation with its flux obstruction,
and computes the spectral quantities (Dirichlet eigenvalues, Cheeger
ratios, stability spectra) used by the classification theorems.
"""

__version__ = "0.1.0"

from .ambient import (
    BallGeometry,
    ConformalChart,
    CurvatureSummary,
    Disk,
    Plane,
    Rectangle,
    ball_geometry,
    chart_from_config,
    curvature_infimum,
    gauss_curvature,
    resolve_chart_reference,
)
from .immersion import (
    ConformalImmersion,
    FundamentalData,
    QField,
    SubharmonicProfile,
    ar_differential,
    f_subharmonic,
    flip_normal,
    induced_data,
    jacobi_residual,
    load_immersion,
    nu_gradient_identity,
    nu_laplacian_identity,
    save_immersion,
    verify_structure,
)
from .catalog import (
    Classification,
    ModelDescriptor,
    check_descriptor,
    classify,
    slice_surface,
    tilted_plane,
    vertical_cylinder,
    vertical_plane,
)
from .graphs import (
    FluxDiagnostics,
    GraphProblem,
    GraphSolution,
    NecessaryCondition,
    SolverParams,
    coordinate_ball_radius,
    critical_radius,
    flux_check,
    geodesic_ball_problem,
    graph_to_geometry,
    load_solution,
    necessary_condition,
    save_solution,
    solve_graph,
)
from .spectral import (
    CheegerCheck,
    CheegerEstimate,
    InstabilityCheck,
    MinimalSquare,
    SpectralProblem,
    SpectrumResult,
    cheeger_ball_family,
    cheeger_inequality_check,
    dirichlet_lambda1_ball,
    dirichlet_lambda1_ball_2d,
    instability_condition,
    rectangle_lambda1_closed_form,
    minimal_unstable_square,
    solve_spectral,
    stability_spectrum,
)
from .reporting import (
    CheckRecord,
    VerificationReport,
    emit_report,
    parse_report,
    record_from_stats,
    render_text,
)
from .scenarios import (
    Scenario,
    Step,
    builtin_scenario,
    load_scenario,
    predict,
    run_scenario,
    scenario_from_mapping,
)
