"""Series least squares on sumspaces: estimation, geometry, and diagnostics.

The estimand is the first component f1 of an additive regression
Y = f1(X1) + f2(X2) + noise. The estimator projects onto a sum of
finite-dimensional spaces V1 + V2, re-projects the first component onto a
subspace W1, and truncates at a sup-norm level. The geometry submodule
quantifies when this works (minimal angles, Hilbert-Schmidt norms, Gram
concentration); the harness verifies the predicted risk behavior by
simulation.
"""

from .backfit import (
    BackfitReport,
    backfit_decompose,
    empirical_rho,
    trace_diagnostics,
    trace_inequalities_selftest,
)
from .basis import HermiteBasis, TensorBasis, UnivariateBasis, sup_norm_constant, tensor_fourier
from .errors import (
    ConfigError,
    GramError,
    NonConvergenceError,
    NumericalError,
    RankDeficiencyError,
    SingularBlockError,
)
from .estimator import (
    Dataset,
    EstimatorConfig,
    FitResult,
    check_edelta,
    design_matrix,
    evaluate_estimate,
    fit,
    fit_sumspace,
    oracle_fit,
    second_stage,
    truncate,
)
from .harness import (
    EdeltaStudy,
    ModelDims,
    OracleComparison,
    RateFit,
    RiskReport,
    build_model,
    default_model_rule,
    fit_rate,
    fixed_model_rule,
    main,
    parse_config,
    render_config,
    run_edelta_study,
    run_oracle_comparison,
    run_risk_experiment,
    system_phi,
)
from .sim import (
    HolderFunction,
    ScenarioConfig,
    TrigFunction,
    TruthFunctions,
    generate,
    holder_seminorm,
    make_holder_function,
    make_sobolev_function,
    make_truth,
    sample_design,
    spike_function,
)
from .spaces import (
    AngleEquivalenceReport,
    ComponentSpace,
    DesignLaw,
    GeometryReport,
    IntegrationSpec,
    SumspaceModel,
    angle_equivalence_check,
    bivariate_gaussian,
    compute_geometry,
    eigen_spectrum,
    equicorrelated_copula,
    gaussian_copula,
    hs_norm,
    independent_uniform,
    minimal_angle,
    population_gram,
    single_system_gram,
)

__version__ = "0.1.0"
