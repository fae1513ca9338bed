"""Local-time concentration of recurrent random walks in random environments.

The package pairs a fast quenched Monte Carlo walker (plus an exact
path-enumeration oracle) with closed-form predictors for the limiting
concentration statistics, evaluated on the extremal valley environments
where those limits are attained.
"""

from .concentration import (
    ConcentrationReport,
    best_window_fraction,
    concentration_radius,
    concentration_report,
    heavy_site_count,
    max_site_visits,
)
from .environment import (
    ConstantEnvironment,
    Environment,
    EnvironmentDistribution,
    FlatValleyEnvironment,
    IidEnvironment,
    PointedValleyEnvironment,
    Potential,
    ProbMeasure,
    SupportExtremes,
    environment_from_json,
    environment_to_json,
    exact_fraction,
    flat_valley_environment,
    flat_valley_measure,
    flat_valley_profile,
    iid_environment,
    measure_from_weights,
    pointed_valley_environment,
    pointed_valley_measure,
    pointed_valley_profile,
    solve_balanced_weight,
    stationary_measure,
    validate_distribution,
)
from .exact import ExactDistribution, exact_distribution
from .harness import (
    AggregateResult,
    ExperimentConfig,
    checkpoint_schedule,
    emit_csv,
    run_experiment,
)
from .theory import (
    DecayParams,
    TheoryReport,
    best_window_center,
    heavy_site_limit_bounds,
    min_radius_for_fraction,
    min_radius_symmetric,
    peak_mass_limit,
    plateau_length,
    saturation_slope,
    site_weight,
    theory_report,
    window_mass_limit,
)
from .walk import LocalTimeTable, Trajectory, ensemble_functionals, simulate

__version__ = "0.1.0"
