"""Dose optimization with weighted clinical-utility indices.

The engine estimates per-endpoint positive-outcome probabilities across
randomized dose levels (empirically or with four parametric dose-response
models), combines them into weighted utility scores, selects the optimal
biological dose, and quantifies selection uncertainty via a stratified
bootstrap.  A CLI (``cuimet``) and a JSON service expose the same
analysis pipeline.
"""

from . import errors
from .bootstrap import (
    BootstrapConfig,
    BootstrapResult,
    FitFailurePolicy,
    percentile_ci,
    replicate_rng,
    resample_stratified,
    run_bootstrap,
)
from .estimation import (
    DEFAULT_FIT_CONFIG,
    FitConfig,
    MarginalFit,
    ModelKind,
    ModelVariant,
    StageOneEstimates,
    estimate_empirical,
    fit_emax,
    fit_endpoint,
    fit_exponential,
    fit_logit_linear,
    fit_logit_quadratic,
    predict_curve,
    stage_one_logodds,
)
from .simulation import (
    BUILTIN_SCENARIOS,
    ScenarioSpec,
    builtin_scenario,
    inverse_normal_cdf,
    read_scenario,
    realized_rates,
    sample_mvn,
    simulate_dataset,
    write_scenario,
)
from .trial_data import (
    EndpointSpec,
    ParseOptions,
    PatientRecord,
    TrialDataset,
    dataset_from_raw,
    parse_dataset,
    raw_event_rate,
)
from .utility import (
    NormalizedWeights,
    ObdSelection,
    UtilityTable,
    WeightScheme,
    build_utility_table,
    compute_um,
    compute_uwm,
    normalize_weights,
    select_obd,
)

__version__ = "0.1.0"
