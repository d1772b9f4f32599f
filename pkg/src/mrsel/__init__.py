"""Monte Carlo study of selection bias in instrumental-variable analyses.

The package simulates cohorts under a linear structural model with a
genetic instrument, an unmeasured confounder, and a configurable
selection mechanism, then evaluates ratio (Wald) and inverse
probability weighted estimators over many replications. A catalog of
reference scenarios reproduces published summary tables with
replication-scaled tolerances.
"""
from __future__ import annotations

from .errors import (
    DegenerateDesign,
    EstimatorFailure,
    ExtremeWeights,
    InsufficientSelected,
    InvalidConfig,
    MrselError,
    NoEffectiveReps,
    NonConvergence,
    SchemaViolation,
    SeparationDetected,
    UnknownScenario,
    ZeroDenominator,
)
from .estimators import (
    EstimateResult,
    LogisticFit,
    ipw_pipeline,
    logistic_fit,
    logistic_slope,
    ols_simple,
    ols_weighted,
    ratio_estimate,
    selection_weights,
    trim_weights,
)
from .model import (
    Cohort,
    EstimatorSpec,
    OutcomeKind,
    SampleIndex,
    ScenarioConfig,
    SelectionPolicy,
    draw_sample,
    expit,
    generate_cohort,
)
from .montecarlo import (
    RepRecord,
    ScenarioResult,
    SummaryStats,
    derive_rep_seed,
    rep_generator,
    run_replication,
    run_scenario,
    summarize,
    write_per_rep_csv,
)
from .scenarios import (
    CATALOG,
    CATALOG_VERSION,
    CatalogEntry,
    Cell,
    CellCheck,
    ExpectedValue,
    catalog_lookup,
    check_cell,
    find_cell,
    list_entries,
    parse_config,
    run_cell,
    serialize_config,
)

__version__ = "1.0.0"

__all__ = [
    "CATALOG",
    "CATALOG_VERSION",
    "CatalogEntry",
    "Cell",
    "CellCheck",
    "Cohort",
    "DegenerateDesign",
    "EstimateResult",
    "EstimatorFailure",
    "EstimatorSpec",
    "ExpectedValue",
    "ExtremeWeights",
    "InsufficientSelected",
    "InvalidConfig",
    "LogisticFit",
    "MrselError",
    "NoEffectiveReps",
    "NonConvergence",
    "OutcomeKind",
    "RepRecord",
    "SampleIndex",
    "ScenarioConfig",
    "ScenarioResult",
    "SchemaViolation",
    "SelectionPolicy",
    "SeparationDetected",
    "SummaryStats",
    "UnknownScenario",
    "ZeroDenominator",
    "catalog_lookup",
    "check_cell",
    "derive_rep_seed",
    "draw_sample",
    "expit",
    "find_cell",
    "generate_cohort",
    "ipw_pipeline",
    "list_entries",
    "logistic_fit",
    "logistic_slope",
    "ols_simple",
    "ols_weighted",
    "parse_config",
    "ratio_estimate",
    "rep_generator",
    "run_cell",
    "run_replication",
    "run_scenario",
    "selection_weights",
    "serialize_config",
    "summarize",
    "trim_weights",
    "write_per_rep_csv",
]
