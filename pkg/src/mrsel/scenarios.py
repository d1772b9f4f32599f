"""Scenario catalog, config file parsing, and reference-value checks.

The catalog registers every simulation table this package reproduces:
each entry holds the cell configurations plus the published summary
values with Monte Carlo tolerances, so a run can be compared against
its reference automatically. Tolerances are stored at the reference
replication count (10000) and rescaled to the replication count
actually used.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import InvalidConfig, SchemaViolation, UnknownScenario
from .model import (
    DEFAULT_MASTER_SEED,
    DEFAULT_POPULATION_SIZE,
    DEFAULT_REPS,
    DEFAULT_SAMPLE_SIZE,
    EstimatorSpec,
    OutcomeKind,
    ScenarioConfig,
    SelectionPolicy,
)
from .montecarlo import ScenarioResult, SummaryStats, run_scenario

CATALOG_VERSION = "1"

# Reference replication count the stored tolerances correspond to.
REF_REPS = 10_000

# Reported values are rounded to 3 decimals (rates to 0.1 percentage
# points), so every comparison gets half an ulp of printing slack.
VALUE_ROUND_SLACK = 0.0005
RATE_ROUND_SLACK = 0.001

RATE_FLOOR = 0.01          # never demand a rate closer than 1 point
MEDSE_REL = 0.03           # relative band for median-SE columns
MEDSE_REL_IPW = 0.15       # wider band for weighted analyses
SIGN_GUARD = 3.0           # |median| must exceed this many MC SEs

COLUMNS = ("mean", "median", "sd", "med_se", "rejection", "median_sign")

_SQ02 = math.sqrt(0.02)
_SQ50 = math.sqrt(0.5)


@dataclass(frozen=True)
class ExpectedValue:
    """One reference summary value with its tolerance model.

    The runtime tolerance is ``max(floor, tol_stat * sqrt(REF_REPS/R))
    + tol_fixed`` where R is the effective replication count; the fixed
    part absorbs rounding of the published value. ``median_sign`` rows
    ignore the tolerance and instead require the observed median to
    have the stated sign and exceed SIGN_GUARD Monte Carlo standard
    errors in magnitude.
    """

    column: str
    value: float
    tol_stat: float = 0.0
    tol_fixed: float = 0.0
    tol_floor: float = 0.0
    citation: str = ""
    informational: bool = False

    def runtime_tolerance(self, n_effective: int) -> float:
        scale = math.sqrt(REF_REPS / max(1, n_effective))
        return max(self.tol_floor, self.tol_stat * scale) + self.tol_fixed


@dataclass(frozen=True)
class Cell:
    """One simulation configuration with its reference values."""

    scenario_id: str
    cell_key: str
    config: ScenarioConfig
    expectations: dict[str, tuple[ExpectedValue, ...]]
    note: str = ""


@dataclass(frozen=True)
class CatalogEntry:
    entry_id: str
    title: str
    description: str
    cells: tuple[Cell, ...]
    note: str = ""

    @property
    def n_expected(self) -> int:
        return sum(len(v) for c in self.cells for v in c.expectations.values())


# ---------------------------------------------------------------------------
# tolerance constructors

def _mean(value: float, sd_ref: float, cite: str, *, info: bool = False) -> ExpectedValue:
    return ExpectedValue("mean", value, tol_stat=4.0 * sd_ref / math.sqrt(REF_REPS),
                         tol_fixed=VALUE_ROUND_SLACK, citation=cite, informational=info)


def _median(value: float, sd_ref: float, medse_ref: float | None, cite: str, *,
            info: bool = False) -> ExpectedValue:
    # 1.2533 = sqrt(pi/2): asymptotic inflation of the median vs the mean.
    # Capping the spread at twice the median SE keeps the band sane for
    # heavy-tailed cells whose SD is dominated by outliers.
    sdc = sd_ref if medse_ref is None else min(sd_ref, 2.0 * medse_ref)
    return ExpectedValue("median", value, tol_stat=4.0 * 1.2533 * sdc / math.sqrt(REF_REPS),
                         tol_fixed=VALUE_ROUND_SLACK, citation=cite, informational=info)


def _sd(value: float, cite: str, *, info: bool = False) -> ExpectedValue:
    return ExpectedValue("sd", value, tol_stat=4.0 * value / math.sqrt(2.0 * REF_REPS),
                         tol_fixed=VALUE_ROUND_SLACK, citation=cite, informational=info)


def _medse(value: float, cite: str, *, rel: float = MEDSE_REL, info: bool = False) -> ExpectedValue:
    return ExpectedValue("med_se", value, tol_fixed=rel * abs(value) + VALUE_ROUND_SLACK,
                         citation=cite, informational=info)


def _rate(percent: float, cite: str, *, info: bool = False) -> ExpectedValue:
    p = percent / 100.0
    return ExpectedValue("rejection", p, tol_stat=4.0 * math.sqrt(p * (1.0 - p) / REF_REPS),
                         tol_fixed=RATE_ROUND_SLACK, tol_floor=RATE_FLOOR,
                         citation=cite, informational=info)


def _sign(direction: int, cite: str) -> ExpectedValue:
    return ExpectedValue("median_sign", float(direction), citation=cite)


# ---------------------------------------------------------------------------
# catalog construction

def _scen1(**overrides) -> ScenarioConfig:
    """Baseline configuration: null effect, selection on risk factor only."""
    kwargs = dict(alpha_g=_SQ02, alpha_u=_SQ50, beta_x=0.0, beta_u=_SQ50,
                  gamma_0=0.0, gamma_x=0.0, gamma_u=0.0,
                  reps=DEFAULT_REPS, master_seed=DEFAULT_MASTER_SEED)
    kwargs.update(overrides)
    return ScenarioConfig(**kwargs)


_RATIO_PLAN = (EstimatorSpec("ratio"),)
_IPW_PLAN = (EstimatorSpec("ipw_ratio"),
             EstimatorSpec("ipw_ratio", trim_percentile=99.0),
             EstimatorSpec("ipw_ratio", trim_percentile=95.0))
_LOGASSOC_PLAN = (EstimatorSpec("logistic_association"),)
_BINARY_RATIO_PLAN = (EstimatorSpec("ratio"), EstimatorSpec("logistic_association"))

# Spread of the ratio estimate in the baseline table, by |gamma_x|; used
# to derive tolerance inputs for tables that do not print an SD column.
_BASE_SD = {0.0: 0.071, 0.2: 0.072, 0.5: 0.077, 1.0: 0.089, 2.0: 0.123}


_TABLE1_ROWS = (
    # gamma_x, mean, median, sd, med_se, type1 %
    (-2.0, -0.296, -0.289, 0.123, 0.106, 77.7),
    (-1.0, -0.107, -0.103, 0.089, 0.083, 24.3),
    (-0.5, -0.032, -0.029, 0.077, 0.074, 6.6),
    (-0.2, -0.007, -0.004, 0.072, 0.071, 5.0),
    (0.0, -0.002, 0.000, 0.071, 0.071, 5.1),
    (0.2, -0.007, -0.004, 0.072, 0.071, 4.8),
    (0.5, -0.032, -0.030, 0.076, 0.074, 6.6),
    (1.0, -0.107, -0.103, 0.089, 0.083, 23.6),
    (2.0, -0.296, -0.289, 0.123, 0.106, 77.9),
)


def _build_table1() -> CatalogEntry:
    cells = []
    for gx, mean, med, sd, medse, t1 in _TABLE1_ROWS:
        cite = f"Table 1, gamma_x = {gx:g}"
        cfg = _scen1(gamma_x=gx, estimator_plan=_RATIO_PLAN)
        exps = (_mean(mean, sd, cite), _median(med, sd, medse, cite),
                _sd(sd, cite), _medse(medse, cite), _rate(t1, cite))
        key = f"gX={gx:g}"
        cells.append(Cell(f"table1/{key}", key, cfg, {"ratio": exps}))
    return CatalogEntry(
        entry_id="table1",
        title="Baseline: selection on the risk factor only",
        description=("Ratio estimates under a null causal effect when selection "
                     "probability depends on the risk factor alone; nine selection "
                     "strengths, five summary statistics each."),
        cells=tuple(cells),
    )


# Scenario blocks of the second table: medians and Type 1 error rates only.
_S2 = {  # alpha_g^2 -> rows of (gamma_x, median, type1 %)
    0.01: ((-1.0, -0.101, 13.9), (-0.5, -0.030, 5.9), (-0.2, -0.004, 5.2),
           (0.0, -0.001, 5.0), (0.2, -0.006, 5.3), (0.5, -0.027, 5.6), (1.0, -0.104, 14.0)),
    0.05: ((-1.0, -0.104, 50.4), (-0.5, -0.030, 9.8), (-0.2, -0.005, 5.0),
           (0.0, -0.001, 5.1), (0.2, -0.005, 5.2), (0.5, -0.029, 9.8), (1.0, -0.103, 49.9)),
    0.1: ((-1.0, -0.103, 79.3), (-0.5, -0.029, 14.1), (-0.2, -0.005, 5.3),
          (0.0, 0.000, 4.9), (0.2, -0.005, 5.4), (0.5, -0.029, 13.8), (1.0, -0.102, 79.7)),
}

_S3 = {  # alpha_u^2 -> rows
    0.2: ((-1.0, -0.064, 12.1), (-0.5, -0.018, 5.7), (-0.2, -0.003, 4.6),
          (0.0, 0.002, 4.9), (0.2, -0.004, 4.8), (0.5, -0.021, 5.6), (1.0, -0.067, 12.2)),
    0.5: ((-1.0, -0.105, 24.3), (-0.5, -0.030, 6.6), (-0.2, -0.005, 5.4),
          (0.0, 0.000, 4.8), (0.2, -0.005, 5.4), (0.5, -0.029, 6.6), (1.0, -0.103, 24.4)),
    0.8: ((-1.0, -0.130, 35.1), (-0.5, -0.039, 8.0), (-0.2, -0.006, 5.1),
          (0.0, 0.000, 5.2), (0.2, -0.007, 5.1), (0.5, -0.038, 7.9), (1.0, -0.131, 35.8)),
}

_S4 = {  # beta_u^2 -> rows
    0.2: ((-1.0, -0.065, 11.8), (-0.5, -0.019, 5.7), (-0.2, -0.002, 5.0),
          (0.0, 0.000, 5.3), (0.2, -0.002, 5.1), (0.5, -0.018, 5.4), (1.0, -0.065, 12.1)),
    0.5: ((-1.0, -0.104, 24.2), (-0.5, -0.029, 6.4), (-0.2, -0.005, 5.1),
          (0.0, -0.001, 4.9), (0.2, -0.003, 4.9), (0.5, -0.029, 6.6), (1.0, -0.100, 22.7)),
    0.8: ((-1.0, -0.131, 35.5), (-0.5, -0.038, 7.9), (-0.2, -0.007, 4.6),
          (0.0, 0.000, 4.9), (0.2, -0.005, 5.2), (0.5, -0.039, 8.0), (1.0, -0.129, 34.8)),
}

_S5 = {  # gamma_u -> rows (wider gamma_x range)
    -1.0: ((-2.0, -0.293, 87.4), (-1.0, -0.145, 45.3), (-0.5, -0.069, 16.0),
           (-0.2, -0.025, 6.6), (0.0, 0.002, 4.9), (0.2, 0.023, 6.4),
           (0.5, 0.046, 9.7), (1.0, 0.042, 9.1), (2.0, -0.112, 18.6)),
    0.0: ((-2.0, -0.290, 78.3), (-1.0, -0.103, 24.0), (-0.5, -0.028, 6.9),
          (-0.2, -0.004, 5.4), (0.0, 0.000, 5.0), (0.2, -0.005, 4.8),
          (0.5, -0.029, 6.4), (1.0, -0.101, 23.2), (2.0, -0.291, 77.7)),
    1.0: ((-2.0, -0.110, 18.1), (-1.0, 0.043, 8.9), (-0.5, 0.043, 10.0),
          (-0.2, 0.023, 6.3), (0.0, -0.001, 5.5), (0.2, -0.025, 6.3),
          (0.5, -0.068, 15.0), (1.0, -0.146, 45.3), (2.0, -0.293, 87.1)),
}

_S6 = {  # (gamma_0, sample size) -> rows
    (-1.0, 10_000): ((-1.0, -0.103, 23.5), (-0.5, -0.024, 6.4), (-0.2, -0.007, 4.9),
                     (0.0, 0.001, 4.4), (0.2, -0.003, 5.2), (0.5, -0.027, 6.3), (1.0, -0.104, 24.1)),
    (-2.0, 1_500): ((-1.0, -0.086, 6.7), (-0.5, -0.019, 4.8), (-0.2, -0.002, 5.0),
                    (0.0, -0.002, 5.2), (0.2, 0.000, 4.9), (0.5, -0.018, 4.9), (1.0, -0.081, 6.9)),
    (-2.4, 500): ((-1.0, -0.064, 5.4), (-0.5, 0.000, 5.0), (-0.2, -0.001, 4.9),
                  (0.0, -0.006, 4.9), (0.2, -0.002, 5.0), (0.5, -0.012, 5.4), (1.0, -0.072, 5.7)),
}


def _build_table2() -> CatalogEntry:
    cells = []

    def add(key: str, cfg: ScenarioConfig, med: float, t1: float,
            sd_scale: float, gx: float, cite: str) -> None:
        sd_ref = _BASE_SD[abs(gx)] * sd_scale
        exps = (_median(med, sd_ref, None, cite), _rate(t1, cite))
        cells.append(Cell(f"table2/{key}", key, cfg, {"ratio": exps}))

    for ag2, rows in _S2.items():
        for gx, med, t1 in rows:
            add(f"s2.aG2={ag2:g}.gX={gx:g}",
                _scen1(alpha_g=math.sqrt(ag2), gamma_x=gx, estimator_plan=_RATIO_PLAN),
                med, t1, math.sqrt(0.02 / ag2), gx, f"Table 2, instrument strength block, alpha_g^2 = {ag2:g}")
    for au2, rows in _S3.items():
        for gx, med, t1 in rows:
            add(f"s3.aU2={au2:g}.gX={gx:g}",
                _scen1(alpha_u=math.sqrt(au2), gamma_x=gx, estimator_plan=_RATIO_PLAN),
                med, t1, 1.0, gx, f"Table 2, confounder-risk factor block, alpha_u^2 = {au2:g}")
    for bu2, rows in _S4.items():
        for gx, med, t1 in rows:
            add(f"s4.bU2={bu2:g}.gX={gx:g}",
                _scen1(beta_u=math.sqrt(bu2), gamma_x=gx, estimator_plan=_RATIO_PLAN),
                med, t1, 1.0, gx, f"Table 2, confounder-outcome block, beta_u^2 = {bu2:g}")
    for gu, rows in _S5.items():
        for gx, med, t1 in rows:
            add(f"s5.gU={gu:g}.gX={gx:g}",
                _scen1(gamma_u=gu, gamma_x=gx, estimator_plan=_RATIO_PLAN),
                med, t1, 1.0, gx, f"Table 2, confounder-selection block, gamma_u = {gu:g}")
    for (g0, n), rows in _S6.items():
        for gx, med, t1 in rows:
            add(f"s6.g0={g0:g}.gX={gx:g}",
                _scen1(gamma_0=g0, gamma_x=gx, sample_size=n, estimator_plan=_RATIO_PLAN),
                med, t1, math.sqrt(10_000 / n), gx, f"Table 2, selection prevalence block, gamma_0 = {g0:g}")

    return CatalogEntry(
        entry_id="table2",
        title="Parameter sweeps around the baseline",
        description=("Median estimate and Type 1 error rate while varying instrument "
                     "strength, confounder effects on risk factor/outcome/selection, "
                     "and selection prevalence."),
        cells=tuple(cells),
        note=("Spread references for the median tolerances are derived from the "
              "baseline SD column, rescaled by instrument strength and sample size."),
    )


_IPW_IDS = ("ipw_ratio", "ipw_ratio_trim99", "ipw_ratio_trim95")

_T3 = {  # gamma_u -> rows of (gamma_x, (med, sd, med_se, type1 %) per trim 100/99/95)
    0.0: (
        (-2.0, (-0.008, 6.499, 0.072, 39.6), (-0.113, 0.129, 0.085, 33.8), (-0.206, 0.124, 0.096, 56.8)),
        (-1.0, (-0.002, 0.091, 0.071, 11.4), (-0.032, 0.089, 0.075, 10.7), (-0.076, 0.091, 0.080, 17.8)),
        (-0.5, (-0.002, 0.076, 0.071, 6.3), (-0.010, 0.076, 0.072, 6.3), (-0.027, 0.078, 0.074, 7.2)),
        (-0.2, (0.000, 0.072, 0.071, 5.2), (-0.002, 0.072, 0.071, 5.1), (-0.007, 0.073, 0.072, 5.1)),
        (0.0, (0.001, 0.072, 0.071, 5.0), (0.001, 0.072, 0.071, 5.0), (0.001, 0.072, 0.071, 5.0)),
        (0.2, (0.001, 0.072, 0.071, 5.0), (-0.001, 0.072, 0.071, 4.9), (-0.006, 0.073, 0.072, 5.1)),
        (0.5, (0.001, 0.076, 0.071, 6.5), (-0.008, 0.076, 0.072, 6.4), (-0.024, 0.078, 0.074, 6.7)),
        (1.0, (-0.001, 0.091, 0.071, 11.3), (-0.032, 0.089, 0.075, 10.7), (-0.074, 0.092, 0.080, 17.8)),
        (2.0, (-0.008, 0.902, 0.072, 38.8), (-0.118, 0.130, 0.085, 34.2), (-0.210, 0.125, 0.096, 58.1)),
    ),
    -1.0: (
        (-2.0, (-0.031, 1.226, 0.058, 49.0), (-0.130, 0.109, 0.071, 47.3), (-0.207, 0.103, 0.081, 69.5)),
        (-1.0, (0.009, 0.110, 0.058, 24.0), (-0.043, 0.086, 0.065, 17.6), (-0.097, 0.086, 0.072, 30.7)),
        (-0.5, (0.025, 0.076, 0.059, 14.7), (-0.003, 0.075, 0.063, 9.5), (-0.040, 0.077, 0.068, 11.6)),
        (-0.2, (0.033, 0.069, 0.061, 11.9), (0.016, 0.069, 0.063, 7.9), (-0.010, 0.072, 0.067, 6.7)),
        (0.0, (0.040, 0.067, 0.063, 11.8), (0.029, 0.067, 0.064, 8.8), (0.010, 0.069, 0.066, 6.0)),
        (0.2, (0.043, 0.066, 0.064, 10.6), (0.037, 0.066, 0.065, 9.1), (0.024, 0.068, 0.067, 6.8)),
        (0.5, (0.049, 0.067, 0.067, 10.9), (0.047, 0.067, 0.068, 10.5), (0.043, 0.068, 0.068, 9.7)),
        (1.0, (0.050, 0.074, 0.074, 10.9), (0.047, 0.074, 0.074, 10.3), (0.041, 0.075, 0.075, 8.9)),
        (2.0, (0.032, 0.123, 0.086, 16.9), (-0.013, 0.117, 0.093, 11.0), (-0.067, 0.119, 0.100, 13.9)),
    ),
    1.0: (
        (-2.0, (0.030, 0.122, 0.087, 16.7), (-0.015, 0.117, 0.093, 10.6), (-0.070, 0.119, 0.100, 13.8)),
        (-1.0, (0.052, 0.072, 0.073, 10.9), (0.049, 0.072, 0.074, 10.1), (0.042, 0.073, 0.075, 8.6)),
        (-0.5, (0.047, 0.067, 0.067, 11.0), (0.045, 0.068, 0.067, 10.5), (0.041, 0.068, 0.068, 9.5)),
        (-0.2, (0.045, 0.067, 0.064, 11.9), (0.039, 0.067, 0.065, 10.0), (0.026, 0.069, 0.067, 7.4)),
        (0.0, (0.039, 0.066, 0.062, 11.4), (0.028, 0.067, 0.064, 8.6), (0.009, 0.069, 0.066, 6.1)),
        (0.2, (0.033, 0.070, 0.061, 12.0), (0.016, 0.070, 0.063, 8.1), (-0.011, 0.072, 0.067, 6.9)),
        (0.5, (0.025, 0.076, 0.060, 14.1), (-0.004, 0.074, 0.063, 9.1), (-0.042, 0.076, 0.068, 11.5)),
        (1.0, (0.005, 0.102, 0.058, 24.1), (-0.047, 0.085, 0.065, 17.9), (-0.100, 0.086, 0.072, 31.0)),
        (2.0, (-0.034, 1.709, 0.058, 48.5), (-0.132, 0.110, 0.071, 48.0), (-0.209, 0.104, 0.081, 70.2)),
    ),
}

# Untrimmed weighted estimates whose SD is dominated by a handful of
# extreme-weight replications; their published spread is not a stable
# target (mirror-symmetric entries in the source differ by up to 7x),
# so these SD cells are checked but never gate a run.
_T3_UNSTABLE_SD = {
    0.0: (-2.0, 2.0),
    -1.0: (-2.0, -1.0),
    1.0: (1.0, 2.0),
}


def _ipw_expectations(vals: tuple[float, float, float, float], cite: str,
                      sd_informational: bool) -> tuple[ExpectedValue, ...]:
    med, sd, medse, t1 = vals
    return (_median(med, sd, medse, cite),
            _sd(sd, cite, info=sd_informational),
            _medse(medse, cite, rel=MEDSE_REL_IPW),
            _rate(t1, cite))


def _build_table3() -> CatalogEntry:
    cells = []
    for gu, rows in _T3.items():
        for gx, *per_trim in rows:
            cite = f"Table 3, gamma_u = {gu:g}, gamma_x = {gx:g}"
            cfg = _scen1(gamma_u=gu, gamma_x=gx, estimator_plan=_IPW_PLAN)
            exps = {}
            for est_id, vals in zip(_IPW_IDS, per_trim):
                info = est_id == "ipw_ratio" and gx in _T3_UNSTABLE_SD[gu]
                exps[est_id] = _ipw_expectations(vals, cite, info)
            key = f"gU={gu:g}.gX={gx:g}"
            cells.append(Cell(f"table3/{key}", key, cfg, exps))
    return CatalogEntry(
        entry_id="table3",
        title="Inverse probability weighting with trimming",
        description=("Weighted ratio estimates using selection probabilities fitted "
                     "on the full population from the risk factor alone, with weights "
                     "untrimmed or capped at their 99th/95th percentile."),
        cells=tuple(cells),
        note=("Untrimmed SD cells at extreme selection strength are informational "
              "only: a few huge weights dominate the spread, so it is not a stable "
              "reproduction target."),
    )


_TABLE4_ROWS = (
    # beta_u = gamma_u, beta_0, mean (population arm), mean (selected arm), power %
    (0.0, -1.4, 0.149, 0.149, 93.5),
    (0.2, -1.6, 0.148, 0.145, 91.3),
    (0.5, -1.9, 0.142, 0.133, 86.1),
    (1.0, -2.5, 0.131, 0.102, 67.7),
    (1.5, -3.3, 0.120, 0.077, 44.0),
    (2.0, -4.0, 0.107, 0.061, 30.4),
)

# Spread of the logistic slope at n = 3313 is well under 0.15 in every
# row, so a single statistical band covers the whole mean column.
_TABLE4_MEAN_TOL = 0.006


def _build_table4() -> CatalogEntry:
    cells = []
    for bu, b0, mean_pop, mean_sel, power in _TABLE4_ROWS:
        cite = f"Table 4, beta_u = gamma_u = {bu:g}"
        common = dict(alpha_g=math.sqrt(0.36), alpha_u=math.sqrt(0.32),
                      beta_x=0.25, beta_u=bu, gamma_0=-2.0, gamma_x=0.25,
                      gamma_u=bu, outcome_kind=OutcomeKind.BINARY, beta_0=b0,
                      sample_size=3313, reps=DEFAULT_REPS,
                      master_seed=DEFAULT_MASTER_SEED,
                      estimator_plan=_LOGASSOC_PLAN)
        pop_cfg = ScenarioConfig(selection_policy=SelectionPolicy.FIRST_N_POPULATION, **common)
        sel_cfg = ScenarioConfig(selection_policy=SelectionPolicy.FIRST_N_SELECTED, **common)
        pop_exp = (ExpectedValue("mean", mean_pop, tol_stat=_TABLE4_MEAN_TOL,
                                 tol_fixed=VALUE_ROUND_SLACK, citation=cite),)
        sel_exp = (ExpectedValue("mean", mean_sel, tol_stat=_TABLE4_MEAN_TOL,
                                 tol_fixed=VALUE_ROUND_SLACK, citation=cite),
                   _rate(power, cite))
        kp = f"bU={bu:g}.arm=population"
        ks = f"bU={bu:g}.arm=selected"
        cells.append(Cell(f"lpa.table4/{kp}", kp, pop_cfg, {"logistic_association": pop_exp}))
        cells.append(Cell(f"lpa.table4/{ks}", ks, sel_cfg, {"logistic_association": sel_exp}))
    return CatalogEntry(
        entry_id="lpa.table4",
        title="Lipoprotein(a) example: strong instrument, binary outcome",
        description=("Genetic association with a binary outcome estimated by logistic "
                     "regression in the first n participants of the population versus "
                     "the first n selected participants, as confounding strength grows."),
        cells=tuple(cells),
        note=("Power is evaluated on the selected arm. The source text quotes 45.5% "
              "and 31.0% for the two strongest-confounding rows while its table "
              "prints 44.0% and 30.4%; the table values are the reference here."),
    )


_A1 = {  # (sign of alpha_u, sign of beta_u) -> rows (gx, med, sd, medse, type1 %)
    ("-", "+"): ((-2.0, 0.290, 0.122, 0.106, 78.1), (-1.0, 0.103, 0.089, 0.083, 23.4),
                 (-0.5, 0.029, 0.076, 0.074, 7.0), (-0.2, 0.004, 0.071, 0.071, 4.6),
                 (0.0, 0.000, 0.070, 0.071, 4.8), (0.2, 0.006, 0.072, 0.071, 5.0),
                 (0.5, 0.029, 0.077, 0.074, 6.7), (1.0, 0.102, 0.089, 0.083, 23.4),
                 (2.0, 0.292, 0.120, 0.106, 78.7)),
    ("+", "-"): ((-2.0, 0.292, 0.119, 0.106, 78.3), (-1.0, 0.102, 0.089, 0.083, 23.0),
                 (-0.5, 0.031, 0.076, 0.074, 6.6), (-0.2, 0.005, 0.072, 0.071, 5.2),
                 (0.0, -0.001, 0.072, 0.071, 5.1), (0.2, 0.005, 0.073, 0.071, 5.3),
                 (0.5, 0.029, 0.077, 0.074, 6.9), (1.0, 0.103, 0.087, 0.083, 23.0),
                 (2.0, 0.288, 0.122, 0.106, 77.4)),
    ("-", "-"): ((-2.0, -0.289, 0.121, 0.106, 77.7), (-1.0, -0.104, 0.089, 0.083, 24.1),
                 (-0.5, -0.029, 0.077, 0.074, 7.1), (-0.2, -0.005, 0.072, 0.071, 5.1),
                 (0.0, -0.001, 0.071, 0.071, 5.0), (0.2, -0.005, 0.072, 0.071, 5.1),
                 (0.5, -0.028, 0.075, 0.074, 6.6), (1.0, -0.102, 0.089, 0.083, 23.2),
                 (2.0, -0.289, 0.121, 0.106, 77.9)),
}


def _build_tableA1() -> CatalogEntry:
    cells = []
    for (sa, sb), rows in _A1.items():
        au = _SQ50 if sa == "+" else -_SQ50
        bu = _SQ50 if sb == "+" else -_SQ50
        for gx, med, sd, medse, t1 in rows:
            cite = f"Table A1, alpha_u {sa}, beta_u {sb}"
            cfg = _scen1(alpha_u=au, beta_u=bu, gamma_x=gx, estimator_plan=_RATIO_PLAN)
            exps = (_median(med, sd, medse, cite), _sd(sd, cite),
                    _medse(medse, cite), _rate(t1, cite))
            key = f"aU={sa}.bU={sb}.gX={gx:g}"
            cells.append(Cell(f"tableA1/{key}", key, cfg, {"ratio": exps}))
    return CatalogEntry(
        entry_id="tableA1",
        title="Bias direction under sign-flipped confounder effects",
        description=("Baseline simulations with the signs of the confounder effects "
                     "on risk factor and outcome reversed; bias flips sign when the "
                     "two confounder effects disagree in direction."),
        cells=tuple(cells),
    )


# Sign grid when selection depends on risk factor and confounder jointly.
# Entries give the expected sign of the median bias at moderate
# (|gamma_x| = 0.5) and strong (|gamma_x| = 2) selection: "same" means
# one fixed sign at both strengths, "flip" means the sign reverses.
_A2_GRID = {
    # (sign gamma_u, sign gamma_x) -> per (alpha_u, beta_u) sign pair:
    #   (+,+)   (+,-)   (-,+)   (-,-)
    (1, 1): ("-", "+", "mp", "pm"),
    (1, -1): ("pm", "mp", "+", "-"),
    (-1, 1): ("pm", "mp", "+", "-"),
    (-1, -1): ("-", "+", "mp", "pm"),
}
_A2_COLS = (("+", "+"), ("+", "-"), ("-", "+"), ("-", "-"))
_A2_STRENGTHS = (0.5, 2.0)


def _a2_signs(code: str) -> tuple[int, int]:
    """Expected median sign at (moderate, strong) selection."""
    return {"+": (1, 1), "-": (-1, -1), "pm": (1, -1), "mp": (-1, 1)}[code]


def _build_tableA2() -> CatalogEntry:
    cells = []
    for (su, sx), codes in _A2_GRID.items():
        for (sa, sb), code in zip(_A2_COLS, codes):
            expected = _a2_signs(code)
            for strength, direction in zip(_A2_STRENGTHS, expected):
                gu = float(su)
                gx = sx * strength
                au = _SQ50 if sa == "+" else -_SQ50
                bu = _SQ50 if sb == "+" else -_SQ50
                cite = (f"Table A2, gamma_u {'>' if su > 0 else '<'} 0, "
                        f"gamma_x {'>' if sx > 0 else '<'} 0, alpha_u {sa}, beta_u {sb}")
                cfg = _scen1(alpha_u=au, beta_u=bu, gamma_u=gu, gamma_x=gx,
                             estimator_plan=_RATIO_PLAN)
                key = f"gU={gu:g}.aU={sa}.bU={sb}.gX={gx:g}"
                cells.append(Cell(f"tableA2/{key}", key, cfg,
                                  {"ratio": (_sign(direction, cite),)}))
    return CatalogEntry(
        entry_id="tableA2",
        title="Bias direction grid for joint risk factor and confounder selection",
        description=("Sign of the median bias across all sign combinations of the "
                     "confounder effects and the two selection coefficients, probed "
                     "at moderate and strong risk factor-selection strength."),
        cells=tuple(cells),
        note=("A sign check passes when the observed median has the expected sign "
              "and exceeds three Monte Carlo standard errors in magnitude."),
    )


_A3_ROWS = (
    # gamma_x, mean, median, sd, med_se, power %
    (-2.0, 0.203, 0.211, 0.108, 0.118, 42.6),
    (-1.0, 0.392, 0.396, 0.078, 0.098, 98.1),
    (-0.5, 0.466, 0.468, 0.066, 0.090, 99.9),
    (-0.2, 0.492, 0.494, 0.061, 0.087, 100.0),
    (0.0, 0.498, 0.500, 0.062, 0.086, 100.0),
    (0.2, 0.493, 0.495, 0.063, 0.087, 100.0),
    (0.5, 0.468, 0.471, 0.066, 0.090, 100.0),
    (1.0, 0.392, 0.397, 0.078, 0.098, 98.0),
    (2.0, 0.205, 0.211, 0.108, 0.119, 43.2),
)


def _build_tableA3() -> CatalogEntry:
    cells = []
    for gx, mean, med, sd, medse, power in _A3_ROWS:
        cite = f"Table A3, gamma_x = {gx:g}"
        cfg = _scen1(beta_x=0.5, gamma_x=gx, estimator_plan=_RATIO_PLAN)
        exps = (_mean(mean, sd, cite), _median(med, sd, medse, cite),
                _sd(sd, cite), _medse(medse, cite), _rate(power, cite))
        key = f"gX={gx:g}"
        cells.append(Cell(f"tableA3/{key}", key, cfg, {"ratio": exps}))
    return CatalogEntry(
        entry_id="tableA3",
        title="Non-null causal effect",
        description=("Baseline selection-on-risk-factor simulations with a true "
                     "causal effect of 0.5; the bias pattern matches the null case, "
                     "and the rejection column reads as empirical power."),
        cells=tuple(cells),
    )


_A4 = {  # (gamma_u, beta_x) -> rows (gamma_y, med, sd, medse, rate %)
    (0.0, 0.0): ((-2.0, 0.000, 0.057, 0.056, 5.2), (-1.0, 0.001, 0.066, 0.064, 5.5),
                 (-0.5, 0.001, 0.070, 0.069, 5.1), (-0.2, 0.000, 0.071, 0.070, 5.1),
                 (0.0, -0.001, 0.070, 0.071, 4.5), (0.2, 0.000, 0.071, 0.070, 5.1),
                 (0.5, 0.000, 0.069, 0.069, 5.2), (1.0, 0.000, 0.065, 0.064, 5.3),
                 (2.0, 0.001, 0.057, 0.056, 5.2)),
    (0.0, 0.5): ((-2.0, 0.336, 0.063, 0.076, 99.2), (-1.0, 0.420, 0.062, 0.082, 100.0),
                 (-0.5, 0.474, 0.061, 0.085, 100.0), (-0.2, 0.495, 0.061, 0.086, 100.0),
                 (0.0, 0.500, 0.062, 0.086, 100.0), (0.2, 0.496, 0.062, 0.086, 100.0),
                 (0.5, 0.474, 0.063, 0.085, 100.0), (1.0, 0.419, 0.063, 0.082, 99.9),
                 (2.0, 0.335, 0.061, 0.076, 99.3)),
    (1.0, 0.0): ((-2.0, -0.001, 0.064, 0.063, 5.2), (-1.0, -0.001, 0.071, 0.070, 4.9),
                 (-0.5, 0.000, 0.071, 0.070, 5.2), (-0.2, 0.000, 0.069, 0.069, 4.9),
                 (0.0, 0.000, 0.067, 0.068, 4.4), (0.2, 0.000, 0.067, 0.066, 4.9),
                 (0.5, -0.001, 0.064, 0.064, 4.9), (1.0, 0.000, 0.060, 0.059, 4.8),
                 (2.0, -0.001, 0.055, 0.053, 5.6)),
    (1.0, 0.5): ((-2.0, 0.328, 0.069, 0.086, 96.8), (-1.0, 0.468, 0.064, 0.088, 99.9),
                 (-0.5, 0.512, 0.060, 0.085, 100.0), (-0.2, 0.509, 0.059, 0.082, 100.0),
                 (0.0, 0.500, 0.058, 0.081, 100.0), (0.2, 0.486, 0.059, 0.079, 100.0),
                 (0.5, 0.462, 0.057, 0.077, 100.0), (1.0, 0.423, 0.057, 0.074, 100.0),
                 (2.0, 0.364, 0.056, 0.070, 100.0)),
}


def _build_tableA4() -> CatalogEntry:
    cells = []
    for (gu, bx), rows in _A4.items():
        for gy, med, sd, medse, rate in rows:
            cite = f"Table A4, gamma_u = {gu:g}, beta_x = {bx:g}"
            cfg = _scen1(beta_x=bx, gamma_u=gu, gamma_y=gy, estimator_plan=_RATIO_PLAN)
            exps = (_median(med, sd, medse, cite), _sd(sd, cite),
                    _medse(medse, cite), _rate(rate, cite))
            key = f"bX={bx:g}.gU={gu:g}.gY={gy:g}"
            cells.append(Cell(f"tableA4/{key}", key, cfg, {"ratio": exps}))
    return CatalogEntry(
        entry_id="tableA4",
        title="Outcome-dependent selection",
        description=("Selection probability driven by the outcome (and optionally "
                     "the confounder) instead of the risk factor: unbiased with "
                     "nominal error rates under the causal null, biased only when "
                     "a true effect exists."),
        cells=tuple(cells),
    )


_A5 = {  # beta_0 -> rows (gamma_x, med, sd, medse, type1 %)
    0.0: ((-2.0, -0.269, 0.233, 0.225, 22.1), (-1.0, -0.093, 0.173, 0.171, 8.5),
          (-0.5, -0.027, 0.151, 0.150, 4.9), (-0.2, -0.006, 0.144, 0.143, 5.2),
          (0.0, -0.002, 0.143, 0.141, 5.2), (0.2, -0.006, 0.145, 0.143, 5.2),
          (0.5, -0.027, 0.153, 0.150, 5.6), (1.0, -0.095, 0.174, 0.171, 8.2),
          (2.0, -0.273, 0.235, 0.225, 22.4)),
    -1.4: ((-2.0, -0.279, 0.305, 0.295, 15.9), (-1.0, -0.102, 0.223, 0.219, 7.7),
           (-0.5, -0.030, 0.189, 0.187, 5.4), (-0.2, -0.009, 0.177, 0.175, 5.2),
           (0.0, 0.000, 0.172, 0.171, 4.9), (0.2, 0.000, 0.174, 0.170, 5.3),
           (0.5, -0.024, 0.178, 0.176, 4.9), (1.0, -0.093, 0.199, 0.196, 7.8),
           (2.0, -0.260, 0.256, 0.251, 17.4)),
    -3.0: ((-2.0, -0.301, 0.570, 0.553, 8.7), (-1.0, -0.106, 0.408, 0.402, 5.9),
           (-0.5, -0.027, 0.341, 0.339, 5.0), (-0.2, -0.008, 0.318, 0.313, 5.2),
           (0.0, 0.001, 0.301, 0.302, 4.9), (0.2, -0.001, 0.304, 0.299, 5.2),
           (0.5, -0.021, 0.307, 0.305, 5.0), (1.0, -0.100, 0.343, 0.336, 6.4),
           (2.0, -0.277, 0.431, 0.424, 9.8)),
}


def _build_tableA5() -> CatalogEntry:
    cells = []
    for b0, rows in _A5.items():
        for gx, med, sd, medse, t1 in rows:
            cite = f"Table A5, beta_0 = {b0:g}"
            cfg = _scen1(gamma_x=gx, outcome_kind=OutcomeKind.BINARY, beta_0=b0,
                         estimator_plan=_BINARY_RATIO_PLAN)
            exps = (_median(med, sd, medse, cite), _sd(sd, cite),
                    _medse(medse, cite), _rate(t1, cite))
            key = f"b0={b0:g}.gX={gx:g}"
            cells.append(Cell(f"tableA5/{key}", key, cfg, {"ratio": exps}))
    return CatalogEntry(
        entry_id="tableA5",
        title="Binary outcomes at varying prevalence",
        description=("Baseline selection simulations with a logistic binary outcome "
                     "at 50%, 20% and 5% prevalence; the ratio estimate uses a "
                     "logistic numerator, and the raw genetic association is "
                     "computed alongside for comparison."),
        cells=tuple(cells),
    )


_A6_ROWS = (
    (-2.0, (0.158, 0.112, 0.080, 51.1), (0.134, 0.105, 0.088, 37.3), (0.108, 0.106, 0.097, 22.9)),
    (-1.0, (0.101, 0.074, 0.072, 29.3), (0.096, 0.075, 0.074, 26.2), (0.088, 0.078, 0.076, 21.7)),
    (-0.5, (0.053, 0.069, 0.069, 12.5), (0.053, 0.069, 0.069, 12.2), (0.051, 0.070, 0.070, 11.8)),
    (-0.2, (0.024, 0.068, 0.068, 6.7), (0.024, 0.068, 0.068, 6.7), (0.023, 0.068, 0.068, 6.5)),
    (0.0, (0.003, 0.067, 0.067, 5.3), (0.002, 0.068, 0.067, 5.2), (-0.001, 0.069, 0.068, 5.1)),
    (0.2, (-0.016, 0.068, 0.065, 6.6), (-0.019, 0.069, 0.066, 6.8), (-0.024, 0.071, 0.068, 7.3)),
    (0.5, (-0.045, 0.071, 0.065, 13.0), (-0.050, 0.072, 0.067, 13.9), (-0.060, 0.075, 0.070, 15.3)),
    (1.0, (-0.086, 0.080, 0.064, 31.4), (-0.101, 0.080, 0.068, 33.6), (-0.118, 0.083, 0.074, 36.0)),
    (2.0, (-0.158, 1.325, 0.066, 61.3), (-0.192, 0.107, 0.077, 65.5), (-0.220, 0.105, 0.088, 68.2)),
)
_A6_UNSTABLE_SD = (1.0, 2.0)


def _build_tableA6() -> CatalogEntry:
    cells = []
    for gx, *per_trim in _A6_ROWS:
        cite = f"Table A6, gamma_x = {gx:g}"
        cfg = _scen1(alpha_u=math.sqrt(0.1), gamma_u=1.0, gamma_x=gx,
                     estimator_plan=_IPW_PLAN)
        exps = {}
        for est_id, vals in zip(_IPW_IDS, per_trim):
            info = est_id == "ipw_ratio" and gx in _A6_UNSTABLE_SD
            exps[est_id] = _ipw_expectations(vals, cite, info)
        key = f"gX={gx:g}"
        cells.append(Cell(f"tableA6/{key}", key, cfg, exps))
    return CatalogEntry(
        entry_id="tableA6",
        title="Weighting under a weak confounder-risk factor effect",
        description=("Inverse probability weighting when the selection model omits "
                     "a confounder that matters for selection but explains little "
                     "risk factor variance; weighting no longer removes the bias."),
        cells=tuple(cells),
        note=("Untrimmed SD cells at strong positive selection are informational "
              "only, as in the trimming table."),
    )


def _build_catalog() -> dict[str, CatalogEntry]:
    entries = (
        _build_table1(),
        _build_table2(),
        _build_table3(),
        _build_table4(),
        _build_tableA1(),
        _build_tableA2(),
        _build_tableA3(),
        _build_tableA4(),
        _build_tableA5(),
        _build_tableA6(),
    )
    return {e.entry_id: e for e in entries}


CATALOG = _build_catalog()

_ALIASES = {
    "table4": "lpa.table4",
    "lpa": "lpa.table4",
    "a1": "tableA1",
    "a2": "tableA2",
    "a3": "tableA3",
    "a4": "tableA4",
    "a5": "tableA5",
    "a6": "tableA6",
}


def list_entries() -> tuple[CatalogEntry, ...]:
    return tuple(CATALOG.values())


def catalog_lookup(entry_id: str) -> CatalogEntry:
    """Resolve a catalog id or alias; unknown ids raise UnknownScenario."""
    key = entry_id.strip()
    key = _ALIASES.get(key.lower(), key)
    if key in CATALOG:
        return CATALOG[key]
    raise UnknownScenario(entry_id, tuple(CATALOG))


def find_cell(scenario_id: str) -> Cell:
    """Look up a single cell by its full id, e.g. 'table1/gX=-2'."""
    entry_part, _, _ = scenario_id.partition("/")
    entry = catalog_lookup(entry_part)
    for cell in entry.cells:
        if cell.scenario_id == scenario_id:
            return cell
    raise UnknownScenario(scenario_id,
                          tuple(c.scenario_id for c in entry.cells))


# ---------------------------------------------------------------------------
# running cells and checking them against the reference values

@dataclass(frozen=True)
class CellCheck:
    """Outcome of comparing one observed summary column to its reference."""

    scenario_id: str
    estimator_id: str
    column: str
    expected: float
    observed: float
    tolerance: float
    passed: bool
    informational: bool
    citation: str

    @property
    def blocking_failure(self) -> bool:
        return not self.passed and not self.informational


def run_cell(cell: Cell, *, reps: int | None = None, master_seed: int | None = None,
             workers: int | None = None, per_rep_csv: str | None = None) -> ScenarioResult:
    cfg = cell.config
    overrides = {}
    if reps is not None:
        overrides["reps"] = reps
    if master_seed is not None:
        overrides["master_seed"] = master_seed
    if overrides:
        cfg = cfg.with_overrides(**overrides)
    return run_scenario(cfg, scenario_id=cell.scenario_id, workers=workers,
                        per_rep_csv=per_rep_csv)


def _observed_column(summary: SummaryStats, column: str) -> float:
    if column == "mean":
        return summary.mean
    if column in ("median", "median_sign"):
        return summary.median
    if column == "sd":
        return summary.sd
    if column == "med_se":
        return summary.median_se
    if column == "rejection":
        return summary.rejection_rate
    raise ValueError(f"unknown summary column {column!r}")


def _check_one(cell: Cell, estimator_id: str, exp: ExpectedValue,
               summary: SummaryStats | None) -> CellCheck:
    if summary is None:
        return CellCheck(cell.scenario_id, estimator_id, exp.column, exp.value,
                         math.nan, math.nan, passed=False,
                         informational=exp.informational, citation=exp.citation)
    observed = _observed_column(summary, exp.column)
    if exp.column == "median_sign":
        guard = SIGN_GUARD * 1.2533 * summary.sd / math.sqrt(summary.n_effective_reps)
        passed = math.copysign(1.0, observed) == exp.value and abs(observed) > guard
        return CellCheck(cell.scenario_id, estimator_id, exp.column, exp.value,
                         observed, guard, passed=passed,
                         informational=exp.informational, citation=exp.citation)
    tol = exp.runtime_tolerance(summary.n_effective_reps)
    passed = math.isfinite(observed) and abs(observed - exp.value) <= tol
    return CellCheck(cell.scenario_id, estimator_id, exp.column, exp.value,
                     observed, tol, passed=passed,
                     informational=exp.informational, citation=exp.citation)


def check_cell(cell: Cell, result: ScenarioResult) -> list[CellCheck]:
    """Compare one cell's run against every reference value it carries."""
    checks = []
    for estimator_id, exps in cell.expectations.items():
        summary = result.summaries.get(estimator_id)
        for exp in exps:
            checks.append(_check_one(cell, estimator_id, exp, summary))
    return checks


def expected_value_count(entry: CatalogEntry | None = None) -> int:
    if entry is not None:
        return entry.n_expected
    return sum(e.n_expected for e in CATALOG.values())


# ---------------------------------------------------------------------------
# configuration files

_TOP_KEYS = ("dgp", "sampling", "run", "estimators")
_DGP_KEYS = ("alpha_g", "alpha_u", "beta_x", "beta_u", "outcome",
             "gamma_0", "gamma_x", "gamma_u", "gamma_y")
_DGP_REQUIRED = ("alpha_g", "alpha_u", "beta_x", "beta_u",
                 "gamma_0", "gamma_x", "gamma_u")
_OUTCOME_KEYS = ("kind", "beta_0")
_SAMPLING_KEYS = ("population_size", "sample_size", "policy")
_RUN_KEYS = ("reps", "master_seed")
_ESTIMATOR_KEYS = ("kind", "trim_percentile")


def _require_mapping(path: str, value) -> dict:
    if not isinstance(value, dict):
        raise SchemaViolation(path, f"expected an object, got {type(value).__name__}")
    return value


def _reject_unknown(path: str, tree: dict, allowed) -> None:
    for key in tree:
        if key not in allowed:
            raise SchemaViolation(f"{path}.{key}" if path else key,
                                  f"unknown key; allowed keys: {', '.join(allowed)}")


def _as_number(path: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(path, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(value):
        raise SchemaViolation(path, "must be finite")
    return float(value)


def _as_int(path: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(path, f"expected an integer, got {type(value).__name__}")
    return value


def _as_str(path: str, value) -> str:
    if not isinstance(value, str):
        raise SchemaViolation(path, f"expected a string, got {type(value).__name__}")
    return value


def build_config(tree: dict) -> ScenarioConfig:
    """Validate a parsed configuration tree and build a ScenarioConfig.

    Unknown keys anywhere raise SchemaViolation with the offending path;
    semantic violations (variance bounds etc.) raise InvalidConfig from
    the ScenarioConfig constructor.
    """
    _require_mapping("", tree)
    _reject_unknown("", tree, _TOP_KEYS)

    dgp = _require_mapping("dgp", tree.get("dgp", {}))
    _reject_unknown("dgp", dgp, _DGP_KEYS)
    missing = [k for k in _DGP_REQUIRED if k not in dgp]
    if missing:
        raise SchemaViolation("dgp", f"missing required keys: {', '.join(missing)}")
    kwargs = {k: _as_number(f"dgp.{k}", dgp[k]) for k in _DGP_REQUIRED}
    kwargs["gamma_y"] = _as_number("dgp.gamma_y", dgp.get("gamma_y", 0.0))

    outcome = _require_mapping("dgp.outcome", dgp.get("outcome", {}))
    _reject_unknown("dgp.outcome", outcome, _OUTCOME_KEYS)
    kind = _as_str("dgp.outcome.kind", outcome.get("kind", OutcomeKind.CONTINUOUS.value))
    try:
        kwargs["outcome_kind"] = OutcomeKind(kind)
    except ValueError:
        raise SchemaViolation("dgp.outcome.kind",
                              f"must be one of {[k.value for k in OutcomeKind]}, got {kind!r}") from None
    kwargs["beta_0"] = _as_number("dgp.outcome.beta_0", outcome.get("beta_0", 0.0))

    sampling = _require_mapping("sampling", tree.get("sampling", {}))
    _reject_unknown("sampling", sampling, _SAMPLING_KEYS)
    kwargs["population_size"] = _as_int("sampling.population_size",
                                        sampling.get("population_size", DEFAULT_POPULATION_SIZE))
    kwargs["sample_size"] = _as_int("sampling.sample_size",
                                    sampling.get("sample_size", DEFAULT_SAMPLE_SIZE))
    policy = _as_str("sampling.policy",
                     sampling.get("policy", SelectionPolicy.RANDOM_AMONG_SELECTED.value))
    try:
        kwargs["selection_policy"] = SelectionPolicy(policy)
    except ValueError:
        raise SchemaViolation("sampling.policy",
                              f"must be one of {[p.value for p in SelectionPolicy]}, got {policy!r}") from None

    run = _require_mapping("run", tree.get("run", {}))
    _reject_unknown("run", run, _RUN_KEYS)
    kwargs["reps"] = _as_int("run.reps", run.get("reps", DEFAULT_REPS))
    kwargs["master_seed"] = _as_int("run.master_seed", run.get("master_seed", DEFAULT_MASTER_SEED))

    raw_estimators = tree.get("estimators", [{"kind": "ratio"}])
    if not isinstance(raw_estimators, list):
        raise SchemaViolation("estimators",
                              f"expected a list, got {type(raw_estimators).__name__}")
    plan = []
    for i, item in enumerate(raw_estimators):
        path = f"estimators[{i}]"
        item = _require_mapping(path, item)
        _reject_unknown(path, item, _ESTIMATOR_KEYS)
        if "kind" not in item:
            raise SchemaViolation(f"{path}.kind", "missing required key")
        spec_kwargs = {"kind": _as_str(f"{path}.kind", item["kind"])}
        if "trim_percentile" in item:
            spec_kwargs["trim_percentile"] = _as_number(f"{path}.trim_percentile",
                                                        item["trim_percentile"])
        try:
            plan.append(EstimatorSpec(**spec_kwargs))
        except InvalidConfig as exc:
            raise SchemaViolation(path, str(exc)) from None
    kwargs["estimator_plan"] = tuple(plan)

    return ScenarioConfig(**kwargs)


def parse_config(text: str) -> ScenarioConfig:
    """Parse a JSON configuration document into a ScenarioConfig."""
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", f"invalid JSON: {exc}") from None
    return build_config(tree)


def config_to_tree(config: ScenarioConfig) -> dict:
    """Full configuration tree, defaults included, for serialization."""
    return {
        "dgp": {
            "alpha_g": config.alpha_g,
            "alpha_u": config.alpha_u,
            "beta_x": config.beta_x,
            "beta_u": config.beta_u,
            "outcome": {"kind": config.outcome_kind.value, "beta_0": config.beta_0},
            "gamma_0": config.gamma_0,
            "gamma_x": config.gamma_x,
            "gamma_u": config.gamma_u,
            "gamma_y": config.gamma_y,
        },
        "sampling": {
            "population_size": config.population_size,
            "sample_size": config.sample_size,
            "policy": config.selection_policy.value,
        },
        "run": {"reps": config.reps, "master_seed": config.master_seed},
        "estimators": [
            {"kind": s.kind, "trim_percentile": s.trim_percentile}
            for s in config.estimator_plan
        ],
    }


def serialize_config(config: ScenarioConfig) -> str:
    return json.dumps(config_to_tree(config), indent=2) + "\n"
