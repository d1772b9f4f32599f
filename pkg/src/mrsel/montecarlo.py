"""Replication driver: seeding, per-rep estimation, aggregation.

Each replication derives its own 64-bit seed from (master seed,
scenario id, rep index) via BLAKE2b, so results are bit-identical
regardless of how replications are distributed across worker
processes, and any single replication can be reproduced in isolation.
"""
from __future__ import annotations

import csv
import hashlib
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .errors import EstimatorFailure, ExtremeWeights, NoEffectiveReps
from .estimators import (
    EstimateResult,
    fit_selection_model,
    logistic_slope,
    ols_simple,
    ols_weighted,
    ratio_estimate,
    selection_weights,
    trim_weights,
)
from .model import (
    OutcomeKind,
    ScenarioConfig,
    SelectionPolicy,
    draw_sample,
    generate_cohort,
)

REJECTION_CRITICAL_VALUE = 1.96
WORKERS_ENV_VAR = "MRSEL_WORKERS"


def derive_rep_seed(master_seed: int, scenario_id: str, rep_index: int) -> int:
    """Stable 64-bit per-replication seed.

    BLAKE2b(8-byte digest) over the little-endian master seed, the
    UTF-8 scenario id, a NUL separator, and the little-endian rep
    index. The separator keeps (id="a", rep) and (id="a\\x01...", rep)
    streams from colliding trivially.
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master_seed).to_bytes(8, "little"))
    h.update(scenario_id.encode("utf-8"))
    h.update(b"\x00")
    h.update(int(rep_index).to_bytes(8, "little"))
    return int.from_bytes(h.digest(), "little")


def rep_generator(master_seed: int, scenario_id: str, rep_index: int) -> np.random.Generator:
    seed = derive_rep_seed(master_seed, scenario_id, rep_index)
    return np.random.Generator(np.random.SFC64(seed))


@dataclass(frozen=True)
class RepRecord:
    """Outcome of one replication: one result or error per estimator."""

    rep_index: int
    f_statistic: float
    results: dict[str, EstimateResult] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    @property
    def feasible(self) -> bool:
        return not self.errors


def run_replication(config: ScenarioConfig, rep_index: int,
                    scenario_id: str = "custom") -> RepRecord:
    """Generate one cohort, draw one sample, run every planned estimator.

    Estimator failures are captured per estimator (the replication
    still contributes whatever did succeed); an infeasible selection
    step (too few selected individuals) propagates to the caller.
    """
    rng = rep_generator(config.master_seed, scenario_id, rep_index)
    cohort = generate_cohort(config, rng)
    sample = draw_sample(cohort, config.sample_size, config.selection_policy, rng)
    idx = sample.indices
    gs = cohort.g[idx]
    xs = cohort.x[idx]
    ys = cohort.y[idx]

    results: dict[str, EstimateResult] = {}
    errors: dict[str, str] = {}
    caught: list[str] = []

    f_statistic = math.nan
    instrument_fit: EstimateResult | None = None
    instrument_error: EstimatorFailure | None = None
    try:
        instrument_fit = ols_simple(gs, xs)
        f_statistic = instrument_fit.z ** 2
    except EstimatorFailure as exc:
        instrument_error = exc

    ipw_specs = [s for s in config.estimator_plan if s.kind == "ipw_ratio"]
    ipw_weights: np.ndarray | None = None
    ipw_error: EstimatorFailure | None = None
    if ipw_specs:
        try:
            with warnings.catch_warnings(record=True) as wlist:
                warnings.simplefilter("always")
                fit = fit_selection_model(cohort)
                ipw_weights = selection_weights(cohort, sample, fit)
            caught.extend(w.category.__name__ for w in wlist
                          if issubclass(w.category, ExtremeWeights))
        except EstimatorFailure as exc:
            ipw_error = exc

    for spec in config.estimator_plan:
        key = spec.estimator_id
        try:
            if spec.kind == "ratio":
                if instrument_error is not None:
                    raise instrument_error
                if config.outcome_kind is OutcomeKind.BINARY:
                    numerator = logistic_slope(gs, ys)
                else:
                    numerator = ols_simple(gs, ys)
                results[key] = ratio_estimate(numerator, instrument_fit)
            elif spec.kind == "logistic_association":
                results[key] = logistic_slope(gs, ys)
            else:  # ipw_ratio
                if ipw_error is not None:
                    raise ipw_error
                w = trim_weights(ipw_weights, spec.trim_percentile)
                num = ols_weighted(gs, ys, w)
                den = ols_weighted(gs, xs, w)
                results[key] = ratio_estimate(num, den)
        except EstimatorFailure as exc:
            errors[key] = exc.code

    return RepRecord(
        rep_index=rep_index,
        f_statistic=f_statistic,
        results=results,
        errors=errors,
        warnings=tuple(caught),
    )


@dataclass(frozen=True)
class SummaryStats:
    """Monte Carlo summary of one estimator across replications."""

    mean: float
    median: float
    sd: float
    median_se: float
    rejection_rate: float
    n_effective_reps: int
    n_error_reps: int

    @property
    def mc_se_mean(self) -> float:
        """Monte Carlo standard error of the mean column."""
        if self.n_effective_reps == 0:
            return math.nan
        return self.sd / math.sqrt(self.n_effective_reps)

    @property
    def mc_se_rejection(self) -> float:
        """Binomial Monte Carlo standard error of the rejection rate."""
        if self.n_effective_reps == 0:
            return math.nan
        p = self.rejection_rate
        return math.sqrt(p * (1.0 - p) / self.n_effective_reps)


def summarize(records: list[RepRecord] | tuple[RepRecord, ...],
              estimator_id: str) -> SummaryStats:
    """Aggregate one estimator's results over all replications.

    Replications where this estimator errored are excluded from the
    statistics and counted in n_error_reps. Raises NoEffectiveReps if
    nothing succeeded.
    """
    betas = []
    ses = []
    rejections = 0
    n_err = 0
    for rec in records:
        res = rec.results.get(estimator_id)
        if res is None:
            if estimator_id in rec.errors:
                n_err += 1
            continue
        betas.append(res.beta_hat)
        ses.append(res.se)
        if abs(res.z) > REJECTION_CRITICAL_VALUE:
            rejections += 1
    n = len(betas)
    if n == 0:
        raise NoEffectiveReps(f"no successful replications for estimator '{estimator_id}'")
    b = np.asarray(betas)
    sd = float(np.std(b, ddof=1)) if n > 1 else 0.0
    return SummaryStats(
        mean=float(b.mean()),
        median=float(np.median(b)),
        sd=sd,
        median_se=float(np.median(np.asarray(ses))),
        rejection_rate=rejections / n,
        n_effective_reps=n,
        n_error_reps=n_err,
    )


@dataclass(frozen=True)
class ScenarioResult:
    """Everything produced by one scenario run."""

    scenario_id: str
    config: ScenarioConfig
    records: tuple[RepRecord, ...]
    summaries: dict[str, SummaryStats | None]
    wall_time_s: float

    @property
    def n_warnings(self) -> int:
        return sum(len(rec.warnings) for rec in self.records)

    def error_fraction(self, estimator_id: str) -> float:
        n_err = sum(1 for rec in self.records if estimator_id in rec.errors)
        return n_err / len(self.records) if self.records else 0.0


def _replicate_range(config: ScenarioConfig, scenario_id: str,
                     lo: int, hi: int) -> list[RepRecord]:
    return [run_replication(config, r, scenario_id) for r in range(lo, hi)]


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, then MRSEL_WORKERS, then cpu count."""
    if workers is None:
        env = os.environ.get(WORKERS_ENV_VAR)
        if env is not None:
            workers = int(env)
    if workers is None:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise ValueError("workers must be >= 1")
    return workers


def run_scenario(config: ScenarioConfig, *, scenario_id: str = "custom",
                 workers: int | None = None,
                 per_rep_csv: str | None = None) -> ScenarioResult:
    """Run all replications of one scenario, in parallel when workers > 1.

    Results are aggregated in replication order, so the output is
    independent of the worker count.
    """
    workers = resolve_workers(workers)
    reps = config.reps
    start = time.perf_counter()
    if workers == 1 or reps == 1:
        records = _replicate_range(config, scenario_id, 0, reps)
    else:
        chunk = max(1, math.ceil(reps / (workers * 4)))
        bounds = [(lo, min(lo + chunk, reps)) for lo in range(0, reps, chunk)]
        task = partial(_replicate_range, config, scenario_id)
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(task, *zip(*bounds)))
        records = [rec for part in parts for rec in part]
    wall = time.perf_counter() - start

    summaries: dict[str, SummaryStats | None] = {}
    for spec in config.estimator_plan:
        try:
            summaries[spec.estimator_id] = summarize(records, spec.estimator_id)
        except NoEffectiveReps:
            summaries[spec.estimator_id] = None

    result = ScenarioResult(
        scenario_id=scenario_id,
        config=config,
        records=tuple(records),
        summaries=summaries,
        wall_time_s=wall,
    )
    if per_rep_csv is not None:
        write_per_rep_csv(per_rep_csv, result)
    return result


PER_REP_COLUMNS = ("scenario_id", "rep_index", "estimator", "beta_hat",
                   "se", "z", "f_stat", "error_code")


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return format(value, ".17g")


def per_rep_rows(result: ScenarioResult):
    """Yield per-(replication, estimator) CSV rows for a finished run."""
    for rec in result.records:
        f_stat = rec.f_statistic if math.isfinite(rec.f_statistic) else None
        for spec in result.config.estimator_plan:
            key = spec.estimator_id
            res = rec.results.get(key)
            if res is not None:
                yield [result.scenario_id, rec.rep_index, key,
                       _fmt(res.beta_hat), _fmt(res.se), _fmt(res.z),
                       _fmt(f_stat), ""]
            else:
                yield [result.scenario_id, rec.rep_index, key,
                       "", "", "", _fmt(f_stat), rec.errors.get(key, "")]


def write_per_rep_csv(path: str, result: ScenarioResult) -> None:
    """One row per (replication, estimator) with full-precision floats."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PER_REP_COLUMNS)
        writer.writerows(per_rep_rows(result))
