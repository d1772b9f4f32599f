"""Structural model: cohort generation and sample selection.

The data-generating process for one cohort of N individuals is

    X = alpha_g * G + alpha_u * U + sqrt(1 - alpha_g^2 - alpha_u^2) * eps_X
    Y = beta_x * X + beta_u * U + sqrt(1 - beta_x^2 - beta_u^2) * eps_Y   (continuous)
    Y ~ Bernoulli(expit(beta_0 + beta_x * X + beta_u * U))                (binary)
    S ~ Bernoulli(pi),  logit(pi) = gamma_0 + gamma_x * X + gamma_u * U + gamma_y * Y

with G, U, eps_X, eps_Y independent standard normal. Y is always drawn
before S so that outcome-dependent selection (gamma_y != 0) is well
defined; when gamma_y = 0 the ordering is immaterial.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import InsufficientSelected, InvalidConfig

# Slack for the variance constraints so the sanctioned equality case
# alpha_g^2 + alpha_u^2 == 1 survives float representation error
# (sqrt(0.5)**2 * 2 == 1 + 2e-16).
_VARIANCE_SLACK = 1e-12

DEFAULT_POPULATION_SIZE = 100_000
DEFAULT_SAMPLE_SIZE = 10_000
DEFAULT_REPS = 2_000
DEFAULT_MASTER_SEED = 1729


class OutcomeKind(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class SelectionPolicy(str, Enum):
    RANDOM_AMONG_SELECTED = "random_among_selected"
    FIRST_N_SELECTED = "first_n_selected"
    FIRST_N_POPULATION = "first_n_population"


_ESTIMATOR_KINDS = ("ratio", "ipw_ratio", "logistic_association")


@dataclass(frozen=True)
class EstimatorSpec:
    """One entry of an estimator plan.

    ``trim_percentile`` applies to ``ipw_ratio`` only: weights above that
    empirical percentile are capped at it. 100 means no trimming.
    """

    kind: str
    trim_percentile: float = 100.0

    def __post_init__(self):
        if self.kind not in _ESTIMATOR_KINDS:
            raise InvalidConfig(
                f"unknown estimator kind {self.kind!r}; expected one of {_ESTIMATOR_KINDS}"
            )
        p = self.trim_percentile
        if not (isinstance(p, (int, float)) and math.isfinite(p) and 0.0 < p <= 100.0):
            raise InvalidConfig("trim_percentile must lie in (0, 100]")
        if self.kind != "ipw_ratio" and p != 100.0:
            raise InvalidConfig(f"trim_percentile is only meaningful for ipw_ratio, not {self.kind!r}")

    @property
    def estimator_id(self) -> str:
        """Stable identifier used in records, summaries and CSV output."""
        if self.kind == "ipw_ratio" and self.trim_percentile != 100.0:
            return f"ipw_ratio_trim{self.trim_percentile:g}"
        return self.kind


def _require_finite(name: str, value: float) -> float:
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise InvalidConfig(f"{name} must be a finite real number, got {value!r}")
    return float(value)


def _canonical_plan(plan) -> tuple[EstimatorSpec, ...]:
    """Dedupe and order an estimator plan deterministically."""
    specs = tuple(plan)
    if not specs:
        raise InvalidConfig("estimator_plan must not be empty")
    rank = {kind: i for i, kind in enumerate(_ESTIMATOR_KINDS)}
    seen: dict[str, EstimatorSpec] = {}
    for spec in specs:
        if not isinstance(spec, EstimatorSpec):
            raise InvalidConfig(f"estimator_plan entries must be EstimatorSpec, got {spec!r}")
        seen.setdefault(spec.estimator_id, spec)
    ordered = sorted(seen.values(), key=lambda s: (rank[s.kind], -s.trim_percentile))
    return tuple(ordered)


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete parameterization of one simulation cell.

    Parameters
    ----------
    alpha_g, alpha_u
        Instrument and confounder effects on the risk factor
        (alpha_g**2 is the variance in X explained by G).
    beta_x, beta_u
        Causal effect of the risk factor and confounder effect on the
        outcome. For a binary outcome these act on the log-odds scale.
    outcome_kind
        Continuous (linear-normal) or binary (logistic) outcome model.
    beta_0
        Intercept of the binary outcome model; must be 0 for a
        continuous outcome.
    gamma_0, gamma_x, gamma_u, gamma_y
        Selection model intercept and log-odds effects of X, U and Y.
    population_size, sample_size
        Cohort size N and analysis sample size n.
    selection_policy
        How the analysis sample is drawn from the cohort.
    reps, master_seed
        Replication count and 64-bit root seed for the run.
    estimator_plan
        Estimators computed in each replication; deduplicated and stored
        in a canonical order.
    """

    alpha_g: float
    alpha_u: float
    beta_x: float
    beta_u: float
    gamma_0: float
    gamma_x: float
    gamma_u: float
    gamma_y: float = 0.0
    outcome_kind: OutcomeKind = OutcomeKind.CONTINUOUS
    beta_0: float = 0.0
    population_size: int = DEFAULT_POPULATION_SIZE
    sample_size: int = DEFAULT_SAMPLE_SIZE
    selection_policy: SelectionPolicy = SelectionPolicy.RANDOM_AMONG_SELECTED
    reps: int = DEFAULT_REPS
    master_seed: int = DEFAULT_MASTER_SEED
    estimator_plan: tuple[EstimatorSpec, ...] = (EstimatorSpec("ratio"),)

    def __post_init__(self):
        for name in ("alpha_g", "alpha_u", "beta_x", "beta_u",
                     "gamma_0", "gamma_x", "gamma_u", "gamma_y", "beta_0"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        object.__setattr__(self, "outcome_kind", OutcomeKind(self.outcome_kind))
        object.__setattr__(self, "selection_policy", SelectionPolicy(self.selection_policy))
        object.__setattr__(self, "estimator_plan", _canonical_plan(self.estimator_plan))

        x_var = self.alpha_g ** 2 + self.alpha_u ** 2
        if x_var > 1.0 + _VARIANCE_SLACK:
            raise InvalidConfig(
                f"alpha_g^2 + alpha_u^2 = {x_var:.6g} exceeds 1; residual SD of X would be imaginary"
            )
        if self.outcome_kind is OutcomeKind.CONTINUOUS:
            y_var = self.beta_x ** 2 + self.beta_u ** 2
            if y_var > 1.0 + _VARIANCE_SLACK:
                raise InvalidConfig(
                    f"beta_x^2 + beta_u^2 = {y_var:.6g} exceeds 1 for a continuous outcome"
                )
            if self.beta_0 != 0.0:
                raise InvalidConfig("beta_0 applies to binary outcomes only")
        if not (isinstance(self.population_size, int) and self.population_size >= 1):
            raise InvalidConfig("population_size must be a positive integer")
        if not (isinstance(self.sample_size, int) and self.sample_size >= 1):
            raise InvalidConfig("sample_size must be a positive integer")
        if self.sample_size > self.population_size:
            raise InvalidConfig(
                f"sample_size {self.sample_size} exceeds population_size {self.population_size}"
            )
        if not (isinstance(self.reps, int) and self.reps >= 1):
            raise InvalidConfig("reps must be a positive integer")
        if not (isinstance(self.master_seed, int) and 0 <= self.master_seed < 2 ** 64):
            raise InvalidConfig("master_seed must be an unsigned 64-bit integer")
        if any(s.kind == "logistic_association" for s in self.estimator_plan) \
                and self.outcome_kind is not OutcomeKind.BINARY:
            raise InvalidConfig("logistic_association requires a binary outcome")

    @property
    def x_residual_sd(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.alpha_g ** 2 - self.alpha_u ** 2))

    @property
    def y_residual_sd(self) -> float:
        if self.outcome_kind is not OutcomeKind.CONTINUOUS:
            raise InvalidConfig("y_residual_sd is defined for continuous outcomes only")
        return math.sqrt(max(0.0, 1.0 - self.beta_x ** 2 - self.beta_u ** 2))

    @property
    def degenerate_x_residual(self) -> bool:
        """True at the sanctioned equality case alpha_g^2 + alpha_u^2 = 1."""
        return self.alpha_g ** 2 + self.alpha_u ** 2 >= 1.0 - _VARIANCE_SLACK

    def with_overrides(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class Cohort:
    """Column-oriented generated population (structure-of-arrays).

    All six columns share length N and are marked read-only, so a cohort
    is immutable after construction and safe to share across workers.
    ``pi_s`` stores expit of the selection linear predictor exactly as
    evaluated; it lies in the open interval (0,1) up to the limits of
    float64 (predictors beyond ~|36| saturate to 0 or 1).
    """

    g: np.ndarray
    u: np.ndarray
    x: np.ndarray
    y: np.ndarray
    pi_s: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        n = self.g.shape[0]
        for name in ("u", "x", "y", "pi_s", "s"):
            if getattr(self, name).shape != (n,):
                raise InvalidConfig(f"cohort column {name} does not have length {n}")

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def n_selected(self) -> int:
        return int(np.count_nonzero(self.s))


@dataclass(frozen=True)
class SampleIndex:
    """Indices of the analysis sample within a cohort (always ascending)."""

    indices: np.ndarray
    policy_used: SelectionPolicy

    @property
    def n(self) -> int:
        return self.indices.shape[0]


def expit(eta: np.ndarray) -> np.ndarray:
    """Numerically safe logistic function.

    Uses the naive form when no element can overflow ``exp`` and the
    two-sided stable form otherwise.
    """
    eta = np.asarray(eta, dtype=np.float64)
    if eta.size == 0 or eta.min() > -700.0:
        return 1.0 / (1.0 + np.exp(-eta))
    t = np.exp(-np.abs(eta))
    return np.where(eta >= 0.0, 1.0 / (1.0 + t), t / (1.0 + t))


def selection_linear_predictor(config: ScenarioConfig, x: np.ndarray,
                               u: np.ndarray, y: np.ndarray) -> np.ndarray:
    """gamma_0 + gamma_x*X + gamma_u*U + gamma_y*Y, skipping zero terms."""
    eta = np.full(x.shape[0], float(config.gamma_0))
    for coef, column in ((config.gamma_x, x), (config.gamma_u, u), (config.gamma_y, y)):
        if coef != 0.0:
            eta += coef * column
    return eta


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.setflags(write=False)


def generate_cohort(config: ScenarioConfig, rng: np.random.Generator) -> Cohort:
    """Generate one cohort of ``config.population_size`` individuals.

    The draw order from ``rng`` is part of the determinism contract:
    G, U, eps_X, then (eps_Y | outcome uniforms), then selection
    uniforms. Callers that go on to draw a sample must reuse the same
    generator so replications stay reproducible from a single seed.
    """
    n = config.population_size
    g = rng.standard_normal(n)
    u = rng.standard_normal(n)
    eps_x = rng.standard_normal(n)
    x = config.alpha_g * g + config.alpha_u * u + config.x_residual_sd * eps_x

    if config.outcome_kind is OutcomeKind.BINARY:
        pi_y = expit(config.beta_0 + config.beta_x * x + config.beta_u * u)
        y = (rng.random(n) < pi_y).astype(np.float64)
    else:
        eps_y = rng.standard_normal(n)
        y = config.beta_x * x + config.beta_u * u + config.y_residual_sd * eps_y

    eta = selection_linear_predictor(config, x, u, y)
    pi_s = expit(eta)
    s = rng.random(n) < pi_s

    _freeze(g, u, x, y, pi_s, s)
    return Cohort(g=g, u=u, x=x, y=y, pi_s=pi_s, s=s)


def draw_sample(cohort: Cohort, n: int, policy: SelectionPolicy,
                rng: np.random.Generator) -> SampleIndex:
    """Draw the analysis sample of size n from a cohort.

    RandomAmongSelected consumes the generator; the first-n policies are
    deterministic given the cohort. Raises InsufficientSelected when a
    selected-based policy cannot find n selected individuals — this is a
    hard error so that infeasible (gamma_0, n, N) combinations surface
    instead of silently regenerating.
    """
    policy = SelectionPolicy(policy)
    if policy is SelectionPolicy.FIRST_N_POPULATION:
        if n > cohort.n:
            raise InsufficientSelected(available=cohort.n, required=n)
        indices = np.arange(n, dtype=np.intp)
    else:
        selected = np.flatnonzero(cohort.s)
        if selected.shape[0] < n:
            raise InsufficientSelected(available=int(selected.shape[0]), required=n)
        if policy is SelectionPolicy.FIRST_N_SELECTED:
            indices = selected[:n].copy()
        else:
            indices = rng.choice(selected, size=n, replace=False)
            indices.sort()
    _freeze(indices)
    return SampleIndex(indices=indices, policy_used=policy)


def reconstruction_error(cohort: Cohort, config: ScenarioConfig) -> float:
    """max |logit(pi_s) - linear predictor| over the cohort.

    Exactly zero up to float evaluation of log(p/(1-p)); the invariant
    threshold 1e-12 is attainable whenever |predictor| stays below ~9.8
    (beyond that, float64 quantization of pi alone exceeds it — see
    ``reconstruction_quantization_bound``).
    """
    eta = selection_linear_predictor(config, cohort.x, cohort.u, cohort.y)
    with np.errstate(divide="ignore"):
        logit = np.log(cohort.pi_s) - np.log1p(-cohort.pi_s)
    return float(np.max(np.abs(logit - eta)))


def reconstruction_quantization_bound(pi: np.ndarray) -> np.ndarray:
    """Per-element bound on logit error induced by rounding pi to float64."""
    eps = np.finfo(np.float64).eps
    return np.maximum(1e-12, 4.0 * eps / (pi * (1.0 - pi)))
