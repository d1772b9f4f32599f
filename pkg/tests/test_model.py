"""Tests for the data-generating model and sampling policies."""
import math

import numpy as np
import pytest

from mrsel.errors import InsufficientSelected, InvalidConfig
from mrsel.model import (
    Cohort,
    EstimatorSpec,
    OutcomeKind,
    ScenarioConfig,
    SelectionPolicy,
    draw_sample,
    expit,
    generate_cohort,
    reconstruction_error,
    reconstruction_quantization_bound,
    selection_linear_predictor,
)


def base_config(**overrides):
    kwargs = dict(
        alpha_g=math.sqrt(0.02), alpha_u=math.sqrt(0.5),
        beta_x=0.0, beta_u=math.sqrt(0.5),
        gamma_0=0.0, gamma_x=0.0, gamma_u=0.0,
    )
    kwargs.update(overrides)
    return ScenarioConfig(**kwargs)


# ---------------------------------------------------------------------------
# configuration invariants


def test_variance_bound_on_risk_factor():
    with pytest.raises(InvalidConfig):
        base_config(alpha_g=0.8, alpha_u=0.8)  # 0.64 + 0.64 > 1


def test_variance_bound_on_continuous_outcome():
    with pytest.raises(InvalidConfig):
        base_config(beta_x=0.9, beta_u=0.9)


def test_equality_case_is_allowed():
    # alpha_g^2 + alpha_u^2 == 1 is legal (zero residual variance in X),
    # even though sqrt(0.5)**2 * 2 lands a couple of ulps above 1.
    cfg = base_config(alpha_g=math.sqrt(0.5), alpha_u=math.sqrt(0.5))
    assert cfg.degenerate_x_residual
    assert cfg.x_residual_sd == 0.0
    assert not base_config().degenerate_x_residual


def test_binary_outcome_lifts_outcome_variance_bound():
    cfg = base_config(beta_x=2.0, beta_u=3.0, outcome_kind=OutcomeKind.BINARY,
                      beta_0=-1.4)
    assert cfg.outcome_kind is OutcomeKind.BINARY
    with pytest.raises(InvalidConfig):
        cfg.y_residual_sd  # only defined for continuous outcomes


def test_beta_0_rejected_for_continuous_outcome():
    with pytest.raises(InvalidConfig):
        base_config(beta_0=-1.4)


def test_logistic_association_requires_binary_outcome():
    plan = (EstimatorSpec("logistic_association"),)
    with pytest.raises(InvalidConfig):
        base_config(estimator_plan=plan)
    cfg = base_config(outcome_kind="binary", estimator_plan=plan)
    assert cfg.estimator_plan[0].kind == "logistic_association"


def test_non_finite_coefficients_rejected():
    for bad in (math.nan, math.inf, -math.inf, "0.5", None):
        with pytest.raises(InvalidConfig):
            base_config(gamma_x=bad)


def test_sample_size_must_fit_population():
    with pytest.raises(InvalidConfig):
        base_config(population_size=100, sample_size=101)
    with pytest.raises(InvalidConfig):
        base_config(sample_size=0)
    with pytest.raises(InvalidConfig):
        base_config(population_size=10.0)  # must be an int, not a float


def test_master_seed_range():
    base_config(master_seed=0)
    base_config(master_seed=2 ** 64 - 1)
    with pytest.raises(InvalidConfig):
        base_config(master_seed=-1)
    with pytest.raises(InvalidConfig):
        base_config(master_seed=2 ** 64)


def test_reps_must_be_positive_integer():
    with pytest.raises(InvalidConfig):
        base_config(reps=0)
    with pytest.raises(InvalidConfig):
        base_config(reps=2.5)


def test_with_overrides_returns_new_config():
    cfg = base_config()
    other = cfg.with_overrides(gamma_x=1.0, reps=7)
    assert other.gamma_x == 1.0 and other.reps == 7
    assert cfg.gamma_x == 0.0  # original untouched
    assert other.alpha_g == cfg.alpha_g


def test_string_enum_values_accepted():
    cfg = base_config(outcome_kind="binary", selection_policy="first_n_selected")
    assert cfg.outcome_kind is OutcomeKind.BINARY
    assert cfg.selection_policy is SelectionPolicy.FIRST_N_SELECTED


# ---------------------------------------------------------------------------
# estimator plan canonicalization


def test_estimator_plan_dedupes_and_orders():
    plan = (
        EstimatorSpec("ipw_ratio", trim_percentile=95.0),
        EstimatorSpec("ratio"),
        EstimatorSpec("ipw_ratio"),
        EstimatorSpec("ratio"),  # duplicate
        EstimatorSpec("ipw_ratio", trim_percentile=99.0),
        EstimatorSpec("ipw_ratio", trim_percentile=95.0),  # duplicate
    )
    cfg = base_config(estimator_plan=plan)
    ids = [s.estimator_id for s in cfg.estimator_plan]
    assert ids == ["ratio", "ipw_ratio", "ipw_ratio_trim99", "ipw_ratio_trim95"]


def test_estimator_plan_must_not_be_empty():
    with pytest.raises(InvalidConfig):
        base_config(estimator_plan=())


def test_unknown_estimator_kind():
    with pytest.raises(InvalidConfig):
        EstimatorSpec("two_stage")


def test_trim_percentile_only_for_ipw():
    with pytest.raises(InvalidConfig):
        EstimatorSpec("ratio", trim_percentile=95.0)
    for bad in (0.0, -5.0, 101.0, math.nan):
        with pytest.raises(InvalidConfig):
            EstimatorSpec("ipw_ratio", trim_percentile=bad)


def test_estimator_ids():
    assert EstimatorSpec("ratio").estimator_id == "ratio"
    assert EstimatorSpec("ipw_ratio").estimator_id == "ipw_ratio"
    assert EstimatorSpec("ipw_ratio", trim_percentile=95.0).estimator_id == "ipw_ratio_trim95"
    assert EstimatorSpec("ipw_ratio", trim_percentile=99.5).estimator_id == "ipw_ratio_trim99.5"


# ---------------------------------------------------------------------------
# logistic function


def test_expit_matches_naive_form():
    rng = np.random.default_rng(11)
    eta = rng.normal(scale=5.0, size=1000)
    np.testing.assert_allclose(expit(eta), 1.0 / (1.0 + np.exp(-eta)), rtol=1e-15)


def test_expit_saturates_without_overflow():
    eta = np.array([-800.0, -40.0, 0.0, 40.0, 800.0])
    p = expit(eta)
    assert np.all(np.isfinite(p))
    assert np.all((p >= 0.0) & (p <= 1.0))
    assert p[0] == 0.0 and p[4] == 1.0  # float64 saturation, no epsilon clamp
    assert p[2] == 0.5


def test_expit_symmetry():
    eta = np.linspace(-30, 30, 601)
    np.testing.assert_allclose(expit(-eta), 1.0 - expit(eta), atol=1e-15)


# ---------------------------------------------------------------------------
# cohort generation


def test_cohort_is_reproducible_and_frozen():
    cfg = base_config(population_size=5000, sample_size=500, gamma_x=1.0)
    a = generate_cohort(cfg, np.random.default_rng(3))
    b = generate_cohort(cfg, np.random.default_rng(3))
    for name in ("g", "u", "x", "y", "pi_s", "s"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    with pytest.raises(ValueError):
        a.x[0] = 99.0  # columns are read-only


def test_cohort_moments():
    """X and a continuous Y are standardized by construction."""
    cfg = base_config(population_size=200_000, sample_size=100)
    cohort = generate_cohort(cfg, np.random.default_rng(7))
    assert abs(cohort.x.var() - 1.0) < 0.02
    assert abs(cohort.y.var() - 1.0) < 0.02
    assert abs(cohort.x.mean()) < 0.02
    # corr(G, X) = alpha_g
    r = np.corrcoef(cohort.g, cohort.x)[0, 1]
    assert abs(r - cfg.alpha_g) < 0.01
    # corr(U, X) = alpha_u
    r = np.corrcoef(cohort.u, cohort.x)[0, 1]
    assert abs(r - cfg.alpha_u) < 0.01


def test_null_selection_is_fifty_fifty():
    cfg = base_config(population_size=100_000, sample_size=100)
    cohort = generate_cohort(cfg, np.random.default_rng(5))
    assert np.all(cohort.pi_s == 0.5)
    frac = cohort.n_selected / cohort.n
    assert abs(frac - 0.5) < 0.01


def test_binary_outcome_prevalence():
    # beta_0 = -1.4 with a symmetric linear predictor gives ~20% prevalence
    cfg = base_config(population_size=100_000, sample_size=100,
                      outcome_kind=OutcomeKind.BINARY, beta_0=-1.4)
    cohort = generate_cohort(cfg, np.random.default_rng(9))
    assert set(np.unique(cohort.y)) <= {0.0, 1.0}
    assert 0.17 < cohort.y.mean() < 0.23


def test_selection_linear_predictor_reconstructs():
    cfg = base_config(population_size=20_000, sample_size=100,
                      gamma_0=0.5, gamma_x=-1.0, gamma_u=1.0)
    cohort = generate_cohort(cfg, np.random.default_rng(13))
    err = reconstruction_error(cohort, cfg)
    bound = reconstruction_quantization_bound(cohort.pi_s).max()
    assert err <= bound


def test_outcome_dependent_selection_orders_y_before_s():
    """With gamma_y != 0, selected individuals must have higher Y on average."""
    cfg = base_config(population_size=50_000, sample_size=100, gamma_y=2.0)
    cohort = generate_cohort(cfg, np.random.default_rng(17))
    eta = selection_linear_predictor(cfg, cohort.x, cohort.u, cohort.y)
    np.testing.assert_allclose(eta, 2.0 * cohort.y)
    assert cohort.y[cohort.s].mean() > cohort.y[~cohort.s].mean() + 0.3


# ---------------------------------------------------------------------------
# sampling policies


def _small_cohort(seed=21, **overrides):
    cfg = base_config(population_size=4000, sample_size=500, **overrides)
    return cfg, generate_cohort(cfg, np.random.default_rng(seed))


def test_first_n_population_policy():
    cfg, cohort = _small_cohort()
    sample = draw_sample(cohort, 500, SelectionPolicy.FIRST_N_POPULATION,
                         np.random.default_rng(0))
    np.testing.assert_array_equal(sample.indices, np.arange(500))


def test_first_n_selected_policy():
    cfg, cohort = _small_cohort()
    sample = draw_sample(cohort, 500, SelectionPolicy.FIRST_N_SELECTED,
                         np.random.default_rng(0))
    selected = np.flatnonzero(cohort.s)
    np.testing.assert_array_equal(sample.indices, selected[:500])


def test_random_among_selected_policy():
    cfg, cohort = _small_cohort()
    rng = np.random.default_rng(1)
    sample = draw_sample(cohort, 500, SelectionPolicy.RANDOM_AMONG_SELECTED, rng)
    assert sample.n == 500
    idx = sample.indices
    assert len(np.unique(idx)) == 500  # without replacement
    assert np.all(np.diff(idx) > 0)  # ascending
    assert np.all(cohort.s[idx])  # only selected individuals
    # a different generator state gives a different draw
    other = draw_sample(cohort, 500, SelectionPolicy.RANDOM_AMONG_SELECTED,
                        np.random.default_rng(2))
    assert not np.array_equal(idx, other.indices)


def test_insufficient_selected_raises():
    # gamma_0 = -9 selects ~0.01% of individuals
    cfg, cohort = _small_cohort(gamma_0=-9.0)
    with pytest.raises(InsufficientSelected) as exc_info:
        draw_sample(cohort, 500, SelectionPolicy.RANDOM_AMONG_SELECTED,
                    np.random.default_rng(0))
    assert exc_info.value.required == 500
    assert exc_info.value.available < 500
    with pytest.raises(InsufficientSelected):
        draw_sample(cohort, 500, SelectionPolicy.FIRST_N_SELECTED,
                    np.random.default_rng(0))


def test_first_n_population_cannot_exceed_cohort():
    cfg, cohort = _small_cohort()
    with pytest.raises(InsufficientSelected):
        draw_sample(cohort, cohort.n + 1, SelectionPolicy.FIRST_N_POPULATION,
                    np.random.default_rng(0))


def test_cohort_column_length_mismatch():
    z = np.zeros(5)
    with pytest.raises(InvalidConfig):
        Cohort(g=z, u=z, x=z, y=np.zeros(4), pi_s=z, s=z)
