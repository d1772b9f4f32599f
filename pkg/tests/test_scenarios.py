"""Catalog integrity, reference-check mechanics, and the JSON config schema."""
import json
import math

import pytest

from mrsel.errors import SchemaViolation, UnknownScenario
from mrsel.model import EstimatorSpec, OutcomeKind, ScenarioConfig, SelectionPolicy
from mrsel.montecarlo import ScenarioResult, SummaryStats
from mrsel.scenarios import (
    CATALOG,
    COLUMNS,
    REF_REPS,
    Cell,
    ExpectedValue,
    build_config,
    catalog_lookup,
    check_cell,
    config_to_tree,
    expected_value_count,
    find_cell,
    list_entries,
    parse_config,
    run_cell,
    serialize_config,
)

ENTRY_SHAPE = {
    # entry id -> (cells, reference values)
    "table1": (9, 45),
    "table2": (111, 222),
    "table3": (27, 324),
    "lpa.table4": (12, 18),
    "tableA1": (27, 108),
    "tableA2": (32, 32),
    "tableA3": (9, 45),
    "tableA4": (36, 144),
    "tableA5": (27, 108),
    "tableA6": (9, 108),
}


# ---------------------------------------------------------------------------
# catalog shape


def test_catalog_entry_shapes():
    assert set(CATALOG) == set(ENTRY_SHAPE)
    for entry_id, (n_cells, n_expected) in ENTRY_SHAPE.items():
        entry = CATALOG[entry_id]
        assert len(entry.cells) == n_cells, entry_id
        assert entry.n_expected == n_expected, entry_id
    assert expected_value_count() == sum(v[1] for v in ENTRY_SHAPE.values()) == 1154


def test_scenario_ids_are_unique_and_well_formed():
    ids = [c.scenario_id for e in list_entries() for c in e.cells]
    assert len(ids) == len(set(ids)) == 299
    for entry in list_entries():
        for cell in entry.cells:
            assert cell.scenario_id == f"{entry.entry_id}/{cell.cell_key}"


def test_expectations_use_known_columns_and_planned_estimators():
    for entry in list_entries():
        for cell in entry.cells:
            plan_ids = {s.estimator_id for s in cell.config.estimator_plan}
            for estimator_id, exps in cell.expectations.items():
                assert estimator_id in plan_ids, cell.scenario_id
                for exp in exps:
                    assert exp.column in COLUMNS
                    assert exp.citation


def test_reference_rates_are_probabilities():
    for entry in list_entries():
        for cell in entry.cells:
            for exps in cell.expectations.values():
                for exp in exps:
                    if exp.column == "rejection":
                        assert 0.0 <= exp.value <= 1.0
                    if exp.column == "median_sign":
                        assert exp.value in (-1.0, 1.0)


def test_baseline_cell_parameters():
    cell = find_cell("table1/gX=-2")
    cfg = cell.config
    assert cfg.alpha_g == pytest.approx(math.sqrt(0.02))
    assert cfg.alpha_u == pytest.approx(math.sqrt(0.5))
    assert cfg.beta_u == pytest.approx(math.sqrt(0.5))
    assert cfg.beta_x == 0.0 and cfg.gamma_0 == 0.0 and cfg.gamma_u == 0.0
    assert cfg.gamma_x == -2.0
    assert cfg.population_size == 100_000 and cfg.sample_size == 10_000
    assert cfg.reps == 2000 and cfg.master_seed == 1729


def test_lpa_cells_come_in_arm_pairs():
    entry = CATALOG["lpa.table4"]
    policies = {c.config.selection_policy for c in entry.cells}
    assert policies == {SelectionPolicy.FIRST_N_POPULATION,
                        SelectionPolicy.FIRST_N_SELECTED}
    for cell in entry.cells:
        assert cell.config.sample_size == 3313
        assert cell.config.outcome_kind is OutcomeKind.BINARY
        assert cell.config.beta_u == cell.config.gamma_u


def test_every_catalog_config_serializes_and_parses_back():
    for entry in list_entries():
        for cell in entry.cells:
            text = serialize_config(cell.config)
            assert parse_config(text) == cell.config, cell.scenario_id


# ---------------------------------------------------------------------------
# lookup


def test_catalog_lookup_aliases():
    assert catalog_lookup("a1").entry_id == "tableA1"
    assert catalog_lookup("A6").entry_id == "tableA6"
    assert catalog_lookup("lpa").entry_id == "lpa.table4"
    assert catalog_lookup("table4").entry_id == "lpa.table4"
    assert catalog_lookup(" table1 ").entry_id == "table1"


def test_catalog_lookup_unknown_names_valid_ids():
    with pytest.raises(UnknownScenario) as exc_info:
        catalog_lookup("table9")
    assert "table1" in str(exc_info.value)


def test_find_cell():
    cell = find_cell("table3/gU=-1.gX=0.5")
    assert cell.config.gamma_u == -1.0 and cell.config.gamma_x == 0.5
    with pytest.raises(UnknownScenario):
        find_cell("table1/gX=-3")
    with pytest.raises(UnknownScenario):
        find_cell("nosuch/entry")


# ---------------------------------------------------------------------------
# tolerance scaling and checks


def test_runtime_tolerance_scales_with_reps():
    exp = ExpectedValue("mean", 0.0, tol_stat=0.01, tol_fixed=0.0005)
    assert exp.runtime_tolerance(REF_REPS) == pytest.approx(0.0105)
    assert exp.runtime_tolerance(2500) == pytest.approx(0.02 + 0.0005)
    # the floor kicks in when the statistical part is small
    rate = ExpectedValue("rejection", 0.05, tol_stat=0.002, tol_floor=0.01,
                         tol_fixed=0.001)
    assert rate.runtime_tolerance(REF_REPS) == pytest.approx(0.011)
    assert rate.runtime_tolerance(100) == pytest.approx(0.02 + 0.001)


def _fake_result(cell, summary):
    return ScenarioResult(scenario_id=cell.scenario_id, config=cell.config,
                          records=(), summaries={"ratio": summary},
                          wall_time_s=0.0)


def _fake_cell(*expectations):
    cfg = ScenarioConfig(alpha_g=0.1, alpha_u=0.5, beta_x=0.0, beta_u=0.5,
                         gamma_0=0.0, gamma_x=0.0, gamma_u=0.0)
    return Cell("fake/x", "x", cfg, {"ratio": tuple(expectations)})


def _stats(**overrides):
    kwargs = dict(mean=0.0, median=0.0, sd=0.07, median_se=0.07,
                  rejection_rate=0.05, n_effective_reps=10_000, n_error_reps=0)
    kwargs.update(overrides)
    return SummaryStats(**kwargs)


def test_check_cell_value_pass_and_fail():
    cell = _fake_cell(ExpectedValue("mean", 0.10, tol_stat=0.005))
    ok = check_cell(cell, _fake_result(cell, _stats(mean=0.103)))[0]
    assert ok.passed and not ok.blocking_failure
    bad = check_cell(cell, _fake_result(cell, _stats(mean=0.110)))[0]
    assert not bad.passed and bad.blocking_failure
    assert bad.tolerance == pytest.approx(0.005)
    assert bad.observed == pytest.approx(0.110)


def test_check_cell_missing_summary_fails():
    cell = _fake_cell(ExpectedValue("mean", 0.10, tol_stat=0.005))
    check = check_cell(cell, _fake_result(cell, None))[0]
    assert not check.passed and check.blocking_failure
    assert math.isnan(check.observed)


def test_check_cell_informational_misses_never_block():
    cell = _fake_cell(ExpectedValue("sd", 1.0, tol_stat=0.01, informational=True))
    check = check_cell(cell, _fake_result(cell, _stats(sd=2.0)))[0]
    assert not check.passed and not check.blocking_failure


def test_median_sign_check_requires_sign_and_margin():
    cell = _fake_cell(ExpectedValue("median_sign", 1.0))
    # guard = 3 * 1.2533 * sd / sqrt(n): sd=0.07, n=10000 -> 0.00263
    clear = check_cell(cell, _fake_result(cell, _stats(median=0.05)))[0]
    assert clear.passed
    wrong_sign = check_cell(cell, _fake_result(cell, _stats(median=-0.05)))[0]
    assert not wrong_sign.passed
    too_small = check_cell(cell, _fake_result(cell, _stats(median=0.001)))[0]
    assert not too_small.passed
    assert too_small.tolerance == pytest.approx(3 * 1.2533 * 0.07 / 100.0)


def test_run_cell_applies_overrides():
    cell = find_cell("table1/gX=0")
    cfg = cell.config.with_overrides(population_size=2000, sample_size=400)
    small = Cell(cell.scenario_id, cell.cell_key, cfg, cell.expectations)
    result = run_cell(small, reps=3, master_seed=99, workers=1)
    assert result.config.reps == 3
    assert result.config.master_seed == 99
    assert result.scenario_id == "table1/gX=0"
    assert result.summaries["ratio"].n_effective_reps == 3


# ---------------------------------------------------------------------------
# configuration schema


MINIMAL = {
    "dgp": {"alpha_g": 0.1414, "alpha_u": 0.7071, "beta_x": 0.0,
            "beta_u": 0.7071, "gamma_0": 0.0, "gamma_x": 1.0, "gamma_u": 0.0}
}


def test_build_config_defaults():
    cfg = build_config(MINIMAL)
    assert cfg.population_size == 100_000
    assert cfg.sample_size == 10_000
    assert cfg.reps == 2000 and cfg.master_seed == 1729
    assert cfg.outcome_kind is OutcomeKind.CONTINUOUS
    assert cfg.selection_policy is SelectionPolicy.RANDOM_AMONG_SELECTED
    assert [s.estimator_id for s in cfg.estimator_plan] == ["ratio"]


def test_build_config_full_tree():
    tree = {
        "dgp": {**MINIMAL["dgp"], "gamma_y": 0.5,
                "outcome": {"kind": "binary", "beta_0": -1.4}},
        "sampling": {"population_size": 5000, "sample_size": 1000,
                     "policy": "first_n_selected"},
        "run": {"reps": 12, "master_seed": 7},
        "estimators": [{"kind": "ratio"},
                       {"kind": "ipw_ratio", "trim_percentile": 95}],
    }
    cfg = build_config(tree)
    assert cfg.gamma_y == 0.5
    assert cfg.outcome_kind is OutcomeKind.BINARY and cfg.beta_0 == -1.4
    assert cfg.selection_policy is SelectionPolicy.FIRST_N_SELECTED
    assert cfg.reps == 12 and cfg.master_seed == 7
    assert [s.estimator_id for s in cfg.estimator_plan] == ["ratio", "ipw_ratio_trim95"]


@pytest.mark.parametrize("mutate, path", [
    (lambda t: t.update(extra=1), "extra"),
    (lambda t: t["dgp"].update(alpha=0.1), "dgp.alpha"),
    (lambda t: t["dgp"].pop("alpha_g"), "dgp"),
    (lambda t: t["dgp"].update(alpha_g=True), "dgp.alpha_g"),
    (lambda t: t["dgp"].update(alpha_g="0.1"), "dgp.alpha_g"),
    (lambda t: t["dgp"].update(outcome={"kind": "count"}), "dgp.outcome.kind"),
    (lambda t: t.update(sampling={"population_size": 1.5}), "sampling.population_size"),
    (lambda t: t.update(sampling={"policy": "oldest_first"}), "sampling.policy"),
    (lambda t: t.update(run={"reps": "many"}), "run.reps"),
    (lambda t: t.update(estimators={"kind": "ratio"}), "estimators"),
    (lambda t: t.update(estimators=[{"trim_percentile": 95}]), "estimators[0].kind"),
    (lambda t: t.update(estimators=[{"kind": "ratio", "trim_percentile": 95}]),
     "estimators[0]"),
])
def test_build_config_schema_violations(mutate, path):
    tree = json.loads(json.dumps(MINIMAL))
    mutate(tree)
    with pytest.raises(SchemaViolation) as exc_info:
        build_config(tree)
    assert exc_info.value.path == path


def test_parse_config_rejects_invalid_json():
    with pytest.raises(SchemaViolation) as exc_info:
        parse_config("{not json")
    assert exc_info.value.path == "$"


def test_parse_config_rejects_non_finite_numbers():
    text = json.dumps(MINIMAL).replace("1.0", "Infinity")
    with pytest.raises(SchemaViolation):
        parse_config(text)


def test_config_round_trip_preserves_everything():
    cfg = ScenarioConfig(
        alpha_g=math.sqrt(0.36), alpha_u=math.sqrt(0.32), beta_x=0.25,
        beta_u=1.0, gamma_0=-2.0, gamma_x=0.25, gamma_u=1.0, gamma_y=0.3,
        outcome_kind=OutcomeKind.BINARY, beta_0=-2.5,
        population_size=50_000, sample_size=3313,
        selection_policy=SelectionPolicy.FIRST_N_POPULATION,
        reps=777, master_seed=2 ** 63,
        estimator_plan=(EstimatorSpec("logistic_association"),
                        EstimatorSpec("ipw_ratio", trim_percentile=99.0)),
    )
    again = parse_config(serialize_config(cfg))
    assert again == cfg


def test_config_tree_lists_trim_percentile_explicitly():
    cfg = build_config(MINIMAL)
    tree = config_to_tree(cfg)
    assert tree["estimators"] == [{"kind": "ratio", "trim_percentile": 100.0}]
