"""Command-line front end.

Subcommands:

* ``run`` — execute a catalog entry, a single catalog cell, or a custom
  JSON configuration, and write summary tables (CSV or markdown).
* ``reproduce`` — run catalog entries and compare every summary column
  against the stored reference values with replication-scaled
  tolerances; exits nonzero if any gated comparison fails.
* ``signs`` — evaluate the bias-direction grid (sign of the median
  estimate across parameter sign combinations) and report it against
  the expected directions.
* ``list`` — print the catalog.

Exit codes: 0 success, 1 reference mismatch, 2 configuration error,
3 infeasible selection, 4 estimator failure in more than 10% of
replications. Output files never contain wall-clock times, so repeated
runs with the same seed are byte-identical; timing goes to stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

from .errors import (
    InsufficientSelected,
    InvalidConfig,
    MrselError,
    NoEffectiveReps,
    SchemaViolation,
    UnknownScenario,
)
from .model import ScenarioConfig
from .montecarlo import (
    PER_REP_COLUMNS,
    ScenarioResult,
    per_rep_rows,
    resolve_workers,
    run_scenario,
)
from .scenarios import (
    CATALOG_VERSION,
    CellCheck,
    build_config,
    catalog_lookup,
    check_cell,
    config_to_tree,
    find_cell,
    list_entries,
    run_cell,
)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_ESTIMATOR = 4

# Above this share of errored replications for any estimator the run is
# considered failed (exit code 4).
ERROR_FRACTION_LIMIT = 0.10

# Runs below this replication count get a visible low-precision note.
LOW_PRECISION_REPS = 2000

SUMMARY_COLUMNS = ("scenario_id", "estimator", "n_effective_reps", "n_error_reps",
                   "mean", "median", "sd", "median_se", "rejection_rate",
                   "mc_se_mean", "mc_se_rejection")

PLOT_COLUMNS = ("scenario_id", "estimator", "alpha_g", "alpha_u", "beta_x",
                "beta_u", "gamma_0", "gamma_x", "gamma_u", "gamma_y",
                "outcome", "beta_0", "population_size", "sample_size",
                "policy", "statistic", "value")

REPORT_COLUMNS = ("catalog_version", "master_seed", "reps", "scenario_id",
                  "estimator", "column", "expected", "observed", "tolerance",
                  "mc_se_mean", "mc_se_rejection", "informational", "passed")


def _g17(value: float) -> str:
    return format(value, ".17g")


def _fmt3(value: float) -> str:
    return "nan" if not math.isfinite(value) else f"{value:.3f}"


def _fmt_rate(value: float) -> str:
    return "nan" if not math.isfinite(value) else f"{100.0 * value:.1f}%"


def _status_note(message: str) -> None:
    print(message, file=sys.stderr)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# --set overrides

def _parse_set_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw  # bare strings like "binary" need no quoting


def _split_path(path: str) -> list[str | int]:
    """Split a dotted override path into dict keys and list indices.

    ``estimators[1].trim_percentile`` -> ["estimators", 1, "trim_percentile"].
    """
    tokens: list[str | int] = []
    for part in path.split("."):
        if not part:
            raise SchemaViolation(path, "empty path segment")
        name = part
        indices: list[int] = []
        while name.endswith("]"):
            head, bracket, tail = name.rpartition("[")
            if not bracket or not tail[:-1].isdigit():
                raise SchemaViolation(path, f"bad list index syntax in {part!r}")
            indices.insert(0, int(tail[:-1]))
            name = head
        if not name:
            raise SchemaViolation(path, f"missing key before index in {part!r}")
        tokens.append(name)
        tokens.extend(indices)
    return tokens


def _apply_override(tree: dict, assignment: str) -> None:
    key, sep, raw = assignment.partition("=")
    if not sep or not key:
        raise SchemaViolation(assignment, "overrides take the form key=value")
    value = _parse_set_value(raw)
    tokens = _split_path(key)
    node = tree
    for i, tok in enumerate(tokens[:-1]):
        if isinstance(tok, int):
            if not isinstance(node, list) or tok >= len(node):
                raise SchemaViolation(key, f"no such list element [{tok}]")
            node = node[tok]
        else:
            if not isinstance(node, dict):
                raise SchemaViolation(key, f"{tok!r} does not address an object")
            node = node.setdefault(tok, {})
    last = tokens[-1]
    if isinstance(last, int):
        if not isinstance(node, list) or last >= len(node):
            raise SchemaViolation(key, f"no such list element [{last}]")
        node[last] = value
    else:
        if not isinstance(node, dict):
            raise SchemaViolation(key, f"{last!r} does not address an object")
        node[last] = value


# ---------------------------------------------------------------------------
# target resolution

def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaViolation(path, f"cannot read config file: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", f"invalid JSON: {exc}") from None


def _override_config_reps_seed(config: ScenarioConfig, args) -> ScenarioConfig:
    updates = {}
    if args.reps is not None:
        updates["reps"] = args.reps
    if args.seed is not None:
        updates["master_seed"] = args.seed
    return config.with_overrides(**updates) if updates else config


def _override_config(config: ScenarioConfig, args) -> ScenarioConfig:
    if args.overrides:
        tree = config_to_tree(config)
        for assignment in args.overrides:
            _apply_override(tree, assignment)
        config = build_config(tree)
    return _override_config_reps_seed(config, args)


def _resolve_run_targets(args) -> tuple[str, list[tuple[str, ScenarioConfig]]]:
    """Return (title, [(scenario_id, config), ...]) for the run command."""
    if args.config and args.target:
        raise SchemaViolation("target", "give a catalog id or --config, not both")
    if args.config:
        tree = _load_config_file(args.config)
        for assignment in args.overrides:
            _apply_override(tree, assignment)
        config = build_config(tree)
        config = _override_config_reps_seed(config, args)
        return "custom", [("custom", config)]
    if not args.target:
        raise SchemaViolation("target", "give a catalog id or --config PATH")
    try:
        entry = catalog_lookup(args.target)
        pairs = [(c.scenario_id, _override_config(c.config, args)) for c in entry.cells]
        return entry.title, pairs
    except UnknownScenario:
        if "/" not in args.target:
            raise
    cell = find_cell(args.target)
    return cell.scenario_id, [(cell.scenario_id, _override_config(cell.config, args))]


# ---------------------------------------------------------------------------
# output tables

def _summary_rows(results: list[ScenarioResult]):
    for result in results:
        for spec in result.config.estimator_plan:
            est = spec.estimator_id
            summary = result.summaries.get(est)
            yield result, est, summary


def _render_summary_csv(results: list[ScenarioResult]) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for result, est, summary in _summary_rows(results):
        if summary is None:
            writer.writerow([result.scenario_id, est, 0, result.config.reps,
                             "", "", "", "", "", "", ""])
        else:
            writer.writerow([
                result.scenario_id, est,
                summary.n_effective_reps, summary.n_error_reps,
                _g17(summary.mean), _g17(summary.median), _g17(summary.sd),
                _g17(summary.median_se), _g17(summary.rejection_rate),
                _g17(summary.mc_se_mean), _g17(summary.mc_se_rejection),
            ])
    return buf.getvalue()


def _render_summary_md(title: str, results: list[ScenarioResult]) -> str:
    lines = [f"# {title}", ""]
    lines.append("| cell | estimator | reps (eff/err) | Mean | Median | SD | Med SE | Rejection |")
    lines.append("|---|---|---|---|---|---|---|---|")
    for result, est, summary in _summary_rows(results):
        if summary is None:
            lines.append(f"| {result.scenario_id} | {est} | 0/{result.config.reps} "
                         "| — | — | — | — | — |")
            continue
        lines.append(
            f"| {result.scenario_id} | {est} "
            f"| {summary.n_effective_reps}/{summary.n_error_reps} "
            f"| {_fmt3(summary.mean)} | {_fmt3(summary.median)} "
            f"| {_fmt3(summary.sd)} | {_fmt3(summary.median_se)} "
            f"| {_fmt_rate(summary.rejection_rate)} |"
        )
    lines.append("")
    return "\n".join(lines)


def _write_plot_csv(path: str, results: list[ScenarioResult]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PLOT_COLUMNS)
        for result, est, summary in _summary_rows(results):
            if summary is None:
                continue
            cfg = result.config
            base = [result.scenario_id, est,
                    _g17(cfg.alpha_g), _g17(cfg.alpha_u), _g17(cfg.beta_x),
                    _g17(cfg.beta_u), _g17(cfg.gamma_0), _g17(cfg.gamma_x),
                    _g17(cfg.gamma_u), _g17(cfg.gamma_y),
                    cfg.outcome_kind.value, _g17(cfg.beta_0),
                    cfg.population_size, cfg.sample_size,
                    cfg.selection_policy.value]
            for stat, value in (("mean", summary.mean), ("median", summary.median),
                                ("sd", summary.sd), ("median_se", summary.median_se),
                                ("rejection_rate", summary.rejection_rate),
                                ("n_effective_reps", float(summary.n_effective_reps))):
                writer.writerow(base + [stat, _g17(value)])


def _write_merged_per_rep_csv(path: str, results: list[ScenarioResult]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PER_REP_COLUMNS)
        for result in results:
            writer.writerows(per_rep_rows(result))


def _check_error_fractions(results: list[ScenarioResult]) -> list[str]:
    """Names of (cell, estimator) pairs whose error share exceeds the limit."""
    offenders = []
    for result in results:
        for spec in result.config.estimator_plan:
            est = spec.estimator_id
            if result.error_fraction(est) > ERROR_FRACTION_LIMIT:
                offenders.append(f"{result.scenario_id}:{est}")
    return offenders


def _warn_degenerate(configs) -> None:
    for scenario_id, config in configs:
        if config.degenerate_x_residual:
            _status_note(f"warning: {scenario_id}: alpha_g^2 + alpha_u^2 = 1 "
                         "leaves the risk factor no residual variation")


# ---------------------------------------------------------------------------
# subcommands

def cmd_run(args) -> int:
    title, targets = _resolve_run_targets(args)
    _warn_degenerate(targets)
    workers = resolve_workers(args.workers)
    t0 = time.perf_counter()
    results = []
    for scenario_id, config in targets:
        result = run_scenario(config, scenario_id=scenario_id, workers=workers)
        results.append(result)
        _status_note(f"{scenario_id}: {config.reps} reps in {result.wall_time_s:.1f}s")
    wall = time.perf_counter() - t0

    if args.format == "csv":
        _write_text(args.out, _render_summary_csv(results))
    else:
        _write_text(args.out, _render_summary_md(title, results))
    if args.per_rep_csv:
        _write_merged_per_rep_csv(args.per_rep_csv, results)
    if args.plot_csv:
        _write_plot_csv(args.plot_csv, results)

    _status_note(f"run complete: {len(results)} cell(s) in {wall:.1f}s "
                 f"({workers} worker(s))")
    offenders = _check_error_fractions(results)
    if offenders:
        _status_note("estimator failure above "
                     f"{ERROR_FRACTION_LIMIT:.0%} of replications: {', '.join(offenders)}")
        return EXIT_ESTIMATOR
    return EXIT_OK


def _collect_entries(names: list[str]):
    if not names:
        return list(list_entries())
    seen = {}
    for name in names:
        entry = catalog_lookup(name)
        seen.setdefault(entry.entry_id, entry)
    return list(seen.values())


def _reps_label(reps_override: int | None, entries) -> str:
    if reps_override is not None:
        return str(reps_override)
    values = sorted({c.config.reps for e in entries for c in e.cells})
    return "/".join(str(v) for v in values)


def _render_report_md(entries, all_checks, results_by_id, master_seed,
                      reps_label: str, low_precision: bool) -> str:
    lines = ["# Reference reproduction report", ""]
    lines.append(f"- catalog version: {CATALOG_VERSION}")
    lines.append(f"- master seed: {master_seed}")
    lines.append(f"- replications per cell: {reps_label}")
    if low_precision:
        lines.append("- **low-precision run** (fewer than "
                     f"{LOW_PRECISION_REPS} replications): tolerances are "
                     "widened by sqrt(10000/reps); treat marginal passes "
                     "with caution")
    lines.append("")
    n_pass = n_fail = n_info = 0
    for entry in entries:
        lines.append(f"## {entry.entry_id} — {entry.title}")
        lines.append("")
        if entry.note:
            lines.append(f"_{entry.note}_")
            lines.append("")
        lines.append("| cell | estimator | column | expected | observed "
                     "| tolerance | MC SE (mean) | MC SE (rate) | status |")
        lines.append("|---|---|---|---|---|---|---|---|---|")
        for check in all_checks[entry.entry_id]:
            summary = results_by_id[check.scenario_id].summaries.get(check.estimator_id)
            mc_mean = _fmt3(summary.mc_se_mean) if summary else "—"
            mc_rate = _fmt3(summary.mc_se_rejection) if summary else "—"
            if check.passed:
                status = "pass"
                n_pass += 1
            elif check.informational:
                status = "miss (informational)"
                n_info += 1
            else:
                status = "FAIL"
                n_fail += 1
            if check.column == "median_sign":
                expected = "+" if check.expected > 0 else "-"
            else:
                expected = _fmt3(check.expected)
            lines.append(
                f"| {check.scenario_id} | {check.estimator_id} | {check.column} "
                f"| {expected} | {_fmt3(check.observed)} "
                f"| {_fmt3(check.tolerance)} | {mc_mean} | {mc_rate} | {status} |"
            )
        lines.append("")
    verdict = "PASS" if n_fail == 0 else "FAIL"
    lines.append(f"**Result: {verdict}** — {n_pass} passed, {n_fail} failed, "
                 f"{n_info} informational misses.")
    lines.append("")
    return "\n".join(lines)


def _render_report_csv(entries, all_checks, results_by_id, master_seed,
                       reps_label: str) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for entry in entries:
        for check in all_checks[entry.entry_id]:
            summary = results_by_id[check.scenario_id].summaries.get(check.estimator_id)
            writer.writerow([
                CATALOG_VERSION, master_seed, reps_label,
                check.scenario_id, check.estimator_id, check.column,
                _g17(check.expected), _g17(check.observed), _g17(check.tolerance),
                _g17(summary.mc_se_mean) if summary else "",
                _g17(summary.mc_se_rejection) if summary else "",
                "true" if check.informational else "false",
                "true" if check.passed else "false",
            ])
    return buf.getvalue()


def cmd_reproduce(args) -> int:
    entries = _collect_entries(args.tables)
    workers = resolve_workers(args.workers)
    reps_values = {args.reps} if args.reps is not None else \
        {c.config.reps for e in entries for c in e.cells}
    low_precision = min(reps_values) < LOW_PRECISION_REPS
    if low_precision:
        _status_note(f"note: low-precision run (reps < {LOW_PRECISION_REPS}); "
                     "tolerances widened accordingly")

    all_checks: dict[str, list[CellCheck]] = {}
    results_by_id: dict[str, ScenarioResult] = {}
    results: list[ScenarioResult] = []
    t0 = time.perf_counter()
    for entry in entries:
        entry_t0 = time.perf_counter()
        checks: list[CellCheck] = []
        for cell in entry.cells:
            result = run_cell(cell, reps=args.reps, master_seed=args.seed,
                              workers=workers)
            results.append(result)
            results_by_id[cell.scenario_id] = result
            checks.extend(check_cell(cell, result))
        all_checks[entry.entry_id] = checks
        n_blocking = sum(1 for c in checks if c.blocking_failure)
        _status_note(f"{entry.entry_id}: {len(entry.cells)} cells, "
                     f"{len(checks)} comparisons, {n_blocking} failures, "
                     f"{time.perf_counter() - entry_t0:.1f}s")
    wall = time.perf_counter() - t0

    master_seed = args.seed if args.seed is not None else \
        entries[0].cells[0].config.master_seed
    reps_label = _reps_label(args.reps, entries)
    if args.format == "csv":
        text = _render_report_csv(entries, all_checks, results_by_id,
                                  master_seed, reps_label)
    else:
        text = _render_report_md(entries, all_checks, results_by_id,
                                 master_seed, reps_label, low_precision)
    _write_text(args.out, text)
    if args.per_rep_csv:
        _write_merged_per_rep_csv(args.per_rep_csv, results)
    if args.plot_csv:
        _write_plot_csv(args.plot_csv, results)

    flattened = [c for checks in all_checks.values() for c in checks]
    n_blocking = sum(1 for c in flattened if c.blocking_failure)
    n_info = sum(1 for c in flattened if not c.passed and c.informational)
    _status_note(f"reproduce complete: {len(flattened)} comparisons, "
                 f"{n_blocking} failures, {n_info} informational misses, "
                 f"{wall:.1f}s ({workers} worker(s))")

    offenders = _check_error_fractions(results)
    if offenders:
        _status_note("estimator failure above "
                     f"{ERROR_FRACTION_LIMIT:.0%} of replications: {', '.join(offenders)}")
        return EXIT_ESTIMATOR
    return EXIT_OK if n_blocking == 0 else EXIT_MISMATCH


def _sign_symbol(moderate: int, strong: int) -> str:
    return {(1, 1): "+", (-1, -1): "-", (1, -1): "+/-", (-1, 1): "-/+"}[(moderate, strong)]


def cmd_signs(args) -> int:
    entry = catalog_lookup("tableA2")
    workers = resolve_workers(args.workers)
    t0 = time.perf_counter()
    rows = []
    n_fail = 0
    for cell in entry.cells:
        result = run_cell(cell, reps=args.reps, master_seed=args.seed,
                          workers=workers)
        checks = check_cell(cell, result)
        assert len(checks) == 1
        check = checks[0]
        cfg = cell.config
        if not check.passed:
            n_fail += 1
        rows.append((cfg.gamma_u, cfg.gamma_x, cfg.alpha_u, cfg.beta_u, check))
    wall = time.perf_counter() - t0

    lines = ["# Bias direction grid", ""]
    lines.append(f"- catalog version: {CATALOG_VERSION}")
    seed = args.seed if args.seed is not None else entry.cells[0].config.master_seed
    reps = args.reps if args.reps is not None else entry.cells[0].config.reps
    lines.append(f"- master seed: {seed}")
    lines.append(f"- replications per cell: {reps}")
    lines.append("")
    lines.append("A cell passes when the observed median has the expected sign and "
                 "exceeds three Monte Carlo standard errors in magnitude.")
    lines.append("")
    lines.append("| gamma_u | gamma_x | alpha_u | beta_u | expected sign "
                 "| observed median | sign floor | status |")
    lines.append("|---|---|---|---|---|---|---|---|")
    for gu, gx, au, bu, check in sorted(
            rows, key=lambda r: (-r[0], -math.copysign(1, r[1]), -r[2], -r[3], abs(r[1]))):
        expected = "+" if check.expected > 0 else "-"
        lines.append(f"| {gu:+g} | {gx:+g} | {'+' if au > 0 else '-'}sqrt(0.5) "
                     f"| {'+' if bu > 0 else '-'}sqrt(0.5) | {expected} "
                     f"| {check.observed:+.4f} | {check.tolerance:.4f} "
                     f"| {'pass' if check.passed else 'FAIL'} |")
    lines.append("")
    verdict = "PASS" if n_fail == 0 else "FAIL"
    lines.append(f"**Result: {verdict}** — {len(rows) - n_fail}/{len(rows)} "
                 "direction checks passed.")
    lines.append("")
    _write_text(args.out, "\n".join(lines))
    _status_note(f"signs complete: {len(rows)} cells, {n_fail} failures, {wall:.1f}s")
    return EXIT_OK if n_fail == 0 else EXIT_MISMATCH


def cmd_list(args) -> int:
    del args
    lines = []
    for entry in list_entries():
        lines.append(f"{entry.entry_id:12s} {len(entry.cells):4d} cells  "
                     f"{entry.n_expected:4d} reference values  {entry.title}")
    lines.append("")
    lines.append("Aliases: table4/lpa -> lpa.table4, a1..a6 -> tableA1..tableA6.")
    lines.append("Single cells address as entry/cell-key, e.g. table1/gX=-2.")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(parser: argparse.ArgumentParser, *, per_rep: bool = True) -> None:
    parser.add_argument("--reps", type=int, default=None,
                        help="replications per cell (default: configured value)")
    parser.add_argument("--seed", type=int, default=None, metavar="U64",
                        help="master seed override")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: $MRSEL_WORKERS or CPU count)")
    parser.add_argument("--out", default=None, metavar="PATH",
                        help="write the report here instead of stdout")
    if per_rep:
        parser.add_argument("--format", choices=("csv", "md"), default="md",
                            help="report format (default: md)")
        parser.add_argument("--per-rep-csv", default=None, metavar="PATH",
                            help="write one row per replication and estimator")
        parser.add_argument("--plot-csv", default=None, metavar="PATH",
                            help="write long-format summary CSV for plotting")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrsel",
        description="Monte Carlo study of selection bias in instrumental-variable analyses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a catalog entry, cell, or custom config")
    p_run.add_argument("target", nargs="?", default=None,
                       help="catalog entry id or cell id (e.g. table1 or table1/gX=-2)")
    p_run.add_argument("--config", default=None, metavar="PATH",
                       help="JSON configuration file")
    p_run.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="override a config value by dotted path "
                            "(e.g. dgp.gamma_x=1.5); repeatable")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("reproduce",
                           help="run catalog entries and compare against reference values")
    p_rep.add_argument("tables", nargs="*",
                       help="catalog entry ids (default: the whole catalog)")
    _add_common(p_rep)
    p_rep.set_defaults(func=cmd_reproduce)

    p_signs = sub.add_parser("signs", help="evaluate the bias-direction grid")
    _add_common(p_signs, per_rep=False)
    p_signs.set_defaults(func=cmd_signs)

    p_list = sub.add_parser("list", help="list catalog entries")
    p_list.set_defaults(func=cmd_list)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaViolation, InvalidConfig, UnknownScenario) as exc:
        _status_note(f"configuration error: {exc}")
        return EXIT_CONFIG
    except InsufficientSelected as exc:
        _status_note(f"infeasible selection: {exc}")
        return EXIT_INFEASIBLE
    except NoEffectiveReps as exc:
        _status_note(f"estimator failure: {exc}")
        return EXIT_ESTIMATOR
    except MrselError as exc:
        _status_note(f"error: {exc}")
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
