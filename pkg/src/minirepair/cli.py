"""Command-line front door.

    minirepair repair <project-dir> [flags]    search for patches
    minirepair bench  <corpus-dir>  [flags]    run the bundled benchmark

A project directory holds `src/**/*.mini` plus `tests.json`; corpus bugs
additionally carry `bug.json` (step budget, which presets can reach the
planted fix) and `expected_fix.patch`.  Repair writes `report.json` and one
`.patch` file per solution into the output directory and exits 0 when at
least one patch was found, 2 when the search ended empty-handed, and 1 on
usage, parse, or nothing-to-repair errors.

All artifacts are byte-deterministic for a fixed configuration and seed;
the time measure in reports and bench CSVs is interpreter steps, not wall
clock.  Set REPAIR_LOG=debug|info|warning for stderr logging.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from minirepair.config import ConfigError, RunConfig, apply_overrides, parse_config_file
from minirepair.engine import RepairOutcome, navigate
from minirepair.faultloc import NoFailingTests, SuiteError, TestCase, load_suite
from minirepair.lang.ast import ProjectError, SourceProject, parse_project
from minirepair.lang.types import TypeCheckError, check_project
from minirepair.presets import PRESET_NAMES, config_from_preset

log = logging.getLogger("minirepair")

BENCH_FIELDS = (
    "bug", "mode", "seed", "repaired", "first_patch_iteration",
    "validations_to_first_patch", "validations", "time_steps",
)


def _setup_logging() -> None:
    level_name = os.environ.get("REPAIR_LOG", "warning").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")


class ProjectLoadError(Exception):
    pass


def load_project_dir(project_dir: str | Path) -> tuple[SourceProject, list[TestCase], dict]:
    """Parse <dir>/src/**/*.mini and <dir>/tests.json (paths are stored
    relative to src/, so module names follow the directory layout)."""
    root = Path(project_dir)
    src_root = root / "src"
    if not src_root.is_dir():
        raise ProjectLoadError(f"{root}: missing src/ directory")
    files = []
    for path in sorted(src_root.rglob("*.mini")):
        rel = path.relative_to(src_root).as_posix()
        files.append((rel, path.read_text(encoding="utf-8")))
    if not files:
        raise ProjectLoadError(f"{src_root}: no .mini files")
    project = parse_project(files)
    check_project(project)

    tests_path = root / "tests.json"
    if not tests_path.is_file():
        raise ProjectLoadError(f"{root}: missing tests.json")
    suite = load_suite(tests_path)

    meta = {}
    meta_path = root / "bug.json"
    if meta_path.is_file():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    return project, suite, meta


def build_config(args, meta: dict | None = None) -> RunConfig:
    if args.mode != "custom":
        config = config_from_preset(args.mode)
    else:
        config = RunConfig()
    if args.config:
        apply_overrides(config, parse_config_file(args.config))
    flag_overrides = {
        "seed": args.seed,
        "max_solutions": args.max_solutions,
        "max_iterations": args.max_iterations,
        "max_seconds": args.max_seconds,
        "navigation": args.navigation,
        "ingredient_scope": args.scope,
        "granularity": args.granularity,
        "jobs": args.jobs,
        "step_budget": args.step_budget,
        "formula": args.formula,
    }
    if meta and args.step_budget is None and "step_budget" in meta:
        flag_overrides["step_budget"] = int(meta["step_budget"])
    apply_overrides(config, flag_overrides)
    config.mode = args.mode
    config.validate()
    return config


def write_report(outcome: RepairOutcome, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    report = json.dumps(outcome.report_dict(), indent=2, sort_keys=True) + "\n"
    (out_dir / "report.json").write_text(report, encoding="utf-8")
    for patch in outcome.patches:
        name = f"patch-{patch.discovery_order:03d}.patch"
        (out_dir / name).write_text(patch.diff_text, encoding="utf-8")


def run_repair(project_dir: str, config: RunConfig, out_dir: Path) -> RepairOutcome:
    project, suite, _ = load_project_dir(project_dir)
    outcome = navigate(project, suite, config)
    write_report(outcome, out_dir)
    return outcome


def cmd_repair(args) -> int:
    try:
        project, suite, meta = load_project_dir(args.project_dir)
        config = build_config(args, meta)
    except (ProjectLoadError, ProjectError, TypeCheckError, SuiteError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        outcome = navigate(project, suite, config)
    except NoFailingTests:
        print("nothing to repair: all tests pass", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    write_report(outcome, out_dir)
    found = len(outcome.patches)
    log.info("stop=%s patches=%d validated=%d", outcome.stats.stop_reason,
             found, outcome.stats.validated)
    print(f"{found} patch(es) found; report in {out_dir}")
    return 0 if found else 2


def bench_run(
    corpus_dir: str | Path,
    pairs: list[tuple[str, str]],
    seeds: list[int],
    overrides: dict | None = None,
) -> list[dict]:
    """Run (bug, mode) pairs across seeds; one result row per run."""
    rows = []
    for bug_name, mode in pairs:
        bug_dir = Path(corpus_dir) / bug_name
        project, suite, meta = load_project_dir(bug_dir)
        for seed in seeds:
            config = config_from_preset(mode, seed=seed)
            if "step_budget" in meta:
                config.step_budget = int(meta["step_budget"])
            if overrides:
                apply_overrides(config, overrides)
            config.validate()
            outcome = navigate(project, suite, config)
            stats = outcome.stats
            rows.append(
                {
                    "bug": bug_name,
                    "mode": mode,
                    "seed": seed,
                    "repaired": "yes" if outcome.patches else "no",
                    "first_patch_iteration": stats.iteration_at_first_patch
                    if stats.iteration_at_first_patch is not None
                    else "",
                    "validations_to_first_patch": stats.validations_at_first_patch
                    if stats.validations_at_first_patch is not None
                    else "",
                    "validations": stats.validated,
                    "time_steps": stats.time_steps,
                }
            )
    return rows


def discover_bugs(corpus_dir: str | Path) -> list[str]:
    return sorted(
        p.name for p in Path(corpus_dir).iterdir()
        if p.is_dir() and (p / "tests.json").is_file()
    )


def rows_to_csv(rows: list[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def summary_csv(rows: list[dict]) -> str:
    """Bugs repaired per mode (a bug counts once if any seed repaired it)."""
    repaired: dict[str, set[str]] = {}
    modes = []
    for row in rows:
        if row["mode"] not in modes:
            modes.append(row["mode"])
        if row["repaired"] == "yes":
            repaired.setdefault(row["mode"], set()).add(row["bug"])
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["mode", "bugs_repaired"])
    for mode in modes:
        writer.writerow([mode, len(repaired.get(mode, ()))])
    return buffer.getvalue()


def cmd_bench(args) -> int:
    corpus = Path(args.corpus_dir)
    if not corpus.is_dir():
        print(f"error: {corpus} is not a directory", file=sys.stderr)
        return 1
    bugs = args.bugs.split(",") if args.bugs else discover_bugs(corpus)
    modes = args.modes.split(",")
    seeds = [int(s) for s in args.seeds.split(",")]
    overrides = {}
    if args.navigation:
        overrides["navigation"] = args.navigation
    if args.scope:
        overrides["ingredient_scope"] = args.scope
    if args.max_iterations is not None:
        overrides["max_iterations"] = args.max_iterations
    try:
        pairs = [(bug, mode) for bug in bugs for mode in modes]
        rows = bench_run(corpus, pairs, seeds, overrides)
    except (ProjectLoadError, ProjectError, TypeCheckError, SuiteError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "bench.csv").write_text(rows_to_csv(rows), encoding="utf-8")
    (out_dir / "summary.csv").write_text(summary_csv(rows), encoding="utf-8")
    repaired = sum(1 for r in rows if r["repaired"] == "yes")
    print(f"{len(rows)} runs, {repaired} repaired; CSV in {out_dir}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minirepair",
                                     description="generate-and-validate program repair for MiniLang")
    sub = parser.add_subparsers(dest="command", required=True)

    repair = sub.add_parser("repair", help="search for patches for one project")
    repair.add_argument("project_dir")
    repair.add_argument("--mode", default="custom", choices=("custom",) + PRESET_NAMES)
    repair.add_argument("--seed", type=int, default=None)
    repair.add_argument("--max-solutions", type=int, default=None)
    repair.add_argument("--max-iterations", type=int, default=None)
    repair.add_argument("--max-seconds", type=float, default=None)
    repair.add_argument("--navigation", default=None,
                        choices=("exhaustive", "selective", "evolutionary"))
    repair.add_argument("--scope", default=None, choices=("file", "module", "global"))
    repair.add_argument("--granularity", default=None,
                        choices=("statement", "expression", "logical-relational"))
    repair.add_argument("--jobs", type=int, default=None)
    repair.add_argument("--step-budget", type=int, default=None)
    repair.add_argument("--formula", default=None, choices=("ochiai", "tarantula"))
    repair.add_argument("--config", default=None, help="flat key=value config file")
    repair.add_argument("--out", default="repair-out")
    repair.set_defaults(func=cmd_repair)

    bench = sub.add_parser("bench", help="run repair attempts over a corpus")
    bench.add_argument("corpus_dir")
    bench.add_argument("--modes", required=True, help="comma-separated preset names")
    bench.add_argument("--seeds", default="1,2,3")
    bench.add_argument("--bugs", default=None, help="comma-separated bug names (default: all)")
    bench.add_argument("--navigation", default=None,
                       choices=("exhaustive", "selective", "evolutionary"))
    bench.add_argument("--scope", default=None, choices=("file", "module", "global"))
    bench.add_argument("--max-iterations", type=int, default=None)
    bench.add_argument("--out", default="bench-out")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
