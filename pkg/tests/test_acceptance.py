"""Acceptance criteria for the repair engine.

One test per criterion; each prints a PASS line on success (run with
`pytest tests/test_acceptance.py -v` for the per-criterion verdicts).
These drive the bundled corpus end to end and are intentionally heavier
than the unit tests; the whole module stays well under five minutes.
"""

import json
import math
import time
from collections import Counter

from minirepair.cli import bench_run, main as cli_main
from minirepair.diffs import apply_unified_diff
from minirepair.engine import ModificationPoint, navigate, select_points
from minirepair.faultloc import run_suite, suspiciousness, values_equal
from minirepair.lang import execute, parse_project, pre_order
from minirepair.lang.ast import LOGICAL_OPS, RELATIONAL_OPS
from minirepair.lang.printer import print_sources
from minirepair.lang.types import TypeCheckError, check_project
from minirepair.presets import PRESET_NAMES, config_from_preset
from minirepair.rng import SplitMix64
from minirepair.validate import validate_variant

from conftest import CORPUS, bug_meta, corpus_bug_names, load_bug

SEEDS = (1, 2, 3)
BENCH_ITERATIONS = 2000


def all_reachable_pairs():
    pairs = []
    for bug in corpus_bug_names():
        for mode in bug_meta(bug)["reachable_by"]:
            pairs.append((bug, mode))
    return pairs


def test_criterion_1_corpus_repairability():
    """Every preset repairs 100% of its reachable bugs, on every seed,
    within 2000 iterations, with the whole bench under five minutes."""
    names = corpus_bug_names()
    assert len(names) >= 20
    pairs = all_reachable_pairs()
    assert pairs and all(any(mode in bug_meta(b)["reachable_by"] for b in names)
                         for mode in PRESET_NAMES)
    started = time.monotonic()
    rows = bench_run(CORPUS, pairs, list(SEEDS),
                     overrides={"max_iterations": BENCH_ITERATIONS})
    elapsed = time.monotonic() - started
    failures = [r for r in rows if r["repaired"] != "yes"]
    assert not failures, f"unrepaired labeled runs: {failures[:5]}"
    assert elapsed < 300.0, f"bench took {elapsed:.1f}s"
    print(f"\nACCEPTANCE PASS criterion-1: {len(rows)} labeled runs repaired "
          f"({len(pairs)} bug/preset pairs x {len(SEEDS)} seeds) in {elapsed:.1f}s")


def test_criterion_2_granularity_complementarity():
    """>=2 bugs only the expression-granularity approach repairs and >=2
    only the statement-granularity family repairs, visible in bench rows."""
    expression_only = ["substring-end", "mid-formula"]
    statement_only = ["missing-step", "debug-override"]
    pairs = [(bug, mode) for bug in expression_only + statement_only
             for mode in ("cardumen", "jgenprog")]
    rows = bench_run(CORPUS, pairs, list(SEEDS),
                     overrides={"max_iterations": BENCH_ITERATIONS})

    def repaired(bug, mode):
        relevant = [r for r in rows if r["bug"] == bug and r["mode"] == mode]
        assert len(relevant) == len(SEEDS)
        return all(r["repaired"] == "yes" for r in relevant)

    for bug in expression_only:
        assert repaired(bug, "cardumen"), f"{bug} should be cardumen-repairable"
        assert not any(r["repaired"] == "yes" for r in rows
                       if r["bug"] == bug and r["mode"] == "jgenprog"), bug
    for bug in statement_only:
        assert repaired(bug, "jgenprog"), f"{bug} should be jgenprog-repairable"
        assert not any(r["repaired"] == "yes" for r in rows
                       if r["bug"] == bug and r["mode"] == "cardumen"), bug
    print("\nACCEPTANCE PASS criterion-2: expression-only "
          f"{expression_only} vs statement-only {statement_only}")


SCOPE_BUGS = ("two-modules", "ledger-scope", "stock-scope", "audit-scope", "queue-scope")


def test_criterion_3_ingredient_scope_experiment():
    """Reduced ingredient pools never need more validations than the global
    pool to reach the first patch, and whatever global repairs the smaller
    scopes repair too.  Protocol: exhaustive navigation isolates the pool
    as the only variable (candidate order is deterministic)."""
    results = {}
    for bug in SCOPE_BUGS:
        project, suite, meta = load_bug(bug)
        per_scope = {}
        for scope in ("file", "module", "global"):
            config = config_from_preset(
                "jgenprog", seed=1, navigation="exhaustive", ingredient_scope=scope,
                max_solutions=1, max_iterations=10_000,
                step_budget=int(meta["step_budget"]),
            )
            outcome = navigate(project, suite, config)
            per_scope[scope] = (bool(outcome.patches),
                                outcome.stats.validations_at_first_patch)
        results[bug] = per_scope
        repaired_global, v_global = per_scope["global"]
        if repaired_global:
            for scope in ("file", "module"):
                repaired, v_scope = per_scope[scope]
                assert repaired, f"{bug}: global repaired but {scope} did not"
                assert v_scope <= v_global, (
                    f"{bug}: {scope} needed {v_scope} validations, global {v_global}"
                )
    assert sum(1 for r in results.values() if r["global"][0]) >= 5
    summary = {bug: {s: v for s, (_, v) in r.items()} for bug, r in results.items()}
    print(f"\nACCEPTANCE PASS criterion-3: validations to first patch {summary}")


def test_criterion_4_ingredient_transformation_experiment():
    """>=2 bugs repaired by the random-variable-replacement approach that
    plain no-transformation search cannot reach."""
    bugs = ["mid-formula", "offset-return", "scale-formula"]
    pairs = [(bug, mode) for bug in bugs for mode in ("tibra", "jgenprog")]
    rows = bench_run(CORPUS, pairs, list(SEEDS),
                     overrides={"max_iterations": BENCH_ITERATIONS})
    tibra_wins = []
    for bug in bugs:
        tibra_rows = [r for r in rows if r["bug"] == bug and r["mode"] == "tibra"]
        plain_rows = [r for r in rows if r["bug"] == bug and r["mode"] == "jgenprog"]
        if all(r["repaired"] == "yes" for r in tibra_rows) and \
           all(r["repaired"] == "no" for r in plain_rows):
            tibra_wins.append(bug)
    assert len(tibra_wins) >= 2, f"only {tibra_wins} separate tibra from jgenprog"
    print(f"\nACCEPTANCE PASS criterion-4: tibra-only bugs {tibra_wins}")


# -- criterion 5: exhaustive-search oracle -------------------------------------


def _test_passes(trace, test):
    if test.expect_error is not None:
        return trace.outcome.status == "error" and trace.outcome.error_kind == test.expect_error
    return trace.outcome.is_normal and values_equal(trace.outcome.value, test.expect)


def _suspicious_statements_oracle(project, suite, budget, cap=100):
    """Independent spectrum + ochiai ranking, straight from raw traces."""
    ef, ep = Counter(), Counter()
    failing = 0
    for test in suite:
        trace = execute(project, test.entry, list(test.args), budget)
        passed = _test_passes(trace, test)
        failing += 0 if passed else 1
        for sid in trace.covered:
            (ep if passed else ef)[sid] += 1
    assert failing > 0
    scored = []
    for sid in set(ef) | set(ep):
        score = 0.0
        if ef[sid]:
            score = ef[sid] / math.sqrt(failing * (ef[sid] + ep[sid]))
        if score > 0.0:
            scored.append((sid, score))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return [sid for sid, _ in scored[:cap]]


def _nearest_statement(project, node):
    cur = project.parents[node.node_id]
    while cur is not None and not project.nodes[cur].is_statement():
        cur = project.parents[cur]
    return cur


def _mutation_typechecks(project, expr, mutate):
    """Clone the project, apply `mutate(expr-copy)`, and type-check."""
    copy = project.clone()
    target = copy.nodes[expr.node_id]
    mutate(copy, target)
    copy.reindex()
    try:
        check_project(copy)
        return True
    except TypeCheckError:
        return False


def _count_mutations_oracle(project, suite, budget):
    """Brute-force enumeration of applicable (point, mutation) pairs for
    operator mutation at logical-relational granularity."""
    count = 0
    suspicious = _suspicious_statements_oracle(project, suite, budget)
    for sid in suspicious:
        stmt = project.nodes[sid]
        targets = [n for n in pre_order(stmt)
                   if n.is_expression() and _nearest_statement(project, n) == sid]
        targets.sort(key=lambda n: n.node_id)
        for expr in targets:
            if expr.kind == "binary-op" and expr.op in RELATIONAL_OPS:
                for alternative in RELATIONAL_OPS:
                    if alternative == expr.op:
                        continue

                    def swap(copy, target, alt=alternative):
                        target.op = alt

                    if _mutation_typechecks(project, expr, swap):
                        count += 1
            elif expr.kind == "binary-op" and expr.op in LOGICAL_OPS:
                def flip(copy, target):
                    target.op = "||" if target.op == "&&" else "&&"

                if _mutation_typechecks(project, expr, flip):
                    count += 1

                def negate(copy, target):
                    from minirepair.lang import Node
                    parent = copy.parent(target.node_id)
                    for i, child in enumerate(parent.children):
                        if child is target:
                            parent.children[i] = Node("unary-op", [target], op="!")
                            return

                if _mutation_typechecks(project, expr, negate):
                    count += 1
            elif expr.kind == "unary-op" and expr.op == "!":
                def unwrap(copy, target):
                    parent = copy.parent(target.node_id)
                    for i, child in enumerate(parent.children):
                        if child is target:
                            parent.children[i] = target.children[0]
                            return

                if _mutation_typechecks(project, expr, unwrap):
                    count += 1
    return count


def test_criterion_5_exhaustive_search_oracle():
    """Exhaustive mutation search validates exactly the brute-force count
    of applicable (point, mutation) pairs, for every corpus bug."""
    checked = 0
    for bug in corpus_bug_names():
        project, suite, meta = load_bug(bug)
        budget = int(meta["step_budget"])
        config = config_from_preset("jmutrepair", max_solutions=10_000,
                                    max_iterations=1_000_000, step_budget=budget)
        outcome = navigate(project, suite, config)
        expected = _count_mutations_oracle(project, suite, budget)
        assert outcome.stats.validated == expected, (
            f"{bug}: engine validated {outcome.stats.validated}, oracle {expected}"
        )
        checked += 1
    assert checked >= 20
    print(f"\nACCEPTANCE PASS criterion-5: exact candidate counts on {checked} bugs")


def test_criterion_6_fault_localization_oracle():
    """Both formulas match a naive recomputation from raw traces to 1e-12
    and always land in [0, 1], on every corpus bug."""
    for bug in corpus_bug_names():
        project, suite, meta = load_bug(bug)
        budget = int(meta["step_budget"])
        matrix = run_suite(project, suite, budget)

        ef, ep = Counter(), Counter()
        failing = passing = 0
        for test in suite:
            trace = execute(project, test.entry, list(test.args), budget)
            if _test_passes(trace, test):
                passing += 1
                for sid in trace.covered:
                    ep[sid] += 1
            else:
                failing += 1
                for sid in trace.covered:
                    ef[sid] += 1

        for formula in ("ochiai", "tarantula"):
            ranked = suspiciousness(matrix, formula)
            assert {l.statement_id for l in ranked} == set(ef) | set(ep)
            for loc in ranked:
                sid = loc.statement_id
                if formula == "ochiai":
                    naive = (ef[sid] / math.sqrt(failing * (ef[sid] + ep[sid]))
                             if ef[sid] else 0.0)
                else:
                    fail_ratio = ef[sid] / failing if failing else 0.0
                    pass_ratio = ep[sid] / passing if passing else 0.0
                    naive = (fail_ratio / (fail_ratio + pass_ratio)
                             if fail_ratio > 0.0 else 0.0)
                assert abs(loc.suspiciousness - naive) <= 1e-12, (bug, formula, sid)
                assert 0.0 <= loc.suspiciousness <= 1.0
    print(f"\nACCEPTANCE PASS criterion-6: formulas match naive recomputation "
          f"on {len(corpus_bug_names())} bugs")


def test_criterion_7_weighted_selection_distribution():
    """Empirical select_points frequencies match sv / sum(sv) within 0.02."""
    points = [
        ModificationPoint(1, "statement", 0.5, {}),
        ModificationPoint(2, "statement", 0.25, {}),
        ModificationPoint(3, "statement", 0.25, {}),
    ]
    rng = SplitMix64(20_24)
    counts = Counter()
    draws = 10_000
    for _ in range(draws):
        counts[select_points(points, "weighted-random", 1, rng)[0].node_id] += 1
    observed = {nid: counts[nid] / draws for nid in (1, 2, 3)}
    assert abs(observed[1] - 0.5) < 0.02
    assert abs(observed[2] - 0.25) < 0.02
    assert abs(observed[3] - 0.25) < 0.02
    print(f"\nACCEPTANCE PASS criterion-7: empirical frequencies {observed}")


def test_criterion_8_determinism(tmp_path):
    """Identical invocations produce byte-identical artifacts; --jobs
    changes nothing."""
    cases = [
        ("ledger-scope", "jgenprog", "7"),
        ("mid-formula", "cardumen", "3"),
        ("abs-sign", "jmutrepair", "1"),
    ]
    for bug, mode, seed in cases:
        outputs = []
        for run, extra in (("a", []), ("b", []), ("jobs", ["--jobs", "3"])):
            out = tmp_path / f"{bug}-{run}"
            code = cli_main(["repair", str(CORPUS / bug), "--mode", mode,
                             "--seed", seed, "--max-iterations", "500",
                             "--out", str(out), *extra])
            assert code == 0, (bug, mode)
            blob = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
            outputs.append(blob)
        assert outputs[0] == outputs[1], f"{bug}: replay differs"
        # --jobs may only show up in the verbatim config echo; patches,
        # their ordering, and all search statistics must be unchanged
        report_a = json.loads(outputs[0]["report.json"])
        report_j = json.loads(outputs[2]["report.json"])
        assert report_j["config"]["jobs"] == 3
        report_j["config"]["jobs"] = report_a["config"]["jobs"]
        assert report_a == report_j, f"{bug}: --jobs changed results"
        diffs_a = {k: v for k, v in outputs[0].items() if k.endswith(".patch")}
        diffs_j = {k: v for k, v in outputs[2].items() if k.endswith(".patch")}
        assert diffs_a == diffs_j, f"{bug}: --jobs changed patch content"
    print(f"\nACCEPTANCE PASS criterion-8: byte-identical artifacts for {len(cases)} configs")


def test_criterion_9_patch_integrity():
    """Every emitted patch applies byte-exactly, re-validates to fitness 0,
    and is 1-minimal (removing any surviving transformation fails a test)."""
    sample = [
        ("abs-sign", "jmutrepair"), ("bound-check", "jmutrepair"),
        ("extra-increment", "jkali"), ("feature-gate", "jkali"),
        ("ledger-scope", "jgenprog"), ("missing-step", "jgenprog"),
        ("substring-end", "cardumen"), ("mid-formula", "cardumen"),
        ("offset-return", "tibra"), ("scale-formula", "tibra"),
        ("queue-scope", "deeprepair-lite"),
    ]
    patches_checked = 0
    for bug, mode in sample:
        project, suite, meta = load_bug(bug)
        config = config_from_preset(mode, seed=1, max_solutions=2,
                                    max_iterations=BENCH_ITERATIONS,
                                    step_budget=int(meta["step_budget"]))
        outcome = navigate(project, suite, config)
        assert outcome.patches, (bug, mode)
        baseline_sources = print_sources(project)
        session = outcome.session
        for patch in outcome.patches:
            patched_sources = apply_unified_diff(patch.diff_text, baseline_sources)
            assert patched_sources == patch.sources, (bug, mode)

            reparsed = parse_project(sorted(patched_sources.items()))
            matrix = run_suite(reparsed, suite, int(meta["step_budget"]))
            assert matrix.total_failing == 0, (bug, mode)

            kept = list(patch.transformations)
            assert kept
            for i in range(len(kept)):
                trimmed = kept[:i] + kept[i + 1:]
                materialized = session.materialize(trimmed)
                if materialized is None:
                    continue  # un-materializable trims cannot be adequate
                result = validate_variant(materialized, session.baseline,
                                          int(meta["step_budget"]),
                                          short_circuit=False)
                assert result.failing > 0, (
                    f"{bug}/{mode}: dropping transformation {i} keeps fitness 0"
                )
            patches_checked += 1
    assert patches_checked >= len(sample)
    print(f"\nACCEPTANCE PASS criterion-9: {patches_checked} patches round-trip, "
          "re-validate green, and are 1-minimal")
