"""The repair search: modification points, candidate generation, navigation.

The loop follows the generate-and-validate shape: fault localization
produces suspicious statements, each suspicious code element of the
configured granularity becomes a modification point, and the navigation
strategy (exhaustive, selective, or evolutionary) repeatedly picks a point
and an operator, builds a transformation (fetching and adapting an
ingredient when the operator needs one), materializes the program variant,
and validates it against the suite.  Variants that fail the scope/type
check are rejected at generation time and never executed.

Candidate bookkeeping guarantees no (point, operator, concrete form)
triple is validated twice in one run, which both prunes the search and
lets selective runs detect a fully exhausted space and stop early.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from minirepair.config import ConfigError, RunConfig
from minirepair.faultloc import (
    NoFailingTests,
    SuspiciousLocation,
    TestCase,
    filter_suspicious,
    run_suite,
    suspiciousness,
)
from minirepair.ingredients import (
    COMPOSITE_EXPRESSION_KINDS,
    AttemptCache,
    FunctionSimilarity,
    Ingredient,
    IngredientPool,
    build_name_model,
    build_pool,
    mine_templates,
    select_ingredient,
    substitution_space_size,
    transform_ingredient,
)
from minirepair.lang.ast import LOGICAL_OPS, RELATIONAL_OPS, Node, SourceProject, Type
from minirepair.lang.printer import print_sources, print_tree
from minirepair.lang.types import TypeCheckError, cached_types, check_project, env_at
from minirepair.operators import (
    OperatorSpace,
    RepairOperator,
    is_assignment_target_base,
    operator_space,
)
from minirepair.rng import RngStreams, SplitMix64
from minirepair.validate import Baseline, fitness, refine_patches, validate_variant


class NoSearchSpace(Exception):
    """No suspicious element matches the configured granularity."""


@dataclass(frozen=True)
class ModificationPoint:
    node_id: int
    granularity: str
    suspiciousness: float
    env: dict[str, Type] = field(compare=False, hash=False)
    file: str = ""
    module: str = ""
    function: str = ""


@dataclass
class Transformation:
    point: ModificationPoint
    operator: RepairOperator
    concrete: Optional[Node]  # ingredient subtree ready to splice, or None
    concrete_printed: Optional[str] = None
    ingredient_printed: Optional[str] = None

    def provenance(self) -> dict:
        return {
            "point": self.point.node_id,
            "file": self.point.file,
            "operator": self.operator.name,
            "ingredient": self.concrete_printed,
        }


@dataclass
class ProgramVariant:
    variant_id: int
    transformations: list[Transformation]
    generation_born: int
    fitness: Optional[int] = None
    dirty: bool = True
    discovery_order: Optional[int] = None
    discovery_iteration: Optional[int] = None


@dataclass
class SearchStats:
    iterations: int = 0
    variants_generated: int = 0
    validated: int = 0
    rejected_typecheck: int = 0
    not_applicable: int = 0
    duplicates: int = 0
    exhausted_selections: int = 0
    solutions: int = 0
    pool_builds: int = 0
    time_steps: int = 0
    validations_at_first_patch: Optional[int] = None
    iteration_at_first_patch: Optional[int] = None
    per_operator: dict = field(default_factory=dict)
    stop_reason: str = ""

    def op_bucket(self, name: str) -> dict:
        return self.per_operator.setdefault(
            name, {"created": 0, "validated": 0, "solutions": 0}
        )

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "variants_generated": self.variants_generated,
            "validated": self.validated,
            "rejected_typecheck": self.rejected_typecheck,
            "not_applicable": self.not_applicable,
            "duplicates": self.duplicates,
            "exhausted_selections": self.exhausted_selections,
            "solutions": self.solutions,
            "pool_builds": self.pool_builds,
            "time_steps": self.time_steps,
            "validations_at_first_patch": self.validations_at_first_patch,
            "iteration_at_first_patch": self.iteration_at_first_patch,
            "per_operator": {k: dict(v) for k, v in sorted(self.per_operator.items())},
            "stop_reason": self.stop_reason,
        }


# -- modification points -------------------------------------------------------


def _nearest_statement_is(project: SourceProject, expr: Node, stmt: Node) -> bool:
    enclosing = project.enclosing_statement(project.parents[expr.node_id])
    return enclosing is not None and enclosing.node_id == stmt.node_id


def _expression_targets(project: SourceProject, stmt: Node, granularity: str) -> list[Node]:
    from minirepair.lang.ast import pre_order

    out = []
    for node in pre_order(stmt):
        if not node.is_expression():
            continue
        if not _nearest_statement_is(project, node, stmt):
            continue
        if granularity == "expression":
            if node.kind in COMPOSITE_EXPRESSION_KINDS and not is_assignment_target_base(
                project, node
            ):
                out.append(node)
        else:  # logical-relational
            if node.kind == "binary-op" and node.op in RELATIONAL_OPS + LOGICAL_OPS:
                out.append(node)
            elif node.kind == "unary-op" and node.op == "!":
                out.append(node)
    out.sort(key=lambda n: n.node_id)
    return out


def create_modification_points(
    project: SourceProject,
    suspicious: Sequence[SuspiciousLocation],
    granularity: str,
) -> list[ModificationPoint]:
    """One point per suspicious statement; at finer granularities, one point
    per qualifying expression inside each suspicious statement (expressions
    inherit the suspiciousness of their nearest enclosing statement)."""
    module_by_path = {sf.path: sf.module for sf in project.files}

    def make_point(node: Node, sv: float) -> ModificationPoint:
        path = project.file_of[node.node_id]
        return ModificationPoint(
            node_id=node.node_id,
            granularity=granularity,
            suspiciousness=sv,
            env=env_at(project, node.node_id),
            file=path,
            module=module_by_path[path],
            function=project.enclosing_function(node.node_id).name,
        )

    points: list[ModificationPoint] = []
    for loc in suspicious:
        stmt = project.node(loc.statement_id)
        if not stmt.is_statement():
            continue
        if granularity == "statement":
            points.append(make_point(stmt, loc.suspiciousness))
        else:
            for target in _expression_targets(project, stmt, granularity):
                points.append(make_point(target, loc.suspiciousness))
    return points


# -- selection strategies --------------------------------------------------------


def select_points(
    points: Sequence[ModificationPoint],
    strategy: str,
    count: int,
    rng: SplitMix64,
) -> list[ModificationPoint]:
    """Choose `count` distinct points.  uniform-random: equal probability;
    weighted-random: probability sv / sum(sv) (uniform fallback when every
    sv is zero); sequential: descending sv, ties by ascending node id."""
    if not points:
        raise ValueError("no modification points to select from")
    count = min(count, len(points))
    if strategy == "sequential":
        ordered = sorted(points, key=lambda p: (-p.suspiciousness, p.node_id))
        return ordered[:count]
    remaining = list(points)
    picked = []
    use_weights = strategy == "weighted-random" and any(
        p.suspiciousness > 0 for p in remaining
    )
    if strategy not in ("uniform-random", "weighted-random"):
        raise ConfigError(f"unknown point selection strategy {strategy!r}")
    for _ in range(count):
        if use_weights:
            idx = rng.weighted_index([p.suspiciousness for p in remaining])
        else:
            idx = rng.below(len(remaining))
        picked.append(remaining.pop(idx))
    return picked


def select_operator(
    space: OperatorSpace,
    strategy: str,
    rng: SplitMix64,
    weights: Optional[dict[str, float]] = None,
    counter: int = 0,
) -> RepairOperator:
    """uniform-random, weighted-random (user-supplied distribution over the
    space), or sequential (fixed space order, advancing per iteration)."""
    ops = space.operators
    if strategy == "uniform-random":
        return rng.choice(ops)
    if strategy == "weighted-random":
        if not weights:
            raise ConfigError("weighted-random operator selection without weights")
        missing = [op.name for op in ops if op.name not in weights]
        if missing:
            raise ConfigError(f"operator_weights missing entries for {missing}")
        values = [weights[op.name] for op in ops]
        total = sum(values)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"operator weights must sum to 1, got {total}")
        return ops[rng.weighted_index(values)]
    if strategy == "sequential":
        return ops[counter % len(ops)]
    raise ConfigError(f"unknown operator selection strategy {strategy!r}")


# -- the repair session -----------------------------------------------------------


@dataclass
class RepairOutcome:
    patches: list
    stats: SearchStats
    config: RunConfig
    solutions: list[ProgramVariant]
    session: "RepairSession" = None

    def report_dict(self) -> dict:
        return {
            "config": _jsonable_config(self.config),
            "seed": self.config.seed,
            "patches": [p.to_dict() for p in self.patches],
            "stats": self.stats.to_dict(),
        }


def _jsonable_config(config: RunConfig) -> dict:
    out = config.to_dict()
    return {k: out[k] for k in sorted(out)}


class RepairSession:
    """One repair run: project + suite + configuration, with all shared
    search state (caches, pools, rng streams, statistics)."""

    def __init__(self, project: SourceProject, suite: Sequence[TestCase], config: RunConfig):
        config.validate()
        self.project = project
        self.suite = list(suite)
        self.config = config
        self.types = cached_types(project)
        self.stats = SearchStats()
        self.rng = RngStreams(config.seed)
        self.space = operator_space(config.operator_space)
        self.cache = AttemptCache()
        self.solutions: list[ProgramVariant] = []
        self._variant_counter = 0
        self._exhausted_pairs: set[tuple[int, str]] = set()
        self._validated_signatures: dict[tuple, Optional[int]] = {}
        self._entry_forms: dict[tuple[int, str, str], set[str]] = {}
        self._pool: Optional[IngredientPool] = None
        self._similarity: Optional[FunctionSimilarity] = None
        self._name_model = None
        self._op_counter = 0
        self._start_time = 0.0

        matrix = run_suite(project, self.suite, config.step_budget)
        if matrix.total_failing == 0:
            raise NoFailingTests("no failing tests: nothing to repair")
        self.baseline = Baseline.from_matrix(matrix)
        self.baseline_sources = print_sources(project)

        ranked = suspiciousness(matrix, config.formula)
        self.suspicious = filter_suspicious(ranked, config.max_suspicious)
        self.points = create_modification_points(project, self.suspicious, config.granularity)

        self._scope = config.ingredient_scope or (
            "global" if config.operator_space == "r-expression" else "module"
        )
        self._ingredient_selection = config.ingredient_selection or "uniform"
        self._ingredient_transform = config.ingredient_transform or (
            "name-probability" if config.operator_space == "r-expression" else "none"
        )

    # -- lazy ingredient machinery ------------------------------------------

    def ingredient_pool(self) -> IngredientPool:
        if self._pool is None:
            self.stats.pool_builds += 1
            if self.config.operator_space == "r-expression":
                self._pool = mine_templates(self.project, self.types, self._scope)
            else:
                self._pool = build_pool(self.project, self._scope, "statement", self.types)
        return self._pool

    def similarity_index(self) -> FunctionSimilarity:
        if self._similarity is None:
            self._similarity = FunctionSimilarity(self.project)
        return self._similarity

    def name_model(self):
        if self._name_model is None:
            self._name_model = build_name_model(self.project)
        return self._name_model

    # -- transformation creation ----------------------------------------------

    def _mark_exhausted(self, point: ModificationPoint, op: RepairOperator) -> None:
        self._exhausted_pairs.add((point.node_id, op.name))

    def space_exhausted(self) -> bool:
        return len(self._exhausted_pairs) >= len(self.points) * len(self.space.operators)

    def create_transformation(
        self, point: ModificationPoint, op: RepairOperator
    ) -> Optional[Transformation]:
        node = self.project.node(point.node_id)
        if not op.applicable(self.project, node):
            self._mark_exhausted(point, op)
            self.stats.not_applicable += 1
            return None
        if not op.needs_ingredient:
            if not self.cache.check_and_add(point.node_id, op.name, ""):
                self.stats.duplicates += 1
                self._mark_exhausted(point, op)
                return None
            return Transformation(point, op, None)

        pool = self.ingredient_pool()
        ingredient = select_ingredient(
            pool,
            point,
            op.name,
            self._ingredient_selection,
            self.rng.ingredients,
            self.cache,
            similarity=self._similarity_if_needed(),
            name_model=self._name_model_if_needed(),
        )
        if ingredient is None:
            self._mark_exhausted(point, op)
            self.stats.exhausted_selections += 1
            return None
        candidates = transform_ingredient(
            ingredient,
            point.env,
            self._ingredient_transform,
            rng=self.rng.transform,
            name_model=self.name_model()
            if self._ingredient_transform in ("name-probability",)
            else None,
        )
        if not candidates:
            # untransformable here (or vanilla strategy with out-of-scope
            # variables): never try this entry again at this point/op
            self.cache.check_and_add(point.node_id, op.name, ingredient.printed)
            self.stats.not_applicable += 1
            return None

        chosen = None
        for cand in candidates:
            printed = print_tree(cand)
            self._note_entry_form(point, op, ingredient, printed)
            if self.cache.check_and_add(point.node_id, op.name, printed):
                chosen = (cand, printed)
                break
        self._maybe_seal_entry(point, op, ingredient)
        if chosen is None:
            if self._ingredient_transform != "random-var":
                self.cache.check_and_add(point.node_id, op.name, ingredient.printed)
            self.stats.duplicates += 1
            return None
        cand, printed = chosen
        return Transformation(
            point, op, cand, concrete_printed=printed, ingredient_printed=ingredient.printed
        )

    def _note_entry_form(self, point, op, ingredient: Ingredient, printed: str) -> None:
        key = (point.node_id, op.name, ingredient.printed)
        self._entry_forms.setdefault(key, set()).add(printed)

    def _maybe_seal_entry(self, point, op, ingredient: Ingredient) -> None:
        if self._ingredient_transform != "random-var":
            return
        key = (point.node_id, op.name, ingredient.printed)
        space = substitution_space_size(ingredient, point.env)
        if space and len(self._entry_forms.get(key, ())) >= space:
            self.cache.check_and_add(point.node_id, op.name, ingredient.printed)

    def _similarity_if_needed(self):
        if self._ingredient_selection == "similarity":
            return self.similarity_index()
        return None

    def _name_model_if_needed(self):
        if self._ingredient_selection == "name-probability":
            return self.name_model()
        return None

    # -- variants ----------------------------------------------------------------

    def new_variant(self, transformations, generation: int) -> ProgramVariant:
        self._variant_counter += 1
        return ProgramVariant(self._variant_counter, list(transformations), generation)

    def materialize(self, transformations) -> Optional[SourceProject]:
        """Apply transformations in order on a fresh clone; returns None
        when the result does not scope/type check."""
        copy = self.project.clone()
        for t in transformations:
            target = copy.nodes.get(t.point.node_id)
            if target is None or not t.operator.applicable(copy, target):
                continue
            ingredient = t.concrete.clone() if t.concrete is not None else None
            t.operator.mutate(copy, target, ingredient)
            copy.reindex()
        try:
            check_project(copy)
        except TypeCheckError:
            return None
        return copy

    def _validate(self, variant: ProgramVariant, iteration: int) -> Optional[int]:
        """Materialize + validate a variant; returns its fitness, or None
        when it was rejected by the scope/type gate.  A variant whose exact
        transformation sequence was already validated (possible via
        crossover recombination) reuses the recorded fitness."""
        signature = tuple(
            (t.point.node_id, t.operator.name, t.concrete_printed)
            for t in variant.transformations
        )
        if signature in self._validated_signatures:
            self.stats.duplicates += 1
            variant.fitness = self._validated_signatures[signature]
            return variant.fitness
        self.stats.variants_generated += 1
        for t in variant.transformations:
            self.stats.op_bucket(t.operator.name)["created"] += 1
        project = self.materialize(variant.transformations)
        if project is None:
            self.stats.rejected_typecheck += 1
            self._validated_signatures[signature] = None
            return None
        result = validate_variant(
            project, self.baseline, self.config.step_budget, jobs=self.config.jobs
        )
        self.stats.validated += 1
        self.stats.time_steps += result.steps
        for t in variant.transformations:
            self.stats.op_bucket(t.operator.name)["validated"] += 1
        variant.fitness = fitness(result)
        self._validated_signatures[signature] = variant.fitness
        if variant.fitness == 0:
            variant.discovery_order = len(self.solutions)
            variant.discovery_iteration = iteration
            self.solutions.append(variant)
            self.stats.solutions += 1
            for t in variant.transformations:
                self.stats.op_bucket(t.operator.name)["solutions"] += 1
            if self.stats.validations_at_first_patch is None:
                self.stats.validations_at_first_patch = self.stats.validated
                self.stats.iteration_at_first_patch = iteration
        return variant.fitness

    # -- stop conditions ------------------------------------------------------------

    def _should_stop(self) -> Optional[str]:
        if len(self.solutions) >= self.config.max_solutions:
            return "solutions"
        if self.stats.iterations >= self.config.max_iterations:
            return "iterations"
        if self.config.max_seconds is not None:
            if time.monotonic() - self._start_time >= self.config.max_seconds:
                return "wall-clock"
        return None

    # -- navigation -------------------------------------------------------------------

    def run(self) -> RepairOutcome:
        self._start_time = time.monotonic()
        if not self.points:
            self.stats.stop_reason = "no-search-space"
        else:
            navigation = self.config.navigation
            if navigation == "exhaustive":
                self._run_exhaustive()
            elif navigation == "selective":
                self._run_selective()
            else:
                self._run_evolutionary()
        refined = refine_patches(self)
        return RepairOutcome(refined.patches, self.stats, self.config, self.solutions, self)

    def _run_selective(self) -> None:
        while True:
            reason = self._should_stop()
            if reason:
                self.stats.stop_reason = reason
                return
            if self.space_exhausted():
                self.stats.stop_reason = "exhausted"
                return
            self.stats.iterations += 1
            iteration = self.stats.iterations
            chosen = select_points(
                self.points,
                self.config.point_selection,
                self.config.points_per_iteration,
                self.rng.points,
            )
            transformations = []
            for point in chosen:
                op = select_operator(
                    self.space,
                    self.config.operator_selection,
                    self.rng.operators,
                    weights=self.config.operator_weights,
                    counter=self._op_counter,
                )
                self._op_counter += 1
                t = self.create_transformation(point, op)
                if t is not None:
                    transformations.append(t)
            if not transformations:
                continue
            self._validate(self.new_variant(transformations, 0), iteration)

    def _exhaustive_candidates(self, point: ModificationPoint, op: RepairOperator):
        """Yield transformations for one (point, operator) pair in
        deterministic order."""
        if not op.needs_ingredient:
            t = self.create_transformation(point, op)
            if t is not None:
                yield t
            return
        node = self.project.node(point.node_id)
        if not op.applicable(self.project, node):
            self._mark_exhausted(point, op)
            self.stats.not_applicable += 1
            return
        pool = self.ingredient_pool()
        for entry in list(pool.entries(point.file, point.module)):
            candidates = transform_ingredient(
                entry,
                point.env,
                self._ingredient_transform,
                rng=self.rng.transform,
                name_model=self.name_model()
                if self._ingredient_transform == "name-probability"
                else None,
            )
            for cand in candidates:
                printed = print_tree(cand)
                if self.cache.check_and_add(point.node_id, op.name, printed):
                    yield Transformation(
                        point, op, cand,
                        concrete_printed=printed, ingredient_printed=entry.printed,
                    )
        self._mark_exhausted(point, op)

    def _run_exhaustive(self) -> None:
        ordered = sorted(self.points, key=lambda p: (-p.suspiciousness, p.node_id))
        for point in ordered:
            for op in self.space.operators:
                for t in self._exhaustive_candidates(point, op):
                    reason = self._should_stop()
                    if reason:
                        self.stats.stop_reason = reason
                        return
                    self.stats.iterations += 1
                    self._validate(self.new_variant([t], 0), self.stats.iterations)
        reason = self._should_stop()
        self.stats.stop_reason = reason if reason else "completed"

    def _run_evolutionary(self) -> None:
        size = self.config.population
        population = []
        for _ in range(size):
            variant = self.new_variant([], 0)
            variant.fitness = self.baseline.failing_count
            variant.dirty = False
            population.append(variant)

        while True:
            reason = self._should_stop()
            if reason:
                self.stats.stop_reason = reason
                return
            if self.space_exhausted():
                self.stats.stop_reason = "exhausted"
                return
            self.stats.iterations += 1
            generation = self.stats.iterations

            offspring = []
            produced_material = False
            for parent in sorted(population, key=lambda v: v.variant_id):
                child = self.new_variant(parent.transformations, generation)
                child.fitness = parent.fitness
                child.dirty = False
                if self.rng.points.random() < self.config.p_mut:
                    point = select_points(
                        self.points, self.config.point_selection, 1, self.rng.points
                    )[0]
                    op = select_operator(
                        self.space,
                        self.config.operator_selection,
                        self.rng.operators,
                        weights=self.config.operator_weights,
                        counter=self._op_counter,
                    )
                    self._op_counter += 1
                    t = self.create_transformation(point, op)
                    if t is not None:
                        child.transformations.append(t)
                        child.dirty = True
                        produced_material = True
                        if parent.transformations:
                            # a new transformation is tried at most once per
                            # run, so also validate it on the pristine program
                            offspring.append(self.new_variant([t], generation))
                offspring.append(child)

            # crossover yields extra children so that every mutated offspring
            # is still validated with exactly its own transformation list
            crossed = []
            order = list(range(len(offspring)))
            self.rng.crossover.shuffle(order)
            for k in range(0, len(order) - 1, 2):
                if self.rng.crossover.random() >= self.config.p_cross:
                    continue
                a, b = offspring[order[k]], offspring[order[k + 1]]
                if not a.transformations and not b.transformations:
                    continue
                cut_a = self.rng.crossover.below(len(a.transformations) + 1)
                cut_b = self.rng.crossover.below(len(b.transformations) + 1)
                for mixed in (
                    a.transformations[:cut_a] + b.transformations[cut_b:],
                    b.transformations[:cut_b] + a.transformations[cut_a:],
                ):
                    if mixed and mixed != a.transformations and mixed != b.transformations:
                        crossed.append(self.new_variant(mixed, generation))
            offspring.extend(crossed)

            for child in offspring:
                if not child.dirty:
                    continue
                reason = self._should_stop()
                if reason:
                    self.stats.stop_reason = reason
                    return
                if self._validate(child, generation) is None:
                    child.fitness = None  # scope-rejected offspring dies out

            pool = population + offspring
            pool.sort(
                key=lambda v: (
                    v.fitness if v.fitness is not None else float("inf"),
                    v.generation_born,
                    v.variant_id,
                )
            )
            population = pool[:size]

            if not produced_material and self.space_exhausted():
                self.stats.stop_reason = "exhausted"
                return


def navigate(project: SourceProject, suite: Sequence[TestCase], config: RunConfig) -> RepairOutcome:
    """Run a full repair search and return refined patches plus statistics."""
    return RepairSession(project, suite, config).run()
