"""Ingredient pools, selection strategies, and ingredient transformation.

An ingredient is a code fragment reused from the program under repair.
Pools are built per scope (file, module, global) and deduplicated by
printed form.  Selection can be uniform, guided by donor-function
similarity (token-multiset cosine), or weighted by variable-name
frequency.  Transformation handles out-of-scope variables: discard the
ingredient (vanilla behavior), substitute random same-typed in-scope
variables, or enumerate substitutions ranked by a name-frequency or
name-similarity score.

Expression templates are ingredients whose variable references have been
abstracted to typed placeholders (`a + b` becomes `_int_0 + _int_1`);
since placeholders are never in scope, template instantiation is exactly
the name-probability transformation applied to a template ingredient.
"""

from __future__ import annotations

import itertools
import math
import threading
from collections import Counter
from dataclasses import dataclass, field

from minirepair.lang.ast import EXPRESSION_KINDS, Node, SourceProject, Type, pre_order
from minirepair.lang.lexer import tokenize
from minirepair.lang.printer import print_tree
from minirepair.lang.types import ProjectTypes, free_variables
from minirepair.rng import SplitMix64

SCOPES = ("file", "module", "global")
SELECTION_STRATEGIES = ("uniform", "similarity", "name-probability")
TRANSFORM_STRATEGIES = ("none", "random-var", "name-probability", "name-similarity")

# non-atomic expression kinds: the ones worth mining templates from and
# targeting as expression-granularity modification points
COMPOSITE_EXPRESSION_KINDS = frozenset({"binary-op", "unary-op", "call", "index"})

_GLOBAL_KEY = "*"

# bound on enumerated placeholder/variable assignments per ingredient
MAX_INSTANTIATIONS = 200


@dataclass(frozen=True)
class Ingredient:
    printed: str
    subtree: Node  # attached to the original project; clone before splicing
    granularity: str  # statement | expression | template
    node_id: int
    origin_file: str
    origin_module: str
    origin_function: str
    free_vars: frozenset[tuple[str, Type]]


@dataclass
class IngredientPool:
    scope: str
    granularity: str
    entries_by_key: dict[str, list[Ingredient]] = field(default_factory=dict)

    def scope_key(self, file_path: str, module: str) -> str:
        if self.scope == "file":
            return file_path
        if self.scope == "module":
            return module
        return _GLOBAL_KEY

    def entries(self, file_path: str, module: str) -> list[Ingredient]:
        return self.entries_by_key.get(self.scope_key(file_path, module), [])

    def size(self) -> int:
        return sum(len(v) for v in self.entries_by_key.values())


def _harvest_nodes(project: SourceProject, granularity: str):
    for sf in project.files:
        for fn in sf.functions:
            for node in pre_order(fn):
                if granularity == "statement" and node.is_statement():
                    yield sf, fn, node
                elif granularity == "expression" and node.kind in EXPRESSION_KINDS:
                    yield sf, fn, node


def _dedup_insert(bucket: list[Ingredient], seen: set[str], ing: Ingredient) -> None:
    if ing.printed not in seen:
        seen.add(ing.printed)
        bucket.append(ing)


def build_pool(
    project: SourceProject,
    scope: str,
    granularity: str,
    types: ProjectTypes,
) -> IngredientPool:
    """Collect every subtree of the granularity, grouped by scope key and
    deduplicated by printed form (first occurrence in node-id order wins)."""
    if scope not in SCOPES:
        raise ValueError(f"unknown ingredient scope {scope!r}")
    pool = IngredientPool(scope, granularity)
    seen: dict[str, set[str]] = {}
    for sf, fn, node in _harvest_nodes(project, granularity):
        ing = Ingredient(
            printed=print_tree(node),
            subtree=node,
            granularity=granularity,
            node_id=node.node_id,
            origin_file=sf.path,
            origin_module=sf.module,
            origin_function=fn.name,
            free_vars=free_variables(node, types),
        )
        key = pool.scope_key(sf.path, sf.module)
        bucket = pool.entries_by_key.setdefault(key, [])
        _dedup_insert(bucket, seen.setdefault(key, set()), ing)
    return pool


# -- templates ---------------------------------------------------------------


def abstract_expression(node: Node, types: ProjectTypes) -> tuple[Node, list[tuple[str, Type]]] | None:
    """Clone an expression with each variable reference replaced by a typed
    placeholder (`_int_0`, `_string_1`, ...).  Distinct source variables map
    to distinct placeholders in first-occurrence order.  Returns None when
    some variable's type is unknown."""
    mapping: dict[str, tuple[str, Type]] = {}

    def walk(n: Node) -> Node | None:
        if n.kind == "var-ref":
            if n.name not in mapping:
                ty = types.type_of(n.node_id)
                if ty is None:
                    return None
                label = str(ty).replace("[", "arr_").replace("]", "")
                mapping[n.name] = (f"_{label}_{len(mapping)}", ty)
            return Node("var-ref", name=mapping[n.name][0])
        clone = n.clone()
        clone.children = []
        for child in n.children:
            sub = walk(child)
            if sub is None:
                return None
            clone.children.append(sub)
        return clone

    abstracted = walk(node)
    if abstracted is None:
        return None
    return abstracted, [mapping[name] for name in mapping]


def mine_templates(project: SourceProject, types: ProjectTypes, scope: str = "global") -> IngredientPool:
    """Template pool mined from every composite expression in the project."""
    pool = IngredientPool(scope, "template")
    seen: dict[str, set[str]] = {}
    for sf, fn, node in _harvest_nodes(project, "expression"):
        if node.kind not in COMPOSITE_EXPRESSION_KINDS:
            continue
        result = abstract_expression(node, types)
        if result is None:
            continue
        tree, placeholders = result
        ing = Ingredient(
            printed=print_tree(tree),
            subtree=tree,
            granularity="template",
            node_id=node.node_id,
            origin_file=sf.path,
            origin_module=sf.module,
            origin_function=fn.name,
            free_vars=frozenset(placeholders),
        )
        key = pool.scope_key(sf.path, sf.module)
        bucket = pool.entries_by_key.setdefault(key, [])
        _dedup_insert(bucket, seen.setdefault(key, set()), ing)
    return pool


# -- name statistics and similarity -------------------------------------------


@dataclass
class NameFrequencyModel:
    counts: dict[str, int]

    def frequency(self, name: str) -> int:
        return self.counts.get(name, 1)

    def score(self, names) -> float:
        product = 1.0
        for name in names:
            product *= self.frequency(name)
        return product


def build_name_model(project: SourceProject, file_path: str | None = None) -> NameFrequencyModel:
    """Occurrence counts of variable names (declarations, parameters and
    references), project-wide or restricted to one file."""
    counts: Counter[str] = Counter()
    for sf in project.files:
        if file_path is not None and sf.path != file_path:
            continue
        for fn in sf.functions:
            for name, _ in fn.params:
                counts[name] += 1
            for node in pre_order(fn):
                if node.kind == "var-ref" or node.kind == "var-decl":
                    counts[node.name] += 1
    return NameFrequencyModel(dict(counts))


def token_multiset(text: str) -> Counter:
    return Counter(tok.text for tok in tokenize("<tokens>", text) if tok.kind != "eof")


def cosine_similarity(a: Counter, b: Counter) -> float:
    dot = sum(count * b.get(token, 0) for token, count in a.items())
    if dot == 0:
        return 0.0
    norm_a = math.sqrt(sum(c * c for c in a.values()))
    norm_b = math.sqrt(sum(c * c for c in b.values()))
    return dot / (norm_a * norm_b)


def lcs_length(a: str, b: str) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for ch_a in a:
        cur = [0]
        for j, ch_b in enumerate(b, start=1):
            if ch_a == ch_b:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


class FunctionSimilarity:
    """Token-multiset cosine similarity between the functions of a project
    (the lexical stand-in for learned method similarity)."""

    def __init__(self, project: SourceProject):
        self._tokens = {}
        for sf in project.files:
            for fn in sf.functions:
                tokens = token_multiset(print_tree(fn))
                # drop the defining occurrence of the name: two functions
                # that differ only in name are maximally similar
                tokens[fn.name] -= 1
                if tokens[fn.name] <= 0:
                    del tokens[fn.name]
                self._tokens[fn.name] = tokens

    def similarity(self, fn_a: str, fn_b: str) -> float:
        a = self._tokens.get(fn_a)
        b = self._tokens.get(fn_b)
        if a is None or b is None:
            return 0.0
        return cosine_similarity(a, b)


# -- attempt cache -------------------------------------------------------------


class AttemptCache:
    """Set of (point, operator, printed form) triples already attempted.
    check_and_add is atomic so validation workers can share it."""

    def __init__(self):
        self._seen: set[tuple[int, str, str]] = set()
        self._lock = threading.Lock()

    def contains(self, point_id: int, op_name: str, printed: str) -> bool:
        return (point_id, op_name, printed) in self._seen

    def check_and_add(self, point_id: int, op_name: str, printed: str) -> bool:
        """Record the triple; returns False when it was already present."""
        key = (point_id, op_name, printed)
        with self._lock:
            if key in self._seen:
                return False
            self._seen.add(key)
            return True

    def __len__(self) -> int:
        return len(self._seen)


# -- selection -----------------------------------------------------------------


def select_ingredient(
    pool: IngredientPool,
    point,
    op_name: str,
    strategy: str,
    rng: SplitMix64,
    cache: AttemptCache,
    similarity: FunctionSimilarity | None = None,
    name_model: NameFrequencyModel | None = None,
) -> Ingredient | None:
    """Pick an untried ingredient for (point, operator), or None when the
    pool for the point's scope key is exhausted.

    `point` must expose file, module, function and node_id attributes.
    An entry counts as tried once its own printed form has been attempted
    at this (point, operator); entries whose transformations still have
    untried concrete instantiations remain selectable.
    """
    entries = pool.entries(point.file, point.module)
    candidates = [e for e in entries if not cache.contains(point.node_id, op_name, e.printed)]
    if not candidates:
        return None
    if strategy == "uniform":
        return rng.choice(candidates)
    if strategy == "similarity":
        if similarity is None:
            raise ValueError("similarity selection needs a FunctionSimilarity index")
        ranked = sorted(
            candidates,
            key=lambda e: (
                -similarity.similarity(point.function, e.origin_function),
                e.origin_function,
                e.node_id,
            ),
        )
        return ranked[0]
    if strategy == "name-probability":
        if name_model is None:
            raise ValueError("name-probability selection needs a NameFrequencyModel")
        weights = []
        for e in candidates:
            names = [n.name for n in pre_order(e.subtree) if n.kind == "var-ref"]
            weights.append(name_model.score(names))
        return candidates[rng.weighted_index(weights)]
    raise ValueError(f"unknown ingredient selection strategy {strategy!r}")


# -- transformation --------------------------------------------------------------


def substitute_variables(node: Node, mapping: dict[str, str]) -> Node:
    """Clone with free occurrences of mapped variables renamed; occurrences
    bound by a var-decl inside the subtree are left alone."""

    def walk(n: Node, bound: frozenset[str]) -> Node:
        if n.kind == "var-ref":
            clone = n.clone()
            if n.name in mapping and n.name not in bound:
                clone.name = mapping[n.name]
            return clone
        clone = n.clone()
        clone.children = []
        if n.kind == "block":
            names: set[str] = set()
            for stmt in n.children:
                inner = bound | names
                if stmt.kind == "var-decl":
                    decl = stmt.clone()
                    decl.children = [walk(stmt.children[0], frozenset(inner))]
                    clone.children.append(decl)
                    names.add(stmt.name)
                else:
                    clone.children.append(walk(stmt, frozenset(inner)))
            return clone
        for child in n.children:
            clone.children.append(walk(child, bound))
        return clone

    return walk(node, frozenset())


def out_of_scope_vars(ingredient: Ingredient, env: dict[str, Type]) -> list[tuple[str, Type]]:
    """Free variables with no same-named, same-typed binding at the point."""
    return sorted((name, ty) for name, ty in ingredient.free_vars if env.get(name) != ty)


def _candidate_names(env: dict[str, Type], ty: Type) -> list[str]:
    return sorted(name for name, env_ty in env.items() if env_ty == ty)


def substitution_space_size(ingredient: Ingredient, env: dict[str, Type]) -> int:
    """Number of distinct full substitutions for the out-of-scope variables
    (0 when some variable's type has no in-scope counterpart)."""
    size = 1
    for _, ty in out_of_scope_vars(ingredient, env):
        size *= len(_candidate_names(env, ty))
    return size


def _ranked_assignments(
    out_vars: list[tuple[str, Type]],
    env: dict[str, Type],
    score_fn,
) -> list[dict[str, str]]:
    pools = [_candidate_names(env, ty) for _, ty in out_vars]
    if any(not p for p in pools):
        return []
    combos = []
    for combo in itertools.product(*pools):
        combos.append(combo)
        if len(combos) >= MAX_INSTANTIATIONS:
            break
    combos.sort(key=lambda names: (-score_fn(out_vars, names), names))
    return [dict(zip((name for name, _ in out_vars), combo)) for combo in combos]


def transform_ingredient(
    ingredient: Ingredient,
    env: dict[str, Type],
    strategy: str,
    rng: SplitMix64 | None = None,
    name_model: NameFrequencyModel | None = None,
) -> list[Node]:
    """Concrete subtrees usable at a point whose scope is `env`.

    none          : the ingredient itself, or nothing if any free variable
                    is out of scope (it is discarded, never adapted)
    random-var    : one clone with every out-of-scope variable replaced by
                    a uniformly drawn same-typed in-scope variable
    name-probability / name-similarity
                  : all substitutions (bounded), ranked by descending
                    name-frequency product / name-LCS score, ties broken
                    by the substituted name tuple
    """
    out_vars = out_of_scope_vars(ingredient, env)
    if strategy == "none":
        return [] if out_vars else [ingredient.subtree.clone()]
    if not out_vars:
        return [ingredient.subtree.clone()]

    if strategy == "random-var":
        if rng is None:
            raise ValueError("random-var transformation needs an rng stream")
        mapping = {}
        for name, ty in out_vars:
            candidates = _candidate_names(env, ty)
            if not candidates:
                return []
            mapping[name] = rng.choice(candidates)
        return [substitute_variables(ingredient.subtree, mapping)]

    if strategy == "name-probability":
        if name_model is None:
            raise ValueError("name-probability transformation needs a NameFrequencyModel")
        score = lambda out, names: name_model.score(names)
    elif strategy == "name-similarity":
        score = lambda out, names: math.prod(
            lcs_length(orig, new) + 1 for (orig, _), new in zip(out, names)
        )
    else:
        raise ValueError(f"unknown ingredient transformation strategy {strategy!r}")

    assignments = _ranked_assignments(out_vars, env, score)
    return [substitute_variables(ingredient.subtree, m) for m in assignments]


def instantiate_template(
    template: Ingredient,
    env: dict[str, Type],
    name_model: NameFrequencyModel,
) -> list[Node]:
    """Concrete expressions for a mined template, ranked by the frequency
    of the variable names filling its placeholders."""
    return transform_ingredient(template, env, "name-probability", name_model=name_model)
