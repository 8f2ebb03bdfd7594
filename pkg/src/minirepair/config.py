"""Run configuration: extension-point choices, budgets, and file parsing.

A configuration names one component per extension point (granularity,
navigation, point/operator selection, operator space, ingredient scope/
selection/transformation, fault-localization formula) plus the search
budgets.  Presets fill these in; explicit config keys and CLI flags
override preset values, in that order.

The config file format is a flat `key = value` file: one pair per line,
`#` starts a comment, booleans are `true`/`false`, everything else is an
int, float, or bare string.  See docs/config.md.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path


class ConfigError(Exception):
    pass


NAVIGATIONS = ("exhaustive", "selective", "evolutionary")
POINT_SELECTIONS = ("uniform-random", "weighted-random", "sequential")
OPERATOR_SELECTIONS = ("uniform-random", "weighted-random", "sequential")
GRANULARITIES = ("statement", "expression", "logical-relational")
OPERATOR_SPACES = ("irr-statements", "suppression", "relational-logical", "r-expression")
SCOPES = ("file", "module", "global")
INGREDIENT_SELECTIONS = ("uniform", "similarity", "name-probability")
INGREDIENT_TRANSFORMS = ("none", "random-var", "name-probability", "name-similarity")
FORMULAS = ("ochiai", "tarantula")


@dataclass
class RunConfig:
    mode: str = "custom"
    granularity: str = "statement"
    navigation: str = "selective"
    point_selection: str = "weighted-random"
    operator_space: str = "irr-statements"
    operator_selection: str = "uniform-random"
    operator_weights: dict[str, float] | None = None
    ingredient_scope: str | None = None
    ingredient_selection: str | None = None
    ingredient_transform: str | None = None
    formula: str = "ochiai"
    max_suspicious: int = 100
    seed: int = 1
    max_solutions: int = 1
    max_iterations: int = 2000
    max_seconds: float | None = None
    population: int = 10
    p_mut: float = 1.0
    p_cross: float = 0.25
    points_per_iteration: int = 1
    step_budget: int = 1_000_000
    jobs: int = 1

    def validate(self) -> None:
        checks = [
            ("navigation", self.navigation, NAVIGATIONS),
            ("granularity", self.granularity, GRANULARITIES),
            ("point_selection", self.point_selection, POINT_SELECTIONS),
            ("operator_space", self.operator_space, OPERATOR_SPACES),
            ("operator_selection", self.operator_selection, OPERATOR_SELECTIONS),
            ("formula", self.formula, FORMULAS),
        ]
        optional = [
            ("ingredient_scope", self.ingredient_scope, SCOPES),
            ("ingredient_selection", self.ingredient_selection, INGREDIENT_SELECTIONS),
            ("ingredient_transform", self.ingredient_transform, INGREDIENT_TRANSFORMS),
        ]
        for name, value, allowed in checks:
            if value not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {value!r}")
        for name, value, allowed in optional:
            if value is not None and value not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {value!r}")
        for name, value in [
            ("max_suspicious", self.max_suspicious),
            ("max_solutions", self.max_solutions),
            ("population", self.population),
            ("points_per_iteration", self.points_per_iteration),
            ("step_budget", self.step_budget),
            ("jobs", self.jobs),
        ]:
            if value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be >= 0")
        if self.max_seconds is not None and self.max_seconds < 0:
            raise ConfigError("max_seconds must be >= 0")
        if not 0.0 <= self.p_mut <= 1.0 or not 0.0 <= self.p_cross <= 1.0:
            raise ConfigError("p_mut and p_cross must be in [0, 1]")
        if self.operator_selection == "weighted-random" and not self.operator_weights:
            raise ConfigError("weighted-random operator selection needs operator_weights")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            out[f.name] = getattr(self, f.name)
        return out

    def needs_ingredients(self) -> bool:
        return self.operator_space in ("irr-statements", "r-expression")


def _coerce(raw: str):
    text = raw.strip()
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_file(path: str | Path) -> dict:
    """Flat key = value pairs; later keys override earlier ones."""
    values: dict = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        values[key.strip()] = _coerce(raw)
    return values


_FIELD_NAMES = {f.name for f in fields(RunConfig)}


def apply_overrides(config: RunConfig, overrides: dict) -> RunConfig:
    for key, value in overrides.items():
        if key not in _FIELD_NAMES:
            raise ConfigError(f"unknown config key {key!r}")
        if value is not None:
            setattr(config, key, value)
    return config
