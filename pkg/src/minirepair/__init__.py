"""minirepair: test-suite-driven generate-and-validate repair for MiniLang.

The package turns a buggy MiniLang project plus a failing test suite into
candidate patches: spectrum-based fault localization ranks suspicious
statements, repair operators (statement insertion/replacement/removal,
operator mutation, suppression, expression replacement) generate program
variants, and the suite validates them.  Six preset approach
configurations are provided, all driven by one seeded deterministic
search core.
"""

from minirepair.config import RunConfig
from minirepair.engine import RepairSession, navigate
from minirepair.faultloc import TestCase, load_suite, run_suite, suspiciousness
from minirepair.lang import execute, parse_project
from minirepair.presets import PRESET_NAMES, config_from_preset, preset

__version__ = "0.1.0"

__all__ = [
    "PRESET_NAMES",
    "RepairSession",
    "RunConfig",
    "TestCase",
    "config_from_preset",
    "execute",
    "load_suite",
    "navigate",
    "parse_project",
    "preset",
    "run_suite",
    "suspiciousness",
    "__version__",
]
