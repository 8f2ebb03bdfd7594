import json
from pathlib import Path

import pytest

from minirepair.cli import load_project_dir

REPO = Path(__file__).resolve().parent.parent
CORPUS = REPO / "corpus"


def corpus_bug_names():
    return sorted(p.name for p in CORPUS.iterdir() if (p / "tests.json").is_file())


def load_bug(name: str):
    """(project, suite, meta) for one corpus bug."""
    return load_project_dir(CORPUS / name)


def bug_meta(name: str) -> dict:
    return json.loads((CORPUS / name / "bug.json").read_text())


@pytest.fixture(scope="session")
def corpus_names():
    names = corpus_bug_names()
    assert len(names) >= 20
    return names
