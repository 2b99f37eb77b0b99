import json
from pathlib import Path

import pytest

from seqdep import parse_document

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def demo_text() -> str:
    return (FIXTURES / "demo.esd").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def demo_document(demo_text):
    return parse_document(demo_text, source_path=str(FIXTURES / "demo.esd"))


@pytest.fixture(scope="session")
def demo_usecase(demo_document):
    return demo_document.usecases[0]


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return FIXTURES / "corpus"


@pytest.fixture(scope="session")
def corpus_files(corpus_dir):
    """Shipped corpus entries: (document, gold payload, perturbed payload)."""
    entries = []
    for esd in sorted(corpus_dir.glob("*.esd")):
        document = parse_document(esd.read_text(encoding="utf-8"), source_path=str(esd))
        gold = json.loads((corpus_dir / f"{esd.stem}.gold.json").read_text(encoding="utf-8"))
        pred = json.loads((corpus_dir / f"{esd.stem}.pred.json").read_text(encoding="utf-8"))
        entries.append((document, gold, pred))
    assert entries, "shipped corpus is missing"
    return entries
