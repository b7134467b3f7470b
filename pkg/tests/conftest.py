"""Shared fixtures: a knowledge base populated from the bundled graphs.

The KB and the generated reports are session-scoped so the whole suite
(acceptance runs included) stays well under the runtime budget.
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from ctireport.graph import graph_from_scope
from ctireport.kb import KnowledgeBase
from ctireport.pipeline import GenerationResult, generate_report
from ctireport.service import known_entity_names
from ctireport.stix import load_bundle_file

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
BUNDLES = FIXTURES / "bundles"
TRANSCRIPTS = FIXTURES / "transcripts"
GOLDEN = Path(__file__).resolve().parent / "golden"
CORPUS = ROOT / "data" / "fluency.txt"


@pytest.fixture(scope="session")
def index() -> dict:
    return json.loads((FIXTURES / "index.json").read_text())


@pytest.fixture(scope="session")
def kb(tmp_path_factory, index) -> KnowledgeBase:
    base = KnowledgeBase(tmp_path_factory.mktemp("kb"))
    for entry in index["reports"]:
        base.ingest(load_bundle_file(BUNDLES / entry["file"],
                                     source_label=entry["name"]))
    base.ingest(load_bundle_file(BUNDLES / index["expansion_bundle"],
                                 source_label="expansion"))
    return base


@pytest.fixture(scope="session")
def known_names(kb) -> tuple[str, ...]:
    return known_entity_names(kb)


@pytest.fixture(scope="session")
def reports(kb, index, known_names) -> dict[str, GenerationResult]:
    """Template-stage generation results for all 12 fixture reports."""
    out: dict[str, GenerationResult] = {}
    for entry in index["reports"]:
        graph = graph_from_scope(kb, entry["root_ids"])
        out[entry["name"]] = generate_report(
            graph, entry["report_type"], kb=kb, focus_id=entry["focus_id"],
            known_names=known_names)
    return out
