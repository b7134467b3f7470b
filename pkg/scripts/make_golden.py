#!/usr/bin/env python3
"""Regenerate the golden template-stage reports in tests/golden/.

Run after intentional template or fixture changes, then review the diff.
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from ctireport.graph import graph_from_scope  # noqa: E402
from ctireport.kb import KnowledgeBase  # noqa: E402
from ctireport.pipeline import generate_report  # noqa: E402
from ctireport.service import known_entity_names  # noqa: E402
from ctireport.stix import load_bundle_file  # noqa: E402


def main() -> None:
    index = json.loads((ROOT / "fixtures" / "index.json").read_text())
    golden = ROOT / "tests" / "golden"
    golden.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        kb = KnowledgeBase(tmp)
        for entry in index["reports"]:
            kb.ingest(load_bundle_file(
                ROOT / "fixtures" / "bundles" / entry["file"],
                source_label=entry["name"]))
        kb.ingest(load_bundle_file(
            ROOT / "fixtures" / "bundles" / index["expansion_bundle"],
            source_label="expansion"))
        names = known_entity_names(kb)
        for entry in index["reports"]:
            graph = graph_from_scope(kb, entry["root_ids"])
            result = generate_report(graph, entry["report_type"], kb=kb,
                                     focus_id=entry["focus_id"],
                                     known_names=names)
            (golden / f"{entry['name']}.txt").write_text(
                result.template_text, encoding="utf-8")
    print(f"wrote {len(index['reports'])} golden files to {golden}")


if __name__ == "__main__":
    main()
