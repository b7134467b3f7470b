"""Knowledge base persistence, upsert merging, and the event log."""

import pytest

from ctireport.kb import KnowledgeBase
from ctireport.stix import load_bundle_file

from .conftest import BUNDLES


@pytest.fixture()
def fresh_kb(tmp_path, index):
    kb = KnowledgeBase(tmp_path / "kb")
    entry = next(e for e in index["reports"] if e["name"] == "overview-botnet")
    kb.ingest(load_bundle_file(BUNDLES / entry["file"], source_label="first"))
    return kb, entry


def test_layout_on_disk(fresh_kb):
    kb, _ = fresh_kb
    assert kb.log_path.name == "log.jsonl"
    assert kb.meta_path.name == "meta.json"
    assert kb.log_path.exists() and kb.meta_path.exists()


def test_reload_preserves_state(fresh_kb, index):
    kb, entry = fresh_kb
    reloaded = KnowledgeBase(kb.root)
    assert reloaded.entity_ids() == kb.entity_ids()
    asprox = reloaded.get_entity(index["asprox_id"])
    assert asprox.object.name == "Asprox"
    assert asprox.sources == ("first",)


def test_reingest_is_idempotent(fresh_kb):
    kb, entry = fresh_kb
    before_ids = kb.entity_ids()
    before_events = len(kb.history(before_ids[0]))
    kb.ingest(load_bundle_file(BUNDLES / entry["file"], source_label="first"))
    assert kb.entity_ids() == before_ids
    assert len(kb.history(before_ids[0])) == before_events


def test_reingest_merges_sources(fresh_kb, index):
    kb, entry = fresh_kb
    kb.ingest(load_bundle_file(BUNDLES / entry["file"], source_label="second"))
    assert kb.get_entity(index["asprox_id"]).sources == ("first", "second")


def test_get_entity_hides_edges(fresh_kb):
    kb, entry = fresh_kb
    bundle = load_bundle_file(BUNDLES / entry["file"])
    rel_id = next(o.id for o in bundle.objects if o.is_edge)
    assert kb.get_entity(rel_id) is None


def test_neighbors_ordering_and_direction(fresh_kb, index):
    kb, _ = fresh_kb
    found = kb.neighbors(index["asprox_id"])
    keys = [(rel, rec.object.id) for rel, _, rec in found]
    assert keys == sorted(keys)
    assert all(direction in ("outgoing", "incoming")
               for _, direction, _ in found)


def test_neighbors_unknown_entity_raises(fresh_kb):
    kb, _ = fresh_kb
    with pytest.raises(KeyError):
        kb.neighbors("malware--nope")


def test_history_event_kinds(kb, index):
    """The shared KB holds created/modified/sighted/related events."""
    kinds = set()
    for entity_id in kb.entity_ids():
        kinds.update(e.kind for e in kb.history(entity_id))
    assert kinds == {"created", "modified", "sighted", "related"}


def test_history_details_use_display_names(kb, index):
    entry = next(e for e in index["reports"] if e["name"] == "timeline-gale")
    details = [e.detail for i in entry["root_ids"] for e in kb.history(i)]
    assert "Brittle Lantern was sighted by Acme Utilities SOC" in details
    assert not any("--" in d for d in details), "raw ids leaked into details"


def test_query_by_type(kb):
    vulns = kb.query_by_type("vulnerability")
    assert vulns and all(r.object.type == "vulnerability" for r in vulns)
    assert [r.object.id for r in vulns] == sorted(r.object.id for r in vulns)


def test_type_counts(kb):
    counts = kb.type_counts()
    assert counts["vulnerability"] == 7
    assert counts["relationship"] > 0
